#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "degctrl/evolve.hpp"

namespace degctrl {

/// Shortest-round-trip decimal formatting; the one numeric format every
/// output file uses, so reruns are byte-identical.
std::string format_double(double v);

/// CSV with deterministic body. Rows are flushed in insertion order.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add_row(const std::vector<double>& values);
    void add_row_mixed(const std::vector<std::string>& values);
    void write(const std::filesystem::path& path) const;
    std::string body() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

/// Trajectory file: header "nodes N steps M dt <dt>", then one line per step
/// with the nodal values.
void write_trajectory(const std::filesystem::path& path, const SpaceTimeField& field);
SpaceTimeField read_trajectory(const std::filesystem::path& path);

/// Per-step norms (t, L2 norm, weighted H1 norm) for plotting.
void write_norm_series(const std::filesystem::path& path, const System& sys,
                       const SpaceTimeField& field);

std::uint64_t fnv1a64(const std::string& data);

/// Records every artifact of a run: name, FNV-1a hash, size. Timestamps and
/// wall-clock timings live only here, never in the CSV bodies.
class Manifest {
public:
    void record(const std::filesystem::path& file);
    void note(const std::string& key, const std::string& value);
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> lines_;
    std::vector<std::string> notes_;
};

}  // namespace degctrl
