#include "degctrl/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "degctrl/errors.hpp"

namespace degctrl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw ValidationError("CsvWriter: row width mismatch");
    std::string line;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) line += ",";
        line += format_double(values[i]);
    }
    rows_.push_back(std::move(line));
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& values) {
    if (values.size() != columns_.size())
        throw ValidationError("CsvWriter: row width mismatch");
    std::string line;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) line += ",";
        line += values[i];
    }
    rows_.push_back(std::move(line));
}

std::string CsvWriter::body() const {
    std::string out;
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ",";
        out += columns_[i];
    }
    out += "\n";
    for (const auto& r : rows_) {
        out += r;
        out += "\n";
    }
    return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw ValidationError("CsvWriter: cannot open " + path.string());
    f << body();
}

void write_trajectory(const std::filesystem::path& path, const SpaceTimeField& field) {
    std::ofstream f(path);
    if (!f) throw ValidationError("write_trajectory: cannot open " + path.string());
    f << "nodes " << field.nodes() << " steps " << field.steps() << " dt "
      << format_double(field.dt) << "\n";
    for (int n = 0; n <= field.steps(); ++n) {
        for (int v = 0; v < field.nodes(); ++v) {
            if (v) f << " ";
            f << format_double(field.values(v, n));
        }
        f << "\n";
    }
}

SpaceTimeField read_trajectory(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("read_trajectory: cannot open " + path.string());
    std::string kw1, kw2, kw3;
    int nodes = 0, steps = 0;
    double dt = 0.0;
    f >> kw1 >> nodes >> kw2 >> steps >> kw3 >> dt;
    if (kw1 != "nodes" || kw2 != "steps" || kw3 != "dt" || nodes <= 0 || steps < 0)
        throw ValidationError("read_trajectory: malformed header");
    SpaceTimeField field(nodes, steps, dt);
    for (int n = 0; n <= steps; ++n)
        for (int v = 0; v < nodes; ++v) f >> field.values(v, n);
    if (!f) throw ValidationError("read_trajectory: truncated file");
    return field;
}

void write_norm_series(const std::filesystem::path& path, const System& sys,
                       const SpaceTimeField& field) {
    CsvWriter csv({"t", "l2_norm", "weighted_h1_norm"});
    for (int n = 0; n <= field.steps(); ++n) {
        const Vector v = field.values.col(n);
        const double l2 = std::sqrt(sys.dot_mass(v, v));
        const double h1 = weighted_h1_norm(v, sys.stiffness);
        csv.add_row({n * field.dt, l2, h1});
    }
    csv.write(path);
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void Manifest::record(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw ValidationError("Manifest: cannot read " + file.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a64(data));
    lines_.push_back(file.filename().string() + " fnv1a64:" + hash + " bytes:" +
                     std::to_string(data.size()));
}

void Manifest::note(const std::string& key, const std::string& value) {
    notes_.push_back("# " + key + ": " + value);
}

void Manifest::write(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw ValidationError("Manifest: cannot open " + path.string());
    const auto now = std::chrono::system_clock::now();
    f << "# generated_unix_time: "
      << std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count() << "\n";
    for (const auto& n : notes_) f << n << "\n";
    for (const auto& l : lines_) f << l << "\n";
}

}  // namespace degctrl
