#include "degctrl/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

const std::set<std::string> kKnownKeys = {
    "case", "stages", "seed", "out_dir", "threads",
    "domain", "rect_x0_length", "rect_x1_length", "rect_y0_length", "rect_y1_length",
    "disk_center_x_length", "disk_center_y_length", "disk_radius_length",
    "mesh_h_target_length", "mesh_grading_exponent",
    "alpha", "coeff_matrix", "coeff_a11", "coeff_a12", "coeff_a22",
    "omega_shape", "omega_center_x_length", "omega_center_y_length", "omega_radius_length",
    "omega_box_x0_length", "omega_box_x1_length", "omega_box_y0_length", "omega_box_y1_length",
    "omega0_shape", "omega0_center_x_length", "omega0_center_y_length", "omega0_radius_length",
    "omega0_box_x0_length", "omega0_box_x1_length", "omega0_box_y0_length", "omega0_box_y1_length",
    "eps_length", "eps0_length",
    "T_seconds", "dt_seconds", "delta_seconds",
    "s_list", "lambda_list", "carleman_samples",
    "penalty_list",
    "z0_bump_x_length", "z0_bump_y_length", "z0_bump_width_length", "z0_bump_amp",
    "target_kind",
    "target_bump_x_length", "target_bump_y_length", "target_bump_width_length", "target_bump_amp",
    "control_terminal_bound_rel",
    "observability_samples",
};

class KeyMap {
public:
    explicit KeyMap(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ValidationError("config line " + std::to_string(lineno) +
                                          ": expected key = value");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!kKnownKeys.count(key))
                throw ValidationError("config: unknown key '" + key + "'");
            if (values_.count(key))
                throw ValidationError("config: duplicate key '" + key + "'");
            values_[key] = value;
        }
    }

    bool has(const std::string& k) const { return values_.count(k) > 0; }
    std::string str(const std::string& k) const {
        auto it = values_.find(k);
        if (it == values_.end()) throw ValidationError("config: missing key '" + k + "'");
        return it->second;
    }
    std::string str_or(const std::string& k, const std::string& d) const {
        return has(k) ? str(k) : d;
    }
    double num(const std::string& k) const {
        const std::string v = str(k);
        try {
            size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config: key '" + k + "' is not a number: '" + v + "'");
        }
    }
    double num_or(const std::string& k, double d) const { return has(k) ? num(k) : d; }
    std::vector<double> num_list(const std::string& k) const {
        std::istringstream ss(str(k));
        std::vector<double> out;
        double v;
        while (ss >> v) out.push_back(v);
        if (out.empty()) throw ValidationError("config: key '" + k + "' holds no numbers");
        return out;
    }
    std::vector<std::string> word_list(const std::string& k) const {
        std::istringstream ss(str(k));
        std::vector<std::string> out;
        std::string w;
        while (ss >> w) out.push_back(w);
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    std::map<std::string, std::string> values_;
};

RegionSpec parse_region(const KeyMap& kv, const std::string& prefix) {
    const std::string shape = kv.str_or(prefix + "_shape", "ball");
    if (shape == "ball") {
        return BallSpec{{kv.num(prefix + "_center_x_length"), kv.num(prefix + "_center_y_length")},
                        kv.num(prefix + "_radius_length")};
    }
    if (shape == "box") {
        return BoxSpec{kv.num(prefix + "_box_x0_length"), kv.num(prefix + "_box_x1_length"),
                       kv.num(prefix + "_box_y0_length"), kv.num(prefix + "_box_y1_length")};
    }
    throw ValidationError("config: " + prefix + "_shape must be ball or box");
}

}  // namespace

RegionCase ExperimentConfig::region_case() const {
    if (case_name == "offcenter") return RegionCase::Offcenter;
    return RegionCase::Interior;  // sanity runs use interior-style tags
}

CoefficientField ExperimentConfig::coefficients() const {
    if (case_name == "sanity") return CoefficientField::sanity();
    if (coeff_kind == "identity") return CoefficientField::isotropic(alpha);
    if (coeff_kind == "radial_mix") return CoefficientField::radial_mix(alpha);
    return CoefficientField::constant_matrix(alpha, coeff_matrix);
}

ExperimentConfig parse_config_text(const std::string& text) {
    const KeyMap kv(text);
    ExperimentConfig cfg;

    cfg.case_name = kv.str("case");
    if (cfg.case_name != "interior" && cfg.case_name != "offcenter" && cfg.case_name != "sanity")
        throw ValidationError("config: case must be interior, offcenter, or sanity");
    cfg.stages = kv.has("stages") ? kv.word_list("stages") : std::vector<std::string>{};
    cfg.seed = static_cast<std::uint64_t>(kv.num_or("seed", 1));
    cfg.out_dir = kv.str_or("out_dir", "out");
    cfg.threads = static_cast<int>(kv.num_or("threads", 1));
    if (cfg.threads < 1) throw ValidationError("config: threads must be >= 1");

    const std::string dom = kv.str("domain");
    if (dom == "rectangle") {
        const RectDomain r{kv.num("rect_x0_length"), kv.num("rect_x1_length"),
                           kv.num("rect_y0_length"), kv.num("rect_y1_length")};
        if (!(r.x0 < r.x1 && r.y0 < r.y1))
            throw ValidationError("config: rectangle bounds are inverted");
        if (!(r.x0 < 0 && r.x1 > 0 && r.y0 < 0 && r.y1 > 0))
            throw ValidationError("config: rectangle must contain the origin strictly inside");
        cfg.domain = r;
    } else if (dom == "disk") {
        const DiskDomain d{{kv.num("disk_center_x_length"), kv.num("disk_center_y_length")},
                           kv.num("disk_radius_length")};
        if (!(d.radius > 0)) throw ValidationError("config: disk_radius_length must be positive");
        if (!(d.center.norm() < d.radius))
            throw ValidationError("config: disk must contain the origin strictly inside");
        cfg.domain = d;
    } else {
        throw ValidationError("config: domain must be rectangle or disk");
    }

    cfg.mesh_h_target_length = kv.num("mesh_h_target_length");
    if (!(cfg.mesh_h_target_length > 0))
        throw ValidationError("config: mesh_h_target_length must be positive");
    cfg.mesh_grading_exponent = kv.num_or("mesh_grading_exponent", 1.0);
    if (cfg.mesh_grading_exponent < 1.0)
        throw ValidationError("config: mesh_grading_exponent must be >= 1");

    if (cfg.case_name == "sanity") {
        cfg.alpha = 0.0;
    } else {
        cfg.alpha = kv.num("alpha");
        if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0))
            throw ValidationError("config: alpha must lie in (0,2)");
    }
    cfg.coeff_kind = kv.str_or("coeff_matrix", "identity");
    if (cfg.coeff_kind == "constant") {
        cfg.coeff_matrix = {kv.num("coeff_a11"), kv.num("coeff_a12"), kv.num("coeff_a22")};
        if (!(cfg.coeff_matrix.min_eigenvalue() > 0))
            throw ValidationError("config: constant coefficient matrix is not positive definite");
    } else if (cfg.coeff_kind != "identity" && cfg.coeff_kind != "radial_mix") {
        throw ValidationError("config: coeff_matrix must be identity, constant, or radial_mix");
    }

    cfg.omega = parse_region(kv, "omega");
    cfg.omega0 = parse_region(kv, "omega0");
    cfg.eps_length = kv.num("eps_length");
    cfg.eps0_length = kv.num("eps0_length");
    if (!(cfg.eps_length > 0 && cfg.eps0_length > 0))
        throw ValidationError("config: eps_length and eps0_length must be positive");
    if (!(cfg.eps_length < cfg.eps0_length / 9.0))
        throw ValidationError("config: eps_length must be below eps0_length / 9");

    cfg.T_seconds = kv.num("T_seconds");
    cfg.dt_seconds = kv.num("dt_seconds");
    if (!(cfg.T_seconds > 0 && cfg.dt_seconds > 0))
        throw ValidationError("config: T_seconds and dt_seconds must be positive");
    const double steps = cfg.T_seconds / cfg.dt_seconds;
    if (std::abs(steps - std::llround(steps)) > 1e-12 * std::max(1.0, steps))
        throw ValidationError("config: dt_seconds must divide T_seconds");
    if (kv.has("delta_seconds")) {
        cfg.delta_seconds = kv.num("delta_seconds");
        if (!(*cfg.delta_seconds > 0 && *cfg.delta_seconds < 0.5 * cfg.T_seconds))
            throw ValidationError("config: delta_seconds must lie in (0, T/2)");
    }

    if (kv.has("s_list")) cfg.s_list = kv.num_list("s_list");
    if (kv.has("lambda_list")) cfg.lambda_list = kv.num_list("lambda_list");
    cfg.carleman_samples = static_cast<int>(kv.num_or("carleman_samples", 20));

    if (kv.has("penalty_list")) {
        cfg.penalty_list = kv.num_list("penalty_list");
        for (double p : cfg.penalty_list)
            if (!(p > 0)) throw ValidationError("config: penalty_list entries must be positive");
    }
    if (kv.has("z0_bump_x_length")) {
        cfg.z0_bump_center = Vec2{kv.num("z0_bump_x_length"), kv.num("z0_bump_y_length")};
        cfg.z0_bump_width_length = kv.num_or("z0_bump_width_length", 0.25);
        cfg.z0_bump_amp = kv.num_or("z0_bump_amp", 1.0);
    }
    cfg.target_kind = kv.str_or("target_kind", "bump");
    if (cfg.target_kind != "bump" && cfg.target_kind != "controlled_endpoint")
        throw ValidationError("config: target_kind must be bump or controlled_endpoint");
    if (kv.has("target_bump_x_length")) {
        cfg.target_bump_center = Vec2{kv.num("target_bump_x_length"), kv.num("target_bump_y_length")};
        cfg.target_bump_width_length = kv.num_or("target_bump_width_length", 0.25);
        cfg.target_bump_amp = kv.num_or("target_bump_amp", 0.2);
    }
    cfg.control_terminal_bound_rel = kv.num_or("control_terminal_bound_rel", 1e-3);
    cfg.observability_samples = static_cast<int>(kv.num_or("observability_samples", 50));
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace degctrl
