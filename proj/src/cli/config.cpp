#include "mfw/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mfw/field/ops.hpp"
#include "mfw/util/error.hpp"

namespace mfw::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Ini Ini::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

Ini Ini::parse_string(const std::string& text, const std::string& origin) {
    Ini ini;
    ini.text_ = text;
    ini.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno),
                                  "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            ini.sections_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno),
                              "expected key = value");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno),
                              "key outside of any section");
        ini.sections_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return ini;
}

bool Ini::has(const std::string& sec) const { return sections_.count(sec) > 0; }

bool Ini::has(const std::string& sec, const std::string& key) const {
    const auto it = sections_.find(sec);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Ini::get_str(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
    const auto it = sections_.find(sec);
    if (it == sections_.end()) return fallback;
    const auto kt = it->second.find(key);
    return kt == it->second.end() ? fallback : kt->second;
}

std::string Ini::require_str(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ConfigError(sec + "." + key, "missing required field");
    return get_str(sec, key, "");
}

double Ini::get_num(const std::string& sec, const std::string& key,
                    double fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string s = get_str(sec, key, "");
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(sec + "." + key, "not a number: '" + s + "'");
    }
}

double Ini::require_num(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ConfigError(sec + "." + key, "missing required field");
    return get_num(sec, key, 0.0);
}

long Ini::get_int(const std::string& sec, const std::string& key, long fallback) const {
    const double v = get_num(sec, key, static_cast<double>(fallback));
    const long r = std::lround(v);
    if (std::fabs(v - r) > 1e-9)
        throw ConfigError(sec + "." + key, "expected an integer");
    return r;
}

std::vector<double> Ini::get_list(const std::string& sec, const std::string& key) const {
    std::vector<double> out;
    if (!has(sec, key)) return out;
    std::istringstream in(get_str(sec, key, ""));
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(sec + "." + key, "not a number: '" + tok + "'");
        }
    }
    return out;
}

namespace {

field::Bc parse_bc(const Ini& ini, const std::string& sec) {
    const std::string s = ini.get_str(sec, "bc", "dirichlet");
    if (s == "dirichlet") return field::Bc::Dirichlet;
    if (s == "neumann") return field::Bc::Neumann;
    throw ConfigError(sec + ".bc", "expected dirichlet or neumann");
}

models::CouplingSpec parse_coupling(const Ini& ini, const std::string& sec,
                                    const std::string& prefix) {
    models::CouplingSpec c;
    const std::string variant = ini.get_str(sec, prefix + "variant", "affine");
    if (variant == "affine") {
        c.variant = models::CouplingVariant::Affine;
        c.f0_const = ini.get_num(sec, prefix + "const", 0.0);
        c.gain_x = ini.get_num(sec, prefix + "gain_x", 0.0);
        c.gain_y = ini.get_num(sec, prefix + "gain_y", 0.0);
    } else if (variant == "bounded_lip") {
        c.variant = models::CouplingVariant::BoundedLip;
        c.gain = ini.get_num(sec, prefix + "gain", 1.0);
    } else {
        throw ConfigError(sec + "." + prefix + "variant",
                          "expected affine or bounded_lip");
    }
    return c;
}

models::NoiseSpec parse_noise(const Ini& ini, const std::string& sec) {
    models::NoiseSpec n;
    n.n_modes = static_cast<int>(ini.get_int(sec, "modes", 1));
    n.mode_coeffs = ini.get_list(sec, "coeffs");
    if (n.mode_coeffs.empty())
        n.mode_coeffs.assign(static_cast<std::size_t>(n.n_modes), 0.1);
    const std::string dep = ini.get_str(sec, "dependence", "additive");
    if (dep == "additive") {
        n.dependence = models::NoiseDependence::Additive;
    } else if (dep == "linear_clipped") {
        n.dependence = models::NoiseDependence::LinearClipped;
        n.slope = ini.get_num(sec, "slope", 0.1);
        n.cap = ini.get_num(sec, "cap", 2.0);
    } else {
        throw ConfigError(sec + ".dependence", "expected additive or linear_clipped");
    }
    return n;
}

} // namespace

field::Field parse_initial(const Ini& ini, const std::string& sec, const field::Grid& g) {
    field::Field f(g);
    const std::string kind = ini.get_str(sec, "kind", "zero");
    if (kind == "zero") return f;
    if (kind == "eigenmode") {
        const int mode = static_cast<int>(ini.get_int(sec, "mode", 1));
        const double amp = ini.get_num(sec, "amp", 1.0);
        const field::Field e = field::eigenmode(g, mode);
        kern::active().axpy(f.data(), amp, e.data(), f.size());
        return f;
    }
    if (kind == "constant") {
        const double amp = ini.get_num(sec, "amp", 1.0);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = amp;
        return f;
    }
    throw ConfigError(sec + ".kind", "expected zero, eigenmode or constant");
}

double RunConfig::delta_of(double eps) const {
    if (delta_rule == "eps_sq") return eps * eps;
    if (delta_rule == "eps_cubed") return eps * eps * eps;
    if (delta_rule == "fixed") return delta_fixed;
    throw ConfigError("scales.delta_rule", "expected eps_sq, eps_cubed or fixed");
}

paths::TimeGrid RunConfig::grid_for(double delta) const {
    double use_dt = dt;
    if (use_dt <= 0.0) {
        const long steps =
            static_cast<long>(std::ceil(horizon / (delta / 20.0) - 1e-9));
        use_dt = horizon / static_cast<double>(steps);
    }
    double use_zeta = zeta;
    if (use_zeta <= 0.0) {
        // Khasminskii block rule zeta = sqrt(delta), snapped onto the mesh
        const double target = std::sqrt(delta);
        long m = std::lround(target / use_dt);
        if (m < 1) m = 1;
        const long max_m = std::lround(horizon / use_dt);
        while (m > 1 && max_m % m != 0) --m; // blocks must tile [0, T]
        use_zeta = use_dt * static_cast<double>(m);
    }
    return paths::TimeGrid::make(horizon, use_dt, use_zeta);
}

RunConfig RunConfig::load(const std::string& path) {
    RunConfig rc;
    rc.ini = Ini::parse_file(path);
    const Ini& ini = rc.ini;

    const int n = static_cast<int>(ini.get_int("grid", "n_interior", 8));
    const double length = ini.get_num("grid", "length", 1.0);
    const field::Bc bc = parse_bc(ini, "grid");
    rc.model.slow_grid = field::Grid{n, length, bc};
    if (rc.model.slow_grid.n_interior < 2)
        throw ConfigError("grid.n_interior", "must be >= 2");
    const double fast_len = ini.get_num("fast_grid", "length", length);
    rc.model.fast_grid = field::Grid::dirichlet(n, fast_len);

    const std::string variant = ini.get_str("slow", "variant", "linear");
    if (variant == "porous_medium") {
        rc.model.slow.variant = models::SlowVariant::PorousMedium;
        rc.model.slow.r = ini.get_num("slow", "r", 3.0);
        rc.model.slow.stabilization = ini.get_num("slow", "stabilization", -1.0);
    } else if (variant == "cahn_hilliard") {
        rc.model.slow.variant = models::SlowVariant::CahnHilliard;
        rc.model.slow.pot_a = ini.get_num("slow", "pot_a", 1.0);
        rc.model.slow.pot_b = ini.get_num("slow", "pot_b", -1.0);
    } else if (variant == "linear") {
        rc.model.slow.variant = models::SlowVariant::LinearDiagnostic;
        rc.model.slow.a = ini.get_num("slow", "a", 1.0);
    } else {
        throw ConfigError("slow.variant",
                          "expected porous_medium, cahn_hilliard or linear");
    }

    rc.model.f = parse_coupling(ini, "coupling_f", "");
    rc.model.fast.c1 = ini.get_num("fast", "c1", 0.0);
    rc.model.fast.c2 = ini.get_num("fast", "c2", 0.0);
    rc.model.fast.g = parse_coupling(ini, "fast", "g_");
    rc.model.noise_slow = parse_noise(ini, "noise_slow");
    rc.model.noise_fast = parse_noise(ini, "noise_fast");
    rc.model.validate();

    rc.epsilon = ini.get_num("scales", "epsilon", 0.1);
    rc.epsilon_schedule = ini.get_list("scales", "epsilon_schedule");
    rc.delta_rule = ini.get_str("scales", "delta_rule", "eps_sq");
    rc.delta_fixed = ini.get_num("scales", "delta", 0.0);
    if (rc.delta_rule == "fixed" && rc.delta_fixed <= 0.0)
        throw ConfigError("scales.delta", "fixed rule needs a positive delta");

    rc.horizon = ini.get_num("time", "T", 1.0);
    rc.dt = ini.get_num("time", "dt", 0.0);
    rc.zeta = ini.get_num("time", "zeta", 0.0);

    rc.master_seed = static_cast<std::uint64_t>(ini.get_int("run", "master_seed", 1));
    rc.n_paths = ini.get_int("run", "n_paths", 1000);
    rc.threads = static_cast<std::size_t>(ini.get_int("run", "threads", 0));
    rc.out_dir = ini.get_str("output", "dir", "out");

    rc.x0 = parse_initial(ini, "x0", rc.model.slow_grid);
    rc.y0 = parse_initial(ini, "y0", rc.model.fast_grid);

    rc.slow_consts = hypotheses::default_slow_constants(rc.model);
    rc.fast_consts = hypotheses::default_fast_constants(rc.model);
    if (ini.has("hypotheses")) {
        rc.slow_consts.alpha1 = ini.get_num("hypotheses", "alpha1", rc.slow_consts.alpha1);
        rc.slow_consts.beta1 = ini.get_num("hypotheses", "beta1", rc.slow_consts.beta1);
        rc.slow_consts.eta1 = ini.get_num("hypotheses", "eta1", rc.slow_consts.eta1);
        rc.slow_consts.C = ini.get_num("hypotheses", "C_slow", rc.slow_consts.C);
        rc.fast_consts.kappa = ini.get_num("hypotheses", "kappa", rc.fast_consts.kappa);
        rc.fast_consts.lambda = ini.get_num("hypotheses", "lambda", rc.fast_consts.lambda);
        rc.hypothesis_samples = ini.get_int("hypotheses", "n_samples", 200);
    }

    const std::string fb = ini.get_str("average", "fbar", "linear_oracle");
    if (fb == "linear_oracle") rc.fbar_mode = averaging::FbarMode::LinearOracle;
    else if (fb == "ergodic") rc.fbar_mode = averaging::FbarMode::ErgodicAverage;
    else throw ConfigError("average.fbar", "expected linear_oracle or ergodic");
    rc.fbar_params.burn_in = ini.get_num("average", "burn_in", 1.0);
    rc.fbar_params.horizon = ini.get_num("average", "horizon", 5.0);
    rc.fbar_params.n_replicas = static_cast<int>(ini.get_int("average", "replicas", 4));
    rc.fbar_params.dt = ini.get_num("average", "dt", 1e-3);

    // global consistency rules surfaced before any run starts
    const double delta0 = rc.delta_of(rc.epsilon);
    if (rc.dt > 0.0 && rc.dt > delta0 / 20.0 * (1.0 + 1e-12))
        throw ConfigError("time.dt", "violates the fast-scale contract dt <= delta/20");
    for (const double eps : rc.epsilon_schedule) {
        if (rc.delta_of(eps) / eps >= 1.0)
            throw ConfigError("scales", "LDP experiments need delta/epsilon < 1");
    }
    return rc;
}

} // namespace mfw::cli
