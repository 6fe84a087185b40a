#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfw/averaging/fbar.hpp"
#include "mfw/hypotheses/checks.hpp"
#include "mfw/models/specs.hpp"
#include "mfw/paths/timegrid.hpp"

namespace mfw::cli {

// Sectioned key-value configuration. The stored file bytes are the
// canonical form; the manifest hash covers them verbatim.
class Ini {
public:
    static Ini parse_file(const std::string& path);
    static Ini parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& sec) const;
    bool has(const std::string& sec, const std::string& key) const;
    std::string get_str(const std::string& sec, const std::string& key,
                        const std::string& fallback) const;
    std::string require_str(const std::string& sec, const std::string& key) const;
    double get_num(const std::string& sec, const std::string& key, double fallback) const;
    double require_num(const std::string& sec, const std::string& key) const;
    long get_int(const std::string& sec, const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& sec, const std::string& key) const;

    const std::string& text() const { return text_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string text_;
    std::string origin_;
};

struct RunConfig {
    Ini ini;
    models::ModelSpec model;
    double epsilon = 0.0;
    std::vector<double> epsilon_schedule;
    std::string delta_rule = "eps_sq";
    double delta_fixed = 0.0;
    double horizon = 1.0;
    double dt = 0.0;   // 0: derived from delta/20
    double zeta = 0.0; // 0: derived from sqrt(delta)
    std::uint64_t master_seed = 1;
    long n_paths = 1000;
    std::size_t threads = 0;
    std::string out_dir = "out";
    field::Field x0, y0;
    hypotheses::SlowHypothesisConstants slow_consts;
    hypotheses::FastHypothesisConstants fast_consts;
    long hypothesis_samples = 200;
    averaging::FbarMode fbar_mode = averaging::FbarMode::LinearOracle;
    averaging::ErgodicAverageParams fbar_params;

    double delta_of(double eps) const;
    // time grid for a given delta with the dt and zeta rules applied
    paths::TimeGrid grid_for(double delta) const;

    static RunConfig load(const std::string& path);
};

// parses an initial-condition section ([x0]/[y0]): kind = zero |
// eigenmode | constant, with mode/amp fields
field::Field parse_initial(const Ini& ini, const std::string& sec, const field::Grid& g);

} // namespace mfw::cli
