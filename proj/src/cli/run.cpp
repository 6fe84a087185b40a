#include "mfw/cli/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfw/action/minimize.hpp"
#include "mfw/averaging/ergodicity.hpp"
#include "mfw/averaging/fbar.hpp"
#include "mfw/cli/config.hpp"
#include "mfw/io/csv.hpp"
#include "mfw/io/manifest.hpp"
#include "mfw/ldp/experiments.hpp"
#include "mfw/skeleton/solve.hpp"
#include "mfw/util/fnv.hpp"

namespace mfw::cli {

namespace {

using nlohmann::json;

struct RunContext {
    RunConfig cfg;
    std::filesystem::path out;
    io::RunManifest manifest;

    std::string out_file(const std::string& name) {
        const std::string p = (out / name).string();
        manifest.outputs.push_back(p);
        return p;
    }

    void record(const std::string& name, bool pass, const std::string& detail) {
        manifest.experiments.push_back({name, pass, detail});
    }

    void write_json(const std::string& name, const json& j) {
        std::ofstream f(out_file(name), std::ios::binary);
        f << j.dump(2) << "\n";
    }
};

RunContext make_context(const CliOptions& opts) {
    RunContext ctx{RunConfig::load(opts.config_path), {}, {}};
    if (opts.seed) ctx.cfg.master_seed = *opts.seed;
    if (opts.out_dir) ctx.cfg.out_dir = *opts.out_dir;
    if (opts.threads) ctx.cfg.threads = static_cast<std::size_t>(*opts.threads);
    ctx.out = ctx.cfg.out_dir;
    std::filesystem::create_directories(ctx.out);
    // store the config verbatim; the manifest hash covers these bytes
    {
        std::ofstream copy(ctx.out / "config.ini", std::ios::binary);
        copy << ctx.cfg.ini.text();
        ctx.manifest.outputs.push_back((ctx.out / "config.ini").string());
    }
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ctx.cfg.ini.text())));
    ctx.manifest.config_path = opts.config_path;
    ctx.manifest.config_hash = hash;
    ctx.manifest.seed = ctx.cfg.master_seed;
    ctx.manifest.started_at = io::iso_timestamp_now();
    return ctx;
}

json report_to_json(const hypotheses::CheckReport& r) {
    json j;
    j["condition_id"] = r.condition_id;
    j["n_samples"] = r.n_samples;
    j["worst_margin"] = r.worst_margin;
    j["verdict"] = r.pass ? "pass" : "fail";
    if (r.fitted_constant) j["fitted_constant"] = *r.fitted_constant;
    if (!r.pass) {
        j["witness_u"] = r.witness_u;
        j["witness_v"] = r.witness_v;
    }
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

void cmd_check(RunContext& ctx) {
    hypotheses::CheckContext cc{ctx.cfg.model, ctx.cfg.slow_consts, ctx.cfg.fast_consts,
                                ctx.cfg.master_seed,
                                static_cast<int>(ctx.cfg.hypothesis_samples)};
    const auto reports = hypotheses::run_all_checks(cc);
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back(report_to_json(r));
        ctx.record(r.condition_id, r.pass,
                   r.fitted_constant ? "fitted " + std::to_string(*r.fitted_constant)
                                     : "margin " + std::to_string(r.worst_margin));
    }
    ctx.write_json("checks.json", arr);
}

void cmd_simulate(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const double delta = c.delta_of(c.epsilon);
    const paths::TimeGrid tg = c.grid_for(delta);
    const paths::WienerDriver driver{c.master_seed};
    const long stride = c.ini.get_int("experiment", "record_stride", 1);
    const paths::Trajectory traj =
        paths::simulate_coupled(c.model, {c.epsilon, delta}, tg, driver, c.x0, c.y0,
                                /*path=*/0, stride);
    const std::string fmt = c.ini.get_str("output", "formats", "csv");
    if (fmt.find("csv") != std::string::npos)
        io::write_trajectory(ctx.out_file("trajectory.csv"), traj);
    if (fmt.find("bin") != std::string::npos) {
        std::ofstream bin(ctx.out_file("trajectory.bin"), std::ios::binary);
        for (std::size_t k = 0; k < traj.t.size(); ++k) {
            bin.write(reinterpret_cast<const char*>(&traj.t[k]), sizeof(double));
            bin.write(reinterpret_cast<const char*>(traj.x[k].data()),
                      static_cast<std::streamsize>(sizeof(double) * traj.x[k].size()));
            bin.write(reinterpret_cast<const char*>(traj.y[k].data()),
                      static_cast<std::streamsize>(sizeof(double) * traj.y[k].size()));
        }
    }
    ctx.record("simulate", !traj.status.blew_up,
               traj.status.blew_up
                   ? "blow-up at step " + std::to_string(traj.status.blow_step)
                   : "ok, delta/eps = " + std::to_string(delta / c.epsilon));
}

void cmd_average(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const paths::WienerDriver driver{c.master_seed};
    const averaging::FbarBackend backend(c.model, c.fbar_mode, driver, c.fbar_params);
    const field::Field fb = backend.fbar(c.x0);
    json j;
    j["fbar"] = std::vector<double>(fb.data(), fb.data() + fb.size());
    j["gap"] = models::dissipativity_gap(c.model);

    const double frozen_dt = c.ini.get_num("average", "dt", 1e-3);
    const int n_samples = static_cast<int>(c.ini.get_int("average", "n_samples", 200));
    const int thinning = static_cast<int>(c.ini.get_int("average", "thinning", 50));
    const auto samples = averaging::sample_invariant(
        c.model, c.x0, c.y0, c.fbar_params.burn_in, n_samples, thinning, frozen_dt,
        driver);
    field::Field mean(c.model.fast_grid);
    for (const auto& s : samples)
        kern::active().axpy(mean.data(), 1.0 / static_cast<double>(samples.size()),
                            s.data(), mean.size());
    j["invariant_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());

    const auto fit = averaging::ergodicity_decay(
        c.model, c.x0, c.y0, fb, c.fbar_params.horizon, frozen_dt,
        static_cast<int>(c.ini.get_int("experiment", "n_paths", 2000)),
        static_cast<int>(c.ini.get_int("experiment", "record_stride", 20)), driver);
    j["rate_hat"] = fit.rate_hat;
    j["prefactor_hat"] = fit.prefactor_hat;
    j["r2"] = fit.r2;
    j["degenerate"] = fit.degenerate;
    ctx.write_json("average.json", j);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < fit.t.size(); ++i)
        rows.push_back({fit.t[i], fit.distance[i], fit.se[i]});
    io::write_csv(ctx.out_file("ergodicity.csv"), {"t", "distance", "se"}, rows);

    const double half_kappa = 0.5 * c.fast_consts.kappa;
    const bool rate_ok =
        fit.degenerate || fit.rate_hat >= half_kappa - 0.2 * std::fabs(half_kappa);
    ctx.record("average", models::dissipativity_gap(c.model) > 0.0 && rate_ok,
               "rate_hat " + std::to_string(fit.rate_hat) + ", kappa/2 " +
                   std::to_string(half_kappa));
}

skeleton::Control control_from_config(const RunConfig& c, const paths::TimeGrid& tg) {
    skeleton::Control phi(c.model.noise_slow.n_modes, c.model.noise_fast.n_modes,
                          tg.n_steps);
    const double ps = c.ini.get_num("control", "phi_slow", 0.0);
    const double pf = c.ini.get_num("control", "phi_fast", 0.0);
    for (long k = 0; k < tg.n_steps; ++k) {
        if (ps != 0.0) phi.at_step(k)[0] = ps;
        if (pf != 0.0)
            phi.at_step(k)[static_cast<std::size_t>(c.model.noise_slow.n_modes)] = pf;
    }
    const double bound = c.ini.get_num("control", "bound_M", 0.0);
    if (bound > 0.0) {
        phi.bound_M = bound;
        phi.validate_bound(tg.dt);
    }
    return phi;
}

void cmd_skeleton(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const double delta = c.delta_of(c.epsilon);
    const paths::TimeGrid tg = c.grid_for(delta);
    const paths::WienerDriver driver{c.master_seed};
    const averaging::FbarBackend backend(c.model, c.fbar_mode, driver, c.fbar_params);
    const skeleton::Control phi = control_from_config(c, tg);
    const auto traj = skeleton::solve_skeleton(c.x0, phi, c.model, backend, tg);

    paths::Trajectory dump;
    const long stride = c.ini.get_int("experiment", "record_stride", 1);
    for (long k = 0; k <= tg.n_steps; k += stride) {
        dump.t.push_back(tg.dt * static_cast<double>(k));
        dump.x.push_back(traj.states[static_cast<std::size_t>(k)]);
    }
    io::write_trajectory(ctx.out_file("skeleton.csv"), dump);

    const auto rep = skeleton::energy_report(traj, phi, c.model, c.x0);
    json j;
    j["sup_h_norm_sq"] = rep.sup_h_norm_sq;
    j["v_action_integral"] = rep.v_action_integral;
    j["control_energy"] = rep.control_energy;
    j["envelope"] = rep.envelope;
    j["finite"] = rep.finite;
    j["within_envelope"] = rep.within_envelope;
    ctx.write_json("energy.json", j);
    ctx.record("skeleton", rep.finite && rep.within_envelope,
               "sup ||X||_H^2 = " + std::to_string(rep.sup_h_norm_sq));
}

void cmd_action(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const long steps = c.ini.get_int("action", "steps", 200);
    const paths::TimeGrid tg = paths::TimeGrid::make(
        c.horizon, c.horizon / static_cast<double>(steps),
        c.horizon / static_cast<double>(steps));
    const paths::WienerDriver driver{c.master_seed};
    const averaging::FbarBackend backend(c.model, c.fbar_mode, driver, c.fbar_params);

    action::ActionProblem prob;
    prob.x0 = c.x0;
    prob.tg = tg;
    const std::string kind = c.ini.get_str("action", "target_kind", "eigenmode");
    const double weight = c.ini.get_num("action", "weight", 1e4);
    if (kind == "eigenmode") {
        const int mode = static_cast<int>(c.ini.get_int("action", "target_mode", 1));
        const double amp = c.ini.get_num("action", "target_amp", 1.0);
        field::Field target(c.model.slow_grid);
        const field::Field e = field::eigenmode(c.model.slow_grid, mode);
        kern::active().axpy(target.data(), amp, e.data(), target.size());
        prob.objective = action::TerminalHit{target, weight};
    } else if (kind == "threshold") {
        prob.objective = action::TerminalFunctional{
            static_cast<int>(c.ini.get_int("action", "target_mode", 1)),
            c.ini.require_num("action", "threshold"), true, weight};
    } else {
        throw ConfigError("action.target_kind", "expected eigenmode or threshold");
    }

    action::OptimizerParams op;
    op.max_iterations = static_cast<int>(c.ini.get_int("action", "max_iter", 300));
    op.gtol = c.ini.get_num("action", "gtol", 1e-8);
    op.xtol = c.ini.get_num("action", "xtol", 1e-4);
    const skeleton::Control init(c.model.noise_slow.n_modes, c.model.noise_fast.n_modes,
                                 tg.n_steps);
    const auto res = action::minimize(prob, init, c.model, backend, op);

    json j;
    j["action_value"] = res.action_value;
    j["terminal_gap"] = res.terminal_gap;
    j["iterations"] = res.iterations;
    j["gradient_norm"] = res.gradient_norm;
    j["converged"] = res.converged;
    ctx.write_json("action_result.json", j);

    std::vector<std::string> cols{"t"};
    for (int m = 0; m < res.control.slow_dim(); ++m)
        cols.push_back("phi_slow" + std::to_string(m + 1));
    for (int m = 0; m < res.control.fast_dim(); ++m)
        cols.push_back("phi_fast" + std::to_string(m + 1));
    std::vector<std::vector<double>> rows;
    for (long k = 0; k < tg.n_steps; ++k) {
        std::vector<double> row{tg.dt * static_cast<double>(k)};
        for (const double v : res.control.at_step(k)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    io::write_csv(ctx.out_file("control.csv"), cols, rows);
    ctx.record("action", res.converged,
               "I = " + std::to_string(res.action_value) + ", gap " +
                   std::to_string(res.terminal_gap));
}

void cmd_validate(RunContext& ctx, const std::string& target) {
    const RunConfig& c = ctx.cfg;
    if (target == "increments") {
        ldp::IncrementsParams p;
        p.model = c.model;
        p.scales = {c.epsilon, c.delta_of(c.epsilon)};
        p.horizon = c.horizon;
        p.dt = c.dt;
        p.zeta_schedule = c.ini.get_list("experiment", "zeta_schedule");
        p.n_paths = c.n_paths;
        p.threads = c.threads;
        p.seed = c.master_seed;
        p.x0 = c.x0;
        p.y0 = c.y0;
        const auto table = ldp::validate_increments(p);
        io::write_scaling_table(ctx.out_file("increments.csv"), table);
        const auto crit = ldp::criterion_slope_band(table, 0.8, 1.2, "increments_slope");
        ctx.record(crit.name, crit.pass, crit.detail);
        return;
    }
    if (target == "fast-aux") {
        ldp::FastAuxParams p;
        p.model = c.model;
        p.epsilon = c.epsilon;
        p.horizon = c.horizon;
        const auto zetas = c.ini.get_list("experiment", "cell_zetas");
        const auto ratios = c.ini.get_list("experiment", "cell_ratios");
        if (zetas.size() != ratios.size() || zetas.empty())
            throw ConfigError("experiment.cell_zetas",
                              "needs matching nonempty cell_zetas/cell_ratios lists");
        for (std::size_t i = 0; i < zetas.size(); ++i)
            p.cells.push_back({zetas[i], ratios[i]});
        p.phi_fast = c.ini.get_num("experiment", "phi_fast", 0.0);
        p.n_paths = c.n_paths;
        p.threads = c.threads;
        p.seed = c.master_seed;
        p.x0 = c.x0;
        p.y0 = c.y0;
        const auto table = ldp::validate_fast_auxiliary(p);
        io::write_scaling_table(ctx.out_file("fast_aux.csv"), table);
        const auto crit = ldp::criterion_halving_factor(table, 1.6, 2.6);
        ctx.record(crit.name, crit.pass, crit.detail);
        return;
    }
    if (target == "averaging") {
        ldp::AveragingParams p;
        p.model = c.model;
        p.epsilon_schedule = c.epsilon_schedule;
        p.delta_rule = [&c](double e) { return c.delta_of(e); };
        p.horizon = c.horizon;
        p.phi_slow = c.ini.get_num("experiment", "phi_slow", 0.0);
        p.n_paths = c.n_paths;
        p.threads = c.threads;
        p.seed = c.master_seed;
        p.x0 = c.x0;
        p.y0 = c.y0;
        p.fbar_mode = c.fbar_mode;
        const auto table = ldp::validate_averaging(p);
        io::write_scaling_table(ctx.out_file("averaging.csv"), table);
        const auto crit = ldp::criterion_strictly_decreasing(table);
        ctx.record(crit.name, crit.pass, crit.detail);
        return;
    }
    if (target == "ergodicity") {
        const paths::WienerDriver driver{c.master_seed};
        const averaging::FbarBackend backend(c.model, c.fbar_mode, driver, c.fbar_params);
        const field::Field fb = backend.fbar(c.x0);
        const double frozen_dt = c.ini.get_num("average", "dt", 1e-3);
        const auto fit = averaging::ergodicity_decay(
            c.model, c.x0, c.y0, fb, c.fbar_params.horizon, frozen_dt,
            static_cast<int>(c.ini.get_int("experiment", "n_paths", 2000)),
            static_cast<int>(c.ini.get_int("experiment", "record_stride", 20)), driver);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < fit.t.size(); ++i)
            rows.push_back({fit.t[i], fit.distance[i], fit.se[i]});
        io::write_csv(ctx.out_file("ergodicity.csv"), {"t", "distance", "se"}, rows);
        const double half_kappa = 0.5 * c.fast_consts.kappa;
        const bool pass =
            !fit.degenerate && fit.rate_hat >= half_kappa - 0.2 * std::fabs(half_kappa);
        ctx.record("ergodicity_rate", pass,
                   "rate_hat " + std::to_string(fit.rate_hat) + " vs kappa/2 " +
                       std::to_string(half_kappa) + ", r2 " + std::to_string(fit.r2));
        return;
    }
    if (target == "ldp-tail") {
        ldp::TailParams p;
        p.model = c.model;
        p.epsilon_schedule = c.epsilon_schedule;
        p.delta_rule = [&c](double e) { return c.delta_of(e); };
        p.horizon = c.horizon;
        p.threshold = c.ini.require_num("experiment", "threshold");
        p.x0 = c.ini.get_num("experiment", "x0_coeff", 0.0);
        p.y0 = c.ini.get_num("experiment", "y0_coeff", 0.0);
        p.n_paths = c.n_paths;
        p.threads = c.threads;
        p.seed = c.master_seed;
        const auto table = ldp::estimate_tail(p);
        io::write_scaling_table(ctx.out_file("ldp_tail.csv"), table);
        const auto crit = ldp::criterion_tail_closure(table, 0.25);
        ctx.record(crit.name, crit.pass, crit.detail);
        return;
    }
    if (target == "moments") {
        ldp::MomentsParams p;
        p.model = c.model;
        p.epsilon_schedule = c.epsilon_schedule;
        p.delta_rule = [&c](double e) { return c.delta_of(e); };
        p.horizon = c.horizon;
        p.n_paths = c.n_paths;
        p.threads = c.threads;
        p.seed = c.master_seed;
        p.x0 = c.x0;
        p.y0 = c.y0;
        const auto table = ldp::validate_moments(p);
        io::write_scaling_table(ctx.out_file("moments.csv"), table);
        const auto crit = ldp::criterion_flat_trend(table);
        ctx.record(crit.name, crit.pass, crit.detail);
        return;
    }
    throw ConfigError("validate", "unknown target '" + target + "'");
}

} // namespace

int run(const CliOptions& opts) {
    try {
        RunContext ctx = make_context(opts);
        try {
            if (opts.subcommand == "check") cmd_check(ctx);
            else if (opts.subcommand == "simulate") cmd_simulate(ctx);
            else if (opts.subcommand == "average") cmd_average(ctx);
            else if (opts.subcommand == "skeleton") cmd_skeleton(ctx);
            else if (opts.subcommand == "action") cmd_action(ctx);
            else if (opts.subcommand == "validate") cmd_validate(ctx, opts.validate_target);
            else throw ConfigError("subcommand", "unknown subcommand " + opts.subcommand);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            // experiment-level failure: report in the manifest, exit 1
            ctx.record(opts.subcommand + ".error", false, e.what());
        }
        ctx.manifest.finished_at = io::iso_timestamp_now();
        ctx.manifest.write_atomic(ctx.out.string());
        if (!ctx.manifest.all_pass()) {
            std::cerr << "mfw: criteria not met (see manifest.json)\n";
            return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "mfw: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mfw: error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"multi-scale slow-fast SPDE toolkit"};
    app.require_subcommand(1);

    CliOptions opts;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"check", "verify the structural hypotheses of the configured model"},
        {"simulate", "integrate the coupled system and dump a trajectory"},
        {"average", "frozen-process averaging, invariant measure, ergodicity"},
        {"skeleton", "solve the controlled averaged equation"},
        {"action", "minimise the control action for a terminal objective"},
        {"validate", "run a quantitative validation experiment"},
    };
    std::string validate_target;
    for (const auto& [name, desc] : subs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opts.config_path, "configuration file")->required();
        sub->add_option("--seed", [&opts](const std::vector<std::string>& v) {
            opts.seed = std::stoull(v[0]);
            return true;
        }, "override run.master_seed");
        sub->add_option("--out", [&opts](const std::vector<std::string>& v) {
            opts.out_dir = v[0];
            return true;
        }, "override output.dir");
        sub->add_option("--threads", [&opts](const std::vector<std::string>& v) {
            opts.threads = std::stol(v[0]);
            return true;
        }, "override run.threads");
        if (name == "validate")
            sub->add_option("target", validate_target,
                            "increments | fast-aux | averaging | ergodicity | "
                            "ldp-tail | moments")
                ->required();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    opts.subcommand = app.get_subcommands().front()->get_name();
    opts.validate_target = validate_target;
    return run(opts);
}

} // namespace mfw::cli
