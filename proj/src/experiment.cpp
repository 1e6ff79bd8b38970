#include "isac/experiment.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

namespace isac {

namespace {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double level_from_json(const json& j, const std::string& field) {
    try {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) return parse_level(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError("field '" + field + "': " + e.what());
    }
    throw ConfigError("field '" + field + "': expected a number or a dB/dBm string");
}

template <class T>
T get_or(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One output table: '#'-prefixed metadata, a header row, then data rows.
// Byte-stable across runs for identical inputs.
class Table {
public:
    void meta(const std::string& key, const std::string& value) {
        meta_.emplace_back(key, value);
    }
    void meta(const std::string& key, double value) { meta(key, format_double(value)); }
    void meta(const std::string& key, std::uint64_t value) {
        meta(key, std::to_string(value));
    }
    void columns(std::vector<std::string> names) { columns_ = std::move(names); }
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    std::string csv() const {
        std::ostringstream out;
        for (const auto& [k, v] : meta_) out << "# " << k << " = " << v << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            out << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
        for (const auto& r : rows_)
            for (std::size_t i = 0; i < r.size(); ++i)
                out << r[i] << (i + 1 < r.size() ? "," : "\n");
        return out.str();
    }

    std::string json_text() const {
        json j;
        json meta = json::object();
        for (const auto& [k, v] : meta_) meta[k] = v;
        j["metadata"] = meta;
        j["columns"] = columns_;
        json rows = json::array();
        for (const auto& r : rows_) rows.push_back(r);
        j["rows"] = rows;
        return j.dump(2) + "\n";
    }

private:
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v) { return format_double(v); }

struct Scenario {
    Eigen::MatrixXcd h;
    TargetEnvironment env;
    SensingMatrices matrices;
    CapacityResult cap;
};

Scenario build_scenario(const ExperimentConfig& cfg, std::uint64_t channel_seed) {
    Scenario s;
    std::mt19937_64 rng(channel_seed);
    s.h = rician_channel(cfg.system, cfg.channel.geometry, rng);
    s.env = cfg.environment();
    s.matrices = compute_sensing_matrices(cfg.prior, cfg.system);
    s.cap = capacity_waterfilling(s.h, cfg.system.power_w, cfg.system.noise_comm_w);
    return s;
}

void common_meta(Table& t, const std::string& command, const ExperimentConfig& cfg,
                 std::uint64_t channel_seed) {
    t.meta("tool", std::string("isac ") + kToolVersion);
    t.meta("command", command);
    t.meta("channel_seed", channel_seed);
    t.meta("rate_target_bpshz", cfg.rate_target);
    t.meta("snr_linear", cfg.snr_linear);
    t.meta("alpha_phase_rad", cfg.alpha_phase);
    t.meta("kkt_tol", 1e-6);
    t.meta("quad", "64x16 Gauss-Legendre, rel_tol 1e-9");
    t.meta("units", "angles rad, powers W, rates bps/Hz, bounds rad^2");
}

void require_feasible(const std::string& who, double rbar, double r_max) {
    if (!check_feasibility(rbar, r_max))
        throw InfeasibleError(who + ": rate target " + format_double(rbar) +
                                  " infeasible, r_max = " + format_double(r_max),
                              rbar, r_max);
}

Eigen::MatrixXcd design_by_name(const std::string& name, const ExperimentConfig& cfg,
                                const Scenario& s) {
    const auto& sys = cfg.system;
    if (name == "isotropic")
        return (sys.power_w / sys.n_tx) *
               Eigen::MatrixXcd::Identity(sys.n_tx, sys.n_tx);
    if (name == "capacity") return s.cap.w_c;
    if (name == "sensing") return solve_p3(s.matrices, s.h, s.env, sys, 0.0).w;
    if (name == "sensing-upper") return sensing_only_upper(s.matrices, sys.power_w);
    if (name == "optimal") {
        require_feasible("design", cfg.rate_target, s.cap.r_max);
        return solve_p3(s.matrices, s.h, s.env, sys, cfg.rate_target).w;
    }
    if (name == "suboptimal") {
        require_feasible("design", cfg.rate_target, s.cap.r_max);
        return solve_p4(s.matrices, s.h, s.env, sys, cfg.rate_target).w;
    }
    throw ConfigError("unknown design '" + name +
                      "' (expected isotropic|capacity|sensing|sensing-upper|optimal|suboptimal)");
}

}  // namespace

double parse_level(const std::string& text) {
    std::istringstream in(text);
    double value = 0.0;
    std::string unit;
    if (!(in >> value)) throw std::invalid_argument("cannot parse level '" + text + "'");
    in >> unit;
    std::string rest;
    if (in >> rest) throw std::invalid_argument("trailing junk in level '" + text + "'");
    if (unit.empty()) return value;
    if (unit == "dBm" || unit == "dbm") return dbm_to_watts(value);
    if (unit == "dB" || unit == "db") return db_to_linear(value);
    throw std::invalid_argument("unknown unit '" + unit + "' in level '" + text + "'");
}

void ExperimentConfig::validate() const {
    system.validate();
    prior.validate();
    if (!(snr_linear > 0.0)) throw ConfigError("env.snr must be positive");
    if (rate_target < 0.0) throw ConfigError("rate_target must be nonnegative");
    if (sweep) {
        if (sweep->variable != "rate_target")
            throw ConfigError("sweep.variable '" + sweep->variable +
                              "' does not exist (supported: rate_target)");
        if (sweep->grid.empty()) throw ConfigError("sweep.grid must be nonempty");
    }
    if (montecarlo.trials < 1) throw ConfigError("montecarlo.trials must be >= 1");
    if (benchmark.draws < 1) throw ConfigError("benchmark.draws must be >= 1");
    if (benchmark.perturb_variance < 0.0)
        throw ConfigError("benchmark.perturb_variance must be >= 0");
}

TargetEnvironment ExperimentConfig::environment() const {
    return make_environment(system, snr_linear, alpha_phase);
}

ExperimentConfig default_scenario() {
    ExperimentConfig cfg;
    cfg.system.n_tx = 10;
    cfg.system.n_rx = 12;
    cfg.system.n_user = 8;
    cfg.system.symbols = 25;
    cfg.system.power_w = dbm_to_watts(30.0);
    cfg.system.noise_comm_w = dbm_to_watts(-90.0);
    cfg.system.noise_sense_w = dbm_to_watts(-90.0);
    cfg.system.spacing_over_lambda = 0.5;
    cfg.system.bs_height_m = 10.0;
    cfg.system.target_range_m = 50.0;

    cfg.prior.components = {
        {0.31, -0.74, std::pow(10.0, -2.5)},
        {0.24, -0.54, std::pow(10.0, -2.0)},
        {0.28, 0.75, std::pow(10.0, -2.0)},
        {0.17, 0.95, std::pow(10.0, -2.5)},
    };

    cfg.channel.geometry.rician_k = db_to_linear(-8.0);
    cfg.channel.geometry.beta0 = db_to_linear(-30.0);
    cfg.channel.geometry.pathloss_exp = 3.5;
    cfg.channel.geometry.range_m = 400.0;
    cfg.channel.geometry.height_m = 1.0;
    cfg.channel.geometry.azimuth = 0.36;
    cfg.channel.seed = 6;

    cfg.snr_linear = db_to_linear(-5.0);  // P |alpha|^2 L / sigma_s^2
    cfg.alpha_phase = 0.0;
    cfg.rate_target = 6.5;

    SweepConfig sweep;
    sweep.variable = "rate_target";
    for (int i = 0; i <= 11; ++i) sweep.grid.push_back(5.0 + 0.2 * i);
    cfg.sweep = sweep;

    cfg.montecarlo = MonteCarloConfig{};
    cfg.benchmark = BenchmarkConfig{};
    cfg.output = OutputConfig{};
    return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg = default_scenario();
    cfg.sweep.reset();

    if (j.contains("system")) {
        const json& s = j.at("system");
        cfg.system.n_tx = get_or(s, "n_tx", cfg.system.n_tx);
        cfg.system.n_rx = get_or(s, "n_rx", cfg.system.n_rx);
        cfg.system.n_user = get_or(s, "n_user", cfg.system.n_user);
        cfg.system.symbols = get_or(s, "symbols", cfg.system.symbols);
        if (s.contains("power")) cfg.system.power_w = level_from_json(s.at("power"), "system.power");
        if (s.contains("noise_comm"))
            cfg.system.noise_comm_w = level_from_json(s.at("noise_comm"), "system.noise_comm");
        if (s.contains("noise_sense"))
            cfg.system.noise_sense_w = level_from_json(s.at("noise_sense"), "system.noise_sense");
        cfg.system.spacing_over_lambda =
            get_or(s, "spacing_over_lambda", cfg.system.spacing_over_lambda);
        cfg.system.bs_height_m = get_or(s, "bs_height_m", cfg.system.bs_height_m);
        cfg.system.target_range_m = get_or(s, "target_range_m", cfg.system.target_range_m);
    }
    if (j.contains("prior")) {
        cfg.prior.components.clear();
        const json& p = j.at("prior");
        if (!p.contains("components") || !p.at("components").is_array())
            throw ConfigError("prior.components missing or not an array");
        for (const auto& c : p.at("components")) {
            GmComponent g;
            g.weight = get_or(c, "weight", 0.0);
            g.mean = get_or(c, "mean", 0.0);
            if (c.contains("variance"))
                g.variance = level_from_json(c.at("variance"), "prior.variance");
            cfg.prior.components.push_back(g);
        }
    }
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        auto& g = cfg.channel.geometry;
        if (c.contains("rician_k"))
            g.rician_k = level_from_json(c.at("rician_k"), "channel.rician_k");
        if (c.contains("beta0")) g.beta0 = level_from_json(c.at("beta0"), "channel.beta0");
        g.pathloss_exp = get_or(c, "pathloss_exp", g.pathloss_exp);
        g.range_m = get_or(c, "user_range_m", g.range_m);
        g.height_m = get_or(c, "user_height_m", g.height_m);
        g.azimuth = get_or(c, "user_azimuth", g.azimuth);
        cfg.channel.seed = get_or<std::uint64_t>(c, "seed", cfg.channel.seed);
    }
    if (j.contains("env")) {
        const json& e = j.at("env");
        if (e.contains("snr")) cfg.snr_linear = level_from_json(e.at("snr"), "env.snr");
        cfg.alpha_phase = get_or(e, "alpha_phase", cfg.alpha_phase);
    }
    cfg.rate_target = get_or(j, "rate_target", cfg.rate_target);
    if (j.contains("sweep")) {
        SweepConfig sw;
        sw.variable = get_or<std::string>(j.at("sweep"), "variable", "rate_target");
        sw.grid = get_or<std::vector<double>>(j.at("sweep"), "grid", {});
        cfg.sweep = sw;
    }
    if (j.contains("montecarlo")) {
        const json& mc = j.at("montecarlo");
        cfg.montecarlo.trials = get_or(mc, "trials", cfg.montecarlo.trials);
        cfg.montecarlo.seed = get_or<std::uint64_t>(mc, "seed", cfg.montecarlo.seed);
        const std::string est = get_or<std::string>(mc, "estimator", "map");
        if (est == "map")
            cfg.montecarlo.estimator = Estimator::map;
        else if (est == "mle")
            cfg.montecarlo.estimator = Estimator::mle;
        else
            throw ConfigError("montecarlo.estimator must be 'map' or 'mle'");
    }
    if (j.contains("benchmark")) {
        const json& b = j.at("benchmark");
        if (b.contains("perturb_variance"))
            cfg.benchmark.perturb_variance =
                level_from_json(b.at("perturb_variance"), "benchmark.perturb_variance");
        cfg.benchmark.draws = get_or(b, "draws", cfg.benchmark.draws);
        cfg.benchmark.seed = get_or<std::uint64_t>(b, "seed", cfg.benchmark.seed);
        cfg.benchmark.quad_panels = get_or(b, "quad_panels", cfg.benchmark.quad_panels);
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.output.path = get_or<std::string>(o, "path", "");
        const std::string fmt = get_or<std::string>(o, "format", "csv");
        if (fmt == "csv")
            cfg.output.format = OutputConfig::Format::csv;
        else if (fmt == "json")
            cfg.output.format = OutputConfig::Format::json;
        else
            throw ConfigError("output.format must be 'csv' or 'json'");
    }

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["system"] = {{"n_tx", cfg.system.n_tx},
                   {"n_rx", cfg.system.n_rx},
                   {"n_user", cfg.system.n_user},
                   {"symbols", cfg.system.symbols},
                   {"power", cfg.system.power_w},
                   {"noise_comm", cfg.system.noise_comm_w},
                   {"noise_sense", cfg.system.noise_sense_w},
                   {"spacing_over_lambda", cfg.system.spacing_over_lambda},
                   {"bs_height_m", cfg.system.bs_height_m},
                   {"target_range_m", cfg.system.target_range_m}};
    json comps = json::array();
    for (const auto& c : cfg.prior.components)
        comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
    j["prior"] = {{"components", comps}};
    j["channel"] = {{"rician_k", cfg.channel.geometry.rician_k},
                    {"beta0", cfg.channel.geometry.beta0},
                    {"pathloss_exp", cfg.channel.geometry.pathloss_exp},
                    {"user_range_m", cfg.channel.geometry.range_m},
                    {"user_height_m", cfg.channel.geometry.height_m},
                    {"user_azimuth", cfg.channel.geometry.azimuth},
                    {"seed", cfg.channel.seed}};
    j["env"] = {{"snr", cfg.snr_linear}, {"alpha_phase", cfg.alpha_phase}};
    j["rate_target"] = cfg.rate_target;
    if (cfg.sweep)
        j["sweep"] = {{"variable", cfg.sweep->variable}, {"grid", cfg.sweep->grid}};
    j["montecarlo"] = {
        {"trials", cfg.montecarlo.trials},
        {"seed", cfg.montecarlo.seed},
        {"estimator", cfg.montecarlo.estimator == Estimator::map ? "map" : "mle"}};
    j["benchmark"] = {{"perturb_variance", cfg.benchmark.perturb_variance},
                      {"draws", cfg.benchmark.draws},
                      {"seed", cfg.benchmark.seed},
                      {"quad_panels", cfg.benchmark.quad_panels}};
    j["output"] = {{"path", cfg.output.path},
                   {"format", cfg.output.format == OutputConfig::Format::csv ? "csv" : "json"}};
    return j.dump(2) + "\n";
}

std::string run_command(const std::string& command, const ExperimentConfig& cfg_in,
                        const RunOverrides& overrides, std::ostream& summary) {
    ExperimentConfig cfg = cfg_in;
    cfg.validate();
    if (overrides.trials) cfg.montecarlo.trials = *overrides.trials;
    std::uint64_t channel_seed = cfg.channel.seed;
    std::uint64_t mc_seed = cfg.montecarlo.seed;
    std::uint64_t bench_seed = cfg.benchmark.seed;
    if (overrides.seed) {
        mc_seed = *overrides.seed;
        bench_seed = *overrides.seed;
    }

    Table table;
    common_meta(table, command, cfg, channel_seed);
    const Scenario s = build_scenario(cfg, channel_seed);
    const auto& sys = cfg.system;
    std::ostringstream oneliner;

    if (command == "feasibility") {
        const bool ok = check_feasibility(cfg.rate_target, s.cap.r_max);
        table.columns({"rbar", "r_max", "feasible"});
        table.row({cell(cfg.rate_target), cell(s.cap.r_max), ok ? "yes" : "no"});
        oneliner << "r_max = " << format_double(s.cap.r_max) << " bps/Hz; rate target "
                 << format_double(cfg.rate_target) << " is "
                 << (ok ? "feasible" : "infeasible");
    } else if (command == "bounds") {
        table.columns({"design", "rate", "pcrb", "pcrb_upper", "crb_expected"});
        const std::vector<std::string> designs = {"isotropic", "capacity", "sensing-upper",
                                                  "optimal", "suboptimal"};
        QuadratureSpec quad;
        quad.panels = 128;
        quad.rel_tol = 1e-8;
        quad.max_refinements = 6;
        for (const auto& name : designs) {
            const Eigen::MatrixXcd w = design_by_name(name, cfg, s);
            // rank-deficient designs can radiate no power toward angles of
            // positive prior density, making the expected CRB unbounded
            std::string expected = "inf";
            try {
                expected = cell(crb_expected(w, cfg.prior, s.env, sys, quad));
            } catch (const AccuracyError&) {
            } catch (const std::domain_error&) {
            }
            table.row({name, cell(rate(w, s.h, sys.noise_comm_w)),
                       cell(pcrb(w, s.matrices, s.env)), cell(pcrb_upper(w, s.matrices, s.env)),
                       expected});
        }
        oneliner << "bound chain evaluated for " << designs.size() << " designs";
    } else if (command == "beampattern") {
        const std::string design = overrides.design.value_or("optimal");
        const Eigen::MatrixXcd w = design_by_name(design, cfg, s);
        table.meta("design", design);
        table.columns({"theta", "power", "prior_density"});
        const int n_grid = 721;
        for (int i = 0; i < n_grid; ++i) {
            const double theta = kAngleLo + (kAngleHi - kAngleLo) * i / (n_grid - 1.0);
            const double theta_c = std::min(theta, std::nextafter(kAngleHi, 0.0));
            const Eigen::VectorXcd a = steering_tx(theta_c, sys);
            const double power = (a.adjoint() * w * a)(0, 0).real();
            table.row({cell(theta_c), cell(power), cell(gm_pdf(theta_c, cfg.prior))});
        }
        oneliner << "beampattern of '" << design << "' over " << n_grid << " angles";
    } else if (command == "solve-optimal") {
        require_feasible(command, cfg.rate_target, s.cap.r_max);
        const OptimalSolveResult r = solve_p3(s.matrices, s.h, s.env, sys, cfg.rate_target);
        table.columns({"rbar", "t_star", "pcrb", "pcrb_upper", "rate", "trace", "rank_w",
                       "kkt_residual", "iterations", "mu_p", "mu_r", "z2_re", "z2_im"});
        table.row({cell(cfg.rate_target), cell(r.t_star), cell(r.pcrb_value),
                   cell(r.pcrb_upper_value), cell(r.rate_value), cell(r.w.real().trace()),
                   std::to_string(r.rank_w), cell(r.kkt_residual),
                   std::to_string(r.iterations), cell(r.mu_p), cell(r.mu_r), cell(r.z2.real()),
                   cell(r.z2.imag())});
        oneliner << "optimal design: pcrb = " << format_double(r.pcrb_value)
                 << ", rate = " << format_double(r.rate_value) << ", rank " << r.rank_w;
    } else if (command == "solve-suboptimal") {
        require_feasible(command, cfg.rate_target, s.cap.r_max);
        const SuboptimalSolveResult r = solve_p4(s.matrices, s.h, s.env, sys, cfg.rate_target);
        table.columns({"rbar", "pcrb", "pcrb_upper", "rate", "trace", "rank_w", "beta", "mu",
                       "duality_gap", "sensing_only", "iterations"});
        table.row({cell(cfg.rate_target), cell(r.pcrb_value), cell(r.pcrb_upper_value),
                   cell(r.rate_value), cell(r.w.real().trace()), std::to_string(r.rank_w),
                   cell(r.dual.beta), cell(r.dual.mu), cell(r.duality_gap),
                   r.sensing_only ? "yes" : "no", std::to_string(r.iterations)});
        oneliner << "suboptimal design: pcrb = " << format_double(r.pcrb_value)
                 << ", rate = " << format_double(r.rate_value) << ", rank " << r.rank_w;
    } else if (command == "benchmark") {
        require_feasible(command, cfg.rate_target, s.cap.r_max);
        table.meta("benchmark_seed", bench_seed);
        table.meta("benchmark_draws", std::uint64_t(cfg.benchmark.draws));
        QuadratureSpec bench_quad;
        bench_quad.panels = cfg.benchmark.quad_panels;
        bench_quad.nodes_per_panel = 8;
        BenchmarkSpec b1{BenchmarkSpec::Mode::exact, 0.0, 0.0};
        BenchmarkSpec b2{BenchmarkSpec::Mode::inexact, 0.0, cfg.benchmark.perturb_variance};
        const double crb1 = benchmark_expected_crb(b1, s.h, sys, s.env, cfg.prior,
                                                   cfg.rate_target, bench_quad, 1, bench_seed);
        const double crb2 =
            benchmark_expected_crb(b2, s.h, sys, s.env, cfg.prior, cfg.rate_target, bench_quad,
                                   cfg.benchmark.draws, bench_seed);
        table.columns({"scheme", "rbar", "expected_crb", "perturb_variance"});
        table.row({"exact", cell(cfg.rate_target), cell(crb1), cell(0.0)});
        table.row({"inexact", cell(cfg.rate_target), cell(crb2),
                   cell(cfg.benchmark.perturb_variance)});
        oneliner << "benchmarks: exact " << format_double(crb1) << ", inexact "
                 << format_double(crb2);
    } else if (command == "montecarlo") {
        require_feasible(command, cfg.rate_target, s.cap.r_max);
        const std::string design = overrides.design.value_or("optimal");
        const Eigen::MatrixXcd w = design_by_name(design, cfg, s);
        table.meta("mc_seed", mc_seed);
        table.meta("design", design);
        const TrialBatch batch =
            monte_carlo_mse(w, cfg.montecarlo.estimator, s.env, cfg.prior, sys,
                            cfg.montecarlo.trials, mc_seed);
        table.columns({"estimator", "design", "trials", "seed", "mse", "pcrb", "pcrb_upper"});
        table.row({cfg.montecarlo.estimator == Estimator::map ? "map" : "mle", design,
                   std::to_string(batch.trials), std::to_string(batch.seed), cell(batch.mse),
                   cell(pcrb(w, s.matrices, s.env)), cell(pcrb_upper(w, s.matrices, s.env))});
        oneliner << "montecarlo mse = " << format_double(batch.mse) << " over "
                 << batch.trials << " trials";
    } else if (command == "sweep") {
        if (!cfg.sweep) throw ConfigError("sweep command requires a sweep section");
        table.meta("benchmark_seed", bench_seed);
        table.meta("benchmark_draws", std::uint64_t(cfg.benchmark.draws));
        table.columns({"rbar", "pcrb_opt", "pcrb_sub", "pcrb_upper_sub", "crb_expected_bench1",
                       "crb_expected_bench2"});
        for (double rbar : cfg.sweep->grid) require_feasible(command, rbar, s.cap.r_max);

        struct SweepRow {
            double rbar, pcrb_opt, pcrb_sub, pcrb_upper_sub, bench1, bench2;
        };
        QuadratureSpec bench_quad;
        bench_quad.panels = cfg.benchmark.quad_panels;
        bench_quad.nodes_per_panel = 8;
        const auto solve_point = [&](double rbar) {
            SweepRow row{};
            row.rbar = rbar;
            row.pcrb_opt = solve_p3(s.matrices, s.h, s.env, sys, rbar).pcrb_value;
            const SuboptimalSolveResult sub = solve_p4(s.matrices, s.h, s.env, sys, rbar);
            row.pcrb_sub = sub.pcrb_value;
            row.pcrb_upper_sub = sub.pcrb_upper_value;
            BenchmarkSpec b1{BenchmarkSpec::Mode::exact, 0.0, 0.0};
            BenchmarkSpec b2{BenchmarkSpec::Mode::inexact, 0.0,
                             cfg.benchmark.perturb_variance};
            row.bench1 = benchmark_expected_crb(b1, s.h, sys, s.env, cfg.prior, rbar,
                                                bench_quad, 1, bench_seed);
            row.bench2 = benchmark_expected_crb(b2, s.h, sys, s.env, cfg.prior, rbar,
                                                bench_quad, cfg.benchmark.draws, bench_seed);
            return row;
        };
        // dispatch sweep points to a pool; rows land in grid order
        std::vector<std::future<SweepRow>> futures;
        for (double rbar : cfg.sweep->grid)
            futures.push_back(std::async(std::launch::async, solve_point, rbar));
        for (auto& f : futures) {
            const SweepRow r = f.get();
            table.row({cell(r.rbar), cell(r.pcrb_opt), cell(r.pcrb_sub),
                       cell(r.pcrb_upper_sub), cell(r.bench1), cell(r.bench2)});
        }
        oneliner << "swept " << cfg.sweep->grid.size() << " rate targets";
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }

    std::string path = overrides.out_path.value_or(cfg.output.path);
    const bool json_fmt = cfg.output.format == OutputConfig::Format::json;
    if (path.empty()) path = command + (json_fmt ? ".json" : ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << (json_fmt ? table.json_text() : table.csv());
    out.close();

    summary << oneliner.str() << " -> " << path << "\n";
    return path;
}

}  // namespace isac
