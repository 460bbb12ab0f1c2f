#include "nvqo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "nvqo/csv.hpp"
#include "nvqo/error.hpp"
#include "nvqo/kernels.hpp"
#include "nvqo/noise_table.hpp"
#include "nvqo/rng.hpp"

#ifndef NVQO_VERSION
#define NVQO_VERSION "unknown"
#endif

namespace nvqo {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown field '" + key + "'");
        }
    }
}

template <class T>
T get(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

double get_positive(const json& j, const char* key, double fallback) {
    const double v = get<double>(j, key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("field '") + key + "' must be positive");
    return v;
}

int get_int_at_least(const json& j, const char* key, int fallback, int lo) {
    const int v = get<int>(j, key, fallback);
    if (v < lo) throw ConfigError(std::string("field '") + key + "' must be >= " + std::to_string(lo));
    return v;
}

std::vector<double> number_list(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be a number or an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(std::string("field '") + key + "' must contain numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

LambdaPolicy parse_lambda(const json& j) {
    if (!j.contains("lambda")) return LambdaPolicy::zero();
    const json& v = j.at("lambda");
    if (v.is_number()) return LambdaPolicy::fixed(v.get<double>());
    const auto s = v.get<std::string>();
    if (s == "zero") return LambdaPolicy::zero();
    if (s == "optimal") return LambdaPolicy::optimal();
    throw ConfigError("lambda must be \"zero\", \"optimal\" or a number");
}

NoiseTable noise_table_from(const json& block) {
    if (block.is_string()) return ingest_noise_table(block.get<std::string>());
    require_object(block, "noise table");
    if (block.contains("path")) {
        NoiseTable t = ingest_noise_table(block.at("path").get<std::string>());
        return block.contains("scale") ? t.with_scale(block.at("scale").get<double>()) : t;
    }
    return parse_noise_table(block.dump());
}

bool writing(const RunContext& ctx) { return !ctx.out_dir.empty(); }

std::string out_path(const RunContext& ctx, const std::string& file) {
    std::filesystem::create_directories(ctx.out_dir);
    return (std::filesystem::path(ctx.out_dir) / file).string();
}

void save_checks(const BoundsAuditResult& result, const RunContext& ctx, const std::string& file) {
    CsvTable table({"check", "instance", "lhs", "rhs", "slack", "pass"});
    for (const auto& c : result.checks) {
        table.add_row_text({c.name, std::to_string(c.instance), format_double(c.lhs), format_double(c.rhs),
                            format_double(c.slack()), c.pass ? "1" : "0"});
    }
    table.save(out_path(ctx, file));
}

AuditCheck leq(std::string name, int instance, double lhs, double rhs, double slack) {
    return {std::move(name), instance, lhs, rhs, lhs <= rhs + slack};
}

}  // namespace

NoiseSpec parse_noise(const json& block) {
    if (block.is_null()) return NoNoise{};
    require_object(block, "noise");
    const auto model = get<std::string>(block, "model", "none");
    if (model == "none") {
        check_keys(block, {"model"}, "noise");
        return NoNoise{};
    }
    if (model == "z-depolarizing") {
        check_keys(block, {"model", "eta"}, "noise");
        const double eta = get<double>(block, "eta", 0.0);
        if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("noise.eta must lie in [0, 1]");
        return ZDepolarizing{eta};
    }
    if (model == "gaussian-fluctuation") {
        check_keys(block, {"model", "sigma", "mc_samples", "seed"}, "noise");
        const double sigma = get<double>(block, "sigma", 0.0);
        if (!(sigma >= 0.0)) throw ConfigError("noise.sigma must be >= 0");
        return GaussianFluctuation{sigma, get<int>(block, "mc_samples", 0), get<std::uint64_t>(block, "seed", 0)};
    }
    if (model == "thermal") {
        check_keys(block, {"model", "t1", "t2", "gate_time"}, "noise");
        ThermalRelaxation t{number_list(block, "t1"), number_list(block, "t2"), get<double>(block, "gate_time", 0.0)};
        for (std::size_t i = 0; i < t.t1.size() && i < t.t2.size(); ++i) {
            if (!(t.t1[i] > 0.0) || !(t.t2[i] > 0.0) || t.t2[i] > 2.0 * t.t1[i]) {
                throw ConfigError("noise: need T1 > 0 and 0 < T2 <= 2 T1");
            }
        }
        if (t.gate_time < 0.0) throw ConfigError("noise.gate_time must be >= 0");
        return t;
    }
    if (model == "device") {
        check_keys(block, {"model", "table", "scale", "single_qubit_kind", "two_qubit_kind"}, "noise");
        DeviceNoise d;
        if (block.contains("table")) d.table = noise_table_from(block.at("table"));
        if (block.contains("scale")) d.table = d.table.with_scale(block.at("scale").get<double>());
        d.single_qubit_kind = get<std::string>(block, "single_qubit_kind", d.single_qubit_kind);
        d.two_qubit_kind = get<std::string>(block, "two_qubit_kind", d.two_qubit_kind);
        if (!is_known_gate_kind(d.single_qubit_kind) || !is_known_gate_kind(d.two_qubit_kind)) {
            throw ConfigError("noise: unknown gate kind");
        }
        d.table.validate();
        return d;
    }
    throw ConfigError("unknown noise model '" + model + "'");
}

// ---- qfi-scan ----------------------------------------------------------------

QfiScanConfig parse_qfi_scan(const json& j) {
    QfiScanConfig c;
    if (j.is_null()) return c;
    check_keys(j, {"nqubits", "layers", "etas", "probes", "lambda", "ideal_restarts", "noisy_restarts",
                   "max_iterations", "enumeration_qubit_cap", "radius"},
               "qfi_scan");
    c.nqubits = get_int_at_least(j, "nqubits", c.nqubits, 3);
    c.layers = get_int_at_least(j, "layers", c.layers, 1);
    if (j.contains("etas")) c.etas = number_list(j, "etas");
    if (c.etas.empty()) throw ConfigError("qfi_scan.etas must not be empty");
    for (double e : c.etas) {
        if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("qfi_scan.etas must lie in [0, 1]");
    }
    c.probes = get_int_at_least(j, "probes", c.probes, 1);
    c.lambda = parse_lambda(j);
    c.ideal_minimizer.restarts = get_int_at_least(j, "ideal_restarts", c.ideal_minimizer.restarts, 1);
    c.noisy_minimizer.restarts = get_int_at_least(j, "noisy_restarts", c.noisy_minimizer.restarts, 0);
    const int iters = get_int_at_least(j, "max_iterations", c.ideal_minimizer.max_iterations, 1);
    c.ideal_minimizer.max_iterations = c.noisy_minimizer.max_iterations = iters;
    c.enumeration_qubit_cap = get_int_at_least(j, "enumeration_qubit_cap", c.enumeration_qubit_cap, 1);
    c.radius = get<double>(j, "radius", 0.0);
    if (c.radius < 0.0) throw ConfigError("qfi_scan.radius must be >= 0");
    return c;
}

QfiScanResult run_qfi_scan(const QfiScanConfig& config, const RunContext& ctx) {
    const QaoaSpec spec = QaoaSpec::ring(config.nqubits, config.layers);
    const PauliSum& h = spec.cost_hamiltonian;
    const int p = spec.nparams();
    const double radius = config.radius > 0.0 ? config.radius : default_radius(p);
    const ParametricCircuit ideal = build_qaoa(spec, NoNoise{});

    ExactMinimizerConfig ideal_cfg = config.ideal_minimizer;
    ideal_cfg.seed = derive_seed(ctx.seed, 101);
    const ExactMinimum ideal_min = minimize_exact(ideal, h, ideal_cfg);
    const PureState psi_opt = evolve_pure(ideal, ideal_min.theta);

    QfiScanResult result;
    result.ideal_opt_cost = ideal_min.cost;
    result.ground_energy = min_eigenvalue(h);

    // Noisy optima: forward sweep with warm starts, then a backward pass
    // offering each row the optimum of its neighbour.
    const std::size_t n = config.etas.size();
    std::vector<ParametricCircuit> circuits;
    std::vector<ExactMinimum> optima;
    for (std::size_t i = 0; i < n; ++i) {
        circuits.push_back(build_qaoa(spec, ZDepolarizing{config.etas[i]}));
        ExactMinimizerConfig cfg = config.noisy_minimizer;
        cfg.seed = derive_seed(ctx.seed, 200 + i);
        std::vector<RVector> starts{ideal_min.theta};
        if (i > 0) starts.push_back(optima.back().theta);
        optima.push_back(minimize_exact(circuits[i], h, cfg, starts));
    }
    for (std::size_t i = n; i-- > 0;) {
        ExactMinimizerConfig cfg = config.noisy_minimizer;
        cfg.restarts = 0;
        std::vector<RVector> starts;
        if (i + 1 < n) starts.push_back(optima[i + 1].theta);
        if (i > 0) starts.push_back(optima[i - 1].theta);
        if (starts.empty()) continue;
        ExactMinimum m = minimize_exact(circuits[i], h, cfg, starts);
        if (m.cost < optima[i].cost) optima[i] = std::move(m);
    }

    const auto shared = halton_probes(p, config.probes, derive_seed(ctx.seed, 1));
    const double hnorm = op_norm_inf(h);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<RVector> probes = shared;
        probes.push_back(ideal_min.theta);
        probes.push_back(optima[i].theta);
        double sld_max = 0.0, ld_max = 0.0, qfi_max = 0.0;
        for (const auto& theta : probes) {
            const ProbeStatistics s = probe_statistics(circuits[i], theta, h, config.lambda);
            sld_max = std::max(sld_max, s.sld_second_moment.sum());
            ld_max = std::max(ld_max, s.ld_second_moment.sum());
            qfi_max = std::max(qfi_max, s.qfi.maxCoeff());
        }
        QfiScanRow row;
        row.eta = config.etas[i];
        row.g2_sqrt_sld = std::sqrt(sld_max);
        row.g2_sqrt_ld = std::sqrt(ld_max);
        row.qfi_bound = std::sqrt(static_cast<double>(p)) * hnorm * std::sqrt(qfi_max);
        row.noisy_opt_cost = optima[i].cost;
        row.err_opt = optima[i].cost - ideal_min.cost;

        BoundReport& r = row.report;
        r.err = row.err_opt;
        const PeelingBound peel = peeling_upper(circuits[i], optima[i].theta, ideal, ideal_min.theta, h);
        r.err_peeling_upper = peel.sum_form;
        r.err_peeling_upper_max_form = peel.max_form;
        r.err_fidelity_upper = fidelity_upper(psi_opt, evolve(circuits[i], optima[i].theta), h);
        r.g2_empirical = std::max(sld_max, ld_max);
        r.g2_qfi_upper = row.qfi_bound * row.qfi_bound;
        r.radius = radius;
        r.probe_set_size = probes.size();
        r.seed = ctx.seed;
        r.estimator = "SLD+LD";
        result.rows.push_back(std::move(row));
    }

    if (writing(ctx)) {
        CsvTable table({"eta", "g2_sqrt_LD", "g2_sqrt_SLD", "qfi_bound", "err_opt"});
        for (const auto& row : result.rows) table.add_row({row.eta, row.g2_sqrt_ld, row.g2_sqrt_sld, row.qfi_bound, row.err_opt});
        table.save(out_path(ctx, "qfi_scan.csv"));
        std::vector<std::string> header{"eta"};
        for (const auto& [k, v] : BoundReport{}.to_record()) header.push_back(k);
        CsvTable reports(header);
        for (const auto& row : result.rows) {
            std::vector<std::string> cells{format_double(row.eta)};
            for (const auto& [k, v] : row.report.to_record()) cells.push_back(v);
            reports.add_row_text(std::move(cells));
        }
        reports.save(out_path(ctx, "qfi_scan_reports.csv"));
        write_manifest(ctx, "qfi_scan",
                       {{"nqubits", config.nqubits},
                        {"layers", config.layers},
                        {"nparams", p},
                        {"radius", radius},
                        {"probe_protocol", "halton points in [0, 2pi)^P plus noiseless and noisy optima"},
                        {"probes", config.probes},
                        {"lambda", to_string(config.lambda)},
                        {"ideal_opt_cost", ideal_min.cost},
                        {"ground_energy", result.ground_energy},
                        {"decomposition", ideal.decomposition()}});
    }
    return result;
}

// ---- landscape ---------------------------------------------------------------

LandscapeConfig parse_landscape(const json& j) {
    LandscapeConfig c;
    if (j.is_null()) return c;
    check_keys(j, {"nqubits", "layers", "points", "gamma_range", "beta_range", "noise"}, "landscape");
    c.nqubits = get_int_at_least(j, "nqubits", c.nqubits, 3);
    c.layers = get_int_at_least(j, "layers", c.layers, 1);
    c.points = get_int_at_least(j, "points", c.points, 2);
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto v = number_list(j, key);
        if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(std::string(key) + " must be [min, max] with min < max");
        lo = v[0];
        hi = v[1];
    };
    range("gamma_range", c.gamma_min, c.gamma_max);
    range("beta_range", c.beta_min, c.beta_max);
    if (j.contains("noise")) c.noise = j.at("noise");
    parse_noise(c.noise);  // validate early
    return c;
}

LandscapeResult run_landscape(const LandscapeConfig& config, const RunContext& ctx) {
    const QaoaSpec spec = QaoaSpec::ring(config.nqubits, config.layers);
    const PauliSum& h = spec.cost_hamiltonian;
    const ParametricCircuit ideal = build_qaoa(spec, NoNoise{});
    const ParametricCircuit noisy = build_qaoa(spec, parse_noise(config.noise));
    LandscapeResult result;
    const int m = config.points;
    for (int a = 0; a < m; ++a) {
        const double gamma = config.gamma_min + (config.gamma_max - config.gamma_min) * a / (m - 1);
        for (int b = 0; b < m; ++b) {
            const double beta = config.beta_min + (config.beta_max - config.beta_min) * b / (m - 1);
            RVector theta = RVector::Zero(spec.nparams());
            theta[0] = gamma;
            theta[1] = beta;
            const DensityMatrix r0 = evolve(ideal, theta);
            const DensityMatrix r1 = evolve(noisy, theta);
            result.noiseless.push_back({gamma, beta, expectation(r0, h), variance(r0, h)});
            result.noisy.push_back({gamma, beta, expectation(r1, h), variance(r1, h)});
        }
    }
    if (writing(ctx)) {
        auto save = [&](const std::vector<LandscapePoint>& pts, const std::string& file) {
            CsvTable table({"gamma1", "beta1", "cost", "variance"});
            for (const auto& p : pts) table.add_row({p.gamma1, p.beta1, p.cost, p.variance});
            table.save(out_path(ctx, file));
        };
        save(result.noiseless, "landscape_noiseless.csv");
        save(result.noisy, "landscape_noisy.csv");
        write_manifest(ctx, "landscape",
                       {{"nqubits", config.nqubits},
                        {"layers", config.layers},
                        {"points", config.points},
                        {"noise", describe(parse_noise(config.noise))},
                        {"fixed_parameters", "all parameters other than gamma1, beta1 are 0"},
                        {"decomposition", noisy.decomposition()}});
    }
    return result;
}

// ---- convergence -------------------------------------------------------------

OptimizerConfig default_convergence_optimizer() {
    OptimizerConfig o;
    o.iterations = 200;
    o.learning_rate = LearningRate::constant(0.01);
    o.estimator = EstimatorKind::LD;
    o.shots = 200;
    o.cost_shots = 200;
    o.init = InitPolicy::UniformSmall;
    o.record_exact_cost = true;
    return o;
}

ConvergenceConfig parse_convergence(const json& j, bool full) {
    ConvergenceConfig c;
    if (!j.is_null()) {
        check_keys(j, {"nqubits", "full_nqubits", "layers", "scales", "trials", "iterations", "alpha", "shots",
                       "cost_shots", "batch", "estimator", "lambda", "init", "init_half_width", "init_seed",
                       "learning_rate", "schedule_probes", "noise_table"},
                   "convergence");
        c.nqubits = get_int_at_least(j, "nqubits", c.nqubits, 3);
        c.layers = get_int_at_least(j, "layers", c.layers, 1);
        if (j.contains("scales")) c.scales = number_list(j, "scales");
        for (double f : c.scales) {
            if (!(f >= 0.0)) throw ConfigError("convergence.scales must be >= 0");
        }
        c.trials = get_int_at_least(j, "trials", c.trials, 1);
        auto& o = c.optimizer;
        o.iterations = get_int_at_least(j, "iterations", o.iterations, 1);
        o.learning_rate = LearningRate::constant(get_positive(j, "alpha", o.learning_rate.alpha));
        o.shots = get_int_at_least(j, "shots", o.shots, 0);
        o.cost_shots = get_int_at_least(j, "cost_shots", o.cost_shots, 0);
        o.batch = get_int_at_least(j, "batch", o.batch, 1);
        if (j.contains("estimator")) o.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
        o.lambda = parse_lambda(j);
        if (j.contains("init")) {
            const auto s = j.at("init").get<std::string>();
            if (s == "zero") o.init = InitPolicy::Zero;
            else if (s == "uniform") o.init = InitPolicy::UniformSmall;
            else throw ConfigError("convergence.init must be \"zero\" or \"uniform\"");
        }
        o.init_half_width = get<double>(j, "init_half_width", o.init_half_width);
        o.init_seed = get<std::uint64_t>(j, "init_seed", o.init_seed);
        if (j.contains("learning_rate")) {
            const auto s = j.at("learning_rate").get<std::string>();
            if (s == "schedule") c.schedule = true;
            else if (s != "constant") throw ConfigError("convergence.learning_rate must be \"constant\" or \"schedule\"");
        }
        c.schedule_probes = get_int_at_least(j, "schedule_probes", c.schedule_probes, 0);
        if (j.contains("noise_table")) c.noise_table = j.at("noise_table");
        if (full) c.nqubits = get_int_at_least(j, "full_nqubits", 8, 3);
    } else if (full) {
        c.nqubits = 8;
    }
    c.optimizer.validate();
    noise_table_from(c.noise_table);  // validate early
    return c;
}

ConvergenceResult run_convergence(const ConvergenceConfig& config, const RunContext& ctx) {
    check_qubit_cap(config.nqubits);
    const QaoaSpec spec = QaoaSpec::ring(config.nqubits, config.layers);
    const PauliSum& h = spec.cost_hamiltonian;
    const NoiseTable table = noise_table_from(config.noise_table);
    OptimizerConfig opt = config.optimizer;
    opt.seed = derive_seed(ctx.seed, 300);
    opt.record_exact_cost = true;

    std::vector<RVector> schedule_probes = halton_probes(spec.nparams(), config.schedule_probes, derive_seed(ctx.seed, 301));
    schedule_probes.push_back(initial_parameters(opt, spec.nparams()));
    json rates = json::object();
    auto arm_config = [&](const ParametricCircuit& circuit, const std::string& name) {
        OptimizerConfig o = opt;
        if (config.schedule) {
            const double g = g2_qfi_upper(circuit, schedule_probes, h).bound;
            if (!(g > 0.0)) throw DomainError("convergence: schedule needs G > 0 for arm " + name);
            o.learning_rate = LearningRate::schedule(default_radius(spec.nparams()), g);
        }
        rates[name] = o.learning_rate.value(o.iterations);
        return o;
    };

    ConvergenceResult result;
    const ParametricCircuit ideal = build_qaoa(spec, NoNoise{});
    result.arms.push_back({"noiseless", 0.0, multi_trial(ideal, h, arm_config(ideal, "noiseless"), config.trials)});
    std::string decomposition = ideal.decomposition();
    for (double f : config.scales) {
        DeviceNoise noise;
        noise.table = table.with_scale(f);
        const ParametricCircuit noisy = build_qaoa(spec, noise);
        decomposition = noisy.decomposition();
        const std::string name = "noisy_f" + format_double(f);
        result.arms.push_back({name, f, multi_trial(noisy, h, arm_config(noisy, name), config.trials)});
    }

    if (writing(ctx)) {
        const RVector theta0 = initial_parameters(opt, spec.nparams());
        CsvTable samples({"iter", "arm", "trial", "cost_sampled"});
        CsvTable exact({"iter", "arm", "trial", "cost_exact"});
        CsvTable summary({"iter", "arm", "mean", "ci_low", "ci_high"});
        CsvTable exact_summary({"iter", "arm", "mean", "ci_low", "ci_high"});
        for (const auto& arm : result.arms) {
            for (std::size_t t = 0; t < arm.result.traces.size(); ++t) {
                const auto& trace = arm.result.traces[t];
                for (const auto& r : trace.records) {
                    samples.add_row_text({std::to_string(r.iter), arm.name, std::to_string(t), format_double(r.cost_sampled)});
                    exact.add_row_text({std::to_string(r.iter), arm.name, std::to_string(t), format_double(r.cost_exact)});
                }
                std::ofstream(out_path(ctx, "trace_" + arm.name + "_trial" + std::to_string(t) + ".csv")) << trace.to_csv();
            }
            for (const auto& s : arm.result.sampled) {
                summary.add_row_text({std::to_string(s.iter), arm.name, format_double(s.mean), format_double(s.ci_low),
                                      format_double(s.ci_high)});
            }
            for (const auto& s : arm.result.exact) {
                exact_summary.add_row_text({std::to_string(s.iter), arm.name, format_double(s.mean),
                                            format_double(s.ci_low), format_double(s.ci_high)});
            }
        }
        samples.save(out_path(ctx, "convergence.csv"));
        summary.save(out_path(ctx, "convergence_summary.csv"));
        exact.save(out_path(ctx, "convergence_exact.csv"));
        exact_summary.save(out_path(ctx, "convergence_exact_summary.csv"));
        write_manifest(ctx, "convergence",
                       {{"nqubits", config.nqubits},
                        {"layers", config.layers},
                        {"scales", config.scales},
                        {"trials", config.trials},
                        {"optimizer", opt.echo()},
                        {"learning_rate", config.schedule ? "schedule R / (G sqrt(I)), R = pi sqrt(P)" : "constant"},
                        {"alpha_per_arm", rates},
                        {"initial_theta", std::vector<double>(theta0.begin(), theta0.end())},
                        {"confidence_interval", "mean +- 1.96 standard errors across trials"},
                        {"decomposition", decomposition}});
    }
    return result;
}

double final_level(const std::vector<double>& curve) {
    if (curve.empty()) throw DomainError("final_level: empty curve");
    const std::size_t tail = std::max<std::size_t>(1, curve.size() / 10);
    double sum = 0.0;
    for (std::size_t i = curve.size() - tail; i < curve.size(); ++i) sum += curve[i];
    return sum / static_cast<double>(tail);
}

int iterations_to_converge(const std::vector<double>& curve, double fraction) {
    const double final = final_level(curve);
    const double band = fraction * std::abs(curve.front() - final);
    int last_outside = -1;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (std::abs(curve[i] - final) > band) last_outside = static_cast<int>(i);
    }
    return last_outside + 2;
}

// ---- bounds-audit ----------------------------------------------------------

BoundsAuditConfig parse_bounds_audit(const json& j) {
    BoundsAuditConfig c;
    if (j.is_null()) return c;
    check_keys(j, {"instances", "max_qubits", "max_eta", "perturbation", "depths", "depth_qubits", "depth_eta"},
               "bounds_audit");
    c.instances = get_int_at_least(j, "instances", c.instances, 1);
    c.max_qubits = get_int_at_least(j, "max_qubits", c.max_qubits, 1);
    if (c.max_qubits > 4) throw ConfigError("bounds_audit.max_qubits must be <= 4");
    c.max_eta = get<double>(j, "max_eta", c.max_eta);
    c.perturbation = get<double>(j, "perturbation", c.perturbation);
    if (j.contains("depths")) {
        c.depths.clear();
        for (double d : number_list(j, "depths")) {
            const int v = static_cast<int>(d);
            if (v < 2 || v % 2 != 0) throw ConfigError("bounds_audit.depths must be even and >= 2");
            c.depths.push_back(v);
        }
    }
    c.depth_qubits = get_int_at_least(j, "depth_qubits", c.depth_qubits, 3);
    if (c.depth_qubits > 4) throw ConfigError("bounds_audit.depth_qubits must be <= 4");
    c.depth_eta = get<double>(j, "depth_eta", c.depth_eta);
    return c;
}

bool BoundsAuditResult::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass; });
}

namespace {

PauliString random_string(int n, Rng& rng, bool allow_identity) {
    for (;;) {
        std::vector<Pauli> axes(static_cast<std::size_t>(n));
        for (auto& a : axes) a = static_cast<Pauli>(rng.engine()() % 4);
        PauliString s(std::move(axes));
        if (allow_identity || !s.is_identity()) return s;
    }
}

struct AuditInstance {
    ParametricCircuit noisy;
    ParametricCircuit ideal;
    PauliSum h;
};

AuditInstance random_instance(int index, const BoundsAuditConfig& cfg, Rng& rng) {
    const int kind = index % 4;
    const double eta = cfg.max_eta * rng.uniform();
    if (kind < 2 && cfg.max_qubits >= 3) {
        const int n = 3 + static_cast<int>(rng.engine()() % static_cast<std::uint64_t>(cfg.max_qubits - 2));
        const QaoaSpec spec = QaoaSpec::ring(n, 1 + static_cast<int>(rng.engine()() % 2));
        NoiseSpec noise = ZDepolarizing{eta};
        if (kind == 1) {
            DeviceNoise d;
            d.table = d.table.with_scale(1.0 + 9.0 * rng.uniform());
            noise = d;
        }
        return {build_qaoa(spec, noise), build_qaoa(spec, NoNoise{}), spec.cost_hamiltonian};
    }
    const int n = 1 + static_cast<int>(rng.engine()() % static_cast<std::uint64_t>(cfg.max_qubits));
    const int p = 1 + static_cast<int>(rng.engine()() % 4);
    std::vector<PauliSum> gens;
    for (int j = 0; j < p; ++j) gens.push_back(PauliSum(n, {{1.0, random_string(n, rng, false)}}));
    std::vector<PauliTerm> terms;
    for (int t = 0; t < 3; ++t) terms.push_back({2.0 * rng.uniform() - 1.0, random_string(n, rng, true)});
    PauliSum h(n, std::move(terms));
    NoiseSpec noise = ZDepolarizing{eta};
    if (kind == 3) noise = GaussianFluctuation{std::sqrt(-0.5 * std::log(1.0 - 2.0 * std::min(eta, 0.49))), 0, 0};
    PureState psi0 = PureState::basis(n, rng.engine()() % dim_of(n));
    return {ParametricCircuit::from_generators(gens, noise, psi0),
            ParametricCircuit::from_generators(gens, NoNoise{}, psi0), std::move(h)};
}

}  // namespace

BoundsAuditResult run_bounds_audit(const BoundsAuditConfig& config, const RunContext& ctx) {
    constexpr double kSlack = 1e-9;
    BoundsAuditResult result;
    Rng rng(derive_seed(ctx.seed, 400));
    for (int i = 0; i < config.instances; ++i) {
        const AuditInstance inst = random_instance(i, config, rng);
        const int p = inst.noisy.nparams();
        RVector theta(p), vartheta(p);
        for (int j = 0; j < p; ++j) theta[j] = 2.0 * kPi * rng.uniform();
        vartheta = theta;
        if (i % 2 == 1) {
            for (int j = 0; j < p; ++j) vartheta[j] += config.perturbation * (2.0 * rng.uniform() - 1.0);
        }
        const double e = err(inst.noisy, vartheta, inst.ideal, theta, inst.h);
        const double hn = op_norm_inf(inst.h);
        const PureState psi = evolve_pure(inst.ideal, theta);
        const DensityMatrix rho = evolve(inst.noisy, vartheta);
        const double fid = fidelity_upper(psi, rho, inst.h);
        const PeelingBound peel = peeling_upper(inst.noisy, vartheta, inst.ideal, theta, inst.h);
        result.checks.push_back(leq("err<=2|H|", i, std::abs(e), 2.0 * hn, kSlack));
        result.checks.push_back(leq("err<=fidelity_upper", i, e, fid, kSlack));
        result.checks.push_back(leq("err<=peeling_upper", i, e, peel.sum_form, kSlack));
        result.checks.push_back(leq("peeling_sum<=peeling_max_form", i, peel.sum_form, peel.max_form, kSlack));
    }
    // Depth sweep: homogeneous noisy QAOA gates at theta = vartheta.
    double base = 0.0;
    int base_depth = 0;
    for (int depth : config.depths) {
        const QaoaSpec spec = QaoaSpec::ring(config.depth_qubits, depth / 2);
        const ParametricCircuit noisy = build_qaoa(spec, ZDepolarizing{config.depth_eta});
        const ParametricCircuit ideal = build_qaoa(spec, NoNoise{});
        RVector theta(depth);
        for (int j = 0; j < depth; ++j) theta[j] = 2.0 * kPi * rng.uniform();
        const PeelingBound peel = peeling_upper(noisy, theta, ideal, theta, spec.cost_hamiltonian);
        if (base_depth == 0) {
            base = peel.sum_form;
            base_depth = depth;
        }
        const double expected = base * depth / base_depth;
        const double rel = std::abs(peel.sum_form - expected) / std::max(1e-300, expected);
        result.checks.push_back({"peeling_linear_in_depth", depth, rel, 1e-9, rel <= 1e-9});
        const double forms = std::abs(peel.sum_form - peel.max_form) / std::max(1e-300, peel.sum_form);
        result.checks.push_back({"peeling_forms_coincide", depth, forms, 1e-9, forms <= 1e-9});
    }
    if (writing(ctx)) {
        save_checks(result, ctx, "bounds_audit.csv");
        write_manifest(ctx, "bounds_audit",
                       {{"instances", config.instances},
                        {"max_qubits", config.max_qubits},
                        {"depths", config.depths},
                        {"slack", kSlack},
                        {"diamond_norm", "Choi trace-norm upper bound"},
                        {"all_pass", result.all_pass()}});
    }
    return result;
}

// ---- channel-validate -------------------------------------------------------

ChannelValidateConfig parse_channel_validate(const json& j) {
    ChannelValidateConfig c;
    if (j.is_null()) return c;
    check_keys(j, {"sigmas", "mc_samples", "quadrature_points"}, "channel_validate");
    if (j.contains("sigmas")) c.sigmas = number_list(j, "sigmas");
    for (double s : c.sigmas) {
        if (!(s >= 0.0)) throw ConfigError("channel_validate.sigmas must be >= 0");
    }
    c.mc_samples = get_int_at_least(j, "mc_samples", c.mc_samples, 100);
    c.quadrature_points = get_int_at_least(j, "quadrature_points", c.quadrature_points, 3);
    if (c.quadrature_points % 2 == 0) ++c.quadrature_points;
    return c;
}

CMatrix gaussian_average_choi_simpson(const PauliSum& generator, double sigma, int points) {
    if (!generator.is_involutory(1e-10)) throw DomainError("gaussian average needs X^2 = I");
    if (points < 3) throw DomainError("need at least 3 quadrature points");
    if (points % 2 == 0) ++points;
    const CMatrix x = generator.realize();
    const auto d = x.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    auto vec_of = [&](double angle) {
        const CMatrix u = std::cos(angle) * id + cplx(0, -std::sin(angle)) * x;
        CVector v(d * d);
        for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = u.col(i);
        return v;
    };
    if (sigma == 0.0) {
        const CVector v = vec_of(0.0);
        return v * v.adjoint();
    }
    const double a = -8.0 * sigma, b = 8.0 * sigma;
    const double step = (b - a) / (points - 1);
    CMatrix j = CMatrix::Zero(d * d, d * d);
    for (int i = 0; i < points; ++i) {
        const double t = a + step * i;
        const double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double density = std::exp(-t * t / (2.0 * sigma * sigma)) / std::sqrt(2.0 * kPi * sigma * sigma);
        const CVector v = vec_of(t);
        j.noalias() += (w * density * step / 3.0) * (v * v.adjoint());
    }
    return j;
}

BoundsAuditResult run_channel_validate(const ChannelValidateConfig& config, const RunContext& ctx) {
    BoundsAuditResult result;
    int idx = 0;
    auto tp = [&](const KrausChannel& ch, const std::string& what) {
        result.checks.push_back(leq("trace_preserving:" + what, idx++, ch.trace_preservation_error(), 1e-9, 0.0));
    };
    for (double eta : {0.0, 0.1, 0.25, 0.5, 1.0}) tp(z_depolarizing(eta, {0, 1}), "z_depolarizing");
    for (double p : {0.0, 0.01, 0.3}) tp(depolarizing(p, 2, {0, 1}).to_kraus(), "depolarizing");
    for (double t : {0.0, 0.08, 0.7, 50.0}) tp(thermal_relaxation(55.0, 68.0, t, 0), "thermal_relaxation");

    // Off-diagonal decay e^{-t/T2} and population relaxation 1 - e^{-t/T1}.
    {
        const double t1 = 55.0, t2 = 68.0, t = 0.08;
        const KrausChannel ch = thermal_relaxation(t1, t2, t, 0);
        CMatrix plus = CMatrix::Constant(2, 2, 0.5);
        const CMatrix out = nvqo::apply(ch, plus);
        const double decay = std::abs(out(0, 1)) / 0.5;
        const double expected = std::exp(-t / t2);
        result.checks.push_back(leq("thermal_coherence_decay", idx++, std::abs(decay - expected), 1e-12, 0.0));
        CMatrix one = CMatrix::Zero(2, 2);
        one(1, 1) = 1.0;
        const double moved = nvqo::apply(ch, one)(0, 0).real();
        result.checks.push_back(
            leq("thermal_population_relaxation", idx++, std::abs(moved - (1.0 - std::exp(-t / t1))), 1e-12, 0.0));
    }

    const std::vector<PauliSum> generators{PauliSum::parse("1 X"), PauliSum::parse("1 ZZ"), PauliSum::parse("1 XY")};
    for (double sigma : config.sigmas) {
        for (const auto& g : generators) {
            const KrausChannel analytic = gaussian_fluctuation_channel(g, sigma);
            tp(analytic, "gaussian_fluctuation");
            const CMatrix numeric = gaussian_average_choi_simpson(g, sigma, config.quadrature_points);
            const double diff = (choi(analytic) - numeric).cwiseAbs().maxCoeff();
            result.checks.push_back(leq("gaussian_channel_vs_quadrature", idx++, diff, 1e-8, 0.0));
        }
        const double mc = monte_carlo_fluctuation_check(generators.front(), sigma, config.mc_samples,
                                                        derive_seed(ctx.seed, 500 + static_cast<std::uint64_t>(idx)));
        const double limit = sigma == 0.0 ? 1e-12 : 5.0 / std::sqrt(static_cast<double>(config.mc_samples));
        result.checks.push_back(leq("gaussian_channel_monte_carlo", idx++, mc, limit, 0.0));
    }
    if (writing(ctx)) {
        save_checks(result, ctx, "channel_validate.csv");
        write_manifest(ctx, "channel_validate",
                       {{"sigmas", config.sigmas},
                        {"mc_samples", config.mc_samples},
                        {"quadrature", "composite Simpson on [-8 sigma, 8 sigma]"},
                        {"quadrature_points", config.quadrature_points},
                        {"all_pass", result.all_pass()}});
    }
    return result;
}

// ---- outputs -----------------------------------------------------------------

std::string version_string() { return NVQO_VERSION; }

void write_manifest(const RunContext& ctx, const std::string& name, const json& extra) {
    if (!writing(ctx)) return;
    json m = {{"experiment", name},
              {"seed", ctx.seed},
              {"version", version_string()},
              {"kernel_backend", kernels::name(kernels::active_backend())},
              {"full", ctx.full},
              {"config", ctx.config}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream out(out_path(ctx, name + ".manifest.json"));
    if (!out) throw Error("cannot write manifest for " + name);
    out << m.dump(2) << '\n';
}

}  // namespace nvqo
