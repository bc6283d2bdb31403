#include "riesz/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "riesz/errors.hpp"
#include "riesz/fit.hpp"
#include "riesz/io.hpp"

namespace riesz {

namespace {
constexpr const char* kVersion = "rieszlab 0.1.0";

const char* kind_name(StudyKind k) {
    switch (k) {
        case StudyKind::chaos_scaling: return "chaos_scaling";
        case StudyKind::uniform_time: return "uniform_time";
        case StudyKind::relaxation: return "relaxation";
        case StudyKind::fi_sweep: return "fi_sweep";
    }
    return "?";
}

StudyKind kind_from_name(const std::string& s) {
    if (s == "chaos_scaling") return StudyKind::chaos_scaling;
    if (s == "uniform_time") return StudyKind::uniform_time;
    if (s == "relaxation") return StudyKind::relaxation;
    if (s == "fi_sweep") return StudyKind::fi_sweep;
    throw parameter_error("unknown study kind: " + s);
}
}  // namespace

FitResult fit_powerlaw(std::span<const double> n, std::span<const double> v) {
    if (n.size() < 3) throw fit_error("fit_powerlaw: need >= 3 points");
    std::vector<double> x, y;
    for (size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 0.0) || !(v[i] > 0.0))
            throw fit_error("fit_powerlaw: nonpositive data");
        x.push_back(std::log(n[i]));
        y.push_back(std::log(v[i]));
    }
    auto f = linear_fit(x, y);
    return {f.slope, f.slope_stderr};
}

FitResult fit_exp(std::span<const double> t, std::span<const double> v) {
    if (t.size() < 3) throw fit_error("fit_exp: need >= 3 points");
    std::vector<double> y;
    for (double vi : v) {
        if (!(vi > 0.0)) throw fit_error("fit_exp: nonpositive data");
        y.push_back(std::log(vi));
    }
    std::vector<double> x(t.begin(), t.end());
    auto f = linear_fit(x, y);
    return {-f.slope, f.slope_stderr};
}

void StudyConfig::validate() const {
    if (n_list.empty()) throw parameter_error("StudyConfig: empty N list");
    for (size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw parameter_error("StudyConfig: N list must be strictly increasing");
    if (kind == StudyKind::chaos_scaling && replicas < 8)
        throw parameter_error("StudyConfig: chaos_scaling needs replicas >= 8");
    if (flow != "gradient" && flow != "conservative")
        throw parameter_error("StudyConfig: flow is gradient|conservative");
}

RieszParams StudyConfig::params() const {
    return (flow == "gradient") ? RieszParams::make_gradient(d, s, sigma)
                                : RieszParams::make_conservative(d, s, sigma);
}

nlohmann::json study_config_to_json(const StudyConfig& c) {
    nlohmann::json j;
    j["kind"] = kind_name(c.kind);
    j["d"] = c.d;
    j["s"] = c.s;
    j["flow"] = c.flow;
    j["sigma"] = c.sigma;
    j["n_list"] = c.n_list;
    j["replicas"] = c.replicas;
    j["grid"] = c.grid;
    j["table_grid"] = c.table_grid;
    j["dt_pde"] = c.dt_pde;
    j["dt_sde"] = c.dt_sde;
    j["t_end"] = c.t_end;
    j["n_records"] = c.n_records;
    j["t_first"] = c.t_first;
    j["seed"] = c.seed;
    j["initial"] = c.initial;
    j["eps_reg"] = c.eps_reg;
    j["kmax"] = c.kmax;
    j["interaction"] = c.interaction;
    j["c_cal"] = c.c_cal;
    j["calib_configs"] = c.calib_configs;
    j["fi_fields"] = c.fi_fields;
    j["slope_min"] = c.slope_min;
    j["slope_max"] = c.slope_max;
    j["uniform_ratio_max"] = c.uniform_ratio_max;
    return j;
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
    StudyConfig c;
    c.kind = kind_from_name(j.at("kind").get<std::string>());
    c.d = j.at("d").get<int>();
    c.s = j.at("s").get<double>();
    c.flow = j.at("flow").get<std::string>();
    c.sigma = j.at("sigma").get<double>();
    c.n_list = j.at("n_list").get<std::vector<int>>();
    c.replicas = j.at("replicas").get<int>();
    c.grid = j.at("grid").get<int>();
    c.table_grid = j.at("table_grid").get<int>();
    c.dt_pde = j.at("dt_pde").get<double>();
    c.dt_sde = j.at("dt_sde").get<double>();
    c.t_end = j.at("t_end").get<double>();
    c.n_records = j.at("n_records").get<int>();
    c.t_first = j.at("t_first").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.initial = j.at("initial").get<std::string>();
    c.eps_reg = j.at("eps_reg").get<double>();
    c.kmax = j.at("kmax").get<int>();
    c.interaction = j.at("interaction").get<bool>();
    c.c_cal = j.at("c_cal").get<double>();
    c.calib_configs = j.at("calib_configs").get<int>();
    c.fi_fields = j.value("fi_fields", 5);
    c.slope_min = j.value("slope_min", -1e30);
    c.slope_max = j.value("slope_max", 1e30);
    c.uniform_ratio_max = j.value("uniform_ratio_max", 1e30);
    return c;
}

StudyConfig study_config_from_manifest(const std::string& path) {
    nlohmann::json j = read_json_file(path);
    if (j.contains("config")) j = j.at("config");
    return study_config_from_json(j);
}

std::vector<double> record_grid(double t_first, double t_end, int n_records) {
    if (!(t_first > 0.0) || !(t_end > t_first) || n_records < 4)
        throw parameter_error("record_grid: need 0 < t_first < t_end, >= 4 records");
    std::vector<double> out;
    const int linear = std::min(4, n_records / 2);
    for (int i = 1; i <= linear; ++i) out.push_back(i * t_first);
    const double start = out.back();
    const int rest = n_records - linear;
    for (int i = 1; i <= rest; ++i)
        out.push_back(start * std::pow(t_end / start, static_cast<double>(i) / rest));
    out.back() = t_end;
    return out;
}

double calibrate_me_constant(const ModulatedDiagnostics& diag, const GridField& mu,
                             const RieszParams& params, int n, int configs,
                             uint64_t seed) {
    double worst = 0.0;
    const int kmax = mu.n() / 2;
    for (int c = 0; c < configs; ++c) {
        auto cfg = sample_from_density(mu, n, params, seed, 700000 + static_cast<uint64_t>(c));
        auto me = diag.modulated_energy(cfg, mu, kmax);
        worst = std::max(worst, -(me.f_n + me.log_term) / me.rate_unit);
    }
    return 2.0 * std::max(worst, 1e-12);
}

ChaosResult chaosImpl(const StudyConfig& cfg) {
    auto params = cfg.params();
    const int kmax = (cfg.kmax > 0) ? cfg.kmax : cfg.grid / 2;

    // one shared PDE solve, snapshots at the record times
    std::vector<double> times = record_grid(cfg.t_first, cfg.t_end, cfg.n_records);
    GridField mu0 = initial_profile(cfg.d, cfg.grid, cfg.initial);
    {
        const double m = mu0.mean();
        for (size_t i = 0; i < mu0.size(); ++i) mu0[i] /= m;
    }
    std::vector<GridField> snapshots;
    if (cfg.interaction) {
        PdeSolver solver(params, cfg.grid);
        PdeConfig pc;
        pc.params = params;
        pc.grid = cfg.grid;
        pc.dt = cfg.dt_pde;
        pc.t_end = cfg.t_end;
        pc.record_every = 1 << 20;
        pc.initial = cfg.initial;
        pc.keep_snapshots = true;
        pc.snapshot_times = times;
        PdeRun run = solver.run(pc);
        for (double t : times) {
            // nearest stored snapshot
            double best = 1e300;
            const GridField* pick = nullptr;
            for (const auto& [ts, f] : run.snapshots) {
                if (std::fabs(ts - t) < best) {
                    best = std::fabs(ts - t);
                    pick = &f;
                }
            }
            if (!pick) throw fit_error("chaos_study: missing PDE snapshot");
            snapshots.push_back(*pick);
        }
    } else {
        for (size_t i = 0; i < times.size(); ++i) snapshots.emplace_back(cfg.d, cfg.grid, 1.0);
        mu0 = GridField(cfg.d, cfg.grid, 1.0);
    }

    auto table = std::make_shared<PotentialTable>(
        PotentialTable::build(params, cfg.table_grid, 0.125));
    ModulatedDiagnostics diag(table);

    ChaosResult res;
    res.c_cal = (cfg.c_cal > 0.0)
                    ? cfg.c_cal
                    : calibrate_me_constant(diag, mu0, params, std::min(64, cfg.n_list.front()),
                                            cfg.calib_configs, cfg.seed);

    const double mu0_inf = lp_norm(mu0, std::numeric_limits<double>::infinity());
    for (int n : cfg.n_list) {
        ChaosLeg leg;
        leg.n = n;
        const double eps =
            (cfg.eps_reg >= 0.0) ? cfg.eps_reg
                                 : PairInteraction::default_eps_reg(n, mu0_inf, cfg.d);
        PairInteraction pair(table, cfg.interaction ? eps : 0.0);

        ParticleConfig base;
        base.dim = cfg.d;
        base.count = n;
        base.params = params;
        base.seed = cfg.seed;

        EnsembleConfig ec;
        ec.replicas = cfg.replicas;
        ec.dt = cfg.dt_sde;
        ec.t_end = cfg.t_end;
        ec.record_times = times;
        ec.kmax = kmax;
        ec.threads = cfg.threads;
        ec.drift = cfg.interaction;
        ec.initial_density = &mu0;
        EnsembleResult ens = run_ensemble(base, pair, ec);
        leg.survivors = ens.survivors;
        if (ens.survivors < static_cast<int>(0.9 * cfg.replicas))
            throw blowup_error(cfg.t_end, "chaos_study: ensemble blow-up fraction > 10%");

        for (size_t k = 0; k < ens.records.size(); ++k) {
            const GridField& mu_t = snapshots[k];
            double mean_f = 0.0;
            double log_term = 0.0, rate_unit = 0.0;
            int used = 0;
            for (int r = 0; r < cfg.replicas; ++r) {
                if (ens.blown[static_cast<size_t>(r)]) continue;
                ParticleConfig pc;
                pc.dim = cfg.d;
                pc.count = n;
                pc.params = params;
                pc.x = ens.records[k].positions[static_cast<size_t>(r)];
                auto me = diag.modulated_energy(pc, mu_t, kmax);
                mean_f += me.f_n;
                log_term = me.log_term;
                rate_unit = me.rate_unit;
                ++used;
            }
            mean_f /= used;
            leg.t.push_back(ens.records[k].t);
            leg.mean_f.push_back(mean_f);
            leg.log_term.push_back(log_term);
            leg.rate_term.push_back(res.c_cal * rate_unit);
            leg.ehat.push_back(mean_f + log_term + res.c_cal * rate_unit);
        }
        leg.sup_ehat = *std::max_element(leg.ehat.begin(), leg.ehat.end());
        leg.final_ehat = leg.ehat.back();
        res.legs.push_back(std::move(leg));
    }

    // scaling fit of Ehat(t_end) vs N
    std::vector<double> ns, finals;
    for (const auto& leg : res.legs) {
        ns.push_back(leg.n);
        finals.push_back(std::max(leg.final_ehat, 1e-300));
    }
    res.slope = fit_powerlaw(ns, finals);

    // uniform-in-time ratio for the largest N
    const auto& big = res.legs.back();
    double sup_late = 0.0;
    for (size_t k = 0; k < big.t.size(); ++k)
        if (big.t[k] >= 0.5 * cfg.t_end) sup_late = std::max(sup_late, big.ehat[k]);
    res.uniform_ratio = sup_late / big.ehat.front();

    res.thresholds_ok = res.slope.value >= cfg.slope_min &&
                        res.slope.value <= cfg.slope_max &&
                        res.uniform_ratio <= cfg.uniform_ratio_max;
    return res;
}

ChaosResult chaos_study(const StudyConfig& cfg) {
    cfg.validate();
    return chaosImpl(cfg);
}

RelaxationResult relaxation_study(const StudyConfig& cfg) {
    cfg.validate();
    auto params = cfg.params();
    PdeSolver solver(params, cfg.grid);
    PdeConfig pc;
    pc.params = params;
    pc.grid = cfg.grid;
    pc.dt = cfg.dt_pde;
    pc.t_end = cfg.t_end;
    pc.record_every = std::max(1, static_cast<int>(cfg.t_end / cfg.dt_pde) / 200);
    pc.initial = cfg.initial;
    RelaxationResult out;
    out.run = solver.run(pc);

    std::vector<double> ts, fs, ents, l2s;
    for (const auto& r : out.run.records) {
        ts.push_back(r.t);
        fs.push_back(r.free_energy);
        ents.push_back(r.entropy);
        l2s.push_back(r.l2);
    }
    // fit over the window where values are comfortably above the floor
    auto window = [&](const std::vector<double>& vals) {
        std::vector<double> t, v;
        const double floor = std::max(vals.front() * 1e-8, 1e-13);
        for (size_t i = 0; i < vals.size(); ++i)
            if (vals[i] > floor) {
                t.push_back(ts[i]);
                v.push_back(vals[i]);
            }
        return std::make_pair(t, v);
    };
    if (auto [t, v] = window(fs); t.size() >= 3) out.rate_free_energy = fit_exp(t, v).value;
    if (auto [t, v] = window(ents); t.size() >= 3) out.rate_entropy = fit_exp(t, v).value;
    if (auto [t, v] = window(l2s); t.size() >= 3) {
        out.rate_l2 = fit_exp(t, v).value;
        std::vector<double> ly;
        for (double x : v) ly.push_back(std::log(x));
        out.max_l2_residual = linear_fit(t, ly).max_residual;
    }
    for (size_t i = 1; i < out.run.records.size(); ++i) {
        if (out.run.records[i].linf > out.run.records[i - 1].linf + 1e-8)
            out.linf_monotone = false;
        if (out.run.records[i].entropy > out.run.records[i - 1].entropy + 1e-10)
            out.entropy_monotone = false;
    }
    return out;
}

FiSweepResult fi_sweep(const StudyConfig& cfg) {
    cfg.validate();
    auto params = cfg.params();
    auto table = std::make_shared<PotentialTable>(
        PotentialTable::build(params, cfg.table_grid, 0.125));
    ModulatedDiagnostics diag(table);
    GridField mu0 = initial_profile(cfg.d, cfg.grid, cfg.initial);
    {
        const double m = mu0.mean();
        for (size_t i = 0; i < mu0.size(); ++i) mu0[i] /= m;
    }
    const int kmax = (cfg.kmax > 0) ? cfg.kmax : cfg.grid / 2;

    FiSweepResult res;
    res.c_cal = (cfg.c_cal > 0.0)
                    ? cfg.c_cal
                    : calibrate_me_constant(diag, mu0, params, cfg.n_list.front(),
                                            cfg.calib_configs, cfg.seed);
    for (int n : cfg.n_list) {
        double worst = 0.0;
        for (int c = 0; c < cfg.calib_configs; ++c) {
            auto pc = sample_from_density(mu0, n, params, cfg.seed,
                                          1000 + static_cast<uint64_t>(c));
            for (int fv = 0; fv < cfg.fi_fields; ++fv) {
                auto v = random_band_vector_field(
                    cfg.d, cfg.grid, 3, 1.0,
                    cfg.seed * 131 + static_cast<uint64_t>(fv) + 7);
                auto r = diag.fi_ratio(pc, mu0, v, kmax, res.c_cal);
                if (r.calibration_flag)
                    throw fit_error("fi_sweep: calibration constant too small");
                worst = std::max(worst, r.value);
            }
        }
        res.n_list.push_back(n);
        res.max_ratio.push_back(worst);
    }
    std::vector<double> ns(res.n_list.begin(), res.n_list.end());
    res.slope = fit_powerlaw(ns, res.max_ratio);
    return res;
}

void write_chaos_outputs(const StudyConfig& cfg, const ChaosResult& res) {
    ensure_directory(cfg.out_dir);
    for (const auto& leg : res.legs) {
        CsvWriter csv(cfg.out_dir + "/chaos_N" + std::to_string(leg.n) + ".csv",
                      {"t", "mean_f", "log_term", "rate_term", "ehat", "survivors"});
        for (size_t k = 0; k < leg.t.size(); ++k)
            csv.row({leg.t[k], leg.mean_f[k], leg.log_term[k], leg.rate_term[k],
                     leg.ehat[k], static_cast<double>(leg.survivors)});
    }
    CsvWriter summary(cfg.out_dir + "/summary.csv",
                      {"N", "sup_ehat", "final_ehat", "slope", "slope_stderr",
                       "uniform_ratio", "c_cal"});
    for (const auto& leg : res.legs)
        summary.row({static_cast<double>(leg.n), leg.sup_ehat, leg.final_ehat,
                     res.slope.value, res.slope.stderr_, res.uniform_ratio, res.c_cal});
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = study_config_to_json(cfg);
    manifest["results"] = {{"slope", res.slope.value},
                           {"slope_stderr", res.slope.stderr_},
                           {"uniform_ratio", res.uniform_ratio},
                           {"c_cal", res.c_cal},
                           {"thresholds_ok", res.thresholds_ok}};
    write_json_file(manifest, cfg.out_dir + "/manifest.json");
}

void write_relaxation_outputs(const StudyConfig& cfg, const RelaxationResult& res) {
    ensure_directory(cfg.out_dir);
    CsvWriter csv(cfg.out_dir + "/diagnostics.csv",
                  {"t", "mass", "l1", "l2", "linf", "free_energy", "dissipation",
                   "entropy", "energy", "min_mu", "max_mu", "sobolev_h1"});
    for (const auto& r : res.run.records)
        csv.row({r.t, r.mass, r.l1, r.l2, r.linf, r.free_energy, r.dissipation,
                 r.entropy, r.energy, r.min_mu, r.max_mu, r.sobolev_h1});
    CsvWriter rates(cfg.out_dir + "/rates.csv",
                    {"rate_free_energy", "rate_entropy", "rate_l2", "max_l2_residual",
                     "linf_monotone", "entropy_monotone"});
    rates.row({res.rate_free_energy, res.rate_entropy, res.rate_l2, res.max_l2_residual,
               res.linf_monotone ? 1.0 : 0.0, res.entropy_monotone ? 1.0 : 0.0});
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = study_config_to_json(cfg);
    write_json_file(manifest, cfg.out_dir + "/manifest.json");
}

void write_fi_outputs(const StudyConfig& cfg, const FiSweepResult& res) {
    ensure_directory(cfg.out_dir);
    CsvWriter csv(cfg.out_dir + "/fi_sweep.csv", {"N", "max_ratio", "slope", "slope_stderr", "c_cal"});
    for (size_t i = 0; i < res.n_list.size(); ++i)
        csv.row({static_cast<double>(res.n_list[i]), res.max_ratio[i], res.slope.value,
                 res.slope.stderr_, res.c_cal});
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = study_config_to_json(cfg);
    write_json_file(manifest, cfg.out_dir + "/manifest.json");
}

}  // namespace riesz
