// Command-line laboratory: periodic Riesz potentials, the mean-field PDE,
// the interacting SDE, and the modulated-energy studies.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "riesz/diagnostics.hpp"
#include "riesz/errors.hpp"
#include "riesz/experiments.hpp"
#include "riesz/io.hpp"
#include "riesz/particles.hpp"
#include "riesz/pde.hpp"
#include "riesz/potential.hpp"

using namespace riesz;

namespace {

RieszParams make_params(int d, double s, const std::string& flow, double sigma) {
    return flow == "conservative" ? RieszParams::make_conservative(d, s, sigma)
                                  : RieszParams::make_gradient(d, s, sigma);
}

std::vector<double> parse_point(const std::string& text, int d) {
    std::vector<double> x;
    std::string tok;
    for (char c : text + ",") {
        if (c == ',') {
            if (!tok.empty()) x.push_back(std::stod(tok));
            tok.clear();
        } else {
            tok += c;
        }
    }
    if (static_cast<int>(x.size()) != d)
        throw parameter_error("--eval expects " + std::to_string(d) + " coordinates");
    return x;
}

void add_study_options(CLI::App* cmd, StudyConfig& cfg) {
    cmd->add_option("--d", cfg.d, "dimension (1 or 2)");
    cmd->add_option("--s", cfg.s, "Riesz exponent");
    cmd->add_option("--flow", cfg.flow, "gradient|conservative");
    cmd->add_option("--sigma", cfg.sigma, "temperature");
    cmd->add_option("--N", cfg.n_list, "particle counts (increasing)");
    cmd->add_option("--replicas", cfg.replicas, "ensemble replicas");
    cmd->add_option("--grid", cfg.grid, "PDE grid per dimension");
    cmd->add_option("--table-grid", cfg.table_grid, "potential table resolution");
    cmd->add_option("--dt-pde", cfg.dt_pde, "PDE time step");
    cmd->add_option("--dt-sde", cfg.dt_sde, "SDE time step");
    cmd->add_option("--t-end", cfg.t_end, "horizon");
    cmd->add_option("--records", cfg.n_records, "number of record times");
    cmd->add_option("--t-first", cfg.t_first, "first record time");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--initial", cfg.initial, "initial density profile");
    cmd->add_option("--eps-reg", cfg.eps_reg, "force regularization (<0: default)");
    cmd->add_option("--kmax", cfg.kmax, "spectral cutoff (0: grid Nyquist)");
    cmd->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
    cmd->add_option("--c-cal", cfg.c_cal, "calibration constant (0: calibrate)");
    cmd->add_option("--calib-configs", cfg.calib_configs, "configs per calibration");
    cmd->add_option("--fi-fields", cfg.fi_fields, "transports per configuration");
    cmd->add_option("--slope-min", cfg.slope_min, "acceptance: slope lower bound");
    cmd->add_option("--slope-max", cfg.slope_max, "acceptance: slope upper bound");
    cmd->add_option("--uniform-ratio-max", cfg.uniform_ratio_max,
                    "acceptance: uniform-in-time ratio bound");
    cmd->add_flag("--no-interaction{false}", cfg.interaction,
                  "zero-interaction control (pure diffusion)");
    cmd->add_option("--out", cfg.out_dir, "output directory")->required();
    cmd->set_config("--config", "", "TOML config file");
}

int run_chaos_like(StudyConfig cfg, const std::string& from_manifest, bool uniform_time) {
    if (!from_manifest.empty()) {
        std::string out = cfg.out_dir;
        cfg = study_config_from_manifest(from_manifest);
        cfg.out_dir = out;
    }
    cfg.kind = uniform_time ? StudyKind::uniform_time : StudyKind::chaos_scaling;
    auto res = chaos_study(cfg);
    write_chaos_outputs(cfg, res);
    std::printf("chaos-study: slope %.4f +- %.4f, uniform ratio %.3f, C_cal %.4g\n",
                res.slope.value, res.slope.stderr_, res.uniform_ratio, res.c_cal);
    if (!res.thresholds_ok) {
        std::fprintf(stderr, "acceptance thresholds violated\n");
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for periodic Riesz mean-field dynamics"};
    app.require_subcommand(1);

    // ---- potential -------------------------------------------------------
    int pd = 1;
    double ps = 0.0, pcut = 0.125;
    int pgrid = 2048;
    std::string peval, psave, pload;
    auto* pot = app.add_subcommand("potential", "evaluate the periodic Riesz potential");
    pot->add_option("--d", pd);
    pot->add_option("--s", ps);
    pot->add_option("--grid", pgrid);
    pot->add_option("--cutoff", pcut);
    pot->add_option("--eval", peval, "comma-separated point(s); ; separates points");
    pot->add_option("--save", psave, "serialize the table");
    pot->add_option("--load", pload, "load a serialized table instead of building");

    // ---- pde run ---------------------------------------------------------
    auto* pde = app.add_subcommand("pde", "mean-field PDE");
    auto* pderun = pde->add_subcommand("run", "integrate the PDE");
    struct {
        int d = 2;
        double s = 0.0;
        std::string flow = "gradient";
        double sigma = 0.25;
        int grid = 128;
        double dt = 1e-3;
        double t_end = 1.0;
        int record_every = 10;
        std::string initial = "single_mode(0.3,1)";
        std::vector<double> snapshots;
        bool adapt = false;
        std::string out;
    } pc;
    pderun->add_option("--d", pc.d);
    pderun->add_option("--s", pc.s);
    pderun->add_option("--flow", pc.flow);
    pderun->add_option("--sigma", pc.sigma);
    pderun->add_option("--grid", pc.grid);
    pderun->add_option("--dt", pc.dt);
    pderun->add_option("--t-end", pc.t_end);
    pderun->add_option("--record-every", pc.record_every);
    pderun->add_option("--initial", pc.initial);
    pderun->add_option("--snapshots", pc.snapshots, "snapshot times");
    pderun->add_flag("--adapt", pc.adapt, "adaptive dt for stiff transients");
    pderun->add_option("--out", pc.out)->required();
    pderun->set_config("--config", "", "TOML config file");

    // ---- sde run ---------------------------------------------------------
    auto* sde = app.add_subcommand("sde", "interacting particle SDE");
    auto* sderun = sde->add_subcommand("run", "integrate the N-body SDE ensemble");
    struct {
        int d = 1;
        double s = 0.5;
        std::string flow = "gradient";
        double sigma = 0.25;
        int count = 256;
        int replicas = 8;
        double dt = 1e-3;
        double t_end = 1.0;
        uint64_t seed = 1;
        double eps_reg = -1.0;
        int kmax = 32;
        int grid = 256;
        int table_grid = 2048;
        std::string initial = "uniform";
        std::vector<double> record_times;
        bool trajectories = false;
        int threads = 0;
        std::string out;
    } sc;
    sderun->add_option("--d", sc.d);
    sderun->add_option("--s", sc.s);
    sderun->add_option("--flow", sc.flow);
    sderun->add_option("--sigma", sc.sigma);
    sderun->add_option("--N", sc.count);
    sderun->add_option("--replicas", sc.replicas);
    sderun->add_option("--dt", sc.dt);
    sderun->add_option("--t-end", sc.t_end);
    sderun->add_option("--seed", sc.seed);
    sderun->add_option("--eps-reg", sc.eps_reg);
    sderun->add_option("--kmax", sc.kmax);
    sderun->add_option("--grid", sc.grid);
    sderun->add_option("--table-grid", sc.table_grid);
    sderun->add_option("--initial", sc.initial);
    sderun->add_option("--record-times", sc.record_times);
    sderun->add_flag("--trajectories", sc.trajectories, "write binary position frames");
    sderun->add_option("--threads", sc.threads);
    sderun->add_option("--out", sc.out)->required();
    sderun->set_config("--config", "", "TOML config file");

    // ---- me-check --------------------------------------------------------
    struct {
        int d = 1;
        double s = 0.5;
        double sigma = 0.25;
        std::vector<int> n_list{128, 256, 512, 1024};
        int calib_n = 64;
        int configs = 200;
        uint64_t seed = 1;
        std::string mu = "uniform";
        int grid = 256;
        int table_grid = 2048;
        std::string out;
    } mc;
    auto* mecheck = app.add_subcommand("me-check", "modulated-energy lower-bound check");
    mecheck->add_option("--d", mc.d);
    mecheck->add_option("--s", mc.s);
    mecheck->add_option("--N", mc.n_list);
    mecheck->add_option("--calib-N", mc.calib_n);
    mecheck->add_option("--configs", mc.configs);
    mecheck->add_option("--seed", mc.seed);
    mecheck->add_option("--mu", mc.mu, "background density profile");
    mecheck->add_option("--grid", mc.grid);
    mecheck->add_option("--table-grid", mc.table_grid);
    mecheck->add_option("--out", mc.out)->required();
    mecheck->set_config("--config", "", "TOML config file");

    // ---- fi-check --------------------------------------------------------
    StudyConfig fic;
    fic.kind = StudyKind::fi_sweep;
    fic.n_list = {32, 64, 128, 256, 512};
    fic.calib_configs = 100;
    auto* ficheck = app.add_subcommand("fi-check", "transport functional-inequality sweep");
    add_study_options(ficheck, fic);

    // ---- chaos-study / uniform-time / relaxation --------------------------
    StudyConfig cc;
    std::string chaos_manifest;
    auto* chaos = app.add_subcommand("chaos-study", "propagation-of-chaos scaling study");
    add_study_options(chaos, cc);
    chaos->add_option("--from-manifest", chaos_manifest, "rerun from a manifest.json");

    StudyConfig uc;
    std::string ut_manifest;
    auto* utime = app.add_subcommand("uniform-time", "uniform-in-time boundedness study");
    add_study_options(utime, uc);
    utime->add_option("--from-manifest", ut_manifest, "rerun from a manifest.json");

    StudyConfig rc;
    rc.kind = StudyKind::relaxation;
    rc.d = 2;
    rc.s = 0.0;
    rc.grid = 128;
    rc.t_end = 1.0;
    auto* relax = app.add_subcommand("relaxation", "PDE relaxation-rate study");
    add_study_options(relax, rc);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pot->parsed()) {
            auto params = RieszParams::make_gradient(pd, ps, 0.25);
            PotentialTable table = pload.empty()
                                       ? PotentialTable::build(params, pgrid, pcut)
                                       : PotentialTable::load(pload);
            if (!psave.empty()) table.save(psave);
            if (!peval.empty()) {
                std::string part;
                for (char c : peval + ";") {
                    if (c == ';') {
                        if (part.empty()) continue;
                        auto x = parse_point(part, pd);
                        double grad[3] = {0, 0, 0};
                        table.eval_grad_g(x.data(), grad);
                        nlohmann::json line;
                        line["x"] = x;
                        line["g"] = table.eval_g(x.data());
                        std::vector<double> gv(grad, grad + pd);
                        line["grad_g"] = gv;
                        std::printf("%s\n", line.dump().c_str());
                        part.clear();
                    } else {
                        part += c;
                    }
                }
            }
            return 0;
        }

        if (pderun->parsed()) {
            auto params = make_params(pc.d, pc.s, pc.flow, pc.sigma);
            PdeSolver solver(params, pc.grid);
            PdeConfig cfg;
            cfg.params = params;
            cfg.grid = pc.grid;
            cfg.dt = pc.dt;
            cfg.t_end = pc.t_end;
            cfg.record_every = pc.record_every;
            cfg.initial = pc.initial;
            cfg.adapt_dt = pc.adapt;
            cfg.keep_snapshots = !pc.snapshots.empty();
            cfg.snapshot_times = pc.snapshots;
            PdeRun run = solver.run(cfg);
            ensure_directory(pc.out);
            CsvWriter csv(pc.out + "/diagnostics.csv",
                          {"t", "mass", "l1", "l2", "linf", "free_energy", "dissipation",
                           "entropy", "energy", "min_mu", "max_mu", "sobolev_h1"});
            for (const auto& r : run.records)
                csv.row({r.t, r.mass, r.l1, r.l2, r.linf, r.free_energy, r.dissipation,
                         r.entropy, r.energy, r.min_mu, r.max_mu, r.sobolev_h1});
            int idx = 0;
            for (const auto& [t, f] : run.snapshots)
                save_field(f, pc.out + "/snapshot_" + std::to_string(idx++) + ".bin", "mu", t);
            nlohmann::json manifest;
            manifest["version"] = "rieszlab 0.1.0";
            manifest["config"] = {{"d", pc.d},       {"s", pc.s},
                                  {"flow", pc.flow}, {"sigma", pc.sigma},
                                  {"grid", pc.grid}, {"dt", pc.dt},
                                  {"t_end", pc.t_end}, {"record_every", pc.record_every},
                                  {"initial", pc.initial}, {"adapt", pc.adapt},
                                  {"dt_used", run.dt_used}};
            write_json_file(manifest, pc.out + "/manifest.json");
            std::printf("pde run: %zu records, dt used %.3g\n", run.records.size(), run.dt_used);
            return 0;
        }

        if (sderun->parsed()) {
            auto params = make_params(sc.d, sc.s, sc.flow, sc.sigma);
            auto table = std::make_shared<PotentialTable>(
                PotentialTable::build(params, sc.table_grid, 0.125));
            GridField mu0 = initial_profile(sc.d, sc.grid, sc.initial);
            const double m = mu0.mean();
            for (size_t i = 0; i < mu0.size(); ++i) mu0[i] /= m;
            const double mu_inf = lp_norm(mu0, std::numeric_limits<double>::infinity());
            const double eps = sc.eps_reg >= 0 ? sc.eps_reg
                                               : PairInteraction::default_eps_reg(
                                                     sc.count, mu_inf, sc.d);
            PairInteraction pair(table, eps);
            ParticleConfig base;
            base.dim = sc.d;
            base.count = sc.count;
            base.params = params;
            base.seed = sc.seed;
            EnsembleConfig ec;
            ec.replicas = sc.replicas;
            ec.dt = sc.dt;
            ec.t_end = sc.t_end;
            ec.record_times = sc.record_times;
            ec.kmax = sc.kmax;
            ec.threads = sc.threads;
            ec.initial_density = &mu0;
            EnsembleResult res = run_ensemble(base, pair, ec);

            ensure_directory(sc.out);
            {
                std::vector<std::string> cols{"t"};
                for (int a = 0; a < sc.d; ++a) cols.push_back("xi" + std::to_string(a));
                cols.push_back("re");
                cols.push_back("im");
                cols.push_back("replica");
                CsvWriter csv(sc.out + "/empirical_fourier.csv", cols);
                for (const auto& rec : res.records)
                    for (int r = 0; r < sc.replicas; ++r) {
                        if (res.blown[static_cast<size_t>(r)]) continue;
                        const auto& sp = rec.spectra[static_cast<size_t>(r)];
                        if (sc.d == 1) {
                            for (int k = -sp.kmax; k <= sp.kmax; ++k)
                                csv.row({rec.t, static_cast<double>(k), sp.at(k).real(),
                                         sp.at(k).imag(), static_cast<double>(r)});
                        } else {
                            for (int k0 = -sp.kmax; k0 <= sp.kmax; ++k0)
                                for (int k1 = -sp.kmax; k1 <= sp.kmax; ++k1)
                                    csv.row({rec.t, static_cast<double>(k0),
                                             static_cast<double>(k1), sp.at(k0, k1).real(),
                                             sp.at(k0, k1).imag(), static_cast<double>(r)});
                        }
                    }
            }
            if (sc.trajectories) {
                for (int r = 0; r < sc.replicas; ++r) {
                    if (res.blown[static_cast<size_t>(r)]) continue;
                    std::string path = sc.out + "/traj_r" + std::to_string(r) + ".bin";
                    FILE* f = std::fopen(path.c_str(), "wb");
                    if (!f) throw io_error("cannot open " + path);
                    uint32_t nrec = static_cast<uint32_t>(res.records.size());
                    uint32_t count = static_cast<uint32_t>(sc.count), dim = static_cast<uint32_t>(sc.d);
                    std::fwrite(&nrec, 4, 1, f);
                    std::fwrite(&count, 4, 1, f);
                    std::fwrite(&dim, 4, 1, f);
                    for (const auto& rec : res.records) {
                        std::fwrite(&rec.t, 8, 1, f);
                        const auto& xs = rec.positions[static_cast<size_t>(r)];
                        std::fwrite(xs.data(), 8, xs.size(), f);
                    }
                    std::fclose(f);
                }
            }
            nlohmann::json manifest;
            manifest["version"] = "rieszlab 0.1.0";
            manifest["config"] = {{"d", sc.d}, {"s", sc.s}, {"flow", sc.flow},
                                  {"sigma", sc.sigma}, {"N", sc.count},
                                  {"replicas", sc.replicas}, {"dt", sc.dt},
                                  {"t_end", sc.t_end}, {"seed", sc.seed},
                                  {"eps_reg", eps}, {"kmax", sc.kmax},
                                  {"grid", sc.grid}, {"table_grid", sc.table_grid},
                                  {"initial", sc.initial},
                                  {"record_times", sc.record_times}};
            manifest["survivors"] = res.survivors;
            write_json_file(manifest, sc.out + "/manifest.json");
            std::printf("sde run: %d/%d replicas finished\n", res.survivors, sc.replicas);
            return 0;
        }

        if (mecheck->parsed()) {
            auto params = RieszParams::make_gradient(mc.d, mc.s, mc.sigma);
            auto table = std::make_shared<PotentialTable>(
                PotentialTable::build(params, mc.table_grid, 0.125));
            ModulatedDiagnostics diag(table);
            GridField mu = initial_profile(mc.d, mc.grid, mc.mu);
            const double m = mu.mean();
            for (size_t i = 0; i < mu.size(); ++i) mu[i] /= m;
            const double c_cal =
                calibrate_me_constant(diag, mu, params, mc.calib_n, mc.configs, mc.seed);
            const int kmax = mc.grid / 2;
            CsvWriter csv(mc.out, {"N", "config", "f_n", "lower_bound", "ok"});
            int violations = 0;
            for (int n : mc.n_list) {
                for (int c = 0; c < mc.configs; ++c) {
                    auto cfg = sample_from_density(mu, n, params, mc.seed,
                                                   9000 + static_cast<uint64_t>(c));
                    auto me = diag.modulated_energy(cfg, mu, kmax);
                    const double lb = diag.me_lower_bound(cfg, mu, c_cal);
                    const bool ok = me.f_n >= lb;
                    violations += ok ? 0 : 1;
                    csv.row({static_cast<double>(n), static_cast<double>(c), me.f_n, lb,
                             ok ? 1.0 : 0.0});
                }
            }
            std::printf("me-check: C_cal %.4g, %d violations\n", c_cal, violations);
            return violations == 0 ? 0 : 2;
        }

        if (ficheck->parsed()) {
            fic.kind = StudyKind::fi_sweep;
            auto res = fi_sweep(fic);
            write_fi_outputs(fic, res);
            std::printf("fi-check: slope %.4f +- %.4f, C_cal %.4g\n", res.slope.value,
                        res.slope.stderr_, res.c_cal);
            return (res.slope.value <= fic.slope_max) ? 0 : 2;
        }

        if (chaos->parsed()) return run_chaos_like(cc, chaos_manifest, false);
        if (utime->parsed()) return run_chaos_like(uc, ut_manifest, true);

        if (relax->parsed()) {
            rc.kind = StudyKind::relaxation;
            auto res = relaxation_study(rc);
            write_relaxation_outputs(rc, res);
            std::printf("relaxation: F rate %.3f, Ent rate %.3f, L2 rate %.3f\n",
                        res.rate_free_energy, res.rate_entropy, res.rate_l2);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
