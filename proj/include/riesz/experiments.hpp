#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "riesz/diagnostics.hpp"
#include "riesz/pde.hpp"

namespace riesz {

struct FitResult {
    double value = 0;   // slope (power law) or decay rate (exponential)
    double stderr_ = 0;
};

// log-log least squares; value is the slope of log v against log n.
FitResult fit_powerlaw(std::span<const double> n, std::span<const double> v);
// log-linear least squares; value is the decay rate r of v ~ e^{-r t}.
FitResult fit_exp(std::span<const double> t, std::span<const double> v);

enum class StudyKind { chaos_scaling, uniform_time, relaxation, fi_sweep };

struct StudyConfig {
    StudyKind kind = StudyKind::chaos_scaling;
    int d = 1;
    double s = 0.5;
    std::string flow = "gradient";
    double sigma = 0.25;
    std::vector<int> n_list{128, 256, 512, 1024};
    int replicas = 32;
    int grid = 256;          // PDE grid per dimension
    int table_grid = 2048;   // potential table resolution
    double dt_pde = 1e-3;
    double dt_sde = 2e-3;
    double t_end = 8.0;
    int n_records = 16;
    double t_first = 0.05;   // first (linear-phase) record time
    uint64_t seed = 1;
    std::string initial = "single_mode(0.25,1)";
    double eps_reg = -1.0;   // < 0: (N ||mu0||_inf)^{-1/d}/8 per leg
    int kmax = 0;            // 0: PDE grid Nyquist
    bool interaction = true; // false: zero-interaction control
    int threads = 0;
    double c_cal = 0.0;      // 0: calibrate at the smallest N (x2 safety)
    int calib_configs = 200;
    int fi_fields = 5;       // random transports per configuration (fi_sweep)
    std::string out_dir;
    // acceptance thresholds; violating them flips the process exit code
    double slope_min = -1e30;
    double slope_max = 1e30;
    double uniform_ratio_max = 1e30;

    void validate() const;
    RieszParams params() const;
};

nlohmann::json study_config_to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const nlohmann::json& j);
// Accepts either a bare config object or a study manifest wrapping one.
StudyConfig study_config_from_manifest(const std::string& path);

// A linear head of t_first spacings followed by geometric refinement, so
// both the short-time transient and the exponential tail are sampled.
std::vector<double> record_grid(double t_first, double t_end, int n_records);

// One-time calibration of the unknown lower-bound constant: the max over
// random iid configurations at size n of the violation, times 2.
double calibrate_me_constant(const ModulatedDiagnostics& diag, const GridField& mu,
                             const RieszParams& params, int n, int configs,
                             uint64_t seed);

struct ChaosLeg {
    int n = 0;
    int survivors = 0;
    std::vector<double> t;
    std::vector<double> mean_f;    // ensemble mean modulated energy
    std::vector<double> log_term;  // s = 0 offset
    std::vector<double> rate_term; // c_cal ||mu^t||_inf^{s/d} N^{s/d-1}
    std::vector<double> ehat;      // sum of the three
    double sup_ehat = 0;
    double final_ehat = 0;
};

struct ChaosResult {
    std::vector<ChaosLeg> legs;
    double c_cal = 0;
    FitResult slope;          // log Ehat(t_end) vs log N
    double uniform_ratio = 0; // sup_{t in [T/2, T]} Ehat / Ehat(t_first), largest N
    bool thresholds_ok = true;
};

ChaosResult chaos_study(const StudyConfig& cfg);

struct RelaxationResult {
    PdeRun run;
    double rate_free_energy = 0;   // fitted decay rate of F_sigma
    double rate_entropy = 0;
    double rate_l2 = 0;
    double max_l2_residual = 0;    // max log-residual of the L2 exponential fit
    bool linf_monotone = true;
    bool entropy_monotone = true;
};

RelaxationResult relaxation_study(const StudyConfig& cfg);

struct FiSweepResult {
    std::vector<int> n_list;
    std::vector<double> max_ratio;
    double c_cal = 0;
    FitResult slope;  // log max-ratio vs log N
};

FiSweepResult fi_sweep(const StudyConfig& cfg);

// Writes per-N CSVs, a summary CSV and manifest.json into cfg.out_dir.
void write_chaos_outputs(const StudyConfig& cfg, const ChaosResult& res);
void write_relaxation_outputs(const StudyConfig& cfg, const RelaxationResult& res);
void write_fi_outputs(const StudyConfig& cfg, const FiSweepResult& res);

}  // namespace riesz
