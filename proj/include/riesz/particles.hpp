#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "riesz/grid.hpp"
#include "riesz/params.hpp"
#include "riesz/potential.hpp"

namespace riesz {

// N torus points plus run metadata.  Coordinates are stored flat (N x d),
// wrapped to [-1/2, 1/2).
struct ParticleConfig {
    int dim = 1;
    int count = 0;
    std::vector<double> x;
    RieszParams params;
    double t = 0.0;
    uint64_t seed = 0;
    uint64_t replica = 0;
    long step = 0;

    double* at(int i) { return x.data() + static_cast<size_t>(i) * dim; }
    const double* at(int i) const { return x.data() + static_cast<size_t>(i) * dim; }
    void wrap();
    double min_pair_distance() const;
};

// Pairwise force and energy evaluator bound to a potential table, with the
// mollified near-collision potential: g_eps = g for r >= eps/8, smoothly
// capped below via the bump chi_eps (1 on r <= eps/16), so
//   grad g_eps = grad g (1 - chi_eps) - g_E chi_eps' + grad(g - g_E) chi_eps.
// eps = 0 selects the exact singular force.  Immutable and shareable.
class PairInteraction {
public:
    PairInteraction(std::shared_ptr<const PotentialTable> table, double eps_reg);

    static double default_eps_reg(int count, double mu_linf, int dim);

    double eps_reg() const { return eps_; }
    const PotentialTable& table() const { return *table_; }

    // force_i = (1/N) sum_{j != i} M grad g_eps(x_i - x_j); O(N^2) pair loop
    // with exact action-reaction accumulation.
    void forces(const ParticleConfig& cfg, std::span<double> out) const;

    // (1/(2 N^2)) sum_{i != j} g(x_i - x_j)
    double interaction_energy(const ParticleConfig& cfg) const;

    // regularized pair gradient at displacement dx (|dx| = r, min image)
    void pair_gradient(const double* dx, double r, double* out) const;

private:
    std::shared_ptr<const PotentialTable> table_;
    double eps_ = 0.0;
    BumpProfile reg_bump_;  // Appendix-A style cap profile
    std::shared_ptr<const RadialKernel> radial_;  // d = 1 fast path
    // dense profile of the regularized radial force on [0, eps/8]
    std::vector<double> reg_profile_;
    double reg_step_ = 0.0;
    double regularized_dg(double r) const;
};

// One Euler-Maruyama step: x += dt force + sqrt(2 sigma dt) xi, with the
// noise drawn from the counter-based stream (seed, replica, step, particle).
void em_step(ParticleConfig& cfg, double dt, const PairInteraction& pair);
void em_step_noise_only(ParticleConfig& cfg, double dt);

// Exact nonuniform Fourier coefficients of the empirical measure on the full
// cube |xi|_inf <= kmax: muhat_N(xi) = (1/N) sum_i e^{-2 pi i xi.x_i}.
struct EmpiricalSpectrum {
    int dim = 1;
    int kmax = 0;
    std::vector<std::complex<double>> c;  // (2 kmax + 1)^dim, row-major

    std::complex<double> at(int k0, int k1 = 0) const {
        const int w = 2 * kmax + 1;
        size_t idx = static_cast<size_t>(k0 + kmax);
        if (dim == 2) idx = idx * static_cast<size_t>(w) + static_cast<size_t>(k1 + kmax);
        return c[idx];
    }
};

EmpiricalSpectrum empirical_fourier(const ParticleConfig& cfg, int kmax);

// i.i.d. uniform configuration from the (seed, replica) stream.
ParticleConfig random_uniform_config(int count, const RieszParams& params,
                                     uint64_t seed, uint64_t replica);

// i.i.d. sampling from a grid density: exact inverse-CDF of the piecewise
// linear interpolant in d = 1, rejection sampling in d = 2.  Deterministic
// in (seed, replica).
ParticleConfig sample_from_density(const GridField& density, int count,
                                   const RieszParams& params, uint64_t seed,
                                   uint64_t replica);

struct EnsembleRecord {
    double t = 0;
    std::vector<EmpiricalSpectrum> spectra;       // per replica
    std::vector<std::vector<double>> positions;   // per replica, N x d
};

struct EnsembleResult {
    std::vector<EnsembleRecord> records;
    std::vector<uint8_t> blown;  // per replica
    int survivors = 0;
};

struct EnsembleConfig {
    int replicas = 1;
    double dt = 1e-3;
    double t_end = 1.0;
    std::vector<double> record_times;
    int kmax = 32;
    int threads = 0;  // 0 = hardware
    bool drift = true;  // false: pure diffusion (zero-interaction control)
    const GridField* initial_density = nullptr;  // nullptr: copy base positions
};

// Replica r evolves from an independent reproducible stream derived from
// (seed, r); results are deterministic for fixed inputs regardless of the
// thread count.  Blown-up replicas are flagged, not fatal.
EnsembleResult run_ensemble(const ParticleConfig& base, const PairInteraction& pair,
                            const EnsembleConfig& cfg);

}  // namespace riesz
