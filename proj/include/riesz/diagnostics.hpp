#pragma once

#include <memory>
#include <span>
#include <vector>

#include "riesz/grid.hpp"
#include "riesz/particles.hpp"
#include "riesz/potential.hpp"

namespace riesz {

// Full-cube Fourier coefficients of a grid field on |xi|_inf <= kmax, in the
// same layout as EmpiricalSpectrum (exact for band-limited fields).
EmpiricalSpectrum field_cube_spectrum(const GridField& f, int kmax);

// Trigonometric (exact) evaluation of a band-limited field at a point.
double eval_cube_spectrum(const EmpiricalSpectrum& s, const double* x);

struct ModEnergyBreakdown {
    double pair_sum = 0;  // (1/N^2) sum_{i != j} g(x_i - x_j)
    double cross = 0;     // (2/N) sum_i (g * mu)(x_i)
    double self_mu = 0;   // sum_{xi != 0} ghat |muhat|^2
    double f_n = 0;       // (pair_sum - cross + self_mu)/2
    double log_term = 0;  // log(N ||mu||_inf)/(2 d N), s = 0 only
    double rate_unit = 0; // ||mu||_inf^{s/d} N^{s/d - 1}
};

struct NnScales {
    std::vector<double> r;  // r_i = min(nearest neighbor, (N ||mu||_inf)^{-1/d})/4
};

struct FiRatio {
    double value = 0;
    double numerator = 0;    // |I|
    double denominator = 0;  // ||grad v||_inf (F_N + offsets)
    bool calibration_flag = false;  // denominator was nonpositive
};

// The paper's coupling functionals between a particle configuration and a
// density.  Cross terms use exact trigonometric evaluation at the particle
// positions (no gridding of particles), pair terms the potential table.
class ModulatedDiagnostics {
public:
    explicit ModulatedDiagnostics(std::shared_ptr<const PotentialTable> table);

    const PotentialTable& table() const { return *table_; }

    ModEnergyBreakdown modulated_energy(const ParticleConfig& cfg, const GridField& mu,
                                        int kmax) const;

    NnScales nn_scales(const ParticleConfig& cfg, const GridField& mu) const;

    // RHS of the modulated-energy lower bound with a supplied calibration
    // constant: -log_term - c_cal rate_unit.
    double me_lower_bound(const ParticleConfig& cfg, const GridField& mu,
                          double c_cal) const;

    // Torus-trace truncation: truncated_g(. , eta_i) replaces g in the pair
    // and cross terms, self_mu unchanged.  Finite for coincident particles.
    double truncated_modulated_energy(const ParticleConfig& cfg, const GridField& mu,
                                      std::span<const double> etas, int kmax) const;

    // First variation of the modulated energy along the transport v
    // (d grid fields).  Particle pair part uses the exact kernel gradient.
    double transport_variation(const ParticleConfig& cfg, const GridField& mu,
                               std::span<const GridField> v, int kmax) const;

    // Pure-spectral route for the same functional (no diagonal excision is
    // needed since the integrand vanishes there); accurate only when the
    // empirical spectrum is band-limited, e.g. lattice configurations.
    double transport_variation_spectral(const ParticleConfig& cfg, const GridField& mu,
                                        std::span<const GridField> v, int kmax) const;

    FiRatio fi_ratio(const ParticleConfig& cfg, const GridField& mu,
                     std::span<const GridField> v, int kmax, double c_cal) const;

private:
    double pair_g_sum(const ParticleConfig& cfg) const;  // sum over pairs of g
    std::shared_ptr<const PotentialTable> table_;
    std::shared_ptr<const RadialKernel> radial_;  // d = 1 fast path
};

// Normalized relative entropy of the product law rho^{otimes N} against
// mu^{otimes N}: int rho log(rho/mu).
double relative_entropy_product(const GridField& rho, const GridField& mu);

// E_N = sigma H_N + mean F_N.
double modulated_free_energy(double h_n, double mean_f_n, double sigma);

// max over the grid of the Frobenius norm of grad v.
double lipschitz_seminorm(std::span<const GridField> v);

// Band-limited random vector field with |grad v|_inf = scale.
std::vector<GridField> random_band_vector_field(int dim, int n, int kmax,
                                                double scale, uint64_t seed);

}  // namespace riesz
