#pragma once

#include <memory>
#include <string>
#include <vector>

#include "riesz/grid.hpp"
#include "riesz/params.hpp"
#include "riesz/special.hpp"

namespace riesz {

// Exact pointwise evaluator of the periodic Riesz potential via heat-kernel
// (Ewald) splitting: the Gamma-integral representation of (2 pi |xi|)^{s-d}
// splits g into a superexponentially convergent lattice-image sum plus a
// short Fourier tail.  Accurate to ~1e-13; the reference the table is
// checked against, and the evaluator behind the smooth correction g - g_E.
class EwaldEvaluator {
public:
    explicit EwaldEvaluator(const RieszParams& p);

    double g(const double* x) const;  // x != 0 (min image)
    void grad_g(const double* x, double* out) const;

    // Smooth correction g - g_E on the min-image ball |x| <= 0.3.
    double correction(const double* x) const;
    void grad_correction(const double* x, double* out) const;

    double euclidean_g(double r) const;  // g_E: r^{-s}, or -log r at s=0
    double euclidean_dg(double r) const;

    const RieszParams& params() const { return p_; }

private:
    double image_term(double r) const;  // one lattice image
    double image_term_dr(double r) const;
    double origin_term_minus_ge(double r2) const;  // analytic near r = 0
    double origin_term_minus_ge_dr(double r) const;

    RieszParams p_;
    double T_;  // Ewald split time
    int nimg_;
    double img_r2_max_;
    struct FourierTerm {
        int k[3];
        double coeff;
    };
    std::vector<FourierTerm> fourier_;
    double const_term_;
};

// Near-field/Fourier-tail split of g and grad g for fast pointwise use.
//
// The near field is g_E(r) * Q(s/2, r^2/(4 T_c)): the Euclidean potential
// under a C^infinity radial cap that equals 1 at the origin and decays below
// machine precision at `cutoff` (T_c = cutoff^2/164).  The remainder
// g - near has the closed-form spectrum ghat(xi) Q((d-s)/2, 4 pi^2 T_c
// |xi|^2), superexponentially decaying, synthesized on an oversampled grid
// and interpolated with an order-6 Lagrange stencil.  grid_size is the
// resolution the remainder is required to be resolved on.
class PotentialTable {
public:
    static PotentialTable build(const RieszParams& p, int grid_size, double cutoff);

    double eval_g(const double* x) const;  // throws at x = 0
    void eval_grad_g(const double* x, double* out) const;

    // Torus trace of the capped potential: g - C_eta outside B(0,eta),
    // g_E(eta) + (g - g_E) - C_eta inside.  Defined at x = 0.
    double truncated_g(const double* x, double eta) const;
    double truncation_constant(double eta) const;  // C_eta

    double smooth_correction(const double* x) const;  // g - g_E, |x| <= 0.3
    void grad_smooth_correction(const double* x, double* out) const;

    // The radial splitting profile chi(r) = near(r)/g_E(r) in [0,1].
    double splitting_profile(double r) const;
    double split_time() const { return t_split_; }

    double mean_g() const;  // quadrature mean of the represented potential

    const RieszParams& params() const { return p_; }
    int grid_size() const { return n_; }
    int fine_grid() const { return fine_n_; }
    double cutoff() const { return cutoff_; }
    const EwaldEvaluator& ewald() const { return *ewald_; }

    void save(const std::string& path) const;
    static PotentialTable load(const std::string& path);

private:
    PotentialTable() = default;
    void synthesize();  // remainder samples + gradients + resolution check
    double interp(const std::vector<double>& samples, const double* x) const;
    double near_field(double r) const;
    double near_field_dr(double r) const;
    double near_minus_ge(double r) const;     // near - g_E, analytic
    double near_minus_ge_dr(double r) const;

    RieszParams p_;
    int n_ = 0;       // requested resolution
    int fine_n_ = 0;  // internal oversampled grid
    double cutoff_ = 0.125;
    double t_split_ = 0.0;
    std::vector<double> rem_;
    std::vector<std::vector<double>> rem_grad_;
    double rem_mean_ = 0.0;
    double near_integral_ = 0.0;
    std::shared_ptr<const EwaldEvaluator> ewald_;
};

// Dense radial lookup for d = 1 pair sums: g and g' in a form that is smooth
// through the origin (singular factor divided out), cubic interpolation,
// direct table evaluation below a few grid cells.  Immutable and shareable.
// The interpolation path is inline: it sits in the O(N^2) force loop.
class RadialKernel {
public:
    explicit RadialKernel(std::shared_ptr<const PotentialTable> table,
                          int samples = 1 << 17);

    double g(double r) const {
        if (r < slow_below_) return slow_g(r);
        const double v = cubic(gv_.data(), r);
        if (s_ == 0.0) return v - std::log(r);
        if (s_ == 0.5) return v / std::sqrt(r);
        if (s_ == 1.0) return v / r;
        return v * std::pow(r, -s_);
    }

    double dg(double r) const {  // radial derivative
        if (r < slow_below_) return slow_dg(r);
        const double v = cubic(dgv_.data(), r);
        if (s_ == 0.0) return v / r;
        if (s_ == 0.5) {
            const double q = std::sqrt(r);
            return v / (r * q);  // r^{-3/2}
        }
        if (s_ == 1.0) return v / (r * r);
        return v * std::pow(r, -s_ - 1.0);
    }

    const PotentialTable& table() const { return *table_; }

private:
    // Lagrange cubic through nodes -1,0,1,2 around r
    double cubic(const double* f, double r) const {
        const double u = r * inv_step_;
        const int j = static_cast<int>(u);
        const double tau = u - j;
        const double t1 = tau - 1.0, t2 = tau - 2.0, tp = tau + 1.0;
        const double* p = f + (j - 1);
        return -tau * t1 * t2 / 6.0 * p[0] + tp * t1 * t2 / 2.0 * p[1] -
               tp * tau * t2 / 2.0 * p[2] + tp * tau * t1 / 6.0 * p[3];
    }

    double slow_g(double r) const;
    double slow_dg(double r) const;

    std::shared_ptr<const PotentialTable> table_;
    int m_ = 0;
    double step_ = 0.0, inv_step_ = 0.0, slow_below_ = 0.0;
    double s_ = 0.0;
    std::vector<double> gv_;   // g * r^s   (or g + log r at s = 0)
    std::vector<double> dgv_;  // g' * r^{s+1}  (or g' * r at s = 0)
};

}  // namespace riesz
