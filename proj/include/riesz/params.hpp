#pragma once

#include <array>
#include <span>

namespace riesz {

enum class FlowKind { gradient, conservative };

// Problem definition: dimension, Riesz exponent, normalization, flow matrix,
// temperature.  The flow matrix is restricted to -Identity (gradient flow)
// or an antisymmetric matrix (conservative flow).
struct RieszParams {
    int d = 1;
    double s = 0.0;
    double c_ds = 0.0;                   // normalization of the potential
    FlowKind flow = FlowKind::gradient;
    std::array<double, 9> flow_matrix{};  // row-major d x d
    double sigma = 0.25;

    static RieszParams make_gradient(int d, double s, double sigma);
    // Conservative flow M = omega * J with J the standard rotation in d=2.
    static RieszParams make_conservative(int d, double s, double sigma, double omega = 1.0);

    double m(int i, int j) const { return flow_matrix[static_cast<size_t>(i) * d + j]; }
    // M * v for a d-vector.
    std::array<double, 3> apply_flow(std::span<const double> v) const;

    void validate() const;  // throws parameter_error on violated invariants
};

// Closed-form normalization constant of the periodic Riesz potential.
// s = 0 selects the logarithmic branch; |s| < 1e-12 is treated as 0 with a
// one-time warning (the constant is discontinuous at s = 0).
double riesz_constant(int d, double s);

// Fourier coefficient of g: c_ds (2 pi |xi|)^{s-d} for xi != 0, else 0.
double riesz_fourier_coeff(std::span<const int> xi, const RieszParams& p);
double riesz_fourier_coeff_absxi(double abs_xi, const RieszParams& p);

}  // namespace riesz
