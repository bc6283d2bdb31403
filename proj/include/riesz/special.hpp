#pragma once

namespace riesz {

// Regularized incomplete gamma functions for real order a in (-1, 0) u (0, 2],
// z >= 0.  gamma_q is Q(a,z) = Gamma(a,z)/Gamma(a); gamma_p = 1 - Q.
// Note Q(a,z) < 0 for a in (-1,0) since Gamma(a) < 0 there.
double gamma_q(double a, double z);
double gamma_p(double a, double z);

// d/dz of the lower regularized function: z^{a-1} e^{-z} / Gamma(a).
double gamma_p_deriv(double a, double z);

// Exponential integral E1(z), z > 0.
double expint_e1(double z);

// C^order polynomial smoothstep on [0,1]: S(0)=0, S(1)=1, first `order`
// derivatives vanish at both ends.  order in [1, 7].
double smoothstep(int order, double u);
double smoothstep_deriv(int order, double u);

// Radial bump profile: 1 on [0, r_in], smoothstep transition, 0 beyond r_out.
struct BumpProfile {
    double inner_fraction = 0.5;  // r_in = inner_fraction * r_out
    int smooth_order = 5;

    double chi(double r, double r_out) const;
    double chi_deriv(double r, double r_out) const;
};

}  // namespace riesz
