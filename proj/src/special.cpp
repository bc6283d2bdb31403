#include "riesz/special.hpp"

#include <cmath>
#include <limits>

#include "riesz/errors.hpp"

namespace riesz {

namespace {

constexpr int kMaxIter = 400;
constexpr double kTiny = 1e-300;

// Lower incomplete gamma by series, a > 0, z < a + 1.
// gamma(a,z) = z^a e^{-z} sum_n z^n / (a (a+1) ... (a+n)).
double lower_gamma_series(double a, double z) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= z / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return std::pow(z, a) * std::exp(-z) * sum;
}

// Upper incomplete gamma by continued fraction (modified Lentz), z >= a + 1.
double upper_gamma_cf(double a, double z) {
    double b = z + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return std::pow(z, a) * std::exp(-z) * h;
}

}  // namespace

double gamma_q(double a, double z) {
    if (z < 0.0 || a <= -1.0 || a == 0.0 || a > 10.0)
        throw parameter_error("gamma_q: order/argument out of range");
    if (z == 0.0) return 1.0;
    const double ga = std::tgamma(a);
    if (a > 0.0) {
        if (z < a + 1.0) return 1.0 - lower_gamma_series(a, z) / ga;
        return upper_gamma_cf(a, z) / ga;
    }
    // a in (-1,0): recurse the lower function down from a+1.
    // gamma(a,z) = (gamma(a+1,z) + z^a e^{-z}) / a.
    if (z < 1.0) {
        double lg = (lower_gamma_series(a + 1.0, z) + std::pow(z, a) * std::exp(-z)) / a;
        return 1.0 - lg / ga;
    }
    return upper_gamma_cf(a, z) / ga;
}

double gamma_p(double a, double z) { return 1.0 - gamma_q(a, z); }

double gamma_p_deriv(double a, double z) {
    return std::pow(z, a - 1.0) * std::exp(-z) / std::tgamma(a);
}

double expint_e1(double z) {
    if (z <= 0.0) throw parameter_error("expint_e1: requires z > 0");
    if (z <= 1.3) {
        // E1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
        constexpr double euler = 0.57721566490153286060651209008240243;
        double sum = 0.0, term = 1.0;
        for (int k = 1; k < kMaxIter; ++k) {
            term *= -z / k;
            double add = -term / k;
            sum += add;
            if (std::fabs(add) < std::fabs(sum) * 1e-17 + 1e-300) break;
        }
        return -euler - std::log(z) + sum;
    }
    // Continued fraction E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))).
    double b = z + 1.0;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return h * std::exp(-z);
}

namespace {

double binom(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

}  // namespace

// S_m(u) = sum_{k=0}^{m} (-1)^k C(m+k,k) C(2m+1, m-k) u^{m+k+1}.
// Evaluated via the symmetry S(u) = 1 - S(1-u) for u > 1/2, where the
// alternating sum would otherwise cancel catastrophically.
double smoothstep(int order, double u) {
    if (order < 1 || order > 7) throw parameter_error("smoothstep: order in [1,7]");
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    if (u > 0.5) return 1.0 - smoothstep(order, 1.0 - u);
    double acc = 0.0;
    double up = std::pow(u, order + 1);
    for (int k = 0; k <= order; ++k) {
        double c = binom(order + k, k) * binom(2 * order + 1, order - k);
        acc += (k % 2 ? -c : c) * up;
        up *= u;
    }
    return acc;
}

double smoothstep_deriv(int order, double u) {
    if (order < 1 || order > 7) throw parameter_error("smoothstep: order in [1,7]");
    if (u <= 0.0 || u >= 1.0) return 0.0;
    if (u > 0.5) return smoothstep_deriv(order, 1.0 - u);
    double acc = 0.0;
    double up = std::pow(u, order);
    for (int k = 0; k <= order; ++k) {
        double c = binom(order + k, k) * binom(2 * order + 1, order - k) * (order + k + 1);
        acc += (k % 2 ? -c : c) * up;
        up *= u;
    }
    return acc;
}

double BumpProfile::chi(double r, double r_out) const {
    const double r_in = inner_fraction * r_out;
    if (r <= r_in) return 1.0;
    if (r >= r_out) return 0.0;
    return 1.0 - smoothstep(smooth_order, (r - r_in) / (r_out - r_in));
}

double BumpProfile::chi_deriv(double r, double r_out) const {
    const double r_in = inner_fraction * r_out;
    if (r <= r_in || r >= r_out) return 0.0;
    return -smoothstep_deriv(smooth_order, (r - r_in) / (r_out - r_in)) / (r_out - r_in);
}

}  // namespace riesz
