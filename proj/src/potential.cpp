#include "riesz/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "riesz/errors.hpp"
#include "riesz/torus.hpp"

namespace riesz {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kEuler = 0.57721566490153286060651209008240243;

// sum_k (-z)^k / (k! (a+k)); the entire part of the lower incomplete gamma.
double stilde(double a, double z) {
    double t = 1.0;  // (-z)^k / k!
    double acc = 1.0 / a;
    for (int k = 1; k < 200; ++k) {
        t *= -z / k;
        double add = t / (a + k);
        acc += add;
        if (std::fabs(add) < 1e-18 * std::fabs(acc) + 1e-300) break;
    }
    return acc;
}

// sum_{k>=1} (-1)^{k+1} z^k / (k k!)  (entire part of E1)
double e1_series_part(double z) {
    double t = 1.0, acc = 0.0;
    for (int k = 1; k < 200; ++k) {
        t *= -z / k;
        double add = -t / k;
        acc += add;
        if (std::fabs(add) < 1e-18 * std::fabs(acc) + 1e-300) break;
    }
    return acc;
}

// order-6 Lagrange weights for fractional offset tau in [0,1), nodes -2..3
void lagrange6(double tau, double* w) {
    const double d[6] = {-120.0, 24.0, -12.0, 12.0, -24.0, 120.0};
    double prod[6];
    for (int m = 0; m < 6; ++m) prod[m] = 1.0;
    for (int l = -2; l <= 3; ++l)
        for (int m = 0; m < 6; ++m)
            if (m - 2 != l) prod[m] *= (tau - l);
    for (int m = 0; m < 6; ++m) w[m] = prod[m] / d[m];
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// Canonicalize sign so that evenness of g (oddness of grad g) is exact.
inline int canonical_sign(double* x, int d) {
    for (int a = 0; a < d; ++a) {
        if (x[a] < 0.0) {
            for (int b = 0; b < d; ++b) x[b] = wrap_coord(-x[b]);
            return -1;
        }
        if (x[a] > 0.0) return 1;
    }
    return 1;
}

}  // namespace

// ---------------------------------------------------------------- Ewald ---

EwaldEvaluator::EwaldEvaluator(const RieszParams& p) : p_(p) {
    if (p_.d > 2) throw parameter_error("EwaldEvaluator: d in {1,2}");
    T_ = 1.0 / 32.0;
    img_r2_max_ = 4.0 * T_ * 52.0;  // image terms below ~1e-22 dropped
    nimg_ = static_cast<int>(std::ceil(std::sqrt(img_r2_max_) + 0.5));
    const double b = (p_.d - p_.s) / 2.0;
    const int kmax = 8;
    int k[3] = {0, 0, 0};
    for (k[0] = -kmax; k[0] <= kmax; ++k[0]) {
        const int j1 = (p_.d >= 2) ? kmax : 0;
        for (k[1] = -j1; k[1] <= j1; ++k[1]) {
            if (k[0] == 0 && k[1] == 0) continue;
            double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
            double z = 4.0 * kPi * kPi * k2 * T_;
            if (z > 55.0) continue;
            FourierTerm t;
            t.k[0] = k[0];
            t.k[1] = k[1];
            t.k[2] = 0;
            t.coeff = riesz_fourier_coeff_absxi(std::sqrt(k2), p_) * gamma_q(b, z);
            fourier_.push_back(t);
        }
    }
    const_term_ = -p_.c_ds / std::tgamma(b) * std::pow(T_, b) / b;
}

double EwaldEvaluator::euclidean_g(double r) const {
    return (p_.s == 0.0) ? -std::log(r) : std::pow(r, -p_.s);
}

double EwaldEvaluator::euclidean_dg(double r) const {
    return (p_.s == 0.0) ? -1.0 / r : -p_.s * std::pow(r, -p_.s - 1.0);
}

double EwaldEvaluator::image_term(double r) const {
    const double z = r * r / (4.0 * T_);
    if (p_.s == 0.0) return 0.5 * expint_e1(z);
    return std::pow(r, -p_.s) * gamma_q(p_.s / 2.0, z);
}

double EwaldEvaluator::image_term_dr(double r) const {
    const double z = r * r / (4.0 * T_);
    if (p_.s == 0.0) return -std::exp(-z) / r;
    const double q = gamma_q(p_.s / 2.0, z);
    const double dq_dr = -gamma_p_deriv(p_.s / 2.0, z) * (r / (2.0 * T_));
    return -p_.s * std::pow(r, -p_.s - 1.0) * q + std::pow(r, -p_.s) * dq_dr;
}

// (n=0 image) - g_E, analytic through r = 0; argument r^2.
double EwaldEvaluator::origin_term_minus_ge(double r2) const {
    const double z = r2 / (4.0 * T_);
    if (p_.s == 0.0)
        return 0.5 * (-kEuler + std::log(4.0 * T_) + e1_series_part(z));
    const double a = p_.s / 2.0;
    return -std::pow(4.0 * T_, -a) * stilde(a, z) / std::tgamma(a);
}

double EwaldEvaluator::origin_term_minus_ge_dr(double r) const {
    const double z = r * r / (4.0 * T_);
    if (p_.s == 0.0) {
        const double f = (z < 1e-8) ? 1.0 - z / 2.0 : (1.0 - std::exp(-z)) / z;
        return 0.5 * f * (r / (2.0 * T_));
    }
    const double a = p_.s / 2.0;
    return std::pow(4.0 * T_, -a) * stilde(a + 1.0, z) / std::tgamma(a) * (r / (2.0 * T_));
}

double EwaldEvaluator::g(const double* x) const {
    double acc = const_term_;
    double p[3] = {0, 0, 0};
    for (int a = 0; a < p_.d; ++a) p[a] = wrap_coord(x[a]);
    int n[3] = {0, 0, 0};
    for (n[0] = -nimg_; n[0] <= nimg_; ++n[0]) {
        const int j1 = (p_.d >= 2) ? nimg_ : 0;
        for (n[1] = -j1; n[1] <= j1; ++n[1]) {
            double r2 = 0.0;
            for (int a = 0; a < p_.d; ++a) {
                double dx = p[a] - n[a];
                r2 += dx * dx;
            }
            if (r2 > img_r2_max_) continue;
            if (r2 == 0.0) throw singularity_error("g evaluated at a lattice point");
            acc += image_term(std::sqrt(r2));
        }
    }
    for (const auto& t : fourier_) {
        double ph = 0.0;
        for (int a = 0; a < p_.d; ++a) ph += t.k[a] * p[a];
        acc += t.coeff * std::cos(2.0 * kPi * ph);
    }
    return acc;
}

void EwaldEvaluator::grad_g(const double* x, double* out) const {
    double p[3] = {0, 0, 0};
    for (int a = 0; a < p_.d; ++a) {
        p[a] = wrap_coord(x[a]);
        out[a] = 0.0;
    }
    int n[3] = {0, 0, 0};
    for (n[0] = -nimg_; n[0] <= nimg_; ++n[0]) {
        const int j1 = (p_.d >= 2) ? nimg_ : 0;
        for (n[1] = -j1; n[1] <= j1; ++n[1]) {
            double dx[3] = {0, 0, 0};
            double r2 = 0.0;
            for (int a = 0; a < p_.d; ++a) {
                dx[a] = p[a] - n[a];
                r2 += dx[a] * dx[a];
            }
            if (r2 > img_r2_max_) continue;
            if (r2 == 0.0) throw singularity_error("grad g evaluated at a lattice point");
            const double r = std::sqrt(r2);
            const double dr = image_term_dr(r);
            for (int a = 0; a < p_.d; ++a) out[a] += dr * dx[a] / r;
        }
    }
    for (const auto& t : fourier_) {
        double ph = 0.0;
        for (int a = 0; a < p_.d; ++a) ph += t.k[a] * p[a];
        const double sn = -2.0 * kPi * t.coeff * std::sin(2.0 * kPi * ph);
        for (int a = 0; a < p_.d; ++a) out[a] += sn * t.k[a];
    }
}

double EwaldEvaluator::correction(const double* x) const {
    double p[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        p[a] = wrap_coord(x[a]);
        r2 += p[a] * p[a];
    }
    if (r2 > 0.3 * 0.3)
        throw parameter_error("smooth correction valid on |x| <= 0.3 only");
    double acc = const_term_ + origin_term_minus_ge(r2);
    int n[3] = {0, 0, 0};
    for (n[0] = -nimg_; n[0] <= nimg_; ++n[0]) {
        const int j1 = (p_.d >= 2) ? nimg_ : 0;
        for (n[1] = -j1; n[1] <= j1; ++n[1]) {
            if (n[0] == 0 && n[1] == 0) continue;
            double rr2 = 0.0;
            for (int a = 0; a < p_.d; ++a) {
                double dx = p[a] - n[a];
                rr2 += dx * dx;
            }
            if (rr2 > img_r2_max_) continue;
            acc += image_term(std::sqrt(rr2));
        }
    }
    for (const auto& t : fourier_) {
        double ph = 0.0;
        for (int a = 0; a < p_.d; ++a) ph += t.k[a] * p[a];
        acc += t.coeff * std::cos(2.0 * kPi * ph);
    }
    return acc;
}

void EwaldEvaluator::grad_correction(const double* x, double* out) const {
    double p[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        p[a] = wrap_coord(x[a]);
        r2 += p[a] * p[a];
        out[a] = 0.0;
    }
    if (r2 > 0.3 * 0.3)
        throw parameter_error("smooth correction valid on |x| <= 0.3 only");
    const double r = std::sqrt(r2);
    if (r > 0.0) {
        const double dr = origin_term_minus_ge_dr(r);
        for (int a = 0; a < p_.d; ++a) out[a] += dr * p[a] / r;
    }
    int n[3] = {0, 0, 0};
    for (n[0] = -nimg_; n[0] <= nimg_; ++n[0]) {
        const int j1 = (p_.d >= 2) ? nimg_ : 0;
        for (n[1] = -j1; n[1] <= j1; ++n[1]) {
            if (n[0] == 0 && n[1] == 0) continue;
            double dx[3] = {0, 0, 0};
            double rr2 = 0.0;
            for (int a = 0; a < p_.d; ++a) {
                dx[a] = p[a] - n[a];
                rr2 += dx[a] * dx[a];
            }
            if (rr2 > img_r2_max_) continue;
            const double rr = std::sqrt(rr2);
            const double dr = image_term_dr(rr);
            for (int a = 0; a < p_.d; ++a) out[a] += dr * dx[a] / rr;
        }
    }
    for (const auto& t : fourier_) {
        double ph = 0.0;
        for (int a = 0; a < p_.d; ++a) ph += t.k[a] * p[a];
        const double sn = -2.0 * kPi * t.coeff * std::sin(2.0 * kPi * ph);
        for (int a = 0; a < p_.d; ++a) out[a] += sn * t.k[a];
    }
}

// ---------------------------------------------------------------- table ---

PotentialTable PotentialTable::build(const RieszParams& p, int grid_size, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 0.25))
        throw parameter_error("build_table: cutoff in (0, 1/4]");
    if (grid_size < 8 || (grid_size & (grid_size - 1)) != 0)
        throw parameter_error("build_table: grid_size must be a power of two >= 8");
    if (p.d > 2) throw parameter_error("build_table: d in {1,2}");

    PotentialTable t;
    t.p_ = p;
    t.n_ = grid_size;
    t.cutoff_ = cutoff;
    // The near-field cap e^{-r^2/(4 T_c)} reaches ~1.5e-18 at r = cutoff.
    t.t_split_ = cutoff * cutoff / 164.0;
    t.fine_n_ = std::min(4 * grid_size, (p.d == 1) ? 32768 : 2048);
    t.fine_n_ = std::max(t.fine_n_, grid_size);
    t.ewald_ = std::make_shared<EwaldEvaluator>(p);
    t.synthesize();
    return t;
}

void PotentialTable::synthesize() {
    const double b = (p_.d - p_.s) / 2.0;
    const double fourpi2T = 4.0 * kPi * kPi * t_split_;
    near_integral_ = p_.c_ds / std::tgamma(b) * std::pow(t_split_, b) / b;

    // Resolution check on the requested grid: the remainder spectrum
    // ghat(xi) Q(b, 4 pi^2 T_c |xi|^2) must carry < 1e-10 of its energy in
    // the top-third shell |xi|_inf > n/3.
    {
        double total = 0.0, shell = 0.0;
        const int half = n_ / 2;
        int k[2] = {0, 0};
        for (k[0] = (p_.d >= 2) ? -half : 0; k[0] <= half; ++k[0]) {
            for (k[1] = -half; k[1] <= half; ++k[1]) {
                const double k2 = (p_.d == 1)
                                      ? static_cast<double>(k[1]) * k[1]
                                      : static_cast<double>(k[0]) * k[0] +
                                            static_cast<double>(k[1]) * k[1];
                if (k2 == 0.0) continue;
                const double z = fourpi2T * k2;
                if (p_.d == 1 && k[0] != 0) continue;
                const double q = (z > 80.0) ? 0.0 : gamma_q(b, z);
                const double c = riesz_fourier_coeff_absxi(std::sqrt(k2), p_) * q;
                const double e = c * c;
                total += e;
                int kinf = std::max(std::abs(k[0]), std::abs(k[1]));
                if (p_.d == 1) kinf = std::abs(k[1]);
                if (kinf > n_ / 3) shell += e;
            }
        }
        if (!(shell <= 1e-10 * total))
            throw resolution_error(
                "potential remainder unresolved at grid_size " + std::to_string(n_) +
                " (top-third shell fraction " + std::to_string(shell / total) +
                "); increase grid_size");
    }

    // Synthesize the remainder and its gradient on the fine grid from the
    // closed-form spectrum.
    Spectrum spec;
    spec.dim = p_.d;
    spec.n = fine_n_;
    size_t count = static_cast<size_t>(fine_n_ / 2 + 1);
    for (int a = 0; a < p_.d - 1; ++a) count *= static_cast<size_t>(fine_n_);
    spec.c.assign(count, {0.0, 0.0});
    int k[3];
    for (size_t i = 0; i < spec.c.size(); ++i) {
        spec.freq(i, k);
        double k2 = 0.0;
        for (int a = 0; a < p_.d; ++a) k2 += static_cast<double>(k[a]) * k[a];
        if (k2 == 0.0) {
            spec.c[i] = -near_integral_;
            continue;
        }
        const double z = fourpi2T * k2;
        if (z > 80.0) continue;
        spec.c[i] = riesz_fourier_coeff_absxi(std::sqrt(k2), p_) * gamma_q(b, z);
    }
    rem_mean_ = -near_integral_;
    GridField rem = GridField::from_spectrum(spec);
    rem_.assign(rem.values().begin(), rem.values().end());

    rem_grad_.clear();
    for (int axis = 0; axis < p_.d; ++axis) {
        Spectrum ds = spec;
        int kk[3];
        for (size_t i = 0; i < ds.c.size(); ++i) {
            ds.freq(i, kk);
            if (kk[axis] == fine_n_ / 2 || kk[axis] == -fine_n_ / 2) {
                ds.c[i] = 0.0;
                continue;
            }
            ds.c[i] *= std::complex<double>(0.0, 2.0 * kPi * kk[axis]);
        }
        GridField da = GridField::from_spectrum(ds);
        rem_grad_.emplace_back(da.values().begin(), da.values().end());
    }
}

double PotentialTable::near_field(double r) const {
    if (r >= cutoff_) return 0.0;
    const double z = r * r / (4.0 * t_split_);
    if (z > 45.0) return 0.0;
    if (p_.s == 0.0) return 0.5 * expint_e1(z);
    return std::pow(r, -p_.s) * gamma_q(p_.s / 2.0, z);
}

double PotentialTable::near_field_dr(double r) const {
    if (r >= cutoff_) return 0.0;
    const double z = r * r / (4.0 * t_split_);
    if (z > 45.0) return 0.0;
    if (p_.s == 0.0) return -std::exp(-z) / r;
    const double a = p_.s / 2.0;
    return -p_.s * std::pow(r, -p_.s - 1.0) * gamma_q(a, z) -
           std::pow(r, -p_.s) * gamma_p_deriv(a, z) * (r / (2.0 * t_split_));
}

double PotentialTable::near_minus_ge(double r) const {
    const double z = r * r / (4.0 * t_split_);
    if (p_.s == 0.0) {
        if (z < 1.0)
            return 0.5 * (-kEuler + std::log(4.0 * t_split_) + e1_series_part(z));
        return 0.5 * ((z > 45.0) ? 0.0 : expint_e1(z)) + std::log(r);
    }
    const double a = p_.s / 2.0;
    if (z < 1.0) return -std::pow(4.0 * t_split_, -a) * stilde(a, z) / std::tgamma(a);
    const double q = (z > 45.0) ? 0.0 : gamma_q(a, z);
    return -std::pow(r, -p_.s) * (1.0 - q);
}

double PotentialTable::near_minus_ge_dr(double r) const {
    const double z = r * r / (4.0 * t_split_);
    if (p_.s == 0.0) {
        const double f = (z < 1e-8) ? 1.0 - z / 2.0 : (1.0 - std::exp(-z)) / z;
        return 0.5 * f * (r / t_split_) * 0.5;
    }
    const double a = p_.s / 2.0;
    if (z < 1.0)
        return std::pow(4.0 * t_split_, -a) * stilde(a + 1.0, z) / std::tgamma(a) *
               (r / (2.0 * t_split_));
    const double q = (z > 45.0) ? 0.0 : gamma_q(a, z);
    return p_.s * std::pow(r, -p_.s - 1.0) * (1.0 - q) -
           std::pow(r, -p_.s) * gamma_p_deriv(a, z) * (r / (2.0 * t_split_));
}

double PotentialTable::splitting_profile(double r) const {
    if (r <= 0.0) return 1.0;
    return near_field(r) / ewald_->euclidean_g(r);
}

double PotentialTable::interp(const std::vector<double>& samples, const double* xin) const {
    double w[3][6];
    int base[3] = {0, 0, 0};
    for (int a = 0; a < p_.d; ++a) {
        double u = (xin[a] + 0.5) * fine_n_;
        int j0 = static_cast<int>(std::floor(u));
        lagrange6(u - j0, w[a]);
        base[a] = j0;
    }
    const int n = fine_n_;
    auto wrapi = [n](int j) { return ((j % n) + n) % n; };
    if (p_.d == 1) {
        double acc = 0.0;
        for (int m = 0; m < 6; ++m)
            acc += w[0][m] * samples[static_cast<size_t>(wrapi(base[0] + m - 2))];
        return acc;
    }
    double acc = 0.0;
    for (int m0 = 0; m0 < 6; ++m0) {
        const size_t row = static_cast<size_t>(wrapi(base[0] + m0 - 2)) * static_cast<size_t>(n);
        double rowacc = 0.0;
        for (int m1 = 0; m1 < 6; ++m1)
            rowacc += w[1][m1] * samples[row + static_cast<size_t>(wrapi(base[1] + m1 - 2))];
        acc += w[0][m0] * rowacc;
    }
    return acc;
}

double PotentialTable::eval_g(const double* xin) const {
    double x[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        x[a] = wrap_coord(xin[a]);
        r2 += x[a] * x[a];
    }
    if (r2 == 0.0) throw singularity_error("eval_g at x = 0; regularize the caller");
    canonical_sign(x, p_.d);
    double v = interp(rem_, x);
    const double r = std::sqrt(r2);
    if (r < cutoff_) v += near_field(r);
    return v;
}

void PotentialTable::eval_grad_g(const double* xin, double* out) const {
    double x[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        x[a] = wrap_coord(xin[a]);
        r2 += x[a] * x[a];
    }
    if (r2 == 0.0) throw singularity_error("eval_grad_g at x = 0");
    const int sign = canonical_sign(x, p_.d);
    for (int a = 0; a < p_.d; ++a) out[a] = interp(rem_grad_[static_cast<size_t>(a)], x);
    const double r = std::sqrt(r2);
    if (r < cutoff_) {
        const double dr = near_field_dr(r);
        for (int a = 0; a < p_.d; ++a) out[a] += dr * x[a] / r;
    }
    for (int a = 0; a < p_.d; ++a) out[a] *= sign;
}

double PotentialTable::smooth_correction(const double* xin) const {
    double x[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        x[a] = wrap_coord(xin[a]);
        r2 += x[a] * x[a];
    }
    if (r2 > 0.09) throw parameter_error("smooth correction valid on |x| <= 0.3 only");
    canonical_sign(x, p_.d);
    const double r = std::sqrt(r2);
    return interp(rem_, x) + near_minus_ge(r);
}

void PotentialTable::grad_smooth_correction(const double* xin, double* out) const {
    double x[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        x[a] = wrap_coord(xin[a]);
        r2 += x[a] * x[a];
    }
    if (r2 > 0.09) throw parameter_error("smooth correction valid on |x| <= 0.3 only");
    const int sign = canonical_sign(x, p_.d);
    const double r = std::sqrt(r2);
    for (int a = 0; a < p_.d; ++a)
        out[a] = interp(rem_grad_[static_cast<size_t>(a)], x);
    if (r > 0.0) {
        const double dr = near_minus_ge_dr(r);
        for (int a = 0; a < p_.d; ++a) out[a] += dr * x[a] / r;
    }
    for (int a = 0; a < p_.d; ++a) out[a] *= sign;
}

double PotentialTable::truncation_constant(double eta) const {
    if (!(eta > 0.0 && eta < 0.25))
        throw parameter_error("truncated_g: eta in (0, 1/4)");
    // C_eta = int_{B(0,eta)} (g_E(eta) - g_E(r)) dV; the periodic correction
    // integrates out exactly because g has zero mean.
    const double omega = (p_.d == 1) ? 2.0 : 2.0 * kPi;
    if (p_.s == 0.0) return -omega * std::pow(eta, p_.d) / (p_.d * p_.d);
    return -omega * std::pow(eta, p_.d - p_.s) * p_.s / (p_.d * (p_.d - p_.s));
}

double PotentialTable::truncated_g(const double* xin, double eta) const {
    const double c_eta = truncation_constant(eta);
    double x[3] = {0, 0, 0};
    double r2 = 0.0;
    for (int a = 0; a < p_.d; ++a) {
        x[a] = wrap_coord(xin[a]);
        r2 += x[a] * x[a];
    }
    const double r = std::sqrt(r2);
    if (r >= eta) return eval_g(x) - c_eta;
    return ewald_->euclidean_g(eta) + smooth_correction(x) - c_eta;
}

double PotentialTable::mean_g() const { return rem_mean_ + near_integral_; }

void PotentialTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("PotentialTable::save: cannot open " + path);
    const char magic[4] = {'R', 'Z', 'P', 'T'};
    uint32_t version = 1;
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    int32_t d = p_.d, n = n_, flow = (p_.flow == FlowKind::gradient) ? 0 : 1, fine = fine_n_;
    double s = p_.s, sigma = p_.sigma, cut = cutoff_;
    for (auto* v : {&d, &n, &flow, &fine}) out.write(reinterpret_cast<const char*>(v), 4);
    for (auto* v : {&s, &sigma, &cut}) out.write(reinterpret_cast<const char*>(v), 8);
    uint64_t count = rem_.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(rem_.data()),
              static_cast<std::streamsize>(rem_.size() * sizeof(double)));
    uint64_t checksum = fnv1a(rem_.data(), rem_.size() * sizeof(double));
    out.write(reinterpret_cast<const char*>(&checksum), 8);
    if (!out) throw io_error("PotentialTable::save: write failed");
}

PotentialTable PotentialTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("PotentialTable::load: cannot open " + path);
    char magic[4];
    uint32_t version = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (std::memcmp(magic, "RZPT", 4) != 0 || version != 1)
        throw io_error("PotentialTable::load: bad magic/version");
    int32_t d, n, flow, fine;
    double s, sigma, cut;
    for (auto* v : {&d, &n, &flow, &fine}) in.read(reinterpret_cast<char*>(v), 4);
    for (auto* v : {&s, &sigma, &cut}) in.read(reinterpret_cast<char*>(v), 8);
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    std::vector<double> payload(count);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    uint64_t checksum = 0;
    in.read(reinterpret_cast<char*>(&checksum), 8);
    if (!in) throw io_error("PotentialTable::load: truncated file");
    if (checksum != fnv1a(payload.data(), payload.size() * sizeof(double)))
        throw io_error("PotentialTable::load: checksum mismatch");

    PotentialTable t = PotentialTable::build(
        (flow == 0) ? RieszParams::make_gradient(d, s, sigma)
                    : RieszParams::make_conservative(d, s, sigma),
        n, cut);
    // The payload is re-derivable; verify the stored samples match.
    if (t.rem_.size() != payload.size())
        throw io_error("PotentialTable::load: size mismatch");
    for (size_t i = 0; i < payload.size(); ++i)
        if (std::fabs(t.rem_[i] - payload[i]) > 1e-12)
            throw io_error("PotentialTable::load: samples disagree with rebuild");
    return t;
}

// --------------------------------------------------------------- radial ---

RadialKernel::RadialKernel(std::shared_ptr<const PotentialTable> table, int samples)
    : table_(std::move(table)), m_(samples) {
    const RieszParams& p = table_->params();
    if (p.d != 1) throw parameter_error("RadialKernel: d = 1 only");
    s_ = p.s;
    step_ = 0.5 / m_;
    inv_step_ = 1.0 / step_;
    slow_below_ = 64.0 * step_;
    gv_.resize(static_cast<size_t>(m_) + 3);
    dgv_.resize(static_cast<size_t>(m_) + 3);
    for (int j = 1; j <= m_ + 2; ++j) {
        // mirror beyond r = 1/2 (g even and 1-periodic)
        double r = std::min(static_cast<double>(j), 2.0 * m_ - j) * step_;
        double x = r, grad;
        double g = table_->eval_g(&x);
        table_->eval_grad_g(&x, &grad);
        if (s_ == 0.0) {
            gv_[static_cast<size_t>(j)] = g + std::log(r);
            dgv_[static_cast<size_t>(j)] = grad * r;
        } else {
            gv_[static_cast<size_t>(j)] = g * std::pow(r, s_);
            dgv_[static_cast<size_t>(j)] = grad * std::pow(r, s_ + 1.0);
        }
    }
    gv_[0] = 0.0;
    dgv_[0] = 0.0;
}

double RadialKernel::slow_g(double r) const { return table_->eval_g(&r); }
double RadialKernel::slow_dg(double r) const {
    double grad;
    table_->eval_grad_g(&r, &grad);
    return grad;
}

}  // namespace riesz
