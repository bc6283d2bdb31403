#include "riesz/params.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

#include "riesz/errors.hpp"

namespace riesz {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

double snap_s(double s) {
    if (s != 0.0 && std::fabs(s) < 1e-12) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr,
                         "riesz: |s| < 1e-12 treated as s = 0 (log branch); "
                         "the normalization is discontinuous at s = 0\n");
        return 0.0;
    }
    return s;
}
}  // namespace

double riesz_constant(int d, double s) {
    s = snap_s(s);
    if (d < 1 || !(s >= d - 2.0) || !(s < d))
        throw parameter_error("riesz_constant: need d >= 1 and d-2 <= s < d");
    if (s == 0.0)
        return std::tgamma(d / 2.0) * std::pow(4.0 * kPi, d / 2.0) / 2.0;
    return std::pow(4.0, (d - s) / 2.0) * std::tgamma((d - s) / 2.0) *
           std::pow(kPi, d / 2.0) / std::tgamma(s / 2.0);
}

RieszParams RieszParams::make_gradient(int d, double s, double sigma) {
    RieszParams p;
    p.d = d;
    p.s = snap_s(s);
    p.c_ds = riesz_constant(d, p.s);
    p.flow = FlowKind::gradient;
    p.sigma = sigma;
    for (int i = 0; i < d; ++i) p.flow_matrix[static_cast<size_t>(i) * d + i] = -1.0;
    p.validate();
    return p;
}

RieszParams RieszParams::make_conservative(int d, double s, double sigma, double omega) {
    RieszParams p;
    p.d = d;
    p.s = snap_s(s);
    p.c_ds = riesz_constant(d, p.s);
    p.flow = FlowKind::conservative;
    p.sigma = sigma;
    if (d == 2) {
        p.flow_matrix[1] = omega;
        p.flow_matrix[2] = -omega;
    }
    // d = 1: the only antisymmetric matrix is 0 (trivial drift).
    p.validate();
    return p;
}

std::array<double, 3> RieszParams::apply_flow(std::span<const double> v) const {
    std::array<double, 3> out{};
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += m(i, j) * v[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

void RieszParams::validate() const {
    if (d < 1 || d > 3) throw parameter_error("RieszParams: d in {1,2,3}");
    if (!(s >= d - 2.0) || !(s < d)) throw parameter_error("RieszParams: need d-2 <= s < d");
    if (sigma < 0.0) throw parameter_error("RieszParams: sigma >= 0");
    const double c = riesz_constant(d, s);
    if (!(std::fabs(c_ds - c) <= 1e-12 * std::fabs(c)))
        throw parameter_error("RieszParams: c_ds does not match the closed form");
    if (flow == FlowKind::gradient) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (m(i, j) != (i == j ? -1.0 : 0.0))
                    throw parameter_error("RieszParams: gradient flow requires M = -I");
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (m(i, j) + m(j, i) != 0.0)
                    throw parameter_error("RieszParams: conservative flow requires M + M^T = 0");
    }
}

double riesz_fourier_coeff_absxi(double abs_xi, const RieszParams& p) {
    if (abs_xi == 0.0) return 0.0;
    return p.c_ds * std::pow(2.0 * kPi * abs_xi, p.s - p.d);
}

double riesz_fourier_coeff(std::span<const int> xi, const RieszParams& p) {
    double n2 = 0.0;
    for (int v : xi) n2 += static_cast<double>(v) * v;
    return riesz_fourier_coeff_absxi(std::sqrt(n2), p);
}

}  // namespace riesz
