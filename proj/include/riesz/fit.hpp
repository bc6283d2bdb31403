#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "riesz/errors.hpp"

namespace riesz {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double max_residual = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    if (n < 3 || y.size() != n) throw fit_error("linear_fit: need >= 3 points");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw fit_error("linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
        f.max_residual = std::max(f.max_residual, std::fabs(r));
    }
    f.slope_stderr = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace riesz
