#pragma once

#include <cmath>
#include <cstddef>

namespace riesz {

// Minimum-image convention: coordinates live in [-1/2, 1/2).
inline double wrap_coord(double x) {
    double w = x - std::floor(x + 0.5);
    if (w < -0.5) w += 1.0;
    if (w >= 0.5) w -= 1.0;
    return w;
}

inline void wrap_point(double* x, int dim) {
    for (int a = 0; a < dim; ++a) x[a] = wrap_coord(x[a]);
}

inline double min_image_r2(const double* x, const double* y, int dim) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        double dx = wrap_coord(x[a] - y[a]);
        r2 += dx * dx;
    }
    return r2;
}

}  // namespace riesz
