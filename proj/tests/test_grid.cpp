#include "doctest.h"
#include "riesz/grid.hpp"
#include "riesz/errors.hpp"
#include "riesz/philox.hpp"

#include <cmath>
#include <cstdio>

using namespace riesz;

namespace {
constexpr double kPi = 3.14159265358979323846;

GridField random_field(int dim, int n, uint64_t seed, bool zero_mean) {
    GridField f(dim, n);
    for (size_t i = 0; i < f.size(); ++i)
        f[i] = philox::uniform4(seed, philox::kConfigGen, {i, 0, 0, 0})[0] - 0.5;
    if (zero_mean) {
        double m = f.mean();
        for (size_t i = 0; i < f.size(); ++i) f[i] -= m;
    }
    return f;
}
}  // namespace

TEST_CASE("fft round trip to 1e-12 relative") {
    for (int dim : {1, 2}) {
        GridField f = random_field(dim, 64, 7, false);
        GridField g = GridField::from_spectrum(f.fft());
        double maxerr = 0.0, scale = 0.0;
        for (size_t i = 0; i < f.size(); ++i) {
            maxerr = std::max(maxerr, std::fabs(f[i] - g[i]));
            scale = std::max(scale, std::fabs(f[i]));
        }
        CHECK(maxerr <= 1e-12 * scale);
    }
}

TEST_CASE("parseval holds to 1e-10") {
    GridField f = random_field(2, 32, 9, false);
    double l2 = lp_norm(f, 2.0);
    double spec = std::sqrt(f.fft().abs2_sum_weighted());
    CHECK(l2 == doctest::Approx(spec).epsilon(1e-10));
}

TEST_CASE("heat semigroup basics") {
    const int n = 64;
    GridField one(1, n, 1.0);
    GridField heated = heat_semigroup(one, 0.7, 0.3);
    for (size_t i = 0; i < heated.size(); ++i) CHECK(heated[i] == doctest::Approx(1.0).epsilon(1e-14));

    GridField c = GridField::from_function(1, n, [](const double* x) { return std::cos(2 * kPi * x[0]); });
    // t = 0 identity
    GridField id = heat_semigroup(c, 0.0, 0.5);
    CHECK(id[3] == c[3]);
    // eigenfunction: sigma t = 1/(4 pi^2) -> factor e^{-1}
    GridField e = heat_semigroup(c, 1.0 / (4 * kPi * kPi), 1.0);
    for (size_t i = 0; i < e.size(); ++i)
        CHECK(e[i] == doctest::Approx(std::exp(-1.0) * c[i]).epsilon(1e-12));
}

TEST_CASE("heat semigroup property e^{(t+s)D} = e^{tD} e^{sD}") {
    GridField f = random_field(2, 32, 11, false);
    GridField a = heat_semigroup(f, 0.3, 0.7);
    a = heat_semigroup(a, 0.2, 0.7);
    GridField b = heat_semigroup(f, 0.5, 0.7);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    // mass invariant exactly at the spectral level
    CHECK(b.fft().c[0].real() == doctest::Approx(f.fft().c[0].real()).epsilon(1e-14));
}

TEST_CASE("||K_t - 1||_Linf decreasing and below the lattice sum bound") {
    const int n = 256;
    double prev = 1e300;
    for (double t : {0.02, 0.05, 0.1, 0.3}) {
        // K_t - 1: coefficients e^{-4 pi^2 t |k|^2} for k != 0
        GridField delta(1, n, 0.0);
        delta[static_cast<size_t>(n) / 2] = n;  // grid delta at the origin, mass 1
        GridField kt = heat_semigroup(delta, t, 1.0);
        double norm = 0.0;
        for (size_t i = 0; i < kt.size(); ++i) norm = std::max(norm, std::fabs(kt[i] - 1.0));
        double bound = 0.0;
        for (int k = 1; k <= n / 2; ++k) bound += 2.0 * std::exp(-4 * kPi * kPi * t * k * k);
        CHECK(norm <= bound * (1 + 1e-12));
        CHECK(norm <= prev);
        prev = norm;
    }
}

TEST_CASE("lp norms and sobolev seminorm") {
    const int n = 128;
    GridField one(1, n, 1.0);
    for (double p : {1.0, 2.0, 3.5}) CHECK(lp_norm(one, p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lp_norm(one, std::numeric_limits<double>::infinity()) == 1.0);
    CHECK_THROWS_AS(lp_norm(one, 0.5), parameter_error);

    GridField c = GridField::from_function(1, n, [](const double* x) { return std::cos(2 * kPi * x[0]); });
    // |cos|_{H^1} = 2 pi / sqrt(2)
    CHECK(sobolev_seminorm(c, 1.0) == doctest::Approx(2 * kPi / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lp_norm(c, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("fractional laplacian") {
    const int n = 64;
    GridField c = GridField::from_function(1, n, [](const double* x) { return std::cos(2 * kPi * x[0]); });
    GridField lap = fractional_laplacian(c, 2.0);
    for (size_t i = 0; i < lap.size(); ++i)
        CHECK(lap[i] == doctest::Approx(4 * kPi * kPi * c[i]).epsilon(1e-12));

    GridField f = random_field(1, n, 5, true);
    GridField idf = fractional_laplacian(f, 0.0);
    for (size_t i = 0; i < f.size(); ++i) CHECK(idf[i] == doctest::Approx(f[i]).epsilon(1e-12));
}

TEST_CASE("hypercontractivity ratio") {
    const int n = 256;
    GridField f = random_field(1, n, 21, true);
    // p = q: semigroup contraction on zero-mean fields
    for (double t : {0.01, 0.1, 1.0})
        CHECK(hypercontractivity_ratio(f, t, 0.5, 2.0, 2.0) <= 1.0 + 1e-12);

    // near-delta bump, p=1, q=inf: ratio bounded by a constant on the window
    GridField bump = GridField::from_function(1, n, [](const double* x) {
        double w = 0.02;
        double acc = 0.0;
        for (int im = -3; im <= 3; ++im) {
            double dx = x[0] - im;
            acc += std::exp(-dx * dx / (2 * w * w)) / std::sqrt(2 * kPi * w * w);
        }
        return acc;
    });
    double m = bump.mean();
    for (size_t i = 0; i < bump.size(); ++i) bump[i] -= m;
    const double inf = std::numeric_limits<double>::infinity();
    for (double st : {1e-3, 1e-2, 1e-1})
        CHECK(hypercontractivity_ratio(bump, st, 1.0, 1.0, inf) < 1.0);

    // t -> infinity on zero-mean data: exponential vanishing
    CHECK(hypercontractivity_ratio(f, 40.0, 1.0, 2.0, 2.0) < 1e-8);
}

TEST_CASE("field snapshot round trip") {
    GridField f = random_field(2, 16, 3, false);
    std::string path = "/tmp/riesz_test_field.bin";
    save_field(f, path, "mu", 0.75);
    std::string name;
    double time = 0;
    GridField g = load_field(path, &name, &time);
    CHECK(name == "mu");
    CHECK(time == 0.75);
    REQUIRE(g.size() == f.size());
    for (size_t i = 0; i < f.size(); ++i) CHECK(f[i] == g[i]);
    std::remove(path.c_str());
}
