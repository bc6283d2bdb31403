#include "doctest.h"
#include "riesz/particles.hpp"
#include "riesz/pde.hpp"
#include "riesz/errors.hpp"
#include "riesz/philox.hpp"
#include "riesz/torus.hpp"

#include <cmath>
#include <memory>

using namespace riesz;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const PotentialTable> table_1d_log() {
    static auto t = std::make_shared<PotentialTable>(
        PotentialTable::build(RieszParams::make_gradient(1, 0.0, 0.25), 1024, 0.125));
    return t;
}

ParticleConfig make_config(std::vector<double> xs, const RieszParams& p, uint64_t seed = 1) {
    ParticleConfig c;
    c.dim = p.d;
    c.count = static_cast<int>(xs.size()) / p.d;
    c.x = std::move(xs);
    c.params = p;
    c.seed = seed;
    c.wrap();
    return c;
}

// closed form d=1, s=0: g'(x) = -pi cot(pi x) for x in (0,1)
double exact_dg_log(double x) {
    double r = x - std::floor(x);  // to (0,1)
    return -kPi / std::tan(kPi * r);
}
}  // namespace

TEST_CASE("two antipodal particles: forces are equal, opposite, and zero") {
    auto p = RieszParams::make_gradient(1, 0.0, 0.25);
    PairInteraction pair(table_1d_log(), 0.0);
    auto cfg = make_config({-0.25, 0.25}, p);
    std::vector<double> f(2);
    pair.forces(cfg, f);
    CHECK(f[0] == -f[1]);
    // the antipode is a critical point of g
    CHECK(std::fabs(f[0]) < 1e-10);
}

TEST_CASE("three-particle force matches the closed form") {
    auto p = RieszParams::make_gradient(1, 0.0, 0.25);
    PairInteraction pair(table_1d_log(), 0.0);
    auto cfg = make_config({-0.31, 0.04, 0.4}, p);
    std::vector<double> f(3);
    pair.forces(cfg, f);
    for (int i = 0; i < 3; ++i) {
        double expect = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            // gradient flow: force = -(1/N) sum grad g
            expect -= exact_dg_log(wrap_coord(cfg.x[i] - cfg.x[j])) / 3.0;
        }
        CHECK(f[static_cast<size_t>(i)] == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("action-reaction: total force vanishes to machine precision") {
    auto p2 = RieszParams::make_conservative(2, 0.0, 0.25);
    auto table2 = std::make_shared<PotentialTable>(
        PotentialTable::build(p2, 256, 0.125));
    PairInteraction pair(table2, 0.0);
    std::vector<double> xs;
    for (int i = 0; i < 24; ++i)
        xs.push_back(philox::uniform4(5, philox::kConfigGen, {static_cast<uint64_t>(i), 0, 0, 0})[0] - 0.5);
    auto cfg = make_config(std::move(xs), p2);
    std::vector<double> f(24);
    pair.forces(cfg, f);
    double sx = 0, sy = 0;
    for (int i = 0; i < 12; ++i) {
        sx += f[static_cast<size_t>(2 * i)];
        sy += f[static_cast<size_t>(2 * i) + 1];
    }
    CHECK(std::fabs(sx) <= 1e-12);
    CHECK(std::fabs(sy) <= 1e-12);
}

TEST_CASE("regularization consistency: eps and eps/2 agree on separated pairs") {
    auto p = RieszParams::make_gradient(1, 0.5, 0.25);
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 1024, 0.125));
    const double eps = 0.02;
    PairInteraction pa(table, eps), pb(table, eps / 2);
    auto cfg = make_config({-0.3, -0.1, 0.05, 0.31}, p);
    REQUIRE(cfg.min_pair_distance() > eps / 4);
    std::vector<double> fa(4), fb(4);
    pa.forces(cfg, fa);
    pb.forces(cfg, fb);
    for (int i = 0; i < 4; ++i)
        CHECK(std::fabs(fa[static_cast<size_t>(i)] - fb[static_cast<size_t>(i)]) <= 1e-10);
}

TEST_CASE("regularized force is finite at coincidence, exact one throws") {
    auto p = RieszParams::make_gradient(1, 0.5, 0.25);
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 1024, 0.125));
    auto cfg = make_config({0.1, 0.1}, p);
    PairInteraction exact(table, 0.0);
    std::vector<double> f(2);
    CHECK_THROWS_AS(exact.forces(cfg, f), singularity_error);
    PairInteraction reg(table, 0.05);
    reg.forces(cfg, f);
    CHECK(std::isfinite(f[0]));
    CHECK(f[0] == -f[1]);
}

TEST_CASE("em_step: torus wrap and fixed point at sigma = 0") {
    auto p0 = RieszParams::make_gradient(1, 0.0, 0.0);  // sigma = 0
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p0, 512, 0.125));
    PairInteraction pair(table, 0.0);
    auto cfg = make_config({-0.25, 0.25}, p0);  // zero-force configuration
    auto before = cfg.x;
    em_step(cfg, 1e-3, pair);
    CHECK(cfg.x[0] == doctest::Approx(before[0]).epsilon(1e-12));
    CHECK(cfg.x[1] == doctest::Approx(before[1]).epsilon(1e-12));
    CHECK(cfg.step == 1);

    // wrap correctness: drift +0.03 from 0.49 lands at -0.48
    CHECK(wrap_coord(0.49 + 0.03) == doctest::Approx(-0.48).epsilon(1e-14));
}

TEST_CASE("noise calibration: increment variance = 2 sigma dt") {
    auto p = RieszParams::make_conservative(1, 0.0, 0.25);  // zero drift in d=1
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 512, 0.125));
    PairInteraction pair(table, 0.0);
    const double dt = 1e-3;
    const int nparticles = 1000, nsteps = 100;
    std::vector<double> xs;
    for (int i = 0; i < nparticles; ++i)
        xs.push_back(-0.5 + (i + 0.5) / nparticles);
    ParticleConfig cfg = make_config(std::move(xs), p, 77);
    double sum = 0, sum2 = 0;
    for (int k = 0; k < nsteps; ++k) {
        auto prev = cfg.x;
        em_step(cfg, dt, pair);
        for (int i = 0; i < nparticles; ++i) {
            double inc = wrap_coord(cfg.x[static_cast<size_t>(i)] - prev[static_cast<size_t>(i)]);
            sum += inc;
            sum2 += inc * inc;
        }
    }
    const double count = static_cast<double>(nparticles) * nsteps;
    const double mean = sum / count;
    const double var = sum2 / count - mean * mean;
    const double expect = 2.0 * p.sigma * dt;
    const double se = expect * std::sqrt(2.0 / count);
    CHECK(std::fabs(var - expect) <= 3.0 * se);
}

TEST_CASE("interaction energy nonincreasing for the noiseless gradient flow") {
    auto p = RieszParams::make_gradient(1, 0.0, 0.0);
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 512, 0.125));
    PairInteraction pair(table, 0.0);
    auto cfg = make_config({-0.4, -0.13, 0.02, 0.17, 0.33}, p);
    double prev = pair.interaction_energy(cfg);
    for (int k = 0; k < 30; ++k) {
        em_step(cfg, 2e-4, pair);
        double e = pair.interaction_energy(cfg);
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
}

TEST_CASE("empirical fourier basics") {
    auto p = RieszParams::make_gradient(1, 0.0, 0.25);
    // a single particle at the origin: all coefficients 1
    auto single = make_config({0.0}, p);
    auto s = empirical_fourier(single, 4);
    for (int k = -4; k <= 4; ++k) CHECK(std::abs(s.at(k) - 1.0) < 1e-14);

    // N equispaced points: muhat(xi) = 1 iff N | xi
    const int n = 8;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(-0.5 + static_cast<double>(i) / n);
    auto eq = make_config(std::move(xs), p);
    auto se = empirical_fourier(eq, 9);
    CHECK(std::abs(se.at(8) - 1.0) < 1e-12);
    CHECK(std::abs(se.at(0) - 1.0) < 1e-14);
    for (int k : {1, 2, 3, 5, 7, 9}) CHECK(std::abs(se.at(k)) < 1e-12);

    // random config matches the direct summation oracle
    std::vector<double> rx;
    for (int i = 0; i < 17; ++i)
        rx.push_back(philox::uniform4(3, philox::kConfigGen, {static_cast<uint64_t>(i), 1, 0, 0})[0] - 0.5);
    auto rc = make_config(std::move(rx), p);
    auto sr = empirical_fourier(rc, 12);
    for (int k = -12; k <= 12; ++k) {
        std::complex<double> direct{0.0, 0.0};
        for (int i = 0; i < rc.count; ++i)
            direct += std::polar(1.0, -2.0 * kPi * k * rc.x[static_cast<size_t>(i)]);
        direct /= rc.count;
        CHECK(std::abs(sr.at(k) - direct) <= 1e-12);
    }
}

TEST_CASE("empirical fourier 2d matches direct sums") {
    auto p = RieszParams::make_conservative(2, 0.0, 0.25);
    std::vector<double> xs;
    for (int i = 0; i < 22; ++i)
        xs.push_back(philox::uniform4(9, philox::kConfigGen, {static_cast<uint64_t>(i), 2, 0, 0})[0] - 0.5);
    auto cfg = make_config(std::move(xs), p);
    auto s = empirical_fourier(cfg, 5);
    for (int k0 = -5; k0 <= 5; ++k0)
        for (int k1 = -5; k1 <= 5; ++k1) {
            std::complex<double> direct{0.0, 0.0};
            for (int i = 0; i < cfg.count; ++i)
                direct += std::polar(1.0, -2.0 * kPi * (k0 * cfg.at(i)[0] + k1 * cfg.at(i)[1]));
            direct /= cfg.count;
            CHECK(std::abs(s.at(k0, k1) - direct) <= 1e-12);
        }
}

TEST_CASE("density samplers hit the target distribution") {
    auto p = RieszParams::make_gradient(1, 0.0, 0.25);
    GridField mu = GridField::from_function(1, 256, [](const double* x) {
        return 1.0 + 0.5 * std::cos(2 * kPi * x[0]);
    });
    auto cfg = sample_from_density(mu, 20000, p, 11, 0);
    // compare the empirical first mode against muhat(1) = 0.25
    auto s = empirical_fourier(cfg, 1);
    CHECK(std::abs(s.at(1) - 0.25) < 3.0 / std::sqrt(20000.0));

    auto p2 = RieszParams::make_conservative(2, 0.0, 0.25);
    GridField mu2 = GridField::from_function(2, 64, [](const double* x) {
        return 1.0 + 0.4 * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
    });
    auto cfg2 = sample_from_density(mu2, 20000, p2, 11, 1);
    auto s2 = empirical_fourier(cfg2, 1);
    // muhat(1,1) = 0.4/4 = 0.1
    CHECK(std::abs(s2.at(1, 1) - 0.1) < 3.0 / std::sqrt(20000.0));
}

TEST_CASE("ensembles are deterministic and thread-count independent") {
    auto p = RieszParams::make_gradient(1, 0.5, 0.25);
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 512, 0.125));
    PairInteraction pair(table, PairInteraction::default_eps_reg(32, 1.5, 1));
    GridField mu = initial_profile(1, 256, "single_mode(0.3,1)");
    ParticleConfig base;
    base.dim = 1;
    base.count = 32;
    base.params = p;
    base.seed = 42;
    EnsembleConfig ec;
    ec.replicas = 4;
    ec.dt = 1e-3;
    ec.t_end = 0.02;
    ec.record_times = {0.01, 0.02};
    ec.kmax = 8;
    ec.initial_density = &mu;
    ec.threads = 1;
    auto r1 = run_ensemble(base, pair, ec);
    ec.threads = 2;
    auto r2 = run_ensemble(base, pair, ec);
    REQUIRE(r1.records.size() == r2.records.size());
    for (size_t k = 0; k < r1.records.size(); ++k)
        for (int r = 0; r < ec.replicas; ++r)
            CHECK(r1.records[k].positions[static_cast<size_t>(r)] ==
                  r2.records[k].positions[static_cast<size_t>(r)]);
    CHECK(r1.survivors == 4);

    // replicas = 1 reproduces the first replica bit for bit
    ec.threads = 1;
    ec.replicas = 1;
    auto r3 = run_ensemble(base, pair, ec);
    CHECK(r3.records[0].positions[0] == r1.records[0].positions[0]);
}

TEST_CASE("iid uniform ensemble: mean nonzero modes vanish within CI") {
    auto p = RieszParams::make_gradient(1, 0.5, 0.25);
    auto table = std::make_shared<PotentialTable>(PotentialTable::build(p, 512, 0.125));
    PairInteraction pair(table, 0.0);
    GridField uniform(1, 64, 1.0);
    ParticleConfig base;
    base.dim = 1;
    base.count = 64;
    base.params = RieszParams::make_gradient(1, 0.5, 0.0);  // no noise needed
    base.seed = 7;
    EnsembleConfig ec;
    ec.replicas = 64;
    ec.dt = 1e-3;
    ec.record_times = {0.0};
    ec.kmax = 3;
    ec.initial_density = &uniform;
    auto res = run_ensemble(base, pair, ec);
    for (int k = 1; k <= 3; ++k) {
        std::complex<double> mean{0, 0};
        for (const auto& s : res.records[0].spectra) mean += s.at(k);
        mean /= static_cast<double>(ec.replicas);
        CHECK(std::abs(mean) < 3.0 / std::sqrt(64.0 * 64.0));
    }
}
