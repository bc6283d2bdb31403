#include "riesz/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "riesz/errors.hpp"
#include "riesz/fit.hpp"
#include "riesz/philox.hpp"

namespace riesz {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLogFloor = 1e-14;  // diagnostics only, never dynamics

void dealias_two_thirds(Spectrum& s) {
    int k[3];
    const int cut = s.n / 3;
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        for (int a = 0; a < s.dim; ++a)
            if (std::abs(k[a]) > cut) {
                s.c[i] = 0.0;
                break;
            }
    }
}

double phi1(double z) {  // (e^z - 1)/z, phi1(0) = 1
    if (std::fabs(z) < 1e-5) return 1.0 + z * (0.5 + z / 6.0);
    return std::expm1(z) / z;
}

}  // namespace

GridField initial_profile(int dim, int n, const std::string& spec) {
    if (spec == "uniform") return GridField(dim, n, 1.0);

    double a = 0, b = 0;
    unsigned long su = 0;
    int k = 0;
    if (std::sscanf(spec.c_str(), "single_mode(%lf,%d)", &a, &k) == 2) {
        if (!(std::fabs(a) < 1.0) || k < 1)
            throw parameter_error("single_mode: need |eps| < 1, k >= 1");
        return GridField::from_function(dim, n, [&](const double* x) {
            return 1.0 + a * std::cos(2.0 * kPi * k * x[0]);
        });
    }
    if (std::sscanf(spec.c_str(), "random_band(%lu,%d,%lf)", &su, &k, &a) == 3) {
        if (!(a > 0.0 && a < 1.0) || k < 1)
            throw parameter_error("random_band: need 0 < eps < 1, kmax >= 1");
        GridField f(dim, n, 0.0);
        Spectrum s = f.fft();
        int kv[3];
        for (size_t i = 0; i < s.c.size(); ++i) {
            s.freq(i, kv);
            int kinf = 0;
            for (int ax = 0; ax < dim; ++ax) kinf = std::max(kinf, std::abs(kv[ax]));
            if (kinf == 0 || kinf > k) continue;
            auto u = philox::normal4(su, philox::kConfigGen, {i, 0, 0, 17});
            s.c[i] = {u[0], u[1]};
        }
        f = GridField::from_spectrum(s);
        double norm = lp_norm(f, std::numeric_limits<double>::infinity());
        if (norm == 0.0) throw parameter_error("random_band: empty band");
        GridField mu = f;
        for (size_t i = 0; i < mu.size(); ++i) mu[i] = 1.0 + a * f[i] / norm;
        return mu;
    }
    if (std::sscanf(spec.c_str(), "bump(%lf,%lf)", &a, &b) == 2) {
        if (!(b > 0.0 && b < 0.25)) throw parameter_error("bump: width in (0, 1/4)");
        GridField mu = GridField::from_function(dim, n, [&](const double* x) {
            double prod = 1.0;
            for (int ax = 0; ax < dim; ++ax) {
                double acc = 0.0;
                for (int im = -4; im <= 4; ++im) {
                    double dx = x[ax] - a - im;
                    acc += std::exp(-dx * dx / (2.0 * b * b));
                }
                prod *= acc / std::sqrt(2.0 * kPi * b * b);
            }
            return prod;
        });
        double m = mu.mean();
        for (size_t i = 0; i < mu.size(); ++i) mu[i] /= m;
        return mu;
    }
    throw parameter_error("unknown initial profile: " + spec);
}

PdeSolver::PdeSolver(const RieszParams& p, int grid) : p_(p), n_(grid) {
    if (grid < 8 || (grid & (grid - 1)) != 0)
        throw parameter_error("PdeSolver: grid must be a power of two >= 8");
    if (p.d > 2) throw parameter_error("PdeSolver: d in {1,2}");
}

std::vector<GridField> PdeSolver::interaction_gradient(const GridField& mu) const {
    return riesz_gradient_convolution(mu, p_);
}

std::vector<GridField> PdeSolver::velocity_field(const GridField& mu,
                                                 bool with_grad_log) const {
    auto w = interaction_gradient(mu);
    std::vector<GridField> v;
    v.reserve(static_cast<size_t>(p_.d));
    for (int i = 0; i < p_.d; ++i) {
        GridField vi(mu.dim(), mu.n(), 0.0);
        for (int j = 0; j < p_.d; ++j) {
            const double mij = p_.m(i, j);
            if (mij == 0.0) continue;
            const auto& wj = w[static_cast<size_t>(j)];
            for (size_t idx = 0; idx < vi.size(); ++idx) vi[idx] += mij * wj[idx];
        }
        v.push_back(std::move(vi));
    }
    if (with_grad_log) {
        if (mu.min() <= 0.0)
            throw field_domain_error("velocity_field: grad log mu needs mu > 0");
        auto grad = spectral_gradient(mu);
        for (int i = 0; i < p_.d; ++i) {
            auto& vi = v[static_cast<size_t>(i)];
            const auto& gi = grad[static_cast<size_t>(i)];
            for (size_t idx = 0; idx < vi.size(); ++idx)
                vi[idx] += p_.sigma * gi[idx] / mu[idx];
        }
    }
    return v;
}

double PdeSolver::max_speed(const GridField& mu) const {
    auto v = velocity_field(mu);
    double m = 0.0;
    for (size_t idx = 0; idx < mu.size(); ++idx) {
        double s2 = 0.0;
        for (int i = 0; i < p_.d; ++i) {
            double vi = v[static_cast<size_t>(i)][idx];
            s2 += vi * vi;
        }
        m = std::max(m, s2);
    }
    return std::sqrt(m);
}

double PdeSolver::cfl_dt(const GridField& mu, double cfl) const {
    const double h = 1.0 / n_;
    const double vmax = max_speed(mu);
    double guard = std::numeric_limits<double>::infinity();
    if (vmax > 0.0) guard = cfl * h / vmax;

    // Modal stability of the explicit drift term: mode k is multiplied per
    // step by e^{z} - dt phi1(z) lambda_k (gradient) where z = -4 pi^2 sigma
    // dt k^2 and lambda_k = |c_ds| (2 pi k)^{2+s-d} mu_max; conservative
    // flows rotate instead, giving the quadrature combination.
    const double mumax = std::max(mu.max(), 0.0);
    if (mumax > 0.0) {
        auto amp = [&](double dt) {
            double worst = 0.0;
            for (int k = 1; k <= n_ / 3; ++k) {
                const double z = -4.0 * kPi * kPi * p_.sigma * dt * k * k;
                const double lam = std::fabs(p_.c_ds) *
                                   std::pow(2.0 * kPi * k, 2.0 + p_.s - p_.d) * mumax;
                const double drift = dt * phi1(z) * lam;
                const double a = (p_.flow == FlowKind::gradient)
                                     ? std::fabs(std::exp(z) - drift)
                                     : std::sqrt(std::exp(2.0 * z) + drift * drift);
                worst = std::max(worst, a);
            }
            return worst;
        };
        // amp -> 1^- as dt -> 0; bisect the largest dt with amp <= 1 and
        // keep a safety margin below it.
        double hi = std::min(guard, 1.0);
        if (!(amp(hi) <= 1.0)) {
            double lo = 0.0;
            for (int it = 0; it < 60 && hi - lo > 1e-3 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (amp(mid) <= 1.0 ? lo : hi) = mid;
            }
            guard = std::min(guard, 0.9 * lo);
        }
    }
    return guard;
}

void PdeSolver::step(PdeState& state) const {
    const double dt = state.dt;
    if (!(dt > 0.0)) throw parameter_error("step: dt > 0 required");
    GridField& mu = state.mu;

    auto v = velocity_field(mu);
    std::vector<Spectrum> flux_hat;
    flux_hat.reserve(static_cast<size_t>(p_.d));
    for (int i = 0; i < p_.d; ++i) {
        GridField flux(mu.dim(), mu.n(), 0.0);
        const auto& vi = v[static_cast<size_t>(i)];
        for (size_t idx = 0; idx < mu.size(); ++idx) flux[idx] = mu[idx] * vi[idx];
        Spectrum fh = flux.fft();
        dealias_two_thirds(fh);
        flux_hat.push_back(std::move(fh));
    }

    Spectrum s = mu.fft();
    int k[3];
    const double fac = -4.0 * kPi * kPi * p_.sigma * dt;
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        double k2 = 0.0;
        for (int a = 0; a < p_.d; ++a) k2 += static_cast<double>(k[a]) * k[a];
        // N = -div(flux) spectrally; unpaired Nyquist rows carry no odd
        // multiplier (they are inside the dealias mask anyway)
        std::complex<double> nhat{0.0, 0.0};
        for (int a = 0; a < p_.d; ++a) {
            if (k[a] == n_ / 2 || k[a] == -n_ / 2) continue;
            nhat -= std::complex<double>(0.0, 2.0 * kPi * k[a]) *
                    flux_hat[static_cast<size_t>(a)].c[i];
        }
        const double z = fac * k2;
        s.c[i] = std::exp(z) * s.c[i] + dt * phi1(z) * nhat;
    }
    mu = GridField::from_spectrum(s);
    state.t += dt;
    state.step += 1;
    if (!mu.all_finite())
        throw blowup_error(state.t, "solution left the finite regime (blow-up)");
}

double PdeSolver::entropy(const GridField& mu) const {
    // tolerate dealiasing undershoot at the 1e-9 relative level; the floor
    // then absorbs it (spec floor eps_log = 1e-14, diagnostics only)
    if (mu.min() < -1e-6 * std::max(1.0, mu.max()))
        throw field_domain_error("entropy: mu must be nonnegative");
    double acc = 0.0;
    for (double v : mu.values()) {
        double m = std::max(v, kLogFloor);
        acc += m * std::log(m);
    }
    return acc / static_cast<double>(mu.size());
}

double PdeSolver::energy(const GridField& mu) const {
    Spectrum s = mu.fft();
    int k[3];
    double acc = 0.0;
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        double k2 = 0.0;
        for (int a = 0; a < p_.d; ++a) k2 += static_cast<double>(k[a]) * k[a];
        if (k2 == 0.0) continue;
        acc += s.hermitian_weight(i) * riesz_fourier_coeff_absxi(std::sqrt(k2), p_) *
               std::norm(s.c[i]);
    }
    return 0.5 * acc;
}

double PdeSolver::free_energy(const GridField& mu) const {
    return p_.sigma * entropy(mu) + energy(mu);
}

double PdeSolver::dissipation(const GridField& mu) const {
    if (mu.min() < -1e-6 * std::max(1.0, mu.max()))
        throw field_domain_error("dissipation: mu must be positive");
    auto gg = interaction_gradient(mu);
    auto grad = spectral_gradient(mu);
    double acc = 0.0;
    for (size_t idx = 0; idx < mu.size(); ++idx) {
        const double m = std::max(mu[idx], kLogFloor);
        double u2 = 0.0;
        for (int a = 0; a < p_.d; ++a) {
            double u = p_.sigma * grad[static_cast<size_t>(a)][idx] / m +
                       gg[static_cast<size_t>(a)][idx];
            u2 += u * u;
        }
        acc += u2 * m;
    }
    return acc / static_cast<double>(mu.size());
}

DiagnosticsRecord PdeSolver::diagnostics(const GridField& mu, double t) const {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = mu.mean();
    GridField dev = mu;
    for (size_t i = 0; i < dev.size(); ++i) dev[i] -= 1.0;
    r.l1 = lp_norm(dev, 1.0);
    r.l2 = lp_norm(dev, 2.0);
    r.linf = lp_norm(dev, std::numeric_limits<double>::infinity());
    r.entropy = entropy(mu);
    r.energy = energy(mu);
    r.free_energy = p_.sigma * r.entropy + r.energy;
    r.min_mu = mu.min();
    r.max_mu = mu.max();
    r.sobolev_h1 = sobolev_seminorm(mu, 1.0);
    r.dissipation = (r.min_mu > 0.0) ? dissipation(mu) : std::nan("");
    return r;
}

PdeRun PdeSolver::run(const PdeConfig& cfg) const {
    GridField mu = initial_profile(p_.d, n_, cfg.initial);
    // normalize the quadrature mass to exactly one
    const double m0 = mu.mean();
    if (!(m0 > 0.0)) throw parameter_error("run: initial profile has nonpositive mass");
    for (size_t i = 0; i < mu.size(); ++i) mu[i] /= m0;
    if (!mu.is_probability(1e-10))
        throw field_domain_error("run: initial profile is not a probability density");

    const double min0 = mu.min();
    const double max0 = mu.max();
    const double tol_minprinciple =
        1e-6 * lp_norm(mu, std::numeric_limits<double>::infinity());

    PdeRun out;
    PdeState st;
    st.mu = std::move(mu);
    st.dt = std::min(cfg.dt, cfl_dt(st.mu, cfg.cfl));
    out.dt_used = st.dt;

    auto want_snapshot = [&](double t) {
        for (double ts : cfg.snapshot_times)
            if (std::fabs(ts - t) <= 0.5 * st.dt) return true;
        return false;
    };

    auto check_record = [&](const DiagnosticsRecord& r) {
        if (std::fabs(r.mass - 1.0) > 1e-10)
            throw blowup_error(r.t, "mass conservation violated");
        if (p_.flow == FlowKind::gradient) {
            if (min0 >= 0.0 && r.min_mu < min0 - tol_minprinciple)
                throw blowup_error(r.t, "minimum principle violated");
        } else {
            if (r.min_mu < min0 - tol_minprinciple || r.max_mu > max0 + tol_minprinciple)
                throw blowup_error(r.t, "conservative min/max bounds violated");
        }
    };

    out.records.push_back(diagnostics(st.mu, st.t));
    if (cfg.keep_snapshots && (cfg.snapshot_times.empty() || want_snapshot(0.0)))
        out.snapshots.emplace_back(0.0, st.mu);

    if (!cfg.adapt_dt) {
        const long nsteps = static_cast<long>(std::ceil(cfg.t_end / st.dt - 1e-12));
        for (long k = 1; k <= nsteps; ++k) {
            step(st);
            const bool record = (k % cfg.record_every == 0) || k == nsteps;
            if (record) {
                out.records.push_back(diagnostics(st.mu, st.t));
                check_record(out.records.back());
            }
            if (cfg.keep_snapshots && (cfg.snapshot_times.empty() ? record : want_snapshot(st.t)))
                out.snapshots.emplace_back(st.t, st.mu);
        }
    } else {
        const double record_period = cfg.dt * cfg.record_every;
        double next_record = record_period;
        long since_guard = 0;
        while (st.t < cfg.t_end - 1e-12) {
            if (++since_guard >= 200) {
                since_guard = 0;
                const double g = std::min(cfg.dt, cfl_dt(st.mu, cfg.cfl));
                if (g > 1.6 * st.dt) st.dt = g;
            }
            step(st);
            const bool record = st.t >= next_record - 1e-12 || st.t >= cfg.t_end - 1e-12;
            if (record) {
                while (next_record <= st.t + 1e-12) next_record += record_period;
                out.records.push_back(diagnostics(st.mu, st.t));
                check_record(out.records.back());
            }
            if (cfg.keep_snapshots && (cfg.snapshot_times.empty() ? record : want_snapshot(st.t)))
                out.snapshots.emplace_back(st.t, st.mu);
        }
    }
    out.final_state = std::move(st);
    return out;
}

double fit_exp_rate(std::span<const double> ts, std::span<const double> values,
                    double t0, double t1) {
    std::vector<double> x, y;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < t0 || ts[i] > t1) continue;
        if (!(values[i] > 0.0)) throw fit_error("fit_exp_rate: nonpositive value in window");
        x.push_back(ts[i]);
        y.push_back(std::log(values[i]));
    }
    return linear_fit(x, y).slope;
}

double gradient_norm(const GridField& mu, int order, double q) {
    if (order < 1 || order > 2) throw parameter_error("gradient_norm: order in {1,2}");
    const int d = mu.dim();
    std::vector<GridField> comps;
    if (order == 1) {
        comps = spectral_gradient(mu);
    } else {
        auto g1 = spectral_gradient(mu);
        for (int a = 0; a < d; ++a) {
            auto g2 = spectral_gradient(g1[static_cast<size_t>(a)]);
            for (int b = 0; b < d; ++b) comps.push_back(std::move(g2[static_cast<size_t>(b)]));
        }
    }
    GridField mag(mu.dim(), mu.n(), 0.0);
    for (const auto& c : comps)
        for (size_t i = 0; i < mag.size(); ++i) mag[i] += c[i] * c[i];
    for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::sqrt(mag[i]);
    return lp_norm(mag, q);
}

DerivativeDecayRow derivative_decay_report(const PdeRun& run, double sigma,
                                           int order, double q) {
    DerivativeDecayRow row;
    row.order = order;
    row.q = q;
    row.sup_early = 0.0;
    std::vector<double> ts, vs;
    for (const auto& [t, mu] : run.snapshots) {
        const double st = sigma * t;
        const double norm = gradient_norm(mu, order, q);
        if (st >= 1e-3 && st <= 1e-1)
            row.sup_early = std::max(row.sup_early, std::pow(st, order / 2.0) * norm);
        if (norm > 0.0 && t > 0.0) {
            ts.push_back(t);
            vs.push_back(norm);
        }
    }
    if (ts.size() >= 3) {
        const double tmax = ts.back();
        row.late_rate = -fit_exp_rate(ts, vs, 0.5 * tmax, tmax);
    } else {
        row.late_rate = std::nan("");
    }
    return row;
}

}  // namespace riesz
