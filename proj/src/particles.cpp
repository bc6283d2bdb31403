#include "riesz/particles.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "riesz/errors.hpp"
#include "riesz/philox.hpp"
#include "riesz/torus.hpp"

namespace riesz {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

void ParticleConfig::wrap() {
    for (double& v : x) v = wrap_coord(v);
}

double ParticleConfig::min_pair_distance() const {
    double best = 1e300;
    for (int i = 0; i < count; ++i)
        for (int j = i + 1; j < count; ++j)
            best = std::min(best, min_image_r2(at(i), at(j), dim));
    return std::sqrt(best);
}

PairInteraction::PairInteraction(std::shared_ptr<const PotentialTable> table,
                                 double eps_reg)
    : table_(std::move(table)), eps_(eps_reg) {
    if (eps_ < 0.0) throw parameter_error("PairInteraction: eps_reg >= 0");
    // Appendix-A scaling: cap profile is 1 on [0, eps/16], 0 beyond eps/8.
    reg_bump_.inner_fraction = 0.5;
    reg_bump_.smooth_order = 5;
    if (table_->params().d == 1)
        radial_ = std::make_shared<RadialKernel>(table_);
    if (eps_ > 0.0 && table_->params().d == 1) {
        // dense lookup of the regularized radial force on [0, eps/8]
        const int m = 4096;
        reg_profile_.resize(static_cast<size_t>(m) + 2);
        reg_step_ = (eps_ / 8.0) / m;
        for (int j = 0; j <= m + 1; ++j) {
            const double r = j * reg_step_;
            double out;
            if (r == 0.0) {
                out = 0.0;  // grad(g - g_E)(0) = 0 by evenness
            } else {
                double dx = r;
                pair_gradient(&dx, r, &out);
            }
            reg_profile_[static_cast<size_t>(j)] = out;
        }
    }
}

double PairInteraction::default_eps_reg(int count, double mu_linf, int dim) {
    return std::pow(count * std::max(mu_linf, 1e-12), -1.0 / dim) / 8.0;
}

void PairInteraction::pair_gradient(const double* dx, double r, double* out) const {
    const RieszParams& p = table_->params();
    const double r_out = eps_ / 8.0;
    if (eps_ == 0.0 || r >= r_out) {
        table_->eval_grad_g(dx, out);
        return;
    }
    const double chi = reg_bump_.chi(r, r_out);
    const double dchi = reg_bump_.chi_deriv(r, r_out);
    double acc[3] = {0, 0, 0};
    if (chi < 1.0) {
        table_->eval_grad_g(dx, acc);
        for (int a = 0; a < p.d; ++a) acc[a] *= (1.0 - chi);
    }
    double corr_grad[3] = {0, 0, 0};
    table_->grad_smooth_correction(dx, corr_grad);
    const double ge = table_->ewald().euclidean_g(r);
    for (int a = 0; a < p.d; ++a) {
        const double unit = (r > 0.0) ? dx[a] / r : 0.0;
        out[a] = acc[a] - ge * dchi * unit + corr_grad[a] * chi;
    }
}

double PairInteraction::regularized_dg(double r) const {
    // radial (d=1) regularized force from the dense profile
    const double u = r / reg_step_;
    const int j = static_cast<int>(u);
    const double tau = u - j;
    return reg_profile_[static_cast<size_t>(j)] * (1.0 - tau) +
           reg_profile_[static_cast<size_t>(j) + 1] * tau;
}

void PairInteraction::forces(const ParticleConfig& cfg, std::span<double> out) const {
    const int n = cfg.count, d = cfg.dim;
    if (out.size() != static_cast<size_t>(n) * d)
        throw parameter_error("forces: output size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    const double r_reg = eps_ / 8.0;

    if (d == 1) {
        const RadialKernel& k = *radial_;
        const double* xs = cfg.x.data();
        for (int i = 0; i < n; ++i) {
            const double xi = xs[i];
            double acc = 0.0;
            for (int j = i + 1; j < n; ++j) {
                double dx = wrap_coord(xi - xs[j]);
                const double r = std::fabs(dx);
                double f;
                if (eps_ > 0.0 && r < r_reg) {
                    f = (r == 0.0) ? 0.0 : regularized_dg(r) * (dx > 0 ? 1.0 : -1.0);
                } else {
                    if (r == 0.0)
                        throw singularity_error("coincident particles with eps_reg = 0");
                    f = k.dg(r) * (dx > 0 ? 1.0 : -1.0);
                }
                acc += f;
                out[static_cast<size_t>(j)] -= f;
            }
            out[static_cast<size_t>(i)] += acc;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double dx[3] = {0, 0, 0};
                double r2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    dx[a] = wrap_coord(cfg.at(i)[a] - cfg.at(j)[a]);
                    r2 += dx[a] * dx[a];
                }
                const double r = std::sqrt(r2);
                if (r == 0.0 && eps_ == 0.0)
                    throw singularity_error("coincident particles with eps_reg = 0");
                double grad[3] = {0, 0, 0};
                if (r > 0.0) pair_gradient(dx, r, grad);
                for (int a = 0; a < d; ++a) {
                    out[static_cast<size_t>(i) * d + a] += grad[a];
                    out[static_cast<size_t>(j) * d + a] -= grad[a];
                }
            }
        }
    }

    // apply the flow matrix and mean-field normalization
    const RieszParams& p = cfg.params;
    const double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        double v[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) v[a] = out[static_cast<size_t>(i) * d + a];
        for (int a = 0; a < d; ++a) {
            double acc = 0.0;
            for (int b = 0; b < d; ++b) acc += p.m(a, b) * v[b];
            out[static_cast<size_t>(i) * d + a] = acc * inv_n;
        }
    }
}

double PairInteraction::interaction_energy(const ParticleConfig& cfg) const {
    const int n = cfg.count, d = cfg.dim;
    double acc = 0.0;
    if (d == 1) {
        const RadialKernel& k = *radial_;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double r = std::fabs(wrap_coord(cfg.x[static_cast<size_t>(i)] -
                                                      cfg.x[static_cast<size_t>(j)]));
                if (r == 0.0) throw singularity_error("coincident particles in energy");
                acc += k.g(r);
            }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double dx[3] = {0, 0, 0};
                for (int a = 0; a < d; ++a)
                    dx[a] = wrap_coord(cfg.at(i)[a] - cfg.at(j)[a]);
                acc += table_->eval_g(dx);
            }
    }
    return acc / (static_cast<double>(n) * n);
}

void em_step_noise_only(ParticleConfig& cfg, double dt) {
    if (!(dt > 0.0)) throw parameter_error("em_step: dt > 0");
    const int n = cfg.count, d = cfg.dim;
    const double noise_scale = std::sqrt(2.0 * cfg.params.sigma * dt);
    for (int i = 0; i < n; ++i) {
        auto xi = philox::normal4(cfg.seed, philox::kNoise,
                                  {0, static_cast<uint64_t>(i),
                                   static_cast<uint64_t>(cfg.step), cfg.replica});
        for (int a = 0; a < d; ++a) {
            double& v = cfg.x[static_cast<size_t>(i) * d + a];
            v = wrap_coord(v + noise_scale * xi[static_cast<size_t>(a)]);
        }
    }
    cfg.t += dt;
    cfg.step += 1;
}

void em_step(ParticleConfig& cfg, double dt, const PairInteraction& pair) {
    if (!(dt > 0.0)) throw parameter_error("em_step: dt > 0");
    const int n = cfg.count, d = cfg.dim;
    std::vector<double> f(static_cast<size_t>(n) * d);
    pair.forces(cfg, f);
    const double noise_scale = std::sqrt(2.0 * cfg.params.sigma * dt);
    for (int i = 0; i < n; ++i) {
        auto xi = philox::normal4(cfg.seed, philox::kNoise,
                                  {0, static_cast<uint64_t>(i),
                                   static_cast<uint64_t>(cfg.step), cfg.replica});
        for (int a = 0; a < d; ++a) {
            double& v = cfg.x[static_cast<size_t>(i) * d + a];
            v = wrap_coord(v + dt * f[static_cast<size_t>(i) * d + a] +
                           noise_scale * xi[static_cast<size_t>(a)]);
        }
    }
    cfg.t += dt;
    cfg.step += 1;
}

EmpiricalSpectrum empirical_fourier(const ParticleConfig& cfg, int kmax) {
    EmpiricalSpectrum s;
    s.dim = cfg.dim;
    s.kmax = kmax;
    const int w = 2 * kmax + 1;
    const int n = cfg.count;
    const double inv_n = 1.0 / n;
    if (cfg.dim == 1) {
        s.c.assign(static_cast<size_t>(w), {0.0, 0.0});
        for (int i = 0; i < n; ++i) {
            const std::complex<double> e0 = std::polar(1.0, -2.0 * kPi * cfg.x[static_cast<size_t>(i)]);
            std::complex<double> ek{1.0, 0.0};
            for (int k = 0; k <= kmax; ++k) {
                s.c[static_cast<size_t>(kmax + k)] += ek;
                ek *= e0;
            }
        }
        for (int k = 1; k <= kmax; ++k)
            s.c[static_cast<size_t>(kmax - k)] = std::conj(s.c[static_cast<size_t>(kmax + k)]);
        for (auto& z : s.c) z *= inv_n;
    } else {
        s.c.assign(static_cast<size_t>(w) * w, {0.0, 0.0});
        std::vector<std::complex<double>> ex(static_cast<size_t>(w)), ey(static_cast<size_t>(w));
        for (int i = 0; i < n; ++i) {
            const std::complex<double> e0 = std::polar(1.0, -2.0 * kPi * cfg.at(i)[0]);
            const std::complex<double> e1 = std::polar(1.0, -2.0 * kPi * cfg.at(i)[1]);
            ex[static_cast<size_t>(kmax)] = {1.0, 0.0};
            ey[static_cast<size_t>(kmax)] = {1.0, 0.0};
            for (int k = 1; k <= kmax; ++k) {
                ex[static_cast<size_t>(kmax + k)] = ex[static_cast<size_t>(kmax + k - 1)] * e0;
                ex[static_cast<size_t>(kmax - k)] = std::conj(ex[static_cast<size_t>(kmax + k)]);
                ey[static_cast<size_t>(kmax + k)] = ey[static_cast<size_t>(kmax + k - 1)] * e1;
                ey[static_cast<size_t>(kmax - k)] = std::conj(ey[static_cast<size_t>(kmax + k)]);
            }
            for (int a = 0; a < w; ++a)
                for (int b = 0; b < w; ++b)
                    s.c[static_cast<size_t>(a) * w + b] += ex[static_cast<size_t>(a)] * ey[static_cast<size_t>(b)];
        }
        for (auto& z : s.c) z *= inv_n;
    }
    return s;
}

ParticleConfig random_uniform_config(int count, const RieszParams& params,
                                     uint64_t seed, uint64_t replica) {
    ParticleConfig cfg;
    cfg.dim = params.d;
    cfg.count = count;
    cfg.params = params;
    cfg.seed = seed;
    cfg.replica = replica;
    cfg.x.resize(static_cast<size_t>(count) * params.d);
    for (int i = 0; i < count; ++i) {
        auto u = philox::uniform4(seed, philox::kInit,
                                  {0, static_cast<uint64_t>(i), 2, replica});
        for (int a = 0; a < params.d; ++a)
            cfg.at(i)[a] = u[static_cast<size_t>(a)] - 0.5;
    }
    return cfg;
}

ParticleConfig sample_from_density(const GridField& density, int count,
                                   const RieszParams& params, uint64_t seed,
                                   uint64_t replica) {
    if (density.dim() != params.d) throw parameter_error("sample: dimension mismatch");
    if (density.min() < 0.0) throw field_domain_error("sample: density must be >= 0");
    ParticleConfig cfg;
    cfg.dim = params.d;
    cfg.count = count;
    cfg.params = params;
    cfg.seed = seed;
    cfg.replica = replica;
    cfg.x.resize(static_cast<size_t>(count) * params.d);

    const int n = density.n();
    if (params.d == 1) {
        // exact inverse CDF of the piecewise-linear interpolant
        std::vector<double> cum(static_cast<size_t>(n) + 1, 0.0);
        auto f = [&](int j) { return density[static_cast<size_t>(((j % n) + n) % n)]; };
        for (int j = 0; j < n; ++j)
            cum[static_cast<size_t>(j) + 1] =
                cum[static_cast<size_t>(j)] + 0.5 * (f(j) + f(j + 1)) / n;
        const double total = cum[static_cast<size_t>(n)];
        for (int i = 0; i < count; ++i) {
            const double u =
                philox::uniform4(seed, philox::kInit, {0, static_cast<uint64_t>(i), 0, replica})[0] *
                total;
            int j = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()) - 1;
            j = std::clamp(j, 0, n - 1);
            const double a = f(j), b = f(j + 1);
            const double target = (u - cum[static_cast<size_t>(j)]) * n;  // cell-local mass
            // solve a tau + (b-a) tau^2/2 = target on [0,1]
            double tau;
            if (std::fabs(b - a) < 1e-14 * std::max(1.0, a)) {
                tau = (a > 0.0) ? target / a : 0.5;
            } else {
                const double disc = a * a + 2.0 * (b - a) * target;
                tau = (-a + std::sqrt(std::max(disc, 0.0))) / (b - a);
            }
            tau = std::clamp(tau, 0.0, 1.0);
            cfg.x[static_cast<size_t>(i)] = wrap_coord(-0.5 + (j + tau) / n);
        }
    } else {
        const double fmax = density.max();
        for (int i = 0; i < count; ++i) {
            for (uint64_t attempt = 0;; ++attempt) {
                if (attempt > 100000) throw fit_error("rejection sampling stuck");
                auto u = philox::uniform4(seed, philox::kInit,
                                          {attempt, static_cast<uint64_t>(i), 1, replica});
                const double px = u[0] - 0.5, py = u[1] - 0.5;
                // bilinear interpolation of the density
                const double gx = (px + 0.5) * n, gy = (py + 0.5) * n;
                const int jx = static_cast<int>(gx) % n, jy = static_cast<int>(gy) % n;
                const double tx = gx - std::floor(gx), ty = gy - std::floor(gy);
                auto dens = [&](int ax, int ay) {
                    return density[static_cast<size_t>(((ax % n) + n) % n) * n +
                                   static_cast<size_t>(((ay % n) + n) % n)];
                };
                const double fval = (1 - tx) * (1 - ty) * dens(jx, jy) +
                                    tx * (1 - ty) * dens(jx + 1, jy) +
                                    (1 - tx) * ty * dens(jx, jy + 1) +
                                    tx * ty * dens(jx + 1, jy + 1);
                if (u[2] * fmax <= fval) {
                    cfg.at(i)[0] = px;
                    cfg.at(i)[1] = py;
                    break;
                }
            }
        }
    }
    return cfg;
}

EnsembleResult run_ensemble(const ParticleConfig& base, const PairInteraction& pair,
                            const EnsembleConfig& cfg) {
    if (cfg.replicas < 1) throw parameter_error("run_ensemble: replicas >= 1");
    const double dt = cfg.dt;
    std::vector<long> record_steps;
    std::vector<double> record_times = cfg.record_times;
    if (record_times.empty()) record_times.push_back(cfg.t_end);
    for (double t : record_times)
        record_steps.push_back(static_cast<long>(std::llround(t / dt)));

    EnsembleResult out;
    out.records.resize(record_times.size());
    for (size_t k = 0; k < record_times.size(); ++k) {
        out.records[k].t = record_steps[k] * dt;
        out.records[k].spectra.resize(static_cast<size_t>(cfg.replicas));
        out.records[k].positions.resize(static_cast<size_t>(cfg.replicas));
    }
    out.blown.assign(static_cast<size_t>(cfg.replicas), 0);

    auto run_replica = [&](int r) {
        ParticleConfig c;
        if (cfg.initial_density) {
            c = sample_from_density(*cfg.initial_density, base.count, base.params,
                                    base.seed, static_cast<uint64_t>(r));
        } else {
            c = base;
            c.replica = static_cast<uint64_t>(r);
        }
        try {
            long step = 0;
            for (size_t k = 0; k < record_steps.size(); ++k) {
                for (; step < record_steps[k]; ++step) {
                    if (cfg.drift)
                        em_step(c, dt, pair);
                    else
                        em_step_noise_only(c, dt);
                }
                out.records[k].spectra[static_cast<size_t>(r)] = empirical_fourier(c, cfg.kmax);
                out.records[k].positions[static_cast<size_t>(r)] = c.x;
            }
        } catch (const std::exception&) {
            out.blown[static_cast<size_t>(r)] = 1;
        }
    };

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min(nthreads, cfg.replicas));
    if (nthreads == 1) {
        for (int r = 0; r < cfg.replicas; ++r) run_replica(r);
    } else {
        std::vector<std::thread> pool;
        for (int tix = 0; tix < nthreads; ++tix)
            pool.emplace_back([&, tix]() {
                for (int r = tix; r < cfg.replicas; r += nthreads) run_replica(r);
            });
        for (auto& th : pool) th.join();
    }
    out.survivors = 0;
    for (auto b : out.blown)
        if (!b) ++out.survivors;
    return out;
}

}  // namespace riesz
