#include "riesz/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "riesz/errors.hpp"
#include "riesz/philox.hpp"
#include "riesz/torus.hpp"

namespace riesz {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

void check_probability(const GridField& mu) {
    if (!mu.is_probability(1e-10))
        throw field_domain_error("expected a probability density on the grid");
}

// iterate the cube |xi|_inf <= kmax, skipping 0; calls f(idx, k0, k1, |xi|);
// for dim == 1 the mode lives in k1
template <typename F>
void for_cube(int dim, int kmax, F&& f) {
    const int w = 2 * kmax + 1;
    if (dim == 1) {
        for (int k = -kmax; k <= kmax; ++k) {
            if (k == 0) continue;
            f(static_cast<size_t>(k + kmax), 0, k, std::abs(k));
        }
    } else {
        for (int k0 = -kmax; k0 <= kmax; ++k0)
            for (int k1 = -kmax; k1 <= kmax; ++k1) {
                if (k0 == 0 && k1 == 0) continue;
                const size_t idx =
                    static_cast<size_t>(k0 + kmax) * w + static_cast<size_t>(k1 + kmax);
                f(idx, k0, k1, std::sqrt(static_cast<double>(k0) * k0 +
                                         static_cast<double>(k1) * k1));
            }
    }
}

}  // namespace

EmpiricalSpectrum field_cube_spectrum(const GridField& f, int kmax) {
    if (kmax > f.n() / 2) throw parameter_error("field_cube_spectrum: kmax beyond Nyquist");
    Spectrum s = f.fft();
    EmpiricalSpectrum out;
    out.dim = f.dim();
    out.kmax = kmax;
    const int w = 2 * kmax + 1;
    size_t total = static_cast<size_t>(w);
    if (f.dim() == 2) total *= static_cast<size_t>(w);
    out.c.assign(total, {0.0, 0.0});

    const int n = f.n();
    const int nl = n / 2 + 1;
    auto fetch = [&](int k0, int k1) {
        // r2c storage holds the last axis in 0..n/2; negative last-axis
        // frequencies come from conjugate symmetry
        int kk0 = k0, kk1 = k1;
        bool conj = false;
        if (k1 < 0) {
            conj = true;
            kk0 = -k0;
            kk1 = -k1;
        }
        std::complex<double> v;
        if (f.dim() == 1) {
            v = s.c[static_cast<size_t>(kk1)];
        } else {
            const size_t row = static_cast<size_t>((kk0 % n + n) % n);
            v = s.c[row * nl + static_cast<size_t>(kk1)];
        }
        return conj ? std::conj(v) : v;
    };

    if (f.dim() == 1) {
        for (int k = -kmax; k <= kmax; ++k)
            out.c[static_cast<size_t>(k + kmax)] = fetch(0, k);
    } else {
        for (int k0 = -kmax; k0 <= kmax; ++k0)
            for (int k1 = -kmax; k1 <= kmax; ++k1)
                out.c[static_cast<size_t>(k0 + kmax) * w + static_cast<size_t>(k1 + kmax)] =
                    fetch(k0, k1);
    }
    return out;
}

double eval_cube_spectrum(const EmpiricalSpectrum& s, const double* x) {
    double acc = s.at(0, 0).real();
    // sum conjugate pairs once
    if (s.dim == 1) {
        for (int k = 1; k <= s.kmax; ++k)
            acc += 2.0 * std::real(s.at(k) * std::polar(1.0, 2.0 * kPi * k * x[0]));
    } else {
        for (int k0 = -s.kmax; k0 <= s.kmax; ++k0)
            for (int k1 = 0; k1 <= s.kmax; ++k1) {
                if (k1 == 0 && k0 <= 0) continue;
                acc += 2.0 * std::real(s.at(k0, k1) *
                                       std::polar(1.0, 2.0 * kPi * (k0 * x[0] + k1 * x[1])));
            }
    }
    return acc;
}

ModulatedDiagnostics::ModulatedDiagnostics(std::shared_ptr<const PotentialTable> table)
    : table_(std::move(table)) {
    if (table_->params().d == 1) radial_ = std::make_shared<RadialKernel>(table_);
}

double ModulatedDiagnostics::pair_g_sum(const ParticleConfig& cfg) const {
    const int n = cfg.count, d = cfg.dim;
    double acc = 0.0;
    if (d == 1) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double r = std::fabs(
                    wrap_coord(cfg.x[static_cast<size_t>(i)] - cfg.x[static_cast<size_t>(j)]));
                if (r == 0.0) throw singularity_error("coincident particles");
                acc += radial_->g(r);
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
    return 2.0 * acc;  // ordered pairs
}

ModEnergyBreakdown ModulatedDiagnostics::modulated_energy(const ParticleConfig& cfg,
                                                          const GridField& mu,
                                                          int kmax) const {
    check_probability(mu);
    const RieszParams& p = table_->params();
    const int n = cfg.count;
    ModEnergyBreakdown out;
    out.pair_sum = pair_g_sum(cfg) / (static_cast<double>(n) * n);

    EmpiricalSpectrum muhat = field_cube_spectrum(mu, kmax);
    EmpiricalSpectrum emph = empirical_fourier(cfg, kmax);
    double cross = 0.0, self = 0.0;
    for_cube(p.d, kmax, [&](size_t idx, int, int, double absxi) {
        const double ghat = riesz_fourier_coeff_absxi(absxi, p);
        cross += ghat * std::real(muhat.c[idx] * std::conj(emph.c[idx]));
        self += ghat * std::norm(muhat.c[idx]);
    });
    out.cross = 2.0 * cross;
    out.self_mu = self;
    out.f_n = 0.5 * (out.pair_sum - out.cross + out.self_mu);

    const double mu_inf = lp_norm(mu, std::numeric_limits<double>::infinity());
    out.log_term = (p.s == 0.0) ? std::log(n * mu_inf) / (2.0 * p.d * n) : 0.0;
    out.rate_unit = std::pow(mu_inf, p.s / p.d) * std::pow(n, p.s / p.d - 1.0);
    return out;
}

NnScales ModulatedDiagnostics::nn_scales(const ParticleConfig& cfg,
                                         const GridField& mu) const {
    const int n = cfg.count, d = cfg.dim;
    const double mu_inf = lp_norm(mu, std::numeric_limits<double>::infinity());
    const double cap = std::pow(n * mu_inf, -1.0 / d);
    NnScales out;
    out.r.assign(static_cast<size_t>(n), cap);
    for (int i = 0; i < n; ++i) {
        double best = cap;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            best = std::min(best, std::sqrt(min_image_r2(cfg.at(i), cfg.at(j), d)));
        }
        out.r[static_cast<size_t>(i)] = 0.25 * best;
    }
    return out;
}

double ModulatedDiagnostics::me_lower_bound(const ParticleConfig& cfg,
                                            const GridField& mu, double c_cal) const {
    const RieszParams& p = table_->params();
    const int n = cfg.count;
    const double mu_inf = lp_norm(mu, std::numeric_limits<double>::infinity());
    const double log_term = (p.s == 0.0) ? std::log(n * mu_inf) / (2.0 * p.d * n) : 0.0;
    return -log_term - c_cal * std::pow(mu_inf, p.s / p.d) * std::pow(n, p.s / p.d - 1.0);
}

double ModulatedDiagnostics::truncated_modulated_energy(const ParticleConfig& cfg,
                                                        const GridField& mu,
                                                        std::span<const double> etas,
                                                        int kmax) const {
    check_probability(mu);
    const RieszParams& p = table_->params();
    const int n = cfg.count, d = cfg.dim;
    if (etas.size() != static_cast<size_t>(n))
        throw parameter_error("truncated_modulated_energy: one eta per particle");

    double pair = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dx[3] = {0, 0, 0};
            for (int a = 0; a < d; ++a) dx[a] = wrap_coord(cfg.at(i)[a] - cfg.at(j)[a]);
            pair += table_->truncated_g(dx, etas[static_cast<size_t>(i)]);
        }
    pair /= static_cast<double>(n) * n;

    EmpiricalSpectrum muhat = field_cube_spectrum(mu, kmax);
    double cross = 0.0, self = 0.0;
    std::vector<std::complex<double>> gmu(muhat.c.size(), {0.0, 0.0});
    for_cube(p.d, kmax, [&](size_t idx, int, int, double absxi) {
        const double ghat = riesz_fourier_coeff_absxi(absxi, p);
        gmu[idx] = ghat * muhat.c[idx];
        self += ghat * std::norm(muhat.c[idx]);
    });
    EmpiricalSpectrum gmu_spec;
    gmu_spec.dim = p.d;
    gmu_spec.kmax = kmax;
    gmu_spec.c = std::move(gmu);
    for (int i = 0; i < n; ++i) {
        const double conv = eval_cube_spectrum(gmu_spec, cfg.at(i));
        const double mu_at = eval_cube_spectrum(muhat, cfg.at(i));
        const double c_eta = table_->truncation_constant(etas[static_cast<size_t>(i)]);
        cross += conv - c_eta + mu_at * c_eta;
    }
    cross *= 2.0 / n;
    return 0.5 * (pair - cross + self);
}

double ModulatedDiagnostics::transport_variation(const ParticleConfig& cfg,
                                                 const GridField& mu,
                                                 std::span<const GridField> v,
                                                 int kmax) const {
    check_probability(mu);
    const RieszParams& p = table_->params();
    const int n = cfg.count, d = cfg.dim;
    if (v.size() != static_cast<size_t>(d))
        throw parameter_error("transport_variation: v must have d components");

    // Constant shifts of v drop out of the functional; anchoring each
    // component at its first sample makes that exact in floating point too.
    std::vector<GridField> vc;
    for (int a = 0; a < d; ++a) {
        GridField f = v[static_cast<size_t>(a)];
        const double anchor = f[0];
        for (size_t idx = 0; idx < f.size(); ++idx) f[idx] -= anchor;
        vc.push_back(std::move(f));
    }
    v = std::span<const GridField>(vc);

    // v at the particles (exact trigonometric evaluation)
    std::vector<EmpiricalSpectrum> vhat;
    for (int a = 0; a < d; ++a)
        vhat.push_back(field_cube_spectrum(v[static_cast<size_t>(a)], kmax));
    std::vector<double> vp(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            vp[static_cast<size_t>(i) * d + a] =
                eval_cube_spectrum(vhat[static_cast<size_t>(a)], cfg.at(i));

    // pair part: (1/N^2) sum_{i != j} (v_i - v_j) . grad g(x_i - x_j)
    double pair = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx[3] = {0, 0, 0};
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                dx[a] = wrap_coord(cfg.at(i)[a] - cfg.at(j)[a]);
                r2 += dx[a] * dx[a];
            }
            if (r2 == 0.0) throw singularity_error("coincident particles");
            double grad[3] = {0, 0, 0};
            if (d == 1) {
                grad[0] = radial_->dg(std::fabs(dx[0])) * (dx[0] > 0 ? 1.0 : -1.0);
            } else {
                table_->eval_grad_g(dx, grad);
            }
            for (int a = 0; a < d; ++a)
                pair += (vp[static_cast<size_t>(i) * d + a] -
                         vp[static_cast<size_t>(j) * d + a]) * grad[a];
        }
    pair *= 2.0 / (static_cast<double>(n) * n);  // ordered pairs

    EmpiricalSpectrum muhat = field_cube_spectrum(mu, kmax);
    std::vector<EmpiricalSpectrum> vmuhat;
    for (int a = 0; a < d; ++a) {
        GridField prod = mu;
        const GridField& va = v[static_cast<size_t>(a)];
        for (size_t idx = 0; idx < prod.size(); ++idx) prod[idx] *= va[idx];
        vmuhat.push_back(field_cube_spectrum(prod, kmax));
    }

    const int w = 2 * kmax + 1;
    size_t total = static_cast<size_t>(w);
    if (d == 2) total *= static_cast<size_t>(w);
    std::vector<std::complex<double>> gg[3];
    std::vector<std::complex<double>> wconv(total, {0.0, 0.0});
    for (int a = 0; a < d; ++a) gg[a].assign(total, {0.0, 0.0});
    for_cube(p.d, kmax, [&](size_t idx, int k0, int k1, double absxi) {
        const double ghat = riesz_fourier_coeff_absxi(absxi, p);
        const int kk[2] = {(p.d == 1) ? k1 : k0, k1};
        for (int a = 0; a < d; ++a) {
            const std::complex<double> mult{0.0, 2.0 * kPi * kk[a]};
            gg[a][idx] = mult * ghat * muhat.c[idx];
            wconv[idx] += mult * ghat * vmuhat[static_cast<size_t>(a)].c[idx];
        }
    });

    double middle = 0.0;  // (1/N) sum_i [v_i . (grad g * mu)(x_i) - w(x_i)]
    EmpiricalSpectrum tmp;
    tmp.dim = p.d;
    tmp.kmax = kmax;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) {
            tmp.c = gg[a];
            acc += vp[static_cast<size_t>(i) * d + a] * eval_cube_spectrum(tmp, cfg.at(i));
        }
        tmp.c = wconv;
        acc -= eval_cube_spectrum(tmp, cfg.at(i));
        middle += acc;
    }
    middle /= n;

    // 2 int v . (grad g * mu) dmu
    double tail = 0.0;
    for_cube(p.d, kmax, [&](size_t idx, int k0, int k1, double absxi) {
        const double ghat = riesz_fourier_coeff_absxi(absxi, p);
        const int kk[2] = {(p.d == 1) ? k1 : k0, k1};
        for (int a = 0; a < d; ++a) {
            const std::complex<double> mult{0.0, 2.0 * kPi * kk[a]};
            tail += std::real(std::conj(vmuhat[static_cast<size_t>(a)].c[idx]) * mult *
                              ghat * muhat.c[idx]);
        }
    });

    return pair - 2.0 * middle + 2.0 * tail;
}

double ModulatedDiagnostics::transport_variation_spectral(const ParticleConfig& cfg,
                                                          const GridField& mu,
                                                          std::span<const GridField> v,
                                                          int kmax) const {
    // I = 2 sum_a sum_xi conj((v_a dnu)hat) (2 pi i xi_a) ghat nuhat with
    // nu = mu_N - mu; no diagonal excision is needed since the integrand
    // vanishes there.  Accurate only for near-band-limited empirical data.
    check_probability(mu);
    const RieszParams& p = table_->params();
    const int n = cfg.count, d = cfg.dim;

    EmpiricalSpectrum muhat = field_cube_spectrum(mu, kmax);
    EmpiricalSpectrum emph = empirical_fourier(cfg, kmax);
    std::vector<EmpiricalSpectrum> vhat;
    for (int a = 0; a < d; ++a)
        vhat.push_back(field_cube_spectrum(v[static_cast<size_t>(a)], kmax));

    std::vector<double> vp(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            vp[static_cast<size_t>(i) * d + a] =
                eval_cube_spectrum(vhat[static_cast<size_t>(a)], cfg.at(i));

    const int w = 2 * kmax + 1;
    size_t total = static_cast<size_t>(w);
    if (d == 2) total *= static_cast<size_t>(w);
    std::vector<std::vector<std::complex<double>>> vnu(static_cast<size_t>(d));
    for (int a = 0; a < d; ++a) {
        GridField prod = mu;
        const GridField& va = v[static_cast<size_t>(a)];
        for (size_t idx = 0; idx < prod.size(); ++idx) prod[idx] *= va[idx];
        EmpiricalSpectrum pm = field_cube_spectrum(prod, kmax);
        vnu[static_cast<size_t>(a)].assign(total, {0.0, 0.0});
        for (size_t idx = 0; idx < total; ++idx)
            vnu[static_cast<size_t>(a)][idx] = -pm.c[idx];
    }
    for (int i = 0; i < n; ++i) {
        for_cube(p.d, kmax, [&](size_t idx, int k0, int k1, double) {
            const double ph = (p.d == 1) ? k1 * cfg.at(i)[0]
                                         : (k0 * cfg.at(i)[0] + k1 * cfg.at(i)[1]);
            const std::complex<double> e = std::polar(1.0 / n, -2.0 * kPi * ph);
            for (int a = 0; a < d; ++a)
                vnu[static_cast<size_t>(a)][idx] += vp[static_cast<size_t>(i) * d + a] * e;
        });
    }

    double acc = 0.0;
    for_cube(p.d, kmax, [&](size_t idx, int k0, int k1, double absxi) {
        const double ghat = riesz_fourier_coeff_absxi(absxi, p);
        const std::complex<double> nuhat = emph.c[idx] - muhat.c[idx];
        const int kk[2] = {(p.d == 1) ? k1 : k0, k1};
        for (int a = 0; a < d; ++a) {
            const std::complex<double> mult{0.0, 2.0 * kPi * kk[a]};
            acc += std::real(std::conj(vnu[static_cast<size_t>(a)][idx]) * mult * ghat * nuhat);
        }
    });
    return 2.0 * acc;
}

FiRatio ModulatedDiagnostics::fi_ratio(const ParticleConfig& cfg, const GridField& mu,
                                       std::span<const GridField> v, int kmax,
                                       double c_cal) const {
    FiRatio out;
    const double lip = lipschitz_seminorm(v);
    if (lip == 0.0) return out;
    const double i_val = transport_variation(cfg, mu, v, kmax);
    auto me = modulated_energy(cfg, mu, kmax);
    const double denom = lip * (me.f_n + me.log_term + c_cal * me.rate_unit);
    out.numerator = std::fabs(i_val);
    out.denominator = denom;
    if (denom <= 0.0) {
        out.calibration_flag = true;  // c_cal too small for this configuration
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = out.numerator / denom;
    return out;
}

double relative_entropy_product(const GridField& rho, const GridField& mu) {
    if (rho.dim() != mu.dim() || rho.n() != mu.n())
        throw parameter_error("relative_entropy_product: mismatched grids");
    check_probability(rho);
    check_probability(mu);
    double acc = 0.0;
    for (size_t i = 0; i < rho.size(); ++i) {
        const double r = rho[i];
        if (r <= 1e-14) continue;
        if (mu[i] <= 1e-14)
            throw field_domain_error("relative_entropy_product: support violation");
        acc += r * std::log(r / mu[i]);
    }
    return acc / static_cast<double>(rho.size());
}

double modulated_free_energy(double h_n, double mean_f_n, double sigma) {
    return sigma * h_n + mean_f_n;
}

double lipschitz_seminorm(std::span<const GridField> v) {
    const int d = v[0].dim();
    GridField frob(v[0].dim(), v[0].n(), 0.0);
    for (int b = 0; b < d; ++b) {
        auto grads = spectral_gradient(v[static_cast<size_t>(b)]);
        for (int a = 0; a < d; ++a)
            for (size_t i = 0; i < frob.size(); ++i)
                frob[i] += grads[static_cast<size_t>(a)][i] * grads[static_cast<size_t>(a)][i];
    }
    double m = 0.0;
    for (size_t i = 0; i < frob.size(); ++i) m = std::max(m, frob[i]);
    return std::sqrt(m);
}

std::vector<GridField> random_band_vector_field(int dim, int n, int kmax,
                                                double scale, uint64_t seed) {
    std::vector<GridField> v;
    for (int a = 0; a < dim; ++a) {
        GridField f(dim, n, 0.0);
        Spectrum s = f.fft();
        int kv[3];
        for (size_t i = 0; i < s.c.size(); ++i) {
            s.freq(i, kv);
            int kinf = 0;
            for (int ax = 0; ax < dim; ++ax) kinf = std::max(kinf, std::abs(kv[ax]));
            if (kinf == 0 || kinf > kmax) continue;
            auto u = philox::normal4(seed, philox::kConfigGen,
                                     {i, static_cast<uint64_t>(a), 0, 23});
            s.c[i] = {u[0], u[1]};
        }
        v.push_back(GridField::from_spectrum(s));
    }
    const double lip = lipschitz_seminorm(v);
    if (lip > 0.0)
        for (auto& f : v)
            for (size_t i = 0; i < f.size(); ++i) f[i] *= scale / lip;
    return v;
}

}  // namespace riesz
