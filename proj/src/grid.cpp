#include "riesz/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>

#include "json.hpp"
#include "riesz/errors.hpp"

namespace riesz {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

size_t real_size(int dim, int n) {
    size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<size_t>(n);
    return s;
}

size_t spec_size(int dim, int n) {
    size_t s = static_cast<size_t>(n / 2 + 1);
    for (int a = 0; a < dim - 1; ++a) s *= static_cast<size_t>(n);
    return s;
}

// FFTW plan cache.  Plan creation is not thread safe; execution through the
// new-array interface is.  Plans are created once per (dim, n, direction)
// with FFTW_ESTIMATE, which keeps results bit-identical for a fixed binary.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache pc;
        return pc;
    }

    void forward(int dim, int n, const double* in, std::complex<double>* out) {
        fftw_plan p = get(dim, n, true);
        // r2c out-of-place preserves input for these plans (no DESTROY flag),
        // but the API wants a non-const pointer.
        fftw_execute_dft_r2c(p, const_cast<double*>(in),
                             reinterpret_cast<fftw_complex*>(out));
    }

    void inverse(int dim, int n, std::complex<double>* in, double* out) {
        // c2r destroys its input for dim > 1; callers pass a scratch copy.
        fftw_plan p = get(dim, n, false);
        fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in), out);
    }

private:
    fftw_plan get(int dim, int n, bool fwd) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(dim, n, fwd);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<int> dims(static_cast<size_t>(dim), n);
        std::vector<double> rbuf(real_size(dim, n));
        std::vector<std::complex<double>> cbuf(spec_size(dim, n));
        fftw_plan p;
        if (fwd)
            p = fftw_plan_dft_r2c(dim, dims.data(), rbuf.data(),
                                  reinterpret_cast<fftw_complex*>(cbuf.data()),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
        else
            p = fftw_plan_dft_c2r(dim, dims.data(),
                                  reinterpret_cast<fftw_complex*>(cbuf.data()),
                                  rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[key] = p;
        return p;
    }

    std::mutex mu_;
    std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

}  // namespace

void Spectrum::freq(size_t idx, int* k) const {
    const int nl = nlast();
    for (int a = dim - 1; a >= 0; --a) {
        int extent = (a == dim - 1) ? nl : n;
        int j = static_cast<int>(idx % static_cast<size_t>(extent));
        idx /= static_cast<size_t>(extent);
        if (a == dim - 1)
            k[a] = j;  // last axis holds 0..n/2
        else
            k[a] = (j <= n / 2) ? j : j - n;
    }
}

double Spectrum::hermitian_weight(size_t idx) const {
    int j = static_cast<int>(idx % static_cast<size_t>(nlast()));
    return (j == 0 || j == n / 2) ? 1.0 : 2.0;
}

double Spectrum::abs2_sum_weighted() const {
    double acc = 0.0;
    for (size_t i = 0; i < c.size(); ++i) acc += hermitian_weight(i) * std::norm(c[i]);
    return acc;
}

GridField::GridField(int dim, int n, double fill) : dim_(dim), n_(n) {
    if (dim < 1 || dim > 3) throw parameter_error("GridField: dim in {1,2,3}");
    if (!power_of_two(n)) throw parameter_error("GridField: n must be a power of two");
    v_.assign(real_size(dim, n), fill);
}

GridField GridField::from_function(int dim, int n,
                                   const std::function<double(const double*)>& f) {
    GridField g(dim, n);
    double x[3];
    for (size_t i = 0; i < g.size(); ++i) {
        g.coords(i, x);
        g[i] = f(x);
    }
    return g;
}

void GridField::coords(size_t idx, double* x) const {
    for (int a = dim_ - 1; a >= 0; --a) {
        size_t j = idx % static_cast<size_t>(n_);
        idx /= static_cast<size_t>(n_);
        x[a] = -0.5 + static_cast<double>(j) / n_;
    }
}

namespace {
// Samples sit at x_j = -1/2 + j/n while FFTW transforms assume x_j = j/n;
// folding the parity (-1)^{sum_a xi_a} into the coefficients makes Spectrum
// hold true Fourier-series coefficients for the centered grid.
void fold_parity(Spectrum& s) {
    int k[3];
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        int sum = 0;
        for (int a = 0; a < s.dim; ++a) sum += k[a];
        if (sum & 1) s.c[i] = -s.c[i];
    }
}
}  // namespace

Spectrum GridField::fft() const {
    Spectrum s;
    s.dim = dim_;
    s.n = n_;
    s.c.resize(spec_size(dim_, n_));
    PlanCache::instance().forward(dim_, n_, v_.data(), s.c.data());
    const double scale = 1.0 / static_cast<double>(size());
    for (auto& z : s.c) z *= scale;
    fold_parity(s);
    return s;
}

GridField GridField::from_spectrum(const Spectrum& s) {
    GridField g(s.dim, s.n);
    Spectrum scratch = s;  // c2r clobbers input; also unfold the parity
    fold_parity(scratch);
    PlanCache::instance().inverse(s.dim, s.n, scratch.c.data(), g.v_.data());
    return g;
}

double GridField::mean() const {
    double acc = 0.0;
    for (double v : v_) acc += v;
    return acc / static_cast<double>(size());
}

double GridField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double GridField::max() const { return *std::max_element(v_.begin(), v_.end()); }

bool GridField::all_finite() const {
    for (double v : v_)
        if (!std::isfinite(v)) return false;
    return true;
}

bool GridField::is_probability(double tol) const {
    return min() >= -tol && std::fabs(mean() - 1.0) <= tol;
}

Spectrum apply_radial_multiplier(const Spectrum& s,
                                 const std::function<double(double)>& m,
                                 double m0) {
    Spectrum out = s;
    int k[3];
    for (size_t i = 0; i < out.c.size(); ++i) {
        out.freq(i, k);
        double k2 = 0.0;
        for (int a = 0; a < out.dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
        out.c[i] *= (k2 == 0.0) ? m0 : m(std::sqrt(k2));
    }
    return out;
}

GridField apply_radial_multiplier(const GridField& f,
                                  const std::function<double(double)>& m,
                                  double m0) {
    return GridField::from_spectrum(apply_radial_multiplier(f.fft(), m, m0));
}

GridField heat_semigroup(const GridField& f, double t, double sigma) {
    if (t < 0.0 || sigma < 0.0) throw parameter_error("heat_semigroup: t, sigma >= 0");
    const double a = 4.0 * kPi * kPi * sigma * t;
    if (a == 0.0) return f;
    return apply_radial_multiplier(
        f, [a](double k) { return std::exp(-a * k * k); }, 1.0);
}

GridField fractional_laplacian(const GridField& f, double alpha) {
    return apply_radial_multiplier(
        f, [alpha](double k) { return std::pow(2.0 * kPi * k, alpha); }, 0.0);
}

GridField spectral_derivative(const GridField& f, int axis) {
    Spectrum s = f.fft();
    int k[3];
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        // Zero the unpaired Nyquist mode: an odd multiplier has no real
        // representative there.
        if (k[axis] == s.n / 2 || k[axis] == -s.n / 2) {
            s.c[i] = 0.0;
            continue;
        }
        s.c[i] *= std::complex<double>(0.0, 2.0 * kPi * k[axis]);
    }
    return GridField::from_spectrum(s);
}

std::vector<GridField> spectral_gradient(const GridField& f) {
    std::vector<GridField> out;
    out.reserve(static_cast<size_t>(f.dim()));
    for (int a = 0; a < f.dim(); ++a) out.push_back(spectral_derivative(f, a));
    return out;
}

double lp_norm(const GridField& f, double p) {
    if (p < 1.0) throw parameter_error("lp_norm: p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::fabs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 1.0) {
        for (double v : f.values()) acc += std::fabs(v);
    } else if (p == 2.0) {
        for (double v : f.values()) acc += v * v;
    } else {
        for (double v : f.values()) acc += std::pow(std::fabs(v), p);
    }
    acc /= static_cast<double>(f.size());
    return (p == 1.0) ? acc : std::pow(acc, 1.0 / p);
}

double sobolev_seminorm(const GridField& f, double alpha) {
    Spectrum s = f.fft();
    int k[3];
    double acc = 0.0;
    for (size_t i = 0; i < s.c.size(); ++i) {
        s.freq(i, k);
        double k2 = 0.0;
        for (int a = 0; a < s.dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
        if (k2 == 0.0) continue;
        acc += s.hermitian_weight(i) * std::pow(4.0 * kPi * kPi * k2, alpha) * std::norm(s.c[i]);
    }
    return std::sqrt(acc);
}

double hypercontractivity_ratio(const GridField& f, double t, double sigma,
                                double p, double q) {
    if (q < p) throw parameter_error("hypercontractivity_ratio: q >= p");
    const double denom = lp_norm(f, p);
    if (denom == 0.0) return 0.0;
    GridField ft = heat_semigroup(f, t, sigma);
    const double fac =
        std::pow(std::min(sigma * t, 1.0), 0.5 * f.dim() * (1.0 / p - 1.0 / q));
    return lp_norm(ft, q) * fac / denom;
}

GridField riesz_convolution(const GridField& f, const RieszParams& p) {
    return apply_radial_multiplier(
        f, [&p](double k) { return riesz_fourier_coeff_absxi(k, p); }, 0.0);
}

std::vector<GridField> riesz_gradient_convolution(const GridField& f,
                                                  const RieszParams& p) {
    Spectrum base = f.fft();
    int k[3];
    std::vector<GridField> out;
    for (int axis = 0; axis < f.dim(); ++axis) {
        Spectrum s = base;
        for (size_t i = 0; i < s.c.size(); ++i) {
            s.freq(i, k);
            double k2 = 0.0;
            for (int a = 0; a < s.dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
            if (k2 == 0.0 || k[axis] == s.n / 2 || k[axis] == -s.n / 2) {
                s.c[i] = 0.0;
                continue;
            }
            const double ghat = riesz_fourier_coeff_absxi(std::sqrt(k2), p);
            s.c[i] *= std::complex<double>(0.0, 2.0 * kPi * k[axis] * ghat);
        }
        out.push_back(GridField::from_spectrum(s));
    }
    return out;
}

void save_field(const GridField& f, const std::string& path,
                const std::string& name, double time) {
    nlohmann::json hdr;
    hdr["d"] = f.dim();
    hdr["n_per_dim"] = f.n();
    hdr["time"] = time;
    hdr["name"] = name;
    const std::string h = hdr.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_field: cannot open " + path);
    uint64_t hlen = h.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!out) throw io_error("save_field: write failed for " + path);
}

GridField load_field(const std::string& path, std::string* name, double* time) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_field: cannot open " + path);
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    std::string h(hlen, '\0');
    in.read(h.data(), static_cast<std::streamsize>(hlen));
    auto hdr = nlohmann::json::parse(h);
    GridField f(hdr.at("d").get<int>(), hdr.at("n_per_dim").get<int>());
    in.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!in) throw io_error("load_field: truncated file " + path);
    if (name) *name = hdr.at("name").get<std::string>();
    if (time) *time = hdr.at("time").get<double>();
    return f;
}

void export_radial_profile_csv(const GridField& f, const std::string& path, int bins) {
    std::vector<double> sum(static_cast<size_t>(bins), 0.0);
    std::vector<int> cnt(static_cast<size_t>(bins), 0);
    const double rmax = 0.5 * std::sqrt(static_cast<double>(f.dim()));
    double x[3];
    for (size_t i = 0; i < f.size(); ++i) {
        f.coords(i, x);
        double r2 = 0.0;
        for (int a = 0; a < f.dim(); ++a) r2 += x[a] * x[a];
        int b = std::min(bins - 1, static_cast<int>(std::sqrt(r2) / rmax * bins));
        sum[static_cast<size_t>(b)] += f[i];
        cnt[static_cast<size_t>(b)] += 1;
    }
    std::ofstream out(path);
    if (!out) throw io_error("export_radial_profile_csv: cannot open " + path);
    out << "r,mean_value,samples\n";
    char buf[128];
    for (int b = 0; b < bins; ++b) {
        if (cnt[static_cast<size_t>(b)] == 0) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", (b + 0.5) * rmax / bins,
                      sum[static_cast<size_t>(b)] / cnt[static_cast<size_t>(b)],
                      cnt[static_cast<size_t>(b)]);
        out << buf;
    }
}

}  // namespace riesz
