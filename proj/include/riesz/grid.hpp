#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "riesz/params.hpp"

namespace riesz {

// Hermitian (r2c) spectrum of a real field on the periodic grid.
// Layout: last axis holds modes 0..n/2, other axes full 0..n-1 with the usual
// wrap-around frequencies.  Coefficients are Fourier-series coefficients for
// the e^{2 pi i xi.x} convention: c(xi) = (1/n^d) sum_x f(x) e^{-2 pi i xi.x}.
struct Spectrum {
    int dim = 1;
    int n = 0;
    std::vector<std::complex<double>> c;

    int nlast() const { return n / 2 + 1; }
    size_t size() const { return c.size(); }

    // Frequency of the flattened index along each axis.
    void freq(size_t idx, int* k) const;
    // 2 if the mode has a distinct conjugate partner outside r2c storage.
    double hermitian_weight(size_t idx) const;
    double abs2_sum_weighted() const;  // sum over full lattice of |c|^2
};

// Real scalar field sampled on the uniform periodic grid with x_j = -1/2 + j/n.
// Power-of-two n.  Values are plain doubles; the spectrum is computed on
// demand and never cached across mutation (fields are treated as immutable
// between operations).
class GridField {
public:
    GridField() = default;
    GridField(int dim, int n, double fill = 0.0);

    static GridField from_function(int dim, int n,
                                   const std::function<double(const double*)>& f);
    static GridField from_spectrum(const Spectrum& s);

    int dim() const { return dim_; }
    int n() const { return n_; }
    size_t size() const { return v_.size(); }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }
    double operator[](size_t i) const { return v_[i]; }
    double& operator[](size_t i) { return v_[i]; }

    // coordinates of flattened sample index
    void coords(size_t idx, double* x) const;

    Spectrum fft() const;

    double mean() const;
    double min() const;
    double max() const;
    bool all_finite() const;

    // mass = quadrature integral over the unit torus (equals mean()).
    bool is_probability(double tol = 1e-12) const;

private:
    int dim_ = 1;
    int n_ = 0;
    std::vector<double> v_;
};

// --- spectral operations -------------------------------------------------

// Multiply each mode by m(|xi|); the zero mode is multiplied by m0.
GridField apply_radial_multiplier(const GridField& f,
                                  const std::function<double(double)>& m,
                                  double m0);
Spectrum apply_radial_multiplier(const Spectrum& s,
                                 const std::function<double(double)>& m,
                                 double m0);

// e^{sigma t Delta}: multiplier exp(-4 pi^2 sigma t |xi|^2); mean preserved.
GridField heat_semigroup(const GridField& f, double t, double sigma);

// |nabla|^alpha: multiplier (2 pi |xi|)^alpha, zero mode passed through as 0.
GridField fractional_laplacian(const GridField& f, double alpha);

// Spectral partial derivative along axis.
GridField spectral_derivative(const GridField& f, int axis);
std::vector<GridField> spectral_gradient(const GridField& f);

// L^p norm by grid quadrature; p = inf is the max over samples (a lower
// bound for rough fields).
double lp_norm(const GridField& f, double p);

// Homogeneous Sobolev seminorm |f|_{H^alpha} by Parseval, mean mode excluded.
double sobolev_seminorm(const GridField& f, double alpha);

// ||e^{sigma t Delta} f||_{L^q} min(sigma t,1)^{(d/2)(1/p-1/q)} / ||f||_{L^p}
double hypercontractivity_ratio(const GridField& f, double t, double sigma,
                                double p, double q);

// g * f and gradient components (2 pi i xi_a ghat(xi) fhat(xi)).
GridField riesz_convolution(const GridField& f, const RieszParams& p);
std::vector<GridField> riesz_gradient_convolution(const GridField& f, const RieszParams& p);

// Serialization: flat binary with a JSON header (d, n_per_dim, time, name).
void save_field(const GridField& f, const std::string& path,
                const std::string& name, double time);
GridField load_field(const std::string& path, std::string* name = nullptr,
                     double* time = nullptr);

// CSV export of the radially averaged profile (bin by |x|).
void export_radial_profile_csv(const GridField& f, const std::string& path, int bins);

}  // namespace riesz
