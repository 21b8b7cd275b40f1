#include "fhd/nonlocal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fhd/spectral.hpp"

namespace fhd {

namespace {
constexpr double pi = std::numbers::pi;

int mode_component(int axis, int ka, int kb, int kc) {
  return axis == 0 ? ka : (axis == 1 ? kb : kc);
}

}  // namespace

ConvolutionEngine::ConvolutionEngine(const KernelSpec& spec, const TorusGrid& grid,
                                     Backend backend)
    : grid_(grid), backend_(backend) {
  const int dim = grid.dim();
  const int m = grid.m();
  const int need = 2 * spec.max_mode(dim) + 2;
  if (m < need) {
    std::ostringstream os;
    os << "convolution kernel needs m >= " << need << ", grid has m = " << m;
    throw std::invalid_argument(os.str());
  }
  modes_ = spec.modes(dim);
  zero_ = spec.is_zero();

  if (spec.kind() == KernelSpec::Kind::cosine) {
    nonneg_ = spec.amplitude() >= 0.0;
  } else if (zero_) {
    nonneg_ = true;
  } else {
    ScalarField sampled = sample_kernel(spec, grid);
    nonneg_ = min_value(sampled) >= -1e-12 * std::max(max_abs(sampled), 1.0);
  }

  const double vol = grid.domain_volume();
  for (const auto& mo : modes_) {
    const bool constant = mo.k[0] == 0 && mo.k[1] == 0 && mo.k[2] == 0;
    if (constant) integral_ += vol * mo.coeff;
  }

  // Exact per-mode convolution factors: a term c*cos(pi k.x) contributes
  // coefficient c/2 at +k and -k (c at k = 0), and convolution against the
  // exponential basis scales by the domain volume.
  multiplier_.assign(grid.point_count(), 0.0);
  for (const auto& mo : modes_) {
    const bool constant = mo.k[0] == 0 && mo.k[1] == 0 && mo.k[2] == 0;
    auto place = [&](int sign) {
      std::size_t idx = 0;
      for (int a = 0; a < dim; ++a) {
        const int comp = ((sign * mo.k[a]) % m + m) % m;
        idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(comp);
      }
      multiplier_[idx] += vol * (constant ? mo.coeff : 0.5 * mo.coeff);
    };
    place(+1);
    if (!constant) place(-1);
  }

  if (backend_ == Backend::direct) {
    const double h = grid.spacing();
    const std::size_t n = grid.point_count();
    offsets_.assign(n, 0.0);
    grad_offsets_.assign(static_cast<std::size_t>(dim), std::vector<double>(n, 0.0));
    lap_offsets_.assign(n, 0.0);
    spectral::for_each_point(grid, [&](std::size_t idx, int a, int b, int c) {
      const std::array<double, 3> x{a * h, b * h, c * h};
      for (const auto& mo : modes_) {
        double arg = 0.0;
        for (int ax = 0; ax < dim; ++ax) arg += mo.k[ax] * x[ax];
        double k2 = 0.0;
        for (int ax = 0; ax < dim; ++ax) k2 += double(mo.k[ax]) * mo.k[ax];
        offsets_[idx] += mo.coeff * std::cos(pi * arg);
        lap_offsets_[idx] += -pi * pi * k2 * mo.coeff * std::cos(pi * arg);
        for (int ax = 0; ax < dim; ++ax)
          grad_offsets_[ax][idx] += -pi * mo.k[ax] * mo.coeff * std::sin(pi * arg);
      }
    });
  }
}

double ConvolutionEngine::kernel_integral() const { return integral_; }

ScalarField ConvolutionEngine::apply_fft(const ScalarField& f, int deriv_axis,
                                         bool laplacian) const {
  const int m = grid_.m();
  auto spec = spectral::forward(grid_, f.values);
  spectral::for_each_mode(grid_, [&](std::size_t idx, int ka, int kb, int kc) {
    std::complex<double> factor(multiplier_[idx], 0.0);
    if (deriv_axis >= 0) {
      int k = mode_component(deriv_axis, ka, kb, kc);
      if (2 * std::abs(k) == m) k = 0;
      factor *= std::complex<double>(0.0, pi * k);
    }
    if (laplacian) {
      const double k2 = double(ka) * ka + double(kb) * kb + double(kc) * kc;
      factor *= -pi * pi * k2;
    }
    spec[idx] *= factor;
  });
  return ScalarField(grid_, spectral::inverse(grid_, spec));
}

ScalarField ConvolutionEngine::apply_direct(const ScalarField& f,
                                            const std::vector<double>& offsets) const {
  const int m = grid_.m();
  const int dim = grid_.dim();
  ScalarField out(grid_);
  const double vol = grid_.cell_volume();
  spectral::for_each_point(grid_, [&](std::size_t i, int ia, int ib, int ic) {
    double sum = 0.0;
    spectral::for_each_point(grid_, [&](std::size_t j, int ja, int jb, int jc) {
      const int da = ((ia - ja) % m + m) % m;
      const int db = ((ib - jb) % m + m) % m;
      const int dc = ((ic - jc) % m + m) % m;
      std::size_t didx;
      if (dim == 2)
        didx = static_cast<std::size_t>(da) * m + db;
      else
        didx = (static_cast<std::size_t>(da) * m + db) * static_cast<std::size_t>(m) + dc;
      sum += offsets[didx] * f.values[j];
    });
    out.values[i] = vol * sum;
  });
  return out;
}

ScalarField ConvolutionEngine::convolve(const ScalarField& f) const {
  if (!(f.grid == grid_)) throw std::invalid_argument("convolve: grid mismatch");
  if (backend_ == Backend::direct) return apply_direct(f, offsets_);
  return apply_fft(f, -1, false);
}

VectorField ConvolutionEngine::grad_convolve(const ScalarField& f) const {
  if (!(f.grid == grid_)) throw std::invalid_argument("grad_convolve: grid mismatch");
  VectorField out(grid_);
  for (int a = 0; a < grid_.dim(); ++a) {
    if (backend_ == Backend::direct)
      out[a] = apply_direct(f, grad_offsets_[static_cast<std::size_t>(a)]);
    else
      out[a] = apply_fft(f, a, false);
  }
  return out;
}

ScalarField ConvolutionEngine::laplacian_convolve(const ScalarField& f) const {
  if (!(f.grid == grid_)) throw std::invalid_argument("laplacian_convolve: grid mismatch");
  if (backend_ == Backend::direct) return apply_direct(f, lap_offsets_);
  return apply_fft(f, -1, true);
}

double alignment_dissipation(const ConvolutionEngine& psi, const ScalarField& rho,
                             const VectorField& u) {
  if (!psi.kernel_nonnegative())
    throw std::invalid_argument(
        "alignment_dissipation: kernel failed nonnegativity validation");
  const TorusGrid& g = psi.grid();
  if (!(rho.grid == g) || !(u.grid == g))
    throw std::invalid_argument("alignment_dissipation: grid mismatch");
  if (psi.kernel_is_zero()) return 0.0;

  ScalarField speed2(g);
  for (int a = 0; a < g.dim(); ++a)
    for (std::size_t i = 0; i < speed2.size(); ++i)
      speed2.values[i] += u[a].values[i] * u[a].values[i];

  const ScalarField conv_rho = psi.convolve(rho);
  double d = inner(multiply(rho, speed2), conv_rho);
  for (int a = 0; a < g.dim(); ++a) {
    const ScalarField mom = multiply(rho, u[a]);
    d -= inner(mom, psi.convolve(dealias(mom)));
  }
  return d;
}

}  // namespace fhd
