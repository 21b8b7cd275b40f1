#include "fhd/fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fhd/spectral.hpp"

namespace fhd {

TorusGrid::TorusGrid(int dim, int m) : dim_(dim), m_(m) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  if (m < 4 || m % 2 != 0) throw std::invalid_argument("grid m must be even and >= 4");
}

double TorusGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing();
  return v;
}

double TorusGrid::domain_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= 2.0;
  return v;
}

std::size_t TorusGrid::point_count() const {
  std::size_t n = 1;
  for (int a = 0; a < dim_; ++a) n *= static_cast<std::size_t>(m_);
  return n;
}

ScalarField::ScalarField(const TorusGrid& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != g.point_count())
    throw std::invalid_argument("field value count does not match grid");
}

double kahan_sum(std::span<const double> values) {
  // Neumaier's variant: the branch keeps the compensation exact even when an
  // addend exceeds the running sum, which plain Kahan loses.
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

namespace {

constexpr double pi = std::numbers::pi;

int mode_component(int axis, int ka, int kb, int kc) {
  return axis == 0 ? ka : (axis == 1 ? kb : kc);
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid;
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative axis out of range");
  auto spec = spectral::forward(g, f.values);
  const int m = g.m();
  spectral::for_each_mode(g, [&](std::size_t idx, int ka, int kb, int kc) {
    int k = mode_component(axis, ka, kb, kc);
    if (2 * std::abs(k) == m) k = 0;
    spec[idx] *= std::complex<double>(0.0, pi * k);
  });
  return ScalarField(g, spectral::inverse(g, spec));
}

VectorField gradient(const ScalarField& f) {
  const TorusGrid& g = f.grid;
  VectorField out(g);
  auto spec = spectral::forward(g, f.values);
  const int m = g.m();
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto d = spec;
    spectral::for_each_mode(g, [&](std::size_t idx, int ka, int kb, int kc) {
      int k = mode_component(axis, ka, kb, kc);
      if (2 * std::abs(k) == m) k = 0;
      d[idx] *= std::complex<double>(0.0, pi * k);
    });
    out[axis].values = spectral::inverse(g, d);
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  const TorusGrid& g = v.grid;
  const int m = g.m();
  spectral::Spectrum acc(g.point_count(), {0.0, 0.0});
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto spec = spectral::forward(g, v[axis].values);
    spectral::for_each_mode(g, [&](std::size_t idx, int ka, int kb, int kc) {
      int k = mode_component(axis, ka, kb, kc);
      if (2 * std::abs(k) == m) k = 0;
      acc[idx] += spec[idx] * std::complex<double>(0.0, pi * k);
    });
  }
  return ScalarField(g, spectral::inverse(g, acc));
}

ScalarField laplacian(const ScalarField& f) {
  const TorusGrid& g = f.grid;
  auto spec = spectral::forward(g, f.values);
  spectral::for_each_mode(g, [&](std::size_t idx, int ka, int kb, int kc) {
    const double k2 = double(ka) * ka + double(kb) * kb + double(kc) * kc;
    spec[idx] *= -pi * pi * k2;
  });
  return ScalarField(g, spectral::inverse(g, spec));
}

double integrate(const ScalarField& f) {
  return f.grid.cell_volume() * kahan_sum(f.values);
}

double inner(const ScalarField& f, const ScalarField& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("inner: grid mismatch");
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double v = f.values[i] * g.values[i];
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return f.grid.cell_volume() * sum;
}

ScalarField dealias(const ScalarField& f) {
  const TorusGrid& g = f.grid;
  const int m = g.m();
  auto spec = spectral::forward(g, f.values);
  spectral::for_each_mode(g, [&](std::size_t idx, int ka, int kb, int kc) {
    const bool keep = spectral::dealias_keep(m, ka) && spectral::dealias_keep(m, kb) &&
                      spectral::dealias_keep(m, kc);
    if (!keep) spec[idx] = {0.0, 0.0};
  });
  return ScalarField(g, spectral::inverse(g, spec));
}

VectorField dealias(const VectorField& v) {
  VectorField out(v.grid);
  for (int a = 0; a < v.grid.dim(); ++a) out[a] = dealias(v[a]);
  return out;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("multiply: grid mismatch");
  ScalarField out(a.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

void add_scaled(ScalarField& acc, const ScalarField& x, double a) {
  if (!(acc.grid == x.grid)) throw std::invalid_argument("add_scaled: grid mismatch");
  for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += a * x.values[i];
}

void add_scaled(VectorField& acc, const VectorField& x, double a) {
  for (int c = 0; c < acc.grid.dim(); ++c) add_scaled(acc[c], x[c], a);
}

void scale(ScalarField& f, double a) {
  for (double& v : f.values) v *= a;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double v : f.values) m = std::min(m, v);
  return m;
}

bool all_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const VectorField& f) {
  for (int c = 0; c < f.grid.dim(); ++c)
    if (!all_finite(f[c])) return false;
  return true;
}

}  // namespace fhd
