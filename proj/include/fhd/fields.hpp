#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fhd {

// Uniform collocation grid on the periodic box [-1,1]^dim, m points per axis.
// Storage is row-major with axis 0 slowest; the point with multi-index
// (i_0,...,i_{dim-1}) sits at x_a = -1 + i_a * spacing().
class TorusGrid {
public:
  TorusGrid(int dim, int m);

  int dim() const { return dim_; }
  int m() const { return m_; }
  double spacing() const { return 2.0 / m_; }
  double cell_volume() const;
  double domain_volume() const;  // 2^dim
  std::size_t point_count() const;
  double coordinate(int index) const { return -1.0 + index * spacing(); }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.dim_ == b.dim_ && a.m_ == b.m_;
  }

private:
  int dim_;
  int m_;
};

struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(g.point_count(), fill) {}
  ScalarField(const TorusGrid& g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

struct VectorField {
  TorusGrid grid;
  std::vector<ScalarField> comps;  // dim components

  explicit VectorField(const TorusGrid& g)
      : grid(g), comps(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}

  ScalarField& operator[](int a) { return comps[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const { return comps[static_cast<std::size_t>(a)]; }
};

// Compensated (Kahan) summation; the analysis tolerances sit close enough to
// machine precision that naive accumulation over M^dim terms is not acceptable.
double kahan_sum(std::span<const double> values);

// Spectral derivative along one axis (the odd-derivative Nyquist mode is zeroed).
ScalarField derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
// Spectral Laplacian: multiplication by -pi^2 |kappa|^2 (Nyquist retained).
ScalarField laplacian(const ScalarField& f);

// Quadrature of the trigonometric interpolant: cell_volume * sum of values.
double integrate(const ScalarField& f);
// integrate(f*g) without materializing the product.
double inner(const ScalarField& f, const ScalarField& g);

// 2/3-rule truncation: zero every mode with any |kappa_a| > m/3.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);

// Pointwise helpers used throughout the tendency assembly.
ScalarField multiply(const ScalarField& a, const ScalarField& b);
void add_scaled(ScalarField& acc, const ScalarField& x, double a);
void add_scaled(VectorField& acc, const VectorField& x, double a);
void scale(ScalarField& f, double a);
double max_abs(const ScalarField& f);
double min_value(const ScalarField& f);
bool all_finite(const ScalarField& f);
bool all_finite(const VectorField& f);

}  // namespace fhd
