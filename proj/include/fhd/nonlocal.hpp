#pragma once

#include <vector>

#include "fhd/fields.hpp"
#include "fhd/model.hpp"

namespace fhd {

// Periodic convolution (K*f)(x) = \int_Omega K(x-y) f(y) dy against an even
// cosine-series kernel, plus the gradient and Laplacian variants the solver
// needs. Two backends compute the same quadrature: the FFT path multiplies
// DFT coefficients by the exact per-mode factors of the kernel, the direct
// path evaluates the O(m^{2 dim}) double sum. The direct path exists to
// cross-check the fast one and is only sensible at small m.
class ConvolutionEngine {
public:
  enum class Backend { fft, direct };

  ConvolutionEngine(const KernelSpec& spec, const TorusGrid& grid,
                    Backend backend = Backend::fft);

  const TorusGrid& grid() const { return grid_; }
  Backend backend() const { return backend_; }
  bool kernel_is_zero() const { return zero_; }
  // Grid-scanned (exact for the built-in bump) nonnegativity of the kernel.
  bool kernel_nonnegative() const { return nonneg_; }
  double kernel_integral() const;  // \int K dx

  ScalarField convolve(const ScalarField& f) const;
  VectorField grad_convolve(const ScalarField& f) const;
  ScalarField laplacian_convolve(const ScalarField& f) const;

private:
  ScalarField apply_fft(const ScalarField& f, int deriv_axis, bool laplacian) const;
  ScalarField apply_direct(const ScalarField& f, const std::vector<double>& offsets) const;

  TorusGrid grid_;
  Backend backend_;
  bool zero_ = true;
  bool nonneg_ = false;
  double integral_ = 0.0;
  std::vector<KernelMode> modes_;
  std::vector<double> multiplier_;             // 2^dim * Khat(kappa), FFT layout
  std::vector<double> offsets_;                // K(d*h), offset-indexed
  std::vector<std::vector<double>> grad_offsets_;  // dK/dx_a at offsets
  std::vector<double> lap_offsets_;            // Delta K at offsets
};

// Alignment dissipation in expanded form,
//   D = \int rho |u|^2 (psi*rho) dx - \int rho u . (psi*(rho u)) dx,
// equal (by symmetry of psi) to the pair integral
//   (1/2) \iint rho(x) rho(y) psi(x-y) |u(x)-u(y)|^2 dy dx >= 0.
// The momentum products are dealiased before convolution; psi must have
// passed nonnegativity validation.
double alignment_dissipation(const ConvolutionEngine& psi, const ScalarField& rho,
                             const VectorField& u);

}  // namespace fhd
