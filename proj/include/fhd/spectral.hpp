#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fhd/fields.hpp"

namespace fhd::spectral {

// Standard-layout DFT coefficients, same row-major shape as the grid.
// Index k along an axis carries integer wavenumber k (k < m/2) or k - m.
// The basis on [-1,1]^dim is exp(i*pi*kappa.x), so a plain index-space DFT
// differs from the coordinate-frame coefficients only by per-mode phases,
// which cancel in every diagonal operation used here.
using Spectrum = std::vector<std::complex<double>>;

// Unnormalized forward transform of a real field.
Spectrum forward(const TorusGrid& g, std::span<const double> values);
// Backward transform scaled by 1/m^dim; imaginary residue is discarded.
std::vector<double> inverse(const TorusGrid& g, const Spectrum& spec);

inline int wavenumber(int m, int k) { return k < m / 2 ? k : k - m; }
// Odd spectral derivatives zero the unpaired Nyquist mode.
inline int derivative_wavenumber(int m, int k) {
  return 2 * k == m ? 0 : wavenumber(m, k);
}
inline bool dealias_keep(int m, int kappa) { return 3 * std::abs(kappa) <= m; }

// Invokes f(flat_index, kappa_0, ..., kappa_{dim-1}) over the whole spectrum;
// unused trailing wavenumbers are zero for dim == 2.
template <class F>
void for_each_mode(const TorusGrid& g, F&& f) {
  const int m = g.m();
  std::size_t idx = 0;
  if (g.dim() == 2) {
    for (int a = 0; a < m; ++a) {
      const int ka = wavenumber(m, a);
      for (int b = 0; b < m; ++b, ++idx) f(idx, ka, wavenumber(m, b), 0);
    }
  } else {
    for (int a = 0; a < m; ++a) {
      const int ka = wavenumber(m, a);
      for (int b = 0; b < m; ++b) {
        const int kb = wavenumber(m, b);
        for (int c = 0; c < m; ++c, ++idx) f(idx, ka, kb, wavenumber(m, c));
      }
    }
  }
}

// Same iteration pattern over grid points: f(flat_index, i_0, ..., i_{dim-1}).
template <class F>
void for_each_point(const TorusGrid& g, F&& f) {
  const int m = g.m();
  std::size_t idx = 0;
  if (g.dim() == 2) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b, ++idx) f(idx, a, b, 0);
  } else {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c, ++idx) f(idx, a, b, c);
  }
}

}  // namespace fhd::spectral
