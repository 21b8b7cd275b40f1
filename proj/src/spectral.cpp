#include "fhd/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace fhd::spectral {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// Plans are created once per (dim, m) and reused via the new-array execute
// API. FFTW_ESTIMATE keeps planning deterministic; FFTW_UNALIGNED lets the
// plans run on ordinary vector storage. fftw_execute_dft on a shared plan
// with distinct arrays is thread-safe; only plan creation needs the lock.
PlanPair& plans_for(const TorusGrid& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(g.dim(), g.m());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t n = g.point_count();
  std::vector<std::complex<double>> a(n), b(n);
  auto* ap = reinterpret_cast<fftw_complex*>(a.data());
  auto* bp = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  if (g.dim() == 2) {
    p.fwd = fftw_plan_dft_2d(g.m(), g.m(), ap, bp, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_2d(g.m(), g.m(), ap, bp, FFTW_BACKWARD, flags);
  } else {
    p.fwd = fftw_plan_dft_3d(g.m(), g.m(), g.m(), ap, bp, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_3d(g.m(), g.m(), g.m(), ap, bp, FFTW_BACKWARD, flags);
  }
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft planning failed");
  return cache.emplace(key, p).first->second;
}

}  // namespace

Spectrum forward(const TorusGrid& g, std::span<const double> values) {
  if (values.size() != g.point_count())
    throw std::invalid_argument("forward: value count does not match grid");
  PlanPair& p = plans_for(g);
  Spectrum in(values.size()), out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) in[i] = values[i];
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse(const TorusGrid& g, const Spectrum& spec) {
  if (spec.size() != g.point_count())
    throw std::invalid_argument("inverse: coefficient count does not match grid");
  PlanPair& p = plans_for(g);
  Spectrum in(spec), out(spec.size());
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<double> result(spec.size());
  const double norm = 1.0 / static_cast<double>(g.point_count());
  for (std::size_t i = 0; i < out.size(); ++i) result[i] = out[i].real() * norm;
  return result;
}

}  // namespace fhd::spectral
