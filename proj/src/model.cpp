#include "fhd/model.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fhd/spectral.hpp"

namespace fhd {

namespace {
constexpr double pi = std::numbers::pi;
}

PressureLaw::PressureLaw(double kappa, double gamma) : kappa_(kappa), gamma_(gamma) {
  if (!std::isfinite(kappa) || !std::isfinite(gamma))
    throw std::invalid_argument("pressure law parameters must be finite");
  if (gamma == 1.0)
    throw std::invalid_argument("pressure law gamma == 1 is outside the gamma-law family");
}

double PressureLaw::pressure(double rho) const {
  if (rho < 0.0) throw std::domain_error("pressure: negative density");
  return kappa_ * std::pow(rho, gamma_);
}

double PressureLaw::pressure_prime(double rho) const {
  if (rho < 0.0) throw std::domain_error("pressure_prime: negative density");
  return kappa_ * gamma_ * std::pow(rho, gamma_ - 1.0);
}

double PressureLaw::potential(double rho) const {
  if (rho < 0.0) throw std::domain_error("potential: negative density");
  return kappa_ * (std::pow(rho, gamma_) - rho) / (gamma_ - 1.0);
}

double PressureLaw::potential_prime(double rho) const {
  if (rho < 0.0) throw std::domain_error("potential_prime: negative density");
  return kappa_ * (gamma_ * std::pow(rho, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
}

double PressureLaw::potential_second(double rho) const {
  if (rho <= 0.0) throw std::domain_error("potential_second: density must be positive");
  return pressure_prime(rho) / rho;
}

double PressureLaw::bregman(double s, double r) const {
  if (r <= 0.0) throw std::domain_error("bregman: reference density must be positive");
  return potential(s) - potential_prime(r) * (s - r) - potential(r);
}

double FrictionLaw::h(double z) const {
  if (kind_ == Kind::off) return 0.0;
  return h_inf_ * z / (1.0 + z);
}

double FrictionLaw::h_prime(double z) const {
  if (kind_ == Kind::off) return 0.0;
  const double d = 1.0 + z;
  return h_inf_ / (d * d);
}

namespace {

std::array<int, 3> canonical(std::array<int, 3> k) {
  for (int a = 0; a < 3; ++a) {
    if (k[a] > 0) return k;
    if (k[a] < 0) return {-k[0], -k[1], -k[2]};
  }
  return k;
}

void accumulate(std::map<std::array<int, 3>, double>& acc, std::array<int, 3> k, double c) {
  acc[canonical(k)] += c;
}

}  // namespace

KernelSpec KernelSpec::zero() { return KernelSpec(Kind::zero, 0.0, {}); }

KernelSpec KernelSpec::cosine(double amplitude) {
  return KernelSpec(Kind::cosine, amplitude, {});
}

KernelSpec KernelSpec::fourier_table(std::vector<KernelMode> modes, double amplitude) {
  std::map<std::array<int, 3>, double> acc;
  for (const auto& m : modes) accumulate(acc, m.k, m.coeff);
  std::vector<KernelMode> canon;
  for (const auto& [k, c] : acc) canon.push_back({k, c});
  return KernelSpec(Kind::fourier_table, amplitude, std::move(canon));
}

bool KernelSpec::is_zero() const {
  if (kind_ == Kind::zero) return true;
  if (amplitude_ == 0.0) return true;
  if (kind_ == Kind::fourier_table) {
    for (const auto& m : table_)
      if (m.coeff != 0.0) return false;
    return true;
  }
  return false;
}

std::vector<KernelMode> KernelSpec::modes(int dim) const {
  if (kind_ == Kind::zero) return {};
  if (kind_ == Kind::fourier_table) {
    std::vector<KernelMode> out;
    for (const auto& m : table_) {
      for (int a = dim; a < 3; ++a)
        if (m.k[a] != 0)
          throw std::invalid_argument("kernel table mode uses an axis beyond the grid dim");
      out.push_back({m.k, amplitude_ * m.coeff});
    }
    return out;
  }
  // cosine kind: expand amplitude * prod_a (1 + cos(pi x_a)) / 2 by repeatedly
  // applying cos(A)cos(B) = (cos(A-B) + cos(A+B))/2, merging canonical modes.
  std::map<std::array<int, 3>, double> acc;
  acc[{0, 0, 0}] = amplitude_;
  for (int a = 0; a < dim; ++a) {
    std::map<std::array<int, 3>, double> next;
    for (const auto& [k, c] : acc) {
      accumulate(next, k, 0.5 * c);
      std::array<int, 3> kp = k, km = k;
      kp[a] += 1;
      km[a] -= 1;
      accumulate(next, kp, 0.25 * c);
      accumulate(next, km, 0.25 * c);
    }
    acc = std::move(next);
  }
  std::vector<KernelMode> out;
  for (const auto& [k, c] : acc) out.push_back({k, c});
  return out;
}

int KernelSpec::max_mode(int dim) const {
  int mx = 0;
  for (const auto& m : modes(dim))
    for (int a = 0; a < dim; ++a) mx = std::max(mx, std::abs(m.k[a]));
  return mx;
}

double KernelSpec::value_at(std::span<const double> x, int dim) const {
  double v = 0.0;
  for (const auto& m : modes(dim)) {
    double arg = 0.0;
    for (int a = 0; a < dim; ++a) arg += m.k[a] * x[a];
    v += m.coeff * std::cos(pi * arg);
  }
  return v;
}

ScalarField sample_kernel(const KernelSpec& spec, const TorusGrid& grid) {
  const int need = 2 * spec.max_mode(grid.dim()) + 2;
  if (grid.m() < need) {
    std::ostringstream os;
    os << "kernel needs m >= " << need << " to be resolved, grid has m = " << grid.m();
    throw std::invalid_argument(os.str());
  }
  ScalarField out(grid);
  spectral::for_each_point(grid, [&](std::size_t idx, int a, int b, int c) {
    const std::array<double, 3> x{grid.coordinate(a), grid.coordinate(b), grid.coordinate(c)};
    out.values[idx] = spec.value_at(std::span<const double>(x.data(), 3), grid.dim());
  });
  return out;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.pass ? "pass" : "FAIL") << "  " << c.hypothesis << ": " << c.detail << "\n";
  return os.str();
}

namespace {

void check_kernel_evenness(ValidationReport& report, const KernelSpec& spec,
                           const TorusGrid& grid, const std::string& name) {
  ScalarField k = sample_kernel(spec, grid);
  const int m = grid.m();
  double worst = 0.0;
  spectral::for_each_point(grid, [&](std::size_t idx, int a, int b, int c) {
    const int ra = (m - a) % m, rb = (m - b) % m, rc = (m - c) % m;
    std::size_t ridx;
    if (grid.dim() == 2)
      ridx = static_cast<std::size_t>(ra) * m + rb;
    else
      ridx = (static_cast<std::size_t>(ra) * m + rb) * m + rc;
    worst = std::max(worst, std::abs(k.values[idx] - k.values[ridx]));
  });
  // Cosine evaluation is not bitwise even in libm; allow roundoff.
  const double tol = 1e-12 * std::max(1.0, max_abs(k));
  std::ostringstream os;
  os << name << ": max |K(x) - K(-x)| = " << worst;
  report.checks.push_back({name + " evenness", worst <= tol, os.str()});
}

}  // namespace

ValidationReport validate_model(const ModelSpec& model, const TorusGrid& grid) {
  ValidationReport report;
  const auto& p = model.pressure;

  {
    std::ostringstream os;
    os << "kappa = " << p.kappa();
    report.checks.push_back({"pressure positivity (kappa > 0)", p.kappa() > 0.0, os.str()});
  }
  {
    std::ostringstream os;
    os << "p'(rho) = kappa*gamma*rho^(gamma-1), kappa*gamma = " << p.kappa() * p.gamma();
    report.checks.push_back(
        {"pressure monotone (p' > 0)", p.kappa() > 0.0 && p.gamma() > 0.0, os.str()});
  }
  {
    const double ratio = 1.0 / (p.gamma() - 1.0);
    std::ostringstream os;
    os << "liminf P/p = 1/(gamma-1) = " << ratio;
    report.checks.push_back({"internal-energy growth (gamma > 1)", ratio > 0.0, os.str()});
  }
  {
    std::ostringstream os;
    os << "P''(rho) = p'(rho)/rho > 0 for rho > 0";
    report.checks.push_back(
        {"internal-energy convexity", p.kappa() > 0.0 && p.gamma() > 0.0, os.str()});
  }

  if (model.friction.enabled()) {
    std::ostringstream os;
    os << "saturating law, h_inf = " << model.friction.h_inf();
    report.checks.push_back(
        {"friction bounds (0 <= H <= h_inf)", model.friction.h_inf() >= 0.0, os.str()});
    report.checks.push_back({"friction monotone (H' >= 0)", model.friction.h_inf() >= 0.0,
                             "H'(z) = h_inf/(1+z)^2"});
  } else {
    report.checks.push_back({"friction bounds (0 <= H <= h_inf)", true, "friction off"});
  }

  for (const auto* spec : {&model.attraction, &model.alignment}) {
    const bool is_attraction = spec == &model.attraction;
    const std::string name = is_attraction ? "attraction kernel" : "alignment kernel";
    const int need = 2 * spec->max_mode(grid.dim()) + 2;
    {
      std::ostringstream os;
      os << "max mode " << spec->max_mode(grid.dim()) << ", needs m >= " << need << ", m = "
         << grid.m();
      report.checks.push_back({name + " resolved on grid", grid.m() >= need, os.str()});
    }
    if (grid.m() >= need) check_kernel_evenness(report, *spec, grid, name);
  }

  {
    // psi >= 0 is exact for the built-in bump with nonnegative amplitude;
    // tables are scanned pointwise on the grid.
    bool pass = true;
    std::ostringstream os;
    if (model.alignment.kind() == KernelSpec::Kind::cosine) {
      pass = model.alignment.amplitude() >= 0.0;
      os << "product-bump form, amplitude = " << model.alignment.amplitude();
    } else if (model.alignment.is_zero()) {
      os << "alignment off";
    } else {
      ScalarField psi = sample_kernel(model.alignment, grid);
      const double mn = min_value(psi);
      const double scale = max_abs(psi);
      pass = mn >= -1e-12 * std::max(scale, 1.0);
      os << "grid min = " << mn << ", max |psi| = " << scale;
    }
    report.checks.push_back({"alignment kernel nonnegative", pass, os.str()});
  }

  {
    std::ostringstream os;
    os << "epsilon = " << model.epsilon;
    report.checks.push_back(
        {"viscosity sign (epsilon >= 0)", model.epsilon >= 0.0 && std::isfinite(model.epsilon),
         os.str()});
  }
  {
    std::ostringstream os;
    os << "density_reg = " << model.density_reg;
    report.checks.push_back({"density regularization sign (>= 0)",
                             model.density_reg >= 0.0 && std::isfinite(model.density_reg),
                             os.str()});
  }

  return report;
}

}  // namespace fhd
