#pragma once

#include <span>

namespace fhd {

// Fitted exponential envelope S(tau) <= gamma_budget * exp(c_fit * tau) for
// S = entropy + defect, witnessed through the discrete integral inequality
// S_k <= c * cumtrapz(S)_k + gamma_budget. gamma_fit is the budget expressed
// in units of epsilon (0 when epsilon <= 0).
struct GronwallCertificate {
  double c_fit = 0.0;
  double gamma_fit = 0.0;
  double gamma_budget = 0.0;
  bool pass = false;
};

// times must be strictly increasing; entropy/defect the same length. Any
// non-finite sample is rejected (std::invalid_argument). Negative samples are
// clipped to zero; they can only come from roundoff.
GronwallCertificate gronwall_certificate(std::span<const double> times,
                                         std::span<const double> entropy,
                                         std::span<const double> defect, double epsilon);

// True when every rate sits within rel_tol of the mean (small absolute slack
// so all-zero certificates count as stable).
bool gronwall_stable(std::span<const double> c_values, double rel_tol = 0.2);

}  // namespace fhd
