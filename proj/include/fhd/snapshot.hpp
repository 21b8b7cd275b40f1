#pragma once

#include <string>

#include "fhd/dynamics.hpp"

namespace fhd {

// 17-significant-digit decimal form, enough to round-trip any double; every
// number in the CSV and snapshot headers goes through this so outputs are
// reproducible bit for bit.
std::string format_g17(double v);

// One line of JSON metadata, then the fields rho, m1, ..., m_dim concatenated
// as little-endian IEEE-754 doubles in row-major order.
void persist_snapshot(const FluidState& state, const std::string& path);
FluidState load_snapshot(const std::string& path);
// As above, but rejects snapshots whose grid differs from the expected one.
FluidState load_snapshot(const std::string& path, const TorusGrid& expected);

}  // namespace fhd
