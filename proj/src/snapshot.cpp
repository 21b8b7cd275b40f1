#include "fhd/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "fhd/errors.hpp"

namespace fhd {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_doubles(std::ofstream& out, const std::vector<double>& values) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      out.write(b, 8);
    }
  }
}

void read_doubles(std::ifstream& in, std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double& v : values) {
      char b[8];
      in.read(b, 8);
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
      std::memcpy(&v, &bits, 8);
    }
  }
}

}  // namespace

void persist_snapshot(const FluidState& state, const std::string& path) {
  const TorusGrid& g = state.rho.grid;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");

  std::string header = "{\"version\":1,\"dim\":" + std::to_string(g.dim()) +
                       ",\"m\":" + std::to_string(g.m()) + ",\"time\":" + format_g17(state.time) +
                       ",\"fields\":[\"rho\"";
  for (int a = 0; a < g.dim(); ++a) header += ",\"m" + std::to_string(a + 1) + "\"";
  header += "]}\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  write_doubles(out, state.rho.values);
  for (int a = 0; a < g.dim(); ++a) write_doubles(out, state.momentum[a].values);
  if (!out) throw ConfigError("failed while writing snapshot '" + path + "'");
}

FluidState load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("snapshot '" + path + "' has no header line");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed snapshot header in '" + path + "': " + e.what());
  }
  if (!meta.is_object() || meta.value("version", 0) != 1)
    throw ConfigError("unsupported snapshot version in '" + path + "'");
  if (!meta.contains("dim") || !meta.contains("m") || !meta.contains("time") ||
      !meta.contains("fields"))
    throw ConfigError("snapshot header in '" + path + "' is missing required keys");

  const int dim = meta["dim"].get<int>();
  const int m = meta["m"].get<int>();
  if (dim != 2 && dim != 3) throw ConfigError("snapshot '" + path + "' has unsupported dimension");

  std::vector<std::string> expected_fields = {"rho"};
  for (int a = 0; a < dim; ++a) expected_fields.push_back("m" + std::to_string(a + 1));
  if (meta["fields"].get<std::vector<std::string>>() != expected_fields)
    throw ConfigError("snapshot '" + path + "' lists unexpected fields");

  TorusGrid g(dim, m);
  FluidState state(g);
  state.time = meta["time"].get<double>();
  read_doubles(in, state.rho.values);
  for (int a = 0; a < dim; ++a) read_doubles(in, state.momentum[a].values);
  if (!in) throw ConfigError("snapshot '" + path + "' payload is truncated");
  return state;
}

FluidState load_snapshot(const std::string& path, const TorusGrid& expected) {
  FluidState state = load_snapshot(path);
  if (!(state.rho.grid == expected))
    throw ConfigError("snapshot '" + path + "' grid (dim " +
                      std::to_string(state.rho.grid.dim()) + ", m " +
                      std::to_string(state.rho.grid.m()) + ") does not match the expected grid");
  return state;
}

}  // namespace fhd
