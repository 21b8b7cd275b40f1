#include "fhd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fhd/errors.hpp"
#include "fhd/snapshot.hpp"

namespace fhd {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t.empty()) fail(line, "empty numeric value");
  char* end = nullptr;
  double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) fail(line, "bad number '" + t + "'");
  return x;
}

int parse_int(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t.empty()) fail(line, "empty integer value");
  char* end = nullptr;
  long x = std::strtol(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) fail(line, "bad integer '" + t + "'");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t == "true" || t == "on") return true;
  if (t == "false" || t == "off") return false;
  fail(line, "bad boolean '" + t + "' (want true/false/on/off)");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// "k1,k2[,k3]:coeff[:cos]" terms separated by ';'. A sin basis tag is rejected
// outright: an odd term has no even extension, so the config can never name a
// kernel outside the admissible class.
std::vector<KernelMode> parse_kernel_table(const std::string& text, int dim, int line) {
  std::vector<KernelMode> modes;
  for (const std::string& raw : split(text, ';')) {
    const std::string term = trim(raw);
    if (term.empty()) continue;
    std::vector<std::string> parts = split(term, ':');
    if (parts.size() < 2 || parts.size() > 3) fail(line, "bad kernel term '" + term + "'");
    if (parts.size() == 3) {
      const std::string basis = trim(parts[2]);
      if (basis == "sin")
        fail(line, "sine term '" + term + "' makes the kernel asymmetric; only cos is allowed");
      if (basis != "cos") fail(line, "unknown basis '" + basis + "' in kernel term");
    }
    std::vector<std::string> comps = split(parts[0], ',');
    if (comps.size() != 2 && comps.size() != 3)
      fail(line, "kernel wavevector needs 2 or 3 components, got '" + trim(parts[0]) + "'");
    KernelMode mode;
    for (size_t a = 0; a < comps.size(); ++a) mode.k[a] = parse_int(comps[a], line);
    for (size_t a = static_cast<size_t>(dim); a < 3; ++a)
      if (mode.k[a] != 0) fail(line, "kernel term '" + term + "' uses an axis beyond dim");
    mode.coeff = parse_double(parts[1], line);
    modes.push_back(mode);
  }
  if (modes.empty()) fail(line, "kernel table is empty");
  return modes;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

// Pulls a key out of a section, marking it consumed so leftovers can be
// reported as unknown.
class Reader {
public:
  Reader(Section& s, std::string name) : section_(s), name_(std::move(name)) {}

  bool has(const std::string& key) const { return section_.count(key) > 0; }

  const Entry* take(const std::string& key) {
    auto it = section_.find(key);
    if (it == section_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void finish() const {
    for (const auto& [key, entry] : section_)
      if (!entry.used) fail(entry.line, "unknown key '" + key + "' in [" + name_ + "]");
  }

private:
  Section& section_;
  std::string name_;
};

// Kernel kind + optional amplitude/table keys under a common prefix.
KernelSpec parse_kernel(Reader& r, const std::string& prefix, int dim) {
  const Entry* kind = r.take(prefix);
  const Entry* amp = r.take(prefix + "_amplitude");
  const Entry* table = r.take(prefix + "_table");
  if (!kind) {
    if (amp) fail(amp->line, prefix + "_amplitude given without " + prefix + " kind");
    if (table) fail(table->line, prefix + "_table given without " + prefix + " kind");
    return KernelSpec::zero();
  }
  const std::string k = trim(kind->value);
  if (k == "zero") {
    if (amp) fail(amp->line, prefix + "_amplitude is meaningless for a zero kernel");
    if (table) fail(table->line, prefix + "_table is meaningless for a zero kernel");
    return KernelSpec::zero();
  }
  if (k == "cosine") {
    if (table) fail(table->line, prefix + "_table conflicts with the cosine kind");
    double a = amp ? parse_double(amp->value, amp->line) : 1.0;
    return KernelSpec::cosine(a);
  }
  if (k == "table") {
    if (!table) fail(kind->line, prefix + " = table requires " + prefix + "_table");
    double a = amp ? parse_double(amp->value, amp->line) : 1.0;
    return KernelSpec::fourier_table(parse_kernel_table(table->value, dim, table->line), a);
  }
  fail(kind->line, "unknown kernel kind '" + k + "' (want zero/cosine/table)");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, Section> sections;
  const std::set<std::string> known = {"grid", "model", "integrator", "sweep", "output"};

  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!known.count(current)) fail(line_no, "unknown section [" + current + "]");
      sections[current];  // present even if empty
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    if (current.empty()) fail(line_no, "key outside any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    auto [it, inserted] = sections[current].insert({key, Entry{value, line_no, false}});
    if (!inserted)
      fail(line_no, "duplicate key '" + key + "' (first set on line " +
                        std::to_string(it->second.line) + ")");
  }

  RunConfig cfg;

  {
    Reader r(sections["grid"], "grid");
    if (const Entry* e = r.take("dim")) {
      cfg.grid.dim = parse_int(e->value, e->line);
      if (cfg.grid.dim != 2 && cfg.grid.dim != 3) fail(e->line, "dim must be 2 or 3");
    }
    if (const Entry* e = r.take("m")) {
      cfg.grid.m = parse_int(e->value, e->line);
      if (cfg.grid.m < 4 || cfg.grid.m % 2 != 0) fail(e->line, "m must be even and >= 4");
    }
    r.finish();
  }

  {
    Reader r(sections["model"], "model");
    double kappa = cfg.model.pressure.kappa();
    double gamma = cfg.model.pressure.gamma();
    int kappa_line = 0;
    if (const Entry* e = r.take("kappa")) {
      kappa = parse_double(e->value, e->line);
      kappa_line = e->line;
    }
    if (const Entry* e = r.take("gamma")) {
      gamma = parse_double(e->value, e->line);
      kappa_line = kappa_line ? kappa_line : e->line;
    }
    try {
      cfg.model.pressure = PressureLaw(kappa, gamma);
    } catch (const std::invalid_argument& err) {
      fail(kappa_line, err.what());
    }

    const Entry* friction = r.take("friction");
    const Entry* h_inf = r.take("h_inf");
    if (friction) {
      const std::string f = trim(friction->value);
      if (f == "off") {
        if (h_inf) fail(h_inf->line, "h_inf given but friction is off");
        cfg.model.friction = FrictionLaw::off();
      } else if (f == "saturating") {
        if (!h_inf) fail(friction->line, "friction = saturating requires h_inf");
        cfg.model.friction = FrictionLaw::saturating(parse_double(h_inf->value, h_inf->line));
      } else {
        fail(friction->line, "unknown friction '" + f + "' (want off/saturating)");
      }
    } else if (h_inf) {
      fail(h_inf->line, "h_inf given without friction = saturating");
    }

    if (const Entry* e = r.take("epsilon")) cfg.model.epsilon = parse_double(e->value, e->line);
    if (const Entry* e = r.take("density_reg"))
      cfg.model.density_reg = parse_double(e->value, e->line);
    cfg.model.attraction = parse_kernel(r, "attraction", cfg.grid.dim);
    cfg.model.alignment = parse_kernel(r, "alignment", cfg.grid.dim);
    r.finish();
  }

  {
    Reader r(sections["integrator"], "integrator");
    if (const Entry* e = r.take("scheme")) {
      if (trim(e->value) != "ssp-rk3") fail(e->line, "unknown scheme '" + trim(e->value) + "'");
      cfg.integrator.scheme = Scheme::ssp_rk3;
    }
    if (const Entry* e = r.take("cfl")) cfg.integrator.cfl = parse_double(e->value, e->line);
    if (const Entry* e = r.take("dt_max")) cfg.integrator.dt_max = parse_double(e->value, e->line);
    if (const Entry* e = r.take("t_end")) cfg.integrator.t_end = parse_double(e->value, e->line);
    if (const Entry* e = r.take("rho_floor_rel"))
      cfg.integrator.rho_floor_rel = parse_double(e->value, e->line);
    if (const Entry* e = r.take("samples")) cfg.integrator.samples = parse_int(e->value, e->line);
    r.finish();
  }

  {
    Reader r(sections["sweep"], "sweep");
    if (const Entry* e = r.take("epsilons")) {
      cfg.sweep.epsilons.clear();
      for (const std::string& part : split(e->value, ',')) {
        const std::string t = trim(part);
        if (t.empty()) fail(e->line, "empty entry in epsilons list");
        cfg.sweep.epsilons.push_back(parse_double(t, e->line));
      }
      for (size_t i = 0; i < cfg.sweep.epsilons.size(); ++i) {
        if (cfg.sweep.epsilons[i] <= 0) fail(e->line, "epsilons must be positive");
        if (i > 0 && cfg.sweep.epsilons[i] >= cfg.sweep.epsilons[i - 1])
          fail(e->line, "epsilons must be strictly decreasing");
      }
    }
    if (const Entry* e = r.take("preset")) cfg.sweep.preset = trim(e->value);
    if (const Entry* e = r.take("workers")) {
      cfg.sweep.workers = parse_int(e->value, e->line);
      if (cfg.sweep.workers < 1) fail(e->line, "workers must be >= 1");
    }
    if (const Entry* e = r.take("perturb_delta"))
      cfg.sweep.perturb_delta = parse_double(e->value, e->line);
    if (const Entry* e = r.take("forcing")) cfg.sweep.forcing = parse_bool(e->value, e->line);
    r.finish();
  }

  {
    Reader r(sections["output"], "output");
    if (const Entry* e = r.take("directory")) {
      cfg.output.directory = trim(e->value);
      if (cfg.output.directory.empty()) fail(e->line, "empty output directory");
    }
    if (const Entry* e = r.take("write_snapshots"))
      cfg.output.write_snapshots = parse_bool(e->value, e->line);
    r.finish();
  }

  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

void write_kernel(std::ostream& out, const std::string& prefix, const KernelSpec& spec, int dim) {
  switch (spec.kind()) {
    case KernelSpec::Kind::zero:
      out << prefix << " = zero\n";
      return;
    case KernelSpec::Kind::cosine:
      out << prefix << " = cosine\n";
      out << prefix << "_amplitude = " << format_g17(spec.amplitude()) << "\n";
      return;
    case KernelSpec::Kind::fourier_table: {
      // modes(dim) folds the amplitude into the coefficients, so the dump
      // always carries amplitude 1 implicitly.
      out << prefix << " = table\n";
      out << prefix << "_table = ";
      bool first = true;
      for (const KernelMode& m : spec.modes(dim)) {
        if (!first) out << "; ";
        first = false;
        out << m.k[0] << "," << m.k[1];
        if (dim == 3) out << "," << m.k[2];
        out << ":" << format_g17(m.coeff);
      }
      out << "\n";
      return;
    }
  }
}

}  // namespace

std::string write_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[grid]\n";
  out << "dim = " << cfg.grid.dim << "\n";
  out << "m = " << cfg.grid.m << "\n";
  out << "\n[model]\n";
  out << "kappa = " << format_g17(cfg.model.pressure.kappa()) << "\n";
  out << "gamma = " << format_g17(cfg.model.pressure.gamma()) << "\n";
  if (cfg.model.friction.enabled()) {
    out << "friction = saturating\n";
    out << "h_inf = " << format_g17(cfg.model.friction.h_inf()) << "\n";
  } else {
    out << "friction = off\n";
  }
  out << "epsilon = " << format_g17(cfg.model.epsilon) << "\n";
  out << "density_reg = " << format_g17(cfg.model.density_reg) << "\n";
  write_kernel(out, "attraction", cfg.model.attraction, cfg.grid.dim);
  write_kernel(out, "alignment", cfg.model.alignment, cfg.grid.dim);
  out << "\n[integrator]\n";
  out << "scheme = ssp-rk3\n";
  out << "cfl = " << format_g17(cfg.integrator.cfl) << "\n";
  out << "dt_max = " << format_g17(cfg.integrator.dt_max) << "\n";
  out << "t_end = " << format_g17(cfg.integrator.t_end) << "\n";
  out << "rho_floor_rel = " << format_g17(cfg.integrator.rho_floor_rel) << "\n";
  out << "samples = " << cfg.integrator.samples << "\n";
  out << "\n[sweep]\n";
  if (!cfg.sweep.epsilons.empty()) {
    out << "epsilons = ";
    for (size_t i = 0; i < cfg.sweep.epsilons.size(); ++i) {
      if (i) out << ", ";
      out << format_g17(cfg.sweep.epsilons[i]);
    }
    out << "\n";
  }
  out << "preset = " << cfg.sweep.preset << "\n";
  out << "workers = " << cfg.sweep.workers << "\n";
  out << "perturb_delta = " << format_g17(cfg.sweep.perturb_delta) << "\n";
  out << "forcing = " << (cfg.sweep.forcing ? "true" : "false") << "\n";
  out << "\n[output]\n";
  out << "directory = " << cfg.output.directory << "\n";
  out << "write_snapshots = " << (cfg.output.write_snapshots ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace fhd
