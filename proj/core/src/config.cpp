#include "oblab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace oblab {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void fail_at(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ValidationError(os.str());
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

Sections parse_sections(const std::string& text, const std::string& name) {
  Sections out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail_at(name, lineno, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) fail_at(name, lineno, "empty section name");
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) fail_at(name, lineno, "expected key = value");
    if (section.empty()) fail_at(name, lineno, "key outside of any [section]");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail_at(name, lineno, "empty key");
    if (out[section].count(key)) fail_at(name, lineno, "duplicate key '" + key + "'");
    out[section][key] = Entry{value, lineno, false};
  }
  return out;
}

class Reader {
 public:
  Reader(Sections& s, std::string name) : sections_(s), name_(std::move(name)) {}

  bool has(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    return s != sections_.end() && s->second.count(key);
  }

  Entry* get(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
    Entry* e = get(sec, key);
    return e ? e->value : dflt;
  }

  double num(const std::string& sec, const std::string& key, double dflt) {
    Entry* e = get(sec, key);
    if (!e) return dflt;
    return parse_num(*e, sec, key);
  }

  long integer(const std::string& sec, const std::string& key, long dflt) {
    Entry* e = get(sec, key);
    if (!e) return dflt;
    double v = parse_num(*e, sec, key);
    long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
      fail_at(name_, e->line, "[" + sec + "] " + key + " must be an integer");
    return n;
  }

  bool flag(const std::string& sec, const std::string& key, bool dflt) {
    Entry* e = get(sec, key);
    if (!e) return dflt;
    if (e->value == "true" || e->value == "1" || e->value == "on") return true;
    if (e->value == "false" || e->value == "0" || e->value == "off") return false;
    fail_at(name_, e->line, "[" + sec + "] " + key + " must be a boolean");
  }

  Vec vec(const std::string& sec, const std::string& key, int dim, const Vec* dflt) {
    Entry* e = get(sec, key);
    if (!e) {
      if (dflt) return *dflt;
      fail_at(name_, 0, "missing required key [" + sec + "] " + key);
    }
    std::istringstream is(e->value);
    std::vector<double> vals;
    double v;
    while (is >> v) vals.push_back(v);
    if (!is.eof() || static_cast<int>(vals.size()) != dim)
      fail_at(name_, e->line, "[" + sec + "] " + key + " must be " + std::to_string(dim) +
                                  " numbers");
    Vec out(dim);
    for (int d = 0; d < dim; ++d) out[d] = vals[d];
    return out;
  }

  void check_unused() const {
    for (const auto& [sec, keys] : sections_)
      for (const auto& [key, e] : keys)
        if (!e.used) fail_at(name_, e.line, "unknown key '" + key + "' in [" + sec + "]");
  }

  const std::string& name() const { return name_; }

 private:
  double parse_num(const Entry& e, const std::string& sec, const std::string& key) {
    try {
      std::size_t used = 0;
      double v = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      fail_at(name_, e.line, "[" + sec + "] " + key + " must be a number");
    }
  }

  Sections& sections_;
  std::string name_;
};

Expression parse_expr_at(Reader& r, const std::string& sec, const std::string& key,
                         const std::string& dflt, int dim, const std::string& name,
                         Sections& sections) {
  int line = 0;
  std::string text = dflt;
  auto s = sections.find(sec);
  if (s != sections.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) {
      k->second.used = true;
      text = k->second.value;
      line = k->second.line;
    }
  }
  try {
    return Expression::parse(text, dim);
  } catch (const ValidationError& err) {
    fail_at(name, line, std::string("[") + sec + "] " + key + ": " + err.what());
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  Sections sections = parse_sections(text, name);
  Reader r(sections, name);
  RunConfig cfg;
  cfg.hash = fnv1a(text);

  const int dim = 2;
  cfg.domain.lo = r.vec("domain", "lo", dim, nullptr);
  cfg.domain.hi = r.vec("domain", "hi", dim, nullptr);
  for (int d = 0; d < dim; ++d)
    if (!(cfg.domain.hi[d] > cfg.domain.lo[d]))
      throw ValidationError(name + ": [domain] hi must exceed lo componentwise");
  cfg.h = r.num("domain", "h", 1.0 / 64);

  std::string fam = r.str("family", "kind", "identity");
  cfg.family = family_kind_from_name(fam);
  cfg.fparams.alpha = r.num("family", "alpha", cfg.fparams.alpha);
  cfg.fparams.amplitude = r.num("family", "amplitude", cfg.fparams.amplitude);
  cfg.fparams.p = r.num("family", "p", cfg.fparams.p);
  if (r.has("family", "center")) cfg.fparams.center = r.vec("family", "center", dim, nullptr);

  cfg.psi = parse_expr_at(r, "obstacle", "psi", "0", dim, name, sections);
  cfg.h_term_given = r.has("obstacle", "h_term");
  cfg.h_term = parse_expr_at(r, "obstacle", "h_term", "1", dim, name, sections);
  cfg.boundary = parse_expr_at(r, "obstacle", "boundary", "0", dim, name, sections);

  cfg.solver.tol_factor = r.num("solver", "tol", cfg.solver.tol_factor);
  cfg.solver.max_sweeps = static_cast<int>(r.integer("solver", "max_sweeps", cfg.solver.max_sweeps));
  cfg.solver.relax = r.num("solver", "omega", cfg.solver.relax);
  cfg.solver.polish = r.flag("solver", "polish", cfg.solver.polish);
  cfg.solver.max_active_set_iters =
      static_cast<int>(r.integer("solver", "max_active_set_iters", cfg.solver.max_active_set_iters));

  cfg.radii.q = r.num("analysis", "q", cfg.radii.q);
  cfg.radii.rmin_factor = r.num("analysis", "rmin_factor", cfg.radii.rmin_factor);
  cfg.radii.rmax_factor = r.num("analysis", "rmax_factor", cfg.radii.rmax_factor);
  cfg.radii.max_count = static_cast<int>(r.integer("analysis", "max_radii", cfg.radii.max_count));
  cfg.quad.n_theta = static_cast<int>(r.integer("analysis", "n_theta", cfg.quad.n_theta));
  cfg.quad.n_rho = static_cast<int>(r.integer("analysis", "n_rho", cfg.quad.n_rho));
  cfg.eigen_rel_threshold = r.num("analysis", "eigen_threshold", cfg.eigen_rel_threshold);
  cfg.seed = static_cast<std::uint64_t>(r.integer("analysis", "seed", static_cast<long>(cfg.seed)));
  std::string cc = r.str("analysis", "c_corr", "calibrate");
  if (cc == "calibrate") {
    cfg.calibrate_c_corr = true;
  } else {
    cfg.calibrate_c_corr = false;
    try {
      std::size_t used = 0;
      cfg.c_corr = std::stod(cc, &used);
      if (used != cc.size() || cfg.c_corr < 0) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw ValidationError(name + ": [analysis] c_corr must be 'calibrate' or a number >= 0");
    }
  }

  cfg.out_dir = r.str("outputs", "dir", cfg.out_dir);
  cfg.plots = r.flag("outputs", "plots", cfg.plots);
  cfg.dumps = r.flag("outputs", "dumps", cfg.dumps);

  r.check_unused();

  // Everything the run needs must already be well-formed: the grid must fit
  // the box and the expressions must evaluate at the domain corners.
  Grid grid = Grid::make(cfg.domain, cfg.h);
  (void)grid;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      Vec corner(2);
      corner << (cx ? cfg.domain.hi[0] : cfg.domain.lo[0]),
          (cy ? cfg.domain.hi[1] : cfg.domain.lo[1]);
      for (const Expression* e : {&cfg.psi, &cfg.h_term, &cfg.boundary}) {
        double v = e->eval(corner);
        if (!std::isfinite(v))
          throw ValidationError(name + ": expression '" + e->text() +
                                "' is not finite at a domain corner");
      }
    }

  (void)make_family(cfg.family, cfg.fparams, cfg.domain);  // validates family params
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

CoefficientField field_from_config(const RunConfig& cfg) {
  return make_family(cfg.family, cfg.fparams, cfg.domain);
}

Grid grid_from_config(const RunConfig& cfg) { return Grid::make(cfg.domain, cfg.h); }

}  // namespace oblab
