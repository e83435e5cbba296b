#include "oblab/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oblab {

namespace {

using ordered_json = nlohmann::ordered_json;

// All artifacts are written to a temp file and renamed into place.
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path)
      : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + tmp_);
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed for " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ValidationError("solution artifact: truncated data block");
}

void json_dump(const ordered_json& doc, const std::string& path) {
  AtomicFile f(path);
  f.stream() << doc.dump(2) << "\n";
  f.commit();
}

}  // namespace

void write_solution(const GridSolution& sol, const std::string& path, std::uint64_t config_hash) {
  AtomicFile f(path);
  std::ofstream& out = f.stream();
  const Grid& g = sol.grid;
  out << "oblab-solution 1\n";
  out << "hash " << hash_hex(config_hash) << "\n";
  out << "dim 2\n";
  out << "shape " << g.nx() << " " << g.ny() << "\n";
  out << "lo " << fmt_double(g.box.lo[0]) << " " << fmt_double(g.box.lo[1]) << "\n";
  out << "hi " << fmt_double(g.box.hi[0]) << " " << fmt_double(g.box.hi[1]) << "\n";
  out << "h " << fmt_double(g.h) << "\n";
  out << "converged " << (sol.kkt.converged ? 1 : 0) << "\n";
  out << "fields u zeta active\n";
  out << "end\n";
  write_doubles(out, sol.u.v.data(), g.size());
  write_doubles(out, sol.zeta.v.data(), g.size());
  std::vector<double> act(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) act[i] = sol.active[i] ? 1.0 : 0.0;
  write_doubles(out, act.data(), g.size());
  f.commit();
}

GridSolution read_solution(const std::string& path, std::uint64_t expect_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("solution artifact: cannot open " + path);
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line)) throw ValidationError("solution artifact: truncated header");
    return std::istringstream(line);
  };
  {
    auto ls = next();
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != "oblab-solution" || version != 1)
      throw ValidationError("solution artifact: unrecognized format in " + path);
  }
  GridSolution sol;
  std::string key;
  std::string hash_str;
  Vec lo(2), hi(2);
  int nx = 0, ny = 0;
  double h = 0;
  int converged = 0;
  for (;;) {
    auto ls = next();
    ls >> key;
    if (key == "end") break;
    if (key == "hash")
      ls >> hash_str;
    else if (key == "dim") {
      int d;
      ls >> d;
      if (d != 2) throw ValidationError("solution artifact: only 2D grids supported");
    } else if (key == "shape")
      ls >> nx >> ny;
    else if (key == "lo")
      ls >> lo[0] >> lo[1];
    else if (key == "hi")
      ls >> hi[0] >> hi[1];
    else if (key == "h")
      ls >> h;
    else if (key == "converged")
      ls >> converged;
    else if (key == "fields") {
      std::string f1, f2, f3;
      ls >> f1 >> f2 >> f3;
      if (f1 != "u" || f2 != "zeta" || f3 != "active")
        throw ValidationError("solution artifact: unexpected field list");
    } else
      throw ValidationError("solution artifact: unknown header key '" + key + "'");
  }
  if (hash_str != hash_hex(expect_hash))
    throw ValidationError("solution artifact was produced by a different config (hash " +
                          hash_str + ", expected " + hash_hex(expect_hash) + ")");
  if (nx < 3 || ny < 3 || !(h > 0))
    throw ValidationError("solution artifact: malformed grid header");

  Grid g = Grid::make(Box{lo, hi}, h);
  if (g.nx() != nx || g.ny() != ny)
    throw ValidationError("solution artifact: header shape does not match bounds");
  sol.grid = g;
  sol.u = GridField::zeros(g);
  sol.zeta = GridField::zeros(g);
  read_doubles(in, sol.u.v.data(), g.size());
  read_doubles(in, sol.zeta.v.data(), g.size());
  std::vector<double> act(g.size());
  read_doubles(in, act.data(), g.size());
  sol.active.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) sol.active[i] = act[i] != 0.0;
  sol.contact_tol = h * h;
  sol.kkt.converged = converged != 0;
  return sol;
}

void write_kkt_json(const GridSolution& sol, const std::string& path, std::uint64_t config_hash) {
  const KktReport& k = sol.kkt;
  ordered_json doc;
  doc["config_hash"] = hash_hex(config_hash);
  doc["converged"] = k.converged;
  doc["sweeps"] = k.sweeps;
  doc["active_set_iters"] = k.active_set_iters;
  doc["complementarity"] = k.complementarity;
  doc["min_u"] = k.min_u;
  doc["zeta_min_active"] = k.zeta_min;
  doc["zeta_excess_active"] = k.zeta_excess;
  doc["zeta_inactive_max"] = k.zeta_inactive;
  doc["energy"] = k.energy;
  doc["grid"] = {{"nx", sol.grid.nx()}, {"ny", sol.grid.ny()}, {"h", sol.grid.h}};
  json_dump(doc, path);
}

void write_fb_csv(const FreeBoundary& fb, const std::string& path) {
  AtomicFile f(path);
  f.stream() << "x,y,anchor,edge_dir\n";
  for (std::size_t p = 0; p < fb.count(); ++p)
    f.stream() << fmt_double(fb.points[p][0]) << "," << fmt_double(fb.points[p][1]) << ","
               << fb.anchors[p] << "," << fb.edge_dirs[p] << "\n";
  f.commit();
}

void write_weiss_csv(const EnergyTrace& t, const std::string& path) {
  AtomicFile f(path);
  f.stream() << "r,phi,bulk,boundary,correction,phi_plus_corr,trusted\n";
  for (std::size_t k = 0; k < t.radii.size(); ++k)
    f.stream() << fmt_double(t.radii[k]) << "," << fmt_double(t.phi[k]) << ","
               << fmt_double(t.bulk[k]) << "," << fmt_double(t.boundary[k]) << ","
               << fmt_double(t.correction[k]) << ","
               << fmt_double(t.phi[k] + t.correction[k]) << "," << int(t.trusted[k]) << "\n";
  f.commit();
}

void write_monneau_csv(const MonneauTrace& t, const std::string& path) {
  AtomicFile f(path);
  f.stream() << "r,deviation,correction,monitor,trusted\n";
  for (std::size_t k = 0; k < t.radii.size(); ++k)
    f.stream() << fmt_double(t.radii[k]) << "," << fmt_double(t.deviation[k]) << ","
               << fmt_double(t.correction[k]) << "," << fmt_double(t.monitor[k]) << ","
               << int(t.trusted[k]) << "\n";
  f.commit();
}

namespace {

ordered_json classification_record(const Classification& c) {
  ordered_json rec;
  rec["x"] = c.x0[0];
  rec["y"] = c.x0[1];
  rec["verdict"] = verdict_name(c.verdict);
  rec["phi0"] = c.phi0;
  rec["uncertainty"] = c.uncertainty;
  rec["fit_residual"] = c.fit_residual;
  if (c.verdict == Verdict::regular) {
    rec["e"] = {c.halfspace.e[0], c.halfspace.e[1]};
  } else if (c.verdict == Verdict::singular) {
    rec["k"] = c.k;
    rec["Q"] = {c.poly.Q(0, 0), c.poly.Q(0, 1), c.poly.Q(1, 1)};
  } else {
    rec["reason"] = c.reason;
  }
  return rec;
}

}  // namespace

void write_classification_csv(const std::vector<Classification>& cls, const std::string& path) {
  AtomicFile f(path);
  f.stream() << "x,y,verdict,k,phi0,uncertainty,fit_residual,e_x,e_y,q_xx,q_xy,q_yy\n";
  for (const auto& c : cls) {
    bool reg = c.verdict == Verdict::regular, sing = c.verdict == Verdict::singular;
    f.stream() << fmt_double(c.x0[0]) << "," << fmt_double(c.x0[1]) << ","
               << verdict_name(c.verdict) << "," << (sing ? std::to_string(c.k) : "") << ","
               << fmt_double(c.phi0) << "," << fmt_double(c.uncertainty) << ","
               << fmt_double(c.fit_residual) << ",";
    f.stream() << (reg ? fmt_double(c.halfspace.e[0]) : "") << ","
               << (reg ? fmt_double(c.halfspace.e[1]) : "") << ",";
    if (sing)
      f.stream() << fmt_double(c.poly.Q(0, 0)) << "," << fmt_double(c.poly.Q(0, 1)) << ","
                 << fmt_double(c.poly.Q(1, 1));
    else
      f.stream() << ",,";
    f.stream() << "\n";
  }
  f.commit();
}

void write_classification_json(const std::vector<Classification>& cls, const Stratification& st,
                               const Nondegeneracy& nd, double c_corr, const std::string& path,
                               std::uint64_t config_hash) {
  ordered_json doc;
  doc["config_hash"] = hash_hex(config_hash);
  doc["c_corr"] = c_corr;
  doc["theta"] = cls.empty() ? 0.0 : cls.front().theta_ref;
  doc["counts"] = {{"regular", st.n_regular},
                   {"singular", st.n_singular},
                   {"undetermined", st.n_undetermined}};
  doc["singular_by_k"] = st.singular_by_k;
  doc["components"] = st.components;
  doc["mixed_components"] = st.mixed_components;
  doc["theta_hat"] = nd.theta_hat;
  doc["gamma_hat"] = nd.gamma_hat;
  ordered_json pts = ordered_json::array();
  for (const auto& c : cls) pts.push_back(classification_record(c));
  doc["points"] = pts;
  json_dump(doc, path);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  AtomicFile f(path);
  f.stream() << content;
  f.commit();
}

void write_field_csv(const GridField& f, const std::string& path) {
  AtomicFile fout(path);
  fout.stream() << "x,y,value\n";
  const Grid& g = f.grid;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      Vec p = g.node(i, j);
      fout.stream() << fmt_double(p[0]) << "," << fmt_double(p[1]) << ","
                    << fmt_double(f.at(i, j)) << "\n";
    }
  fout.commit();
}

}  // namespace oblab
