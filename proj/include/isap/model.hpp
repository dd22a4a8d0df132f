#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isap/error.hpp"
#include "isap/lattice.hpp"
#include "isap/polygon.hpp"

namespace isap {

/// Interaction parameters in either the (alpha, lambda) or the (rho, nu) form,
/// related by rho = alpha + lambda, nu = lambda. The native pair is stored
/// as given; the other pair is derived on demand (exact up to one rounding
/// of the addition or subtraction).
class Params {
 public:
  enum class Form { kAlphaLambda, kRhoNu };

  static Params alpha_lambda(double alpha, double lambda) { return Params(Form::kAlphaLambda, alpha, lambda); }
  static Params rho_nu(double rho, double nu) { return Params(Form::kRhoNu, rho, nu); }

  Form form() const { return form_; }
  double alpha() const { return form_ == Form::kAlphaLambda ? a_ : a_ - b_; }
  double lambda() const { return b_; }
  double rho() const { return form_ == Form::kRhoNu ? a_ : a_ + b_; }
  double nu() const { return b_; }

  Params as_alpha_lambda() const { return alpha_lambda(alpha(), lambda()); }
  Params as_rho_nu() const { return rho_nu(rho(), nu()); }

  bool operator==(const Params& o) const { return form_ == o.form_ && a_ == o.a_ && b_ == o.b_; }

 private:
  Params(Form f, double a, double b) : form_(f), a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("parameters must be finite");
  }
  Form form_;
  double a_;
  double b_;
};

struct Observables {
  std::int64_t C = 0;
  std::int64_t I = 0;
  std::int64_t N = 0;
  double log_lengths = 0.0;  // sum of log ||gamma_x|| over nonempty polygons

  bool operator==(const Observables& o) const { return C == o.C && I == o.I && N == o.N; }
};

/// Change of the totals caused by replacing one polygon.
struct ObservableDelta {
  std::int64_t dC = 0;
  std::int64_t dI = 0;
  std::int64_t dN = 0;
  double dlog = 0.0;
};

/// H = alpha C + lambda I + logs (alpha-lambda form) or
/// H~ = rho C + nu N + logs (rho-nu form), chosen by the params' form.
inline double energy_of(const Observables& o, const Params& p) {
  if (p.form() == Params::Form::kAlphaLambda)
    return p.alpha() * static_cast<double>(o.C) + p.lambda() * static_cast<double>(o.I) + o.log_lengths;
  return p.rho() * static_cast<double>(o.C) + p.nu() * static_cast<double>(o.N) + o.log_lengths;
}

inline double energy_of(const ObservableDelta& d, const Params& p) {
  if (p.form() == Params::Form::kAlphaLambda)
    return p.alpha() * static_cast<double>(d.dC) + p.lambda() * static_cast<double>(d.dI) + d.dlog;
  return p.rho() * static_cast<double>(d.dC) + p.nu() * static_cast<double>(d.dN) + d.dlog;
}

/// One polygon per root vertex of a torus, with the occupancy field and the
/// totals C, I, N kept coherent under replacement.
class Configuration {
 public:
  explicit Configuration(std::shared_ptr<const TorusLattice> lattice) : lat_(std::move(lattice)) {
    if (!lat_) throw PreconditionError("configuration needs a lattice");
    const std::size_t n = lat_->vertex_count();
    polys_.reserve(n);
    for (VertexIndex v = 0; v < n; ++v) polys_.push_back(Polygon::empty(v));
    occ_.assign(n, 0);
    scratch_.assign(n, 0);
    totals_.N = static_cast<std::int64_t>(n);
  }

  const TorusLattice& lattice() const { return *lat_; }
  std::shared_ptr<const TorusLattice> lattice_ptr() const { return lat_; }
  std::size_t volume() const { return lat_->vertex_count(); }

  const Polygon& polygon(VertexIndex root) const { return polys_[root]; }
  int occupancy(VertexIndex v) const { return occ_[v]; }
  const std::vector<int>& occupancy_field() const { return occ_; }
  const Observables& observables() const { return totals_; }

  /// Totals after replacing gamma_root by `p`, touching only the vertices of
  /// the old and new polygon.
  ObservableDelta delta(VertexIndex root, const Polygon& p) const {
    ObservableDelta d;
    const Polygon& old = polys_[root];
    d.dC = static_cast<std::int64_t>(p.length()) - static_cast<std::int64_t>(old.length());
    d.dlog = p.log_length() - old.log_length();
    for (VertexIndex v : old.cycle()) --scratch_[v];
    for (VertexIndex v : p.cycle()) ++scratch_[v];
    auto visit = [&](VertexIndex v) {
      int s = scratch_[v];
      if (s == 0) return;
      int before = occ_[v], after = before + s;
      d.dI += std::max(after - 1, 0) - std::max(before - 1, 0);
      d.dN += (after == 0) - (before == 0);
      scratch_[v] = 0;
    };
    for (VertexIndex v : old.cycle()) visit(v);
    for (VertexIndex v : p.cycle()) visit(v);
    return d;
  }

  double energy_delta(VertexIndex root, const Polygon& p, const Params& params) const {
    return energy_of(delta(root, p), params);
  }

  void replace(VertexIndex root, Polygon p) {
    if (p.root() != root) throw PreconditionError("replacement polygon must be rooted at the target vertex");
    ObservableDelta d = delta(root, p);
    for (VertexIndex v : polys_[root].cycle()) --occ_[v];
    for (VertexIndex v : p.cycle()) ++occ_[v];
    totals_.C += d.dC;
    totals_.I += d.dI;
    totals_.N += d.dN;
    totals_.log_lengths += d.dlog;
    polys_[root] = std::move(p);
    assert(totals_.I == totals_.C - static_cast<std::int64_t>(volume()) + totals_.N);
  }

  /// Replacement with a validity check of the polygon against the lattice.
  void assign(VertexIndex root, Polygon p) {
    if (auto bad = validate(*lat_, p)) throw PreconditionError("invalid polygon: " + bad->message);
    replace(root, std::move(p));
  }

  /// Totals recomputed from the polygons alone.
  Observables recompute() const {
    std::vector<int> occ(volume(), 0);
    Observables o;
    for (const Polygon& p : polys_) {
      o.C += static_cast<std::int64_t>(p.length());
      if (!p.is_empty()) o.log_lengths += std::log(static_cast<double>(p.length()));
      for (VertexIndex v : p.cycle()) ++occ[v];
    }
    for (int k : occ) {
      o.I += std::max(k - 1, 0);
      o.N += (k == 0);
    }
    return o;
  }

  /// Cache coherence: occupancy and totals match a recomputation.
  bool coherent() const {
    std::vector<int> occ(volume(), 0);
    for (const Polygon& p : polys_)
      for (VertexIndex v : p.cycle()) ++occ[v];
    Observables o = recompute();
    return occ == occ_ && o == totals_ && std::abs(o.log_lengths - totals_.log_lengths) < 1e-9;
  }

  std::size_t nonempty_count() const {
    std::size_t k = 0;
    for (const Polygon& p : polys_) k += !p.is_empty();
    return k;
  }

 private:
  std::shared_ptr<const TorusLattice> lat_;
  std::vector<Polygon> polys_;
  std::vector<int> occ_;
  mutable std::vector<int> scratch_;
  Observables totals_;
};

inline Observables observables(const Configuration& cfg) { return cfg.observables(); }

/// Energy from scratch in the params' form.
inline double energy(const Configuration& cfg, const Params& params) { return energy_of(cfg.recompute(), params); }

inline double energy_delta(const Configuration& cfg, VertexIndex root, const Polygon& p, const Params& params) {
  return cfg.energy_delta(root, p, params);
}

/// Vertices not visited by any polygon rooted away from `origin`, as a 0/1 mask.
inline std::vector<char> unvisited_by_others(const Configuration& cfg, VertexIndex origin = 0) {
  std::vector<char> mask(cfg.volume(), 0);
  const Polygon& own = cfg.polygon(origin);
  for (VertexIndex v = 0; v < cfg.volume(); ++v) mask[v] = cfg.occupancy(v) == 0;
  for (VertexIndex v : own.cycle()) mask[v] = cfg.occupancy(v) == 1;
  return mask;
}

// Configuration text format:
//   # isap-config v1
//   L <side>
//   d <dimension>
//   <one polygon line per nonempty root>
inline void dump_configuration(std::ostream& out, const Configuration& cfg) {
  const TorusLattice& lat = cfg.lattice();
  out << "# isap-config v1\nL " << lat.side() << "\nd " << lat.dimension() << "\n";
  for (VertexIndex v = 0; v < cfg.volume(); ++v)
    if (!cfg.polygon(v).is_empty()) out << format_polygon(lat, cfg.polygon(v)) << "\n";
}

inline Configuration load_configuration(std::istream& in) {
  std::string line;
  int side = -1, dim = -1;
  std::vector<std::string> body;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# isap-config v1", 0) == 0) header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "L") ss >> side;
    else if (key == "d") ss >> dim;
    else body.push_back(line);
  }
  if (!header) throw PreconditionError("configuration file lacks '# isap-config v1' header");
  if (side < 2 || dim < 1) throw PreconditionError("configuration file lacks valid L and d lines");
  Configuration cfg(std::make_shared<TorusLattice>(side, dim));
  for (const auto& b : body) {
    Polygon p = parse_polygon(cfg.lattice(), b);
    if (!cfg.polygon(p.root()).is_empty())
      throw PreconditionError("configuration file has two polygons for one root: " + b);
    cfg.replace(p.root(), std::move(p));
  }
  return cfg;
}

}  // namespace isap
