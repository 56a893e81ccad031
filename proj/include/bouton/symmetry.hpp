#pragma once
// Point-symmetry generators of the incompressible flow equations, their
// finite transforms, and covariance classification of expressions.
//
// Catalog (components written on the coordinates x, y, z, t, u, v, w, p and
// the viscosity nu):
//   T   time translation            d/dt
//   X   two-parameter scaling with (ax, at) = (1, 2)
//   X1  pure space dilation         x dx + ... + u du + ... + 2p dp + 2nu dnu
//   X2  pure time dilation          t dt - u du - ... - 2p dp - nu dnu
//   Rx, Ry, Rz  rotations acting jointly on positions and velocities
// X = X1 + 2 X2 holds exactly, component by component.
//
// Finite transforms carry their group parameter symbolically: k for scalings
// (k > 0), a shared cos/sin pair for rotations, tau for time translation.
// covariance_factor decides whether an expression transforms as k^c times
// itself under the (ax, at) scaling, first through the weight calculus and
// exact verification, then through a numeric ratio-constancy fallback.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bouton/kform.hpp"
#include "bouton/weights.hpp"

namespace bouton {

// --- generator catalog -------------------------------------------------------

inline VectorField gen_T() { return {"T", {{SYM_T, expr_one()}}}; }

inline VectorField gen_X1() {
  Expr two = num(Rational(2));
  return {"X1",
          {{SYM_X, symbol(SYM_X)},
           {SYM_Y, symbol(SYM_Y)},
           {SYM_Z, symbol(SYM_Z)},
           {SYM_U, symbol(SYM_U)},
           {SYM_V, symbol(SYM_V)},
           {SYM_W, symbol(SYM_W)},
           {SYM_P, two * symbol(SYM_P)},
           {SYM_NU, two * symbol(SYM_NU)}}};
}

inline VectorField gen_X2() {
  Expr mtwo = num(Rational(-2));
  return {"X2",
          {{SYM_T, symbol(SYM_T)},
           {SYM_U, -symbol(SYM_U)},
           {SYM_V, -symbol(SYM_V)},
           {SYM_W, -symbol(SYM_W)},
           {SYM_P, mtwo * symbol(SYM_P)},
           {SYM_NU, -symbol(SYM_NU)}}};
}

inline VectorField gen_X() {
  return {"X",
          {{SYM_X, symbol(SYM_X)},
           {SYM_Y, symbol(SYM_Y)},
           {SYM_Z, symbol(SYM_Z)},
           {SYM_T, num(Rational(2)) * symbol(SYM_T)},
           {SYM_U, -symbol(SYM_U)},
           {SYM_V, -symbol(SYM_V)},
           {SYM_W, -symbol(SYM_W)},
           {SYM_P, num(Rational(-2)) * symbol(SYM_P)}}};
}

namespace detail {
// Rotation pattern p d/dq - q d/dp on a position pair and a velocity pair.
inline VectorField plane_rotation_field(std::string name, SymbolId p, SymbolId q,
                                        SymbolId vp, SymbolId vq) {
  return {std::move(name),
          {{q, symbol(p)}, {p, -symbol(q)}, {vq, symbol(vp)}, {vp, -symbol(vq)}}};
}
}  // namespace detail

inline VectorField gen_Rx() {
  return detail::plane_rotation_field("Rx", SYM_Y, SYM_Z, SYM_V, SYM_W);
}
inline VectorField gen_Ry() {
  return detail::plane_rotation_field("Ry", SYM_Z, SYM_X, SYM_W, SYM_U);
}
inline VectorField gen_Rz() {
  return detail::plane_rotation_field("Rz", SYM_X, SYM_Y, SYM_U, SYM_V);
}

inline const std::vector<VectorField>& generator_catalog() {
  static const std::vector<VectorField> cat = {gen_T(),  gen_X(),  gen_X1(), gen_X2(),
                                               gen_Rx(), gen_Ry(), gen_Rz()};
  return cat;
}

inline const VectorField* find_generator(const std::string& name) {
  for (const auto& g : generator_catalog())
    if (g.name == name) return &g;
  return nullptr;
}

// The generators every conserved form must be annihilated by: both scalings
// enter only through their combination X.
inline std::vector<VectorField> verification_generators() {
  return {gen_T(), gen_X(), gen_Rx(), gen_Ry(), gen_Rz()};
}

// Directional derivative of a scalar along the field.
inline Expr apply_generator(const VectorField& vf, const Expr& e) {
  Expr acc = expr_zero();
  for (const auto& [id, comp] : vf.components)
    acc = acc + comp * differentiate(e, id);
  return acc;
}

inline VectorField linear_combination(
    const std::vector<std::pair<Rational, const VectorField*>>& parts,
    std::string name = "combo") {
  VectorField out{std::move(name), {}};
  for (const auto& [coeff, vf] : parts)
    for (const auto& [id, comp] : vf->components) {
      Expr add = num(coeff) * comp;
      auto it = out.components.find(id);
      Expr next = it == out.components.end() ? add : it->second + add;
      if (is_zero_literal(next)) {
        if (it != out.components.end()) out.components.erase(it);
      } else {
        out.components[id] = next;
      }
    }
  return out;
}

// The scaling generator with parameters (ax, at): ax X1 + at X2.
inline VectorField scale_generator(const Rational& ax, const Rational& at) {
  VectorField x1 = gen_X1(), x2 = gen_X2();
  return linear_combination({{ax, &x1}, {at, &x2}}, "scale");
}

inline VectorField commutator(const VectorField& a, const VectorField& b) {
  VectorField out{"[" + a.name + "," + b.name + "]", {}};
  std::map<SymbolId, Expr> comps;
  for (const auto& [id, c] : a.components) comps[id] = expr_zero();
  for (const auto& [id, c] : b.components) comps[id] = expr_zero();
  for (auto& [id, slot] : comps) {
    Expr c = apply_generator(a, b.component(id)) - apply_generator(b, a.component(id));
    if (!is_zero_literal(c)) slot = c;
  }
  for (auto it = comps.begin(); it != comps.end();)
    it = is_zero_literal(it->second) ? comps.erase(it) : std::next(it);
  out.components = std::move(comps);
  return out;
}

// --- finite transforms -------------------------------------------------------

struct FiniteTransform {
  std::string name;
  std::map<SymbolId, Expr> map;  // images of moved symbols (others fixed)

  Expr apply(const Expr& e) const { return substitute(e, map); }
  KForm apply(const KForm& f) const { return pullback(map, f); }
};

// Two-parameter scaling with group parameter k > 0:
//   (x,y,z) -> k^ax .,  t -> k^at t,  (u,v,w) -> k^(ax-at) .,
//   p -> k^(2ax-2at) p,  nu -> k^(2ax-at) nu,  tau -> k^at tau.
inline FiniteTransform finite_scaling(const Rational& ax, const Rational& at) {
  Expr k = symbol(SYM_K);
  auto fac = [&](const Rational& r) { return pow_e(k, r); };
  FiniteTransform t{"scale", {}};
  for (SymbolId id : {SYM_X, SYM_Y, SYM_Z}) t.map[id] = fac(ax) * symbol(id);
  t.map[SYM_T] = fac(at) * symbol(SYM_T);
  for (SymbolId id : {SYM_U, SYM_V, SYM_W}) t.map[id] = fac(ax - at) * symbol(id);
  t.map[SYM_P] = fac((ax - at) * Rational(2)) * symbol(SYM_P);
  t.map[SYM_NU] = fac(ax * Rational(2) - at) * symbol(SYM_NU);
  t.map[SYM_TAU] = fac(at) * symbol(SYM_TAU);
  return t;
}

namespace detail {
// p -> p cos - q sin, q -> q cos + p sin on positions and velocities; this is
// the time-theta flow of the corresponding rotation generator.
inline FiniteTransform plane_rotation_transform(std::string name, SymbolId p, SymbolId q,
                                                SymbolId vp, SymbolId vq) {
  Expr c = symbol(SYM_COS_THETA), s = symbol(SYM_SIN_THETA);
  FiniteTransform t{std::move(name), {}};
  t.map[p] = c * symbol(p) - s * symbol(q);
  t.map[q] = c * symbol(q) + s * symbol(p);
  t.map[vp] = c * symbol(vp) - s * symbol(vq);
  t.map[vq] = c * symbol(vq) + s * symbol(vp);
  return t;
}
}  // namespace detail

inline FiniteTransform rotation_x() {
  return detail::plane_rotation_transform("rot:x", SYM_Y, SYM_Z, SYM_V, SYM_W);
}
inline FiniteTransform rotation_y() {
  return detail::plane_rotation_transform("rot:y", SYM_Z, SYM_X, SYM_W, SYM_U);
}
inline FiniteTransform rotation_z() {
  return detail::plane_rotation_transform("rot:z", SYM_X, SYM_Y, SYM_U, SYM_V);
}

inline FiniteTransform time_translation() {
  return {"tshift", {{SYM_T, symbol(SYM_T) + symbol(SYM_TAU)}}};
}

// Derivative of the transform at the identity of its parameter group:
// d/dk at k = 1, d/dtheta at theta = 0, or d/dtau at tau = 0, depending on
// which parameter the images carry. The result is a generator component map.
inline std::map<SymbolId, Expr> infinitesimal_of(const FiniteTransform& ft) {
  bool has_k = false, has_angle = false;
  for (const auto& [id, img] : ft.map) {
    has_k = has_k || depends_on(img, SYM_K);
    has_angle =
        has_angle || depends_on(img, SYM_COS_THETA) || depends_on(img, SYM_SIN_THETA);
  }
  std::map<SymbolId, Expr> out;
  for (const auto& [id, img] : ft.map) {
    Expr d;
    if (has_k) {
      d = substitute(differentiate(img, SYM_K), SYM_K, expr_one());
    } else if (has_angle) {
      // Chain rule through the linked pair, evaluated at angle zero.
      Expr c = symbol(SYM_COS_THETA), s = symbol(SYM_SIN_THETA);
      d = differentiate(img, SYM_COS_THETA) * (-s) + differentiate(img, SYM_SIN_THETA) * c;
      d = substitute(d, {{SYM_COS_THETA, expr_one()}, {SYM_SIN_THETA, expr_zero()}});
    } else {
      d = substitute(differentiate(img, SYM_TAU), SYM_TAU, expr_zero());
    }
    if (!is_zero_literal(d)) out[id] = d;
  }
  return out;
}

// Checks that the transform is generated by the field: the identity-parameter
// derivative of every image must equal the field component, exactly.
inline bool consistent_with_generator(const FiniteTransform& ft, const VectorField& vf) {
  std::map<SymbolId, Expr> inf = infinitesimal_of(ft);
  std::map<SymbolId, Expr> want = vf.components;
  for (const auto& [id, comp] : inf) {
    auto it = want.find(id);
    Expr target = it == want.end() ? expr_zero() : it->second;
    if (!structural_zero(comp - target).is_zero()) return false;
    if (it != want.end()) want.erase(it);
  }
  for (const auto& [id, comp] : want)
    if (!is_zero_literal(comp)) return false;
  return true;
}

// --- covariance classification ----------------------------------------------

struct CovarianceReport {
  enum class Status { Invariant, Covariant, NotCovariant, Undetermined };
  Status status = Status::Undetermined;
  std::optional<Weight> weight;          // set when the weight calculus decided
  std::optional<Rational> exponent;      // phi* e = k^exponent e
  std::optional<double> exponent_estimate;  // numeric fallback estimate
  std::optional<ZeroWitness> witness;    // point separating phi* e from k^c e
  std::string note;
};

inline CovarianceReport covariance_factor(const Expr& e, const Rational& ax,
                                          const Rational& at,
                                          const ZeroOptions& opts = {}) {
  CovarianceReport out;
  FiniteTransform ft = finite_scaling(ax, at);
  WeightReport wr = weight_of(e);
  if (wr.status == WeightStatus::Uniform) {
    Rational c = wr.weight->realized(ax, at);
    ZeroResult z = is_zero(ft.apply(e) - pow_e(symbol(SYM_K), c) * e, opts);
    if (z.is_zero()) {
      out.status = wr.weight->is_zero() ? CovarianceReport::Status::Invariant
                                        : CovarianceReport::Status::Covariant;
      out.weight = wr.weight;
      out.exponent = c;
      return out;
    }
    out.status = CovarianceReport::Status::Undetermined;
    out.note = "uniform weight " + wr.weight->str() +
               " but exact verification failed: " + to_cstring(z.verdict);
    out.witness = z.witness;
    return out;
  }

  // Numeric fallback: the ratio (phi* e)/e must realize a constant power of k.
  std::mt19937_64 rng(opts.seed);
  Expr mapped = ft.apply(e);
  std::set<SymbolId> syms = free_symbols(e);
  syms.erase(SYM_K);
  CallDefs defs = opts.defs ? *opts.defs : CallDefs{};
  for (const auto& sig : call_signatures(e))
    if (!defs.count(sig.name)) defs.emplace(sig.name, random_instantiation(sig.arity, rng));
  std::map<std::pair<std::string, std::vector<int>>, Expr> dcache;
  std::optional<double> est;
  const double kvals[2] = {2.0, 3.0};
  for (double kv : kvals) {
    for (int i = 0; i < 8; ++i) {
      for (int attempt = 0; attempt < 300; ++attempt) {
        auto point = sample_point(syms, rng);
        EvalEnv env{point, &defs, &dcache};
        try {
          double base = eval(e, env).value;
          EvalEnv envk = env;
          envk.values[SYM_K] = kv;
          double image = eval(mapped, envk).value;
          if (std::abs(base) < 1e-8) break;  // ratio unusable here, next point
          double ratio = image / base;
          if (ratio <= 0.0) {
            out.status = CovarianceReport::Status::NotCovariant;
            out.witness = ZeroWitness{point, ratio, std::abs(base)};
            out.note = "transform flips sign at a sample point";
            return out;
          }
          double c = std::log(ratio) / std::log(kv);
          if (!est) {
            est = c;
          } else if (std::abs(c - *est) > 1e-6 * (1.0 + std::abs(*est))) {
            out.status = CovarianceReport::Status::NotCovariant;
            out.witness = ZeroWitness{point, c - *est, 1.0 + std::abs(*est)};
            out.note = "scaling exponent varies across sample points";
            return out;
          }
          break;
        } catch (const eval_domain_error&) {
          // resample
        }
      }
    }
  }
  if (!est) {
    out.note = "no admissible sample points for the ratio test";
    return out;
  }
  out.exponent_estimate = est;
  if (auto c = rationalize(*est, 1000000, 1e-6)) {
    ZeroResult z = is_zero(mapped - pow_e(symbol(SYM_K), *c) * e, opts);
    if (z.is_zero()) {
      out.exponent = *c;
      out.status = c->is_zero() ? CovarianceReport::Status::Invariant
                                : CovarianceReport::Status::Covariant;
      return out;
    }
  }
  out.status = CovarianceReport::Status::Undetermined;
  out.note = "ratio is constant in samples but exact verification failed";
  return out;
}

}  // namespace bouton
