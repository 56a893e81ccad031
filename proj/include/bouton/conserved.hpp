#pragma once
// Catalog of candidate conserved differential forms and their verification
// against the symmetry generators.
//
// Coefficients are recorded as source text over u, v, w, p with two
// shorthands that expand at parse time:
//   s = sqrt(u^2 + v^2 + w^2)   (speed)
//   E = p/(u^2 + v^2 + w^2)     (pressure/speed^2 ratio)
// Every catalog form is built from eigenvalue-zero index tuples of the main
// scaling, with coefficients of matching weight, so the scaling and time
// translation annihilate each term; the rotations tie the slots together.
//
// Two variants are kept: Corrected (every slot verifies against all five
// generators) and Verbatim, which reproduces the source table as printed,
// including three defects that verification is expected to flag:
//   degree 2: the dy/\dw slot with v^3/(s^2 w), and dz/\du with -v/s;
//   degree 4: two slots with w/(2u) in place of u w/(2 s^2);
//   degree 6: three rows repeating the du/\dv tuple where du/\dw belongs
//             (building the form merges those rows by addition).
// Raw term counts count table rows, so a Verbatim form can have fewer
// distinct slots than its count.

#include <string>
#include <vector>

#include "bouton/symmetry.hpp"

namespace bouton {

struct CatalogTerm {
  Mask mask;
  const char* coeff;  // source text with the E and s shorthands
};

enum class CatalogVariant { Corrected, Verbatim };

namespace detail {

inline Mask M(std::initializer_list<int> bits) {
  Mask m = 0;
  for (int b : bits) m |= static_cast<Mask>(1u << b);
  return m;
}

// Expands the E and s shorthands of a catalog coefficient.
inline Expr catalog_coefficient(const char* src) {
  static const SymbolId sym_E = intern_symbol("E", SymbolKind::Parameter);
  static const SymbolId sym_s = intern_symbol("s", SymbolKind::Parameter);
  Expr S = symbol(SYM_U) * symbol(SYM_U) + symbol(SYM_V) * symbol(SYM_V) +
           symbol(SYM_W) * symbol(SYM_W);
  return substitute(parse_expr(src),
                    {{sym_E, symbol(SYM_P) / S}, {sym_s, sqrt_e(S)}});
}

}  // namespace detail

inline const std::vector<int>& catalog_degrees() {
  static const std::vector<int> degrees = {0, 2, 3, 4, 5, 6, 8};
  return degrees;
}

inline const std::vector<CatalogTerm>& catalog_terms(int k, CatalogVariant variant) {
  using detail::M;
  constexpr int x = 0, y = 1, z = 2, t = 3, u = 4, v = 5, w = 6, p = 7;

  static const std::vector<CatalogTerm> b0 = {{M({}), "E"}};

  static const std::vector<CatalogTerm> b2_corrected = {
      {M({x, u}), "E*(s^2 + u^2)/s^2"},
      {M({x, v}), "E*(u*v/s^2 + w/s)"},
      {M({x, w}), "E*(u*w/s^2 - v/s)"},
      {M({y, u}), "E*(u*v/s^2 - w/s)"},
      {M({y, v}), "E*(s^2 + v^2)/s^2"},
      {M({y, w}), "E*(v*w/s^2 + u/s)"},
      {M({z, u}), "E*(u*w/s^2 + v/s)"},
      {M({z, v}), "E*(v*w/s^2 - u/s)"},
      {M({z, w}), "E*(s^2 + w^2)/s^2"},
      {M({t, p}), "E"},
  };
  static const std::vector<CatalogTerm> b2_verbatim = {
      {M({x, u}), "E*(s^2 + u^2)/s^2"},
      {M({x, v}), "E*(u*v/s^2 + w/s)"},
      {M({x, w}), "E*(u*w/s^2 - v/s)"},
      {M({y, u}), "E*(u*v/s^2 - w/s)"},
      {M({y, v}), "E*(s^2 + v^2)/s^2"},
      {M({y, w}), "E*(v^3/(s^2*w) + u/s)"},
      {M({z, u}), "E*(u*w/s^2 - v/s)"},
      {M({z, v}), "E*(v*w/s^2 - u/s)"},
      {M({z, w}), "E*(s^2 + w^2)/s^2"},
      {M({t, p}), "E"},
  };

  static const std::vector<CatalogTerm> b3 = {
      {M({x, y, p}), "E*w/s"},  {M({x, z, p}), "-E*v/s"}, {M({y, z, p}), "E*u/s"},
      {M({t, u, v}), "E*w/s"},  {M({t, u, w}), "-E*v/s"}, {M({t, v, w}), "E*u/s"},
  };

  static const std::vector<CatalogTerm> b4_corrected = {
      {M({x, y, u, v}), "E*(s^2 + w^2)/(2*s^2)"},
      {M({x, y, u, w}), "E*(u/s - v*w/(2*s^2))"},
      {M({x, y, v, w}), "E*(u*w/(2*s^2) + v/s)"},
      {M({x, z, u, v}), "-E*(u/s + v*w/(2*s^2))"},
      {M({x, z, u, w}), "E*(s^2 + v^2)/(2*s^2)"},
      {M({x, z, v, w}), "E*(w/s - u*v/(2*s^2))"},
      {M({y, z, u, v}), "E*(u*w/(2*s^2) - v/s)"},
      {M({y, z, u, w}), "-E*(u*v/(2*s^2) + w/s)"},
      {M({y, z, v, w}), "E*(s^2 + u^2)/(2*s^2)"},
      {M({x, t, u, p}), "E*(s^2 + u^2)/s^2"},
      {M({x, t, v, p}), "E*(u*v/s^2 + w/s)"},
      {M({x, t, w, p}), "E*(u*w/s^2 - v/s)"},
      {M({y, t, u, p}), "E*(u*v/s^2 - w/s)"},
      {M({y, t, v, p}), "E*(s^2 + v^2)/s^2"},
      {M({y, t, w, p}), "E*(v*w/s^2 + u/s)"},
      {M({z, t, u, p}), "E*(u*w/s^2 + v/s)"},
      {M({z, t, v, p}), "E*(v*w/s^2 - u/s)"},
      {M({z, t, w, p}), "E*(s^2 + w^2)/s^2"},
  };
  static const std::vector<CatalogTerm> b4_verbatim = {
      {M({x, y, u, v}), "E*(s^2 + w^2)/(2*s^2)"},
      {M({x, y, u, w}), "E*(u/s - v*w/(2*s^2))"},
      {M({x, y, v, w}), "E*(w/(2*u) + v/s)"},
      {M({x, z, u, v}), "-E*(u/s + v*w/(2*s^2))"},
      {M({x, z, u, w}), "E*(s^2 + v^2)/(2*s^2)"},
      {M({x, z, v, w}), "E*(w/s - u*v/(2*s^2))"},
      {M({y, z, u, v}), "E*(w/(2*u) - v/s)"},
      {M({y, z, u, w}), "-E*(u*v/(2*s^2) + w/s)"},
      {M({y, z, v, w}), "E*(s^2 + u^2)/(2*s^2)"},
      {M({x, t, u, p}), "E*(s^2 + u^2)/s^2"},
      {M({x, t, v, p}), "E*(u*v/s^2 + w/s)"},
      {M({x, t, w, p}), "E*(u*w/s^2 - v/s)"},
      {M({y, t, u, p}), "E*(u*v/s^2 - w/s)"},
      {M({y, t, v, p}), "E*(s^2 + v^2)/s^2"},
      {M({y, t, w, p}), "E*(v*w/s^2 + u/s)"},
      {M({z, t, u, p}), "E*(u*w/s^2 + v/s)"},
      {M({z, t, v, p}), "E*(v*w/s^2 - u/s)"},
      {M({z, t, w, p}), "E*(s^2 + w^2)/s^2"},
  };

  static const std::vector<CatalogTerm> b5 = {
      {M({x, y, z, u, p}), "E*u/s"}, {M({x, y, z, v, p}), "E*v/s"},
      {M({x, y, z, w, p}), "E*w/s"}, {M({x, t, u, v, w}), "E*u/s"},
      {M({y, t, u, v, w}), "E*v/s"}, {M({z, t, u, v, w}), "E*w/s"},
  };

  static const std::vector<CatalogTerm> b6_corrected = {
      {M({x, y, z, u, v, w}), "E"},
      {M({x, y, t, u, v, p}), "E*(s^2 + w^2)/(2*s^2)"},
      {M({x, y, t, u, w, p}), "E*(u/s - v*w/(2*s^2))"},
      {M({x, y, t, v, w, p}), "E*(u*w/(2*s^2) + v/s)"},
      {M({x, z, t, u, v, p}), "-E*(v*w/(2*s^2) + u/s)"},
      {M({x, z, t, u, w, p}), "E*(s^2 + v^2)/(2*s^2)"},
      {M({x, z, t, v, w, p}), "E*(w/s - u*v/(2*s^2))"},
      {M({y, z, t, u, v, p}), "E*(u*w/(2*s^2) - v/s)"},
      {M({y, z, t, u, w, p}), "-E*(u*v/(2*s^2) + w/s)"},
      {M({y, z, t, v, w, p}), "E*(s^2 + u^2)/(2*s^2)"},
  };
  static const std::vector<CatalogTerm> b6_verbatim = {
      {M({x, y, z, u, v, w}), "E"},
      {M({x, y, t, u, v, p}), "E*(s^2 + w^2)/(2*s^2)"},
      {M({x, y, t, u, v, p}), "E*(u/s - v*w/(2*s^2))"},
      {M({x, y, t, v, w, p}), "E*(u*w/(2*s^2) + v/s)"},
      {M({x, z, t, u, v, p}), "-E*(v*w/(2*s^2) + u/s)"},
      {M({x, z, t, u, v, p}), "E*(s^2 + v^2)/(2*s^2)"},
      {M({x, z, t, v, w, p}), "E*(w/s - u*v/(2*s^2))"},
      {M({y, z, t, u, v, p}), "E*(u*w/(2*s^2) - v/s)"},
      {M({y, z, t, u, v, p}), "-E*(u*v/(2*s^2) + w/s)"},
      {M({y, z, t, v, w, p}), "E*(s^2 + u^2)/(2*s^2)"},
  };

  static const std::vector<CatalogTerm> b8 = {{M({x, y, z, t, u, v, w, p}), "E"}};

  switch (k) {
    case 0: return b0;
    case 2: return variant == CatalogVariant::Corrected ? b2_corrected : b2_verbatim;
    case 3: return b3;
    case 4: return variant == CatalogVariant::Corrected ? b4_corrected : b4_verbatim;
    case 5: return b5;
    case 6: return variant == CatalogVariant::Corrected ? b6_corrected : b6_verbatim;
    case 8: return b8;
    default: throw form_error("no catalog form of degree " + std::to_string(k));
  }
}

inline std::size_t catalog_term_count(int k, CatalogVariant variant) {
  return catalog_terms(k, variant).size();
}

// Builds the form; rows sharing a tuple merge by addition.
inline KForm catalog_form(int k, CatalogVariant variant = CatalogVariant::Corrected) {
  KForm f(k);
  for (const CatalogTerm& term : catalog_terms(k, variant))
    f.add_term(term.mask, detail::catalog_coefficient(term.coeff));
  return f;
}

// --- verification ------------------------------------------------------------

struct GeneratorCheck {
  std::string generator;
  FormZeroCheck result;
};

struct ConservedReport {
  bool all_zero = true;
  bool structural = true;
  std::vector<GeneratorCheck> checks;
};

// Lie-derivative test of the form along T, X, Rx, Ry, Rz.
inline ConservedReport verify_conserved(const KForm& f, const ZeroOptions& opts = {}) {
  ConservedReport rep;
  for (const VectorField& g : verification_generators()) {
    FormZeroCheck c = form_is_zero(lie_derivative(g, f), opts);
    rep.all_zero = rep.all_zero && c.zero;
    rep.structural = rep.structural && c.structural;
    rep.checks.push_back({g.name, std::move(c)});
  }
  return rep;
}

}  // namespace bouton
