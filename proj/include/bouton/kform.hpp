#pragma once
// Exterior calculus over the eight coordinates x, y, z, t, u, v, w, p.
//
// A k-form is a finite sum of terms c * dx_{i1} /\ ... /\ dx_{ik} with the
// index tuple strictly ascending; tuples are stored as 8-bit masks (bit i set
// means the differential of coordinate i appears). Coefficients are arbitrary
// expressions and may depend on symbols outside the eight coordinates (nu,
// tau, parameters); those behave as constants for d. The Lie derivative uses
// Cartan's formula in degree >= 1 and the plain directional derivative in
// degree 0, where vector-field components along non-coordinate symbols (such
// as a nu-component of a scaling generator) also act. In degree >= 1 a
// nonzero non-coordinate component is rejected whenever a coefficient depends
// on that symbol, since the transport term it would contribute has no place
// in this complex.
//
// Text syntax: terms joined by + or -, each term an optional coefficient
// expression followed by differentials joined by "/\", e.g.
//   (p/(u^2 + v^2 + w^2)) dt /\ dp
//   u dx /\ dy - dz
// A term with no differentials is a 0-form coefficient. Repeated
// differentials annihilate the term; odd permutations flip its sign.

#include <bit>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bouton/calculus.hpp"
#include "bouton/evaluate.hpp"
#include "bouton/parser.hpp"
#include "bouton/printer.hpp"

namespace bouton {

class form_error : public std::runtime_error {
 public:
  explicit form_error(const std::string& what) : std::runtime_error(what) {}
};

using Mask = std::uint8_t;

inline int mask_degree(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

inline std::vector<int> mask_tuple(Mask m) {
  std::vector<int> t;
  for (int i = 0; i < NUM_CORE_SYMBOLS; ++i)
    if (m & (1u << i)) t.push_back(i);
  return t;
}

inline Mask tuple_mask(const std::vector<int>& t) {
  Mask m = 0;
  for (int i : t) m |= static_cast<Mask>(1u << i);
  return m;
}

// Sign of dx_A /\ dx_B relative to the ascending merge (A, B disjoint):
// parity of the pairs (a, b) with a in A, b in B and a > b.
inline int shuffle_sign(Mask a, Mask b) {
  int inv = 0;
  for (int i = 0; i < NUM_CORE_SYMBOLS; ++i)
    if (b & (1u << i)) inv += std::popcount(static_cast<unsigned>(a) >> (i + 1));
  return (inv & 1) ? -1 : 1;
}

// Terms print and iterate in lexicographic order of the index tuple, so all
// dx /\ ... terms come before dy /\ ..., matching how tables are usually laid
// out, rather than in numeric mask order.
struct MaskLess {
  bool operator()(Mask a, Mask b) const { return mask_tuple(a) < mask_tuple(b); }
};

class KForm {
 public:
  explicit KForm(int degree = 0) : degree_(degree) {
    if (degree < 0 || degree > NUM_CORE_SYMBOLS + 1)
      throw form_error("form degree out of range");
  }
  static KForm scalar(Expr c) {
    KForm f(0);
    f.add_term(0, std::move(c));
    return f;
  }

  int degree() const { return degree_; }
  bool empty() const { return terms_.empty(); }
  const std::map<Mask, Expr, MaskLess>& terms() const { return terms_; }

  Expr coefficient(Mask m) const {
    if (mask_degree(m) != degree_) throw form_error("coefficient mask has wrong degree");
    auto it = terms_.find(m);
    return it == terms_.end() ? expr_zero() : it->second;
  }

  void add_term(Mask m, Expr c) {
    if (mask_degree(m) != degree_) throw form_error("term mask has wrong degree");
    if (is_zero_literal(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, std::move(c));
      return;
    }
    Expr s = it->second + c;
    if (is_zero_literal(s)) terms_.erase(it);
    else it->second = std::move(s);
  }

  KForm& operator+=(const KForm& o) {
    if (o.degree_ != degree_) throw form_error("adding forms of different degree");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  friend KForm operator+(KForm a, const KForm& b) { return a += b; }
  friend KForm operator-(const KForm& a) {
    KForm r(a.degree_);
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend KForm operator-(KForm a, const KForm& b) { return a += -b; }
  friend KForm operator*(const Expr& s, const KForm& a) {
    KForm r(a.degree_);
    for (const auto& [m, c] : a.terms_) r.add_term(m, s * c);
    return r;
  }

 private:
  int degree_;
  std::map<Mask, Expr, MaskLess> terms_;
};

inline KForm wedge(const KForm& a, const KForm& b) {
  int deg = a.degree() + b.degree();
  KForm r(deg > NUM_CORE_SYMBOLS ? NUM_CORE_SYMBOLS + 1 : deg);
  if (deg > NUM_CORE_SYMBOLS) return r;  // necessarily zero
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      Expr c = ca * cb;
      if (shuffle_sign(ma, mb) < 0) c = -c;
      r.add_term(static_cast<Mask>(ma | mb), std::move(c));
    }
  return r;
}

// Exterior derivative over the eight coordinates only; other symbols in the
// coefficients are parameters.
inline KForm ext_d(const KForm& f) {
  KForm r(f.degree() + 1);
  if (f.degree() >= NUM_CORE_SYMBOLS) return r;
  for (const auto& [m, c] : f.terms())
    for (int v = 0; v < NUM_CORE_SYMBOLS; ++v) {
      if (m & (1u << v)) continue;
      Expr dc = differentiate(c, static_cast<SymbolId>(v));
      if (is_zero_literal(dc)) continue;
      // dv moves past every index of m below v.
      int below = std::popcount(static_cast<unsigned>(m) & ((1u << v) - 1u));
      if (below & 1) dc = -dc;
      r.add_term(static_cast<Mask>(m | (1u << v)), std::move(dc));
    }
  return r;
}

// A vector field with sparse components; components along symbols outside the
// eight coordinates (e.g. nu) are allowed and matter for flows and for Lie
// derivatives of 0-forms.
struct VectorField {
  std::string name;
  std::map<SymbolId, Expr> components;

  Expr component(SymbolId id) const {
    auto it = components.find(id);
    return it == components.end() ? expr_zero() : it->second;
  }
};

inline KForm interior(const VectorField& vf, const KForm& f) {
  if (f.degree() == 0) return KForm(0);  // contraction of a scalar vanishes
  KForm r(f.degree() - 1);
  for (const auto& [m, c] : f.terms()) {
    auto tup = mask_tuple(m);
    for (std::size_t j = 0; j < tup.size(); ++j) {
      Expr comp = vf.component(static_cast<SymbolId>(tup[j]));
      if (is_zero_literal(comp)) continue;
      Expr term = c * comp;
      if (j & 1) term = -term;
      r.add_term(static_cast<Mask>(m & ~(1u << tup[j])), std::move(term));
    }
  }
  return r;
}

inline KForm lie_derivative(const VectorField& vf, const KForm& f) {
  if (f.degree() == 0) {
    Expr acc = expr_zero();
    for (const auto& [id, comp] : vf.components) {
      if (is_zero_literal(comp)) continue;
      acc = acc + comp * differentiate(f.coefficient(0), id);
    }
    return KForm::scalar(acc);
  }
  for (const auto& [id, comp] : vf.components) {
    if (id < NUM_CORE_SYMBOLS || is_zero_literal(comp)) continue;
    for (const auto& [m, c] : f.terms())
      if (depends_on(c, id))
        throw form_error("Lie derivative along '" + vf.name +
                         "': coefficient depends on non-coordinate symbol '" +
                         symbol_name(id) + "' carried by the field");
  }
  return interior(vf, ext_d(f)) + ext_d(interior(vf, f));
}

// Pullback along the map phi (coordinates not listed map to themselves).
// Coefficients substitute through phi; each differential dv becomes the total
// differential of phi(v) over the eight coordinates.
inline KForm pullback(const std::map<SymbolId, Expr>& phi, const KForm& f) {
  std::vector<KForm> dphi;  // one 1-form per coordinate
  dphi.reserve(NUM_CORE_SYMBOLS);
  for (int v = 0; v < NUM_CORE_SYMBOLS; ++v) {
    KForm one(1);
    auto it = phi.find(static_cast<SymbolId>(v));
    if (it == phi.end()) {
      one.add_term(static_cast<Mask>(1u << v), expr_one());
    } else {
      for (int w = 0; w < NUM_CORE_SYMBOLS; ++w) {
        Expr dw = differentiate(it->second, static_cast<SymbolId>(w));
        if (!is_zero_literal(dw)) one.add_term(static_cast<Mask>(1u << w), std::move(dw));
      }
    }
    dphi.push_back(std::move(one));
  }
  KForm r(f.degree());
  for (const auto& [m, c] : f.terms()) {
    KForm piece = KForm::scalar(substitute(c, phi));
    for (int v : mask_tuple(m)) piece = wedge(piece, dphi[v]);
    r += piece;
  }
  return r;
}

// --- zero testing ------------------------------------------------------------

struct FormZeroCheck {
  bool zero = true;
  bool structural = true;             // every coefficient vanished structurally
  std::optional<Mask> failing_mask;   // first mask with a nonzero coefficient
  std::optional<ZeroWitness> witness;
};

inline FormZeroCheck form_is_zero(const KForm& f, const ZeroOptions& opts = {}) {
  FormZeroCheck out;
  for (const auto& [m, c] : f.terms()) {
    ZeroResult r = is_zero(c, opts);
    if (!r.is_zero()) {
      out.zero = false;
      out.structural = false;
      out.failing_mask = m;
      out.witness = r.witness;
      return out;
    }
    if (r.verdict != ZeroResult::Verdict::ZeroStructural) out.structural = false;
  }
  return out;
}

// --- text form ---------------------------------------------------------------

inline std::string diff_name(int i) { return "d" + symbol_name(static_cast<SymbolId>(i)); }

inline int diff_index(const std::string& tok) {
  if (tok.size() != 2 || tok[0] != 'd') return -1;
  for (int i = 0; i < NUM_CORE_SYMBOLS; ++i)
    if (tok == diff_name(i)) return i;
  return -1;
}

inline std::string to_string(const KForm& f) {
  if (f.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : f.terms()) {
    auto [coeff, monic] = detail::split_coeff(c);
    bool negative = coeff.is_negative();
    Expr mag = negative ? detail::with_coeff(-coeff, monic) : c;
    std::string cs = to_string(mag);
    std::string piece;
    if (m == 0) {
      piece = (mag->kind == Kind::Sum) ? "(" + cs + ")" : cs;
    } else {
      std::string diffs;
      for (int v : mask_tuple(m)) {
        if (!diffs.empty()) diffs += " /\\ ";
        diffs += diff_name(v);
      }
      if (equal(mag, expr_one())) piece = diffs;
      else if (mag->kind == Kind::Sum) piece = "(" + cs + ") " + diffs;
      else piece = cs + " " + diffs;
    }
    if (first) out += negative ? "-" + piece : piece;
    else out += negative ? " - " + piece : " + " + piece;
    first = false;
  }
  return out;
}

namespace detail {

// Top-level split of a form source string into signed term substrings.
inline std::vector<std::pair<int, std::string>> split_form_terms(const std::string& src) {
  std::vector<std::pair<int, std::string>> out;
  int depth = 0;
  int sign = 1;
  std::string cur;
  char prev_sig = 0;  // last non-space character seen before the current one
  auto flush = [&](int next_sign) {
    std::string t = cur;
    std::size_t b = t.find_first_not_of(" \t");
    std::size_t e = t.find_last_not_of(" \t");
    if (b == std::string::npos) {
      if (!out.empty() || next_sign == 0)
        throw form_error("empty term in form expression");
    } else {
      out.emplace_back(sign, t.substr(b, e - b + 1));
    }
    cur.clear();
    if (next_sign != 0) sign = next_sign;
  };
  for (char ch : src) {
    if (ch == '(' || ch == '[') ++depth;
    if (ch == ')' || ch == ']') --depth;
    bool binary_pos = prev_sig != 0 && prev_sig != '^' && prev_sig != '*' &&
                      prev_sig != '/' && prev_sig != '(' && prev_sig != '[' &&
                      prev_sig != ',' && prev_sig != '+' && prev_sig != '-';
    if (depth == 0 && (ch == '+' || ch == '-') && binary_pos) {
      flush(ch == '+' ? 1 : -1);
      prev_sig = 0;
      continue;
    }
    if (depth == 0 && (ch == '+' || ch == '-') && prev_sig == 0 && cur.empty() &&
        out.empty() && ch == '-') {
      sign = -sign;  // leading unary minus of the whole form
      continue;
    }
    cur += ch;
    if (!std::isspace(static_cast<unsigned char>(ch))) prev_sig = ch;
  }
  flush(0);
  if (out.empty()) throw form_error("empty form expression");
  return out;
}

}  // namespace detail

inline KForm parse_form(const std::string& src) {
  auto terms = detail::split_form_terms(src);
  std::optional<int> degree;
  struct Parsed {
    int sign;
    Expr coeff;
    Mask mask;
  };
  std::vector<Parsed> parsed;
  for (auto& [sign, term] : terms) {
    // Find the first top-level differential token.
    std::size_t split = std::string::npos;
    int depth = 0;
    for (std::size_t i = 0; i < term.size();) {
      char ch = term[i];
      if (ch == '(' || ch == '[') ++depth;
      if (ch == ')' || ch == ']') --depth;
      if (depth == 0 &&
          (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || ch == '@')) {
        std::size_t j = i + 1;
        while (j < term.size() &&
               (std::isalnum(static_cast<unsigned char>(term[j])) || term[j] == '_'))
          ++j;
        std::string tok = term.substr(i, j - i);
        if (diff_index(tok) >= 0) {
          split = i;
          break;
        }
        // Two-letter d-names that are not coordinates are almost certainly
        // typos of a differential, not parameters.
        if (tok.size() == 2 && tok[0] == 'd' &&
            std::isalpha(static_cast<unsigned char>(tok[1])))
          throw form_error("unknown differential '" + tok + "'");
        i = j;
        continue;
      }
      ++i;
    }
    Expr coeff = expr_one();
    Mask mask = 0;
    int perm_sign = 1;
    bool annihilated = false;
    if (split == std::string::npos) {
      coeff = parse_expr(term);
    } else {
      std::string head = term.substr(0, split);
      std::size_t he = head.find_last_not_of(" \t");
      if (he != std::string::npos && head[he] == '*') head = head.substr(0, he);
      he = head.find_last_not_of(" \t");
      if (he != std::string::npos) coeff = parse_expr(head.substr(0, he + 1));
      // Differential chain: d? ( "/\" d? )*
      std::size_t i = split;
      std::vector<int> seq;
      while (true) {
        while (i < term.size() && std::isspace(static_cast<unsigned char>(term[i]))) ++i;
        std::size_t j = i;
        while (j < term.size() &&
               (std::isalnum(static_cast<unsigned char>(term[j])) || term[j] == '_'))
          ++j;
        int d = (j > i) ? diff_index(term.substr(i, j - i)) : -1;
        if (d < 0) throw form_error("expected a differential in '" + term + "'");
        seq.push_back(d);
        i = j;
        while (i < term.size() && std::isspace(static_cast<unsigned char>(term[i]))) ++i;
        if (i == term.size()) break;
        if (term.compare(i, 2, "/\\") != 0)
          throw form_error("expected '/\\' between differentials in '" + term + "'");
        i += 2;
      }
      for (std::size_t a = 0; a < seq.size(); ++a)
        for (std::size_t b = a + 1; b < seq.size(); ++b) {
          if (seq[a] == seq[b]) annihilated = true;
          if (seq[a] > seq[b]) perm_sign = -perm_sign;
        }
      for (int d : seq) mask |= static_cast<Mask>(1u << d);
    }
    if (annihilated) continue;
    int deg = mask_degree(mask);
    if (degree && *degree != deg)
      throw form_error("mixed degrees in form expression (" + std::to_string(*degree) +
                       " and " + std::to_string(deg) + ")");
    degree = deg;
    parsed.push_back({sign * perm_sign, std::move(coeff), mask});
  }
  // All terms annihilated (e.g. "dx /\ dx"): fall back to degree of the source
  // tuples, which is lost here; treat as the zero form of the stated degree 0.
  KForm f(degree.value_or(0));
  for (auto& t : parsed)
    f.add_term(t.mask, t.sign < 0 ? -t.coeff : t.coeff);
  return f;
}

}  // namespace bouton
