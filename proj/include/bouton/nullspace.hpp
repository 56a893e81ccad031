#pragma once
// Numeric re-derivation of conserved forms.
//
// For a degree k the solver spans an ansatz space {b_j(u,v,w,p) dXI} over all
// degree-k index tuples XI and a fixed scalar basis b_j, assembles sampled
// linear conditions L_g(form) = 0 for every catalog verification generator,
// and extracts the nullspace:
//
//   symbolic Lie-derivative templates  ->  sampled rows  ->  Gram matrix
//   -> dsyevd prefilter -> reduced direct SVD (dgesdd) -> RREF
//   -> rationalization -> exact re-verification.
//
// Rows that vanish structurally (e.g. everything produced by the time
// translation) are dropped before sampling.  The Gram accumulation order is
// fixed independently of the thread count, so results are bit-identical for
// any --threads value.  An empty nullspace comes with a certificate: the
// ratio of the smallest observed singular value to the retention threshold.
//
// The same module also hosts the exact catalog comparison (least-squares fit
// of a catalog form onto the verified span, with per-slot outlier masking)
// and the scan for joint scaling invariants used as similarity arguments.

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bouton/conserved.hpp"
#include "bouton/evaluate.hpp"
#include "bouton/weights.hpp"

extern "C" void openblas_set_num_threads(int);

namespace bouton {

struct solver_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- ansatz basis ------------------------------------------------------------
//
// Scalar coefficient functions u^a v^b w^c p^e s^f with s = |(u,v,w)| and
// f = -(a+b+c+2e), so each element is weight-neutral under both scalings.
// The velocity exponents satisfy a+b+c <= 2 with the w-exponent capped at 1:
// together with u^2+v^2+w^2 = s^2 that makes the family linearly independent.

struct AnsatzBasis {
  struct Exponents {
    int a = 0, b = 0, c = 0, e = 0;  // u, v, w, p; s-exponent is implied
    int f() const { return -(a + b + c + 2 * e); }
  };

  std::vector<Expr> elements;
  std::vector<std::string> labels;
  std::vector<Exponents> exponents;

  std::size_t size() const { return elements.size(); }

  std::optional<std::size_t> index_of(int a, int b, int c, int e) const {
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      const Exponents& x = exponents[j];
      if (x.a == a && x.b == b && x.c == c && x.e == e) return j;
    }
    return std::nullopt;
  }
};

namespace detail {

inline Expr speed_squared() {
  return symbol(SYM_U) * symbol(SYM_U) + symbol(SYM_V) * symbol(SYM_V) +
         symbol(SYM_W) * symbol(SYM_W);
}

inline Expr basis_element(const AnsatzBasis::Exponents& x) {
  Expr m = expr_one();
  if (x.a != 0) m = m * pow_e(symbol(SYM_U), Rational(x.a));
  if (x.b != 0) m = m * pow_e(symbol(SYM_V), Rational(x.b));
  if (x.c != 0) m = m * pow_e(symbol(SYM_W), Rational(x.c));
  if (x.e != 0) m = m * pow_e(symbol(SYM_P), Rational(x.e));
  if (x.f() != 0) m = m * pow_e(speed_squared(), Rational(x.f(), 2));
  return m;
}

inline std::string basis_label(const AnsatzBasis::Exponents& x) {
  // Velocity part over the matching power of s; the p-carrying half is
  // written as E * (velocity part) with E = p/s^2.
  std::string head = x.e ? "E" : "";
  std::string vel;
  auto append = [&vel](const char* sym, int n) {
    for (int i = 0; i < n; ++i) {
      if (!vel.empty()) vel += "*";
      vel += sym;
    }
  };
  append("u", x.a);
  append("v", x.b);
  append("w", x.c);
  int d = x.a + x.b + x.c;
  if (!vel.empty()) {
    if (d == 1) vel += "/s";
    else vel += "/s^" + std::to_string(d);
  }
  if (head.empty()) return vel.empty() ? "1" : vel;
  return vel.empty() ? head : head + "*" + vel;
}

}  // namespace detail

inline const AnsatzBasis& default_ansatz_basis() {
  static const AnsatzBasis basis = [] {
    AnsatzBasis b;
    const std::array<std::array<int, 3>, 9> vel = {{{0, 0, 0},
                                                    {1, 0, 0},
                                                    {0, 1, 0},
                                                    {0, 0, 1},
                                                    {2, 0, 0},
                                                    {1, 1, 0},
                                                    {1, 0, 1},
                                                    {0, 2, 0},
                                                    {0, 1, 1}}};
    for (int e : {0, 1})
      for (const auto& v : vel) {
        AnsatzBasis::Exponents x{v[0], v[1], v[2], e};
        b.exponents.push_back(x);
        b.elements.push_back(detail::basis_element(x));
        b.labels.push_back(detail::basis_label(x));
      }
    return b;
  }();
  return basis;
}

// --- solver ------------------------------------------------------------------

struct SolveOptions {
  std::uint64_t seed = 12345;
  int threads = 1;
  int samples = 0;              // 0 = automatic from the problem size
  double candidate_tol = 1e-4;  // Gram prefilter, relative to sigma_max
  double svd_tol = 1e-8;        // nullspace retention, relative to sigma_max
  ZeroOptions verify;           // exact verification of rationalized vectors
};

struct NullspaceForm {
  KForm form{0};
  std::vector<Rational> coords;  // over tuples x basis, canonical column order
  double sigma = 0.0;            // singular value of this direction
  bool rationalized = false;
  bool verified = false;   // exact verification along all five generators
  bool structural = false; // every verification residual cancelled exactly
};

struct NullspaceResult {
  int k = 0;
  std::size_t unknowns = 0;
  std::size_t rows = 0;
  std::size_t samples = 0;
  std::vector<Mask> tuples;  // canonical tuple order used by coords
  std::vector<double> smallest_sigmas;  // ascending
  double sigma_max = 0.0;
  double gap_ratio = 0.0;  // smallest rejected sigma / (svd_tol * sigma_max)
  std::vector<NullspaceForm> forms;

  std::size_t dim() const { return forms.size(); }
};

namespace detail {

template <class Fn>
inline void parallel_blocks(std::size_t n, int threads, Fn&& fn) {
  // fn(begin, end) on disjoint ranges; content never depends on the split.
  threads = std::max(1, std::min<int>(threads, 16));
  if (threads == 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

inline Rational approx_rational(double x) {
  if (std::abs(x) < 1e-10) return Rational(0);
  if (auto r = rationalize(x, 1000000, 1e-6)) return *r;
  if (auto r = rationalize(x, 1000000000, 1e-3)) return *r;
  return Rational(std::llround(x * 1e6), 1000000);
}

}  // namespace detail

inline NullspaceResult solve_forms(int k, const SolveOptions& opts = {},
                                   const AnsatzBasis& basis = default_ansatz_basis()) {
  if (k < 0 || k > 8) throw solver_error("degree must be between 0 and 8");
  if (basis.size() == 0) throw solver_error("empty ansatz basis");
  openblas_set_num_threads(1);  // keep dense kernels deterministic

  NullspaceResult res;
  res.k = k;

  // Canonical tuple and column order.
  for (int m = 0; m < 256; ++m)
    if (mask_degree(static_cast<Mask>(m)) == k) res.tuples.push_back(static_cast<Mask>(m));
  std::sort(res.tuples.begin(), res.tuples.end(), MaskLess{});
  const std::size_t B = basis.size(), T = res.tuples.size(), U = T * B;
  res.unknowns = U;

  // Symbolic templates: for generator g and target tuple, the row entries
  // (column, coefficient expression).  Structurally vanishing coefficients
  // are dropped; generators contributing nothing (the time translation)
  // disappear entirely.
  struct Entry {
    std::uint32_t col;
    Expr coeff;
  };
  struct Target {
    std::vector<Entry> entries;
  };
  std::vector<VectorField> gens = verification_generators();
  std::vector<Target> targets;  // flattened (generator-major, mask order)
  {
    ZeroOptions structural;
    structural.structural_only = true;
    for (const VectorField& g : gens) {
      std::map<Mask, std::vector<Entry>, MaskLess> by_mask;
      for (std::size_t ti = 0; ti < T; ++ti)
        for (std::size_t j = 0; j < B; ++j) {
          KForm single(k);
          single.add_term(res.tuples[ti], basis.elements[j]);
          KForm lie = lie_derivative(g, single);
          for (const auto& [mask, coeff] : lie.terms()) {
            if (is_zero(coeff, structural).verdict == ZeroResult::Verdict::ZeroStructural)
              continue;
            by_mask[mask].push_back({static_cast<std::uint32_t>(ti * B + j), coeff});
          }
        }
      for (auto& [mask, entries] : by_mask) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.col < b.col; });
        targets.push_back({std::move(entries)});
      }
    }
  }
  const std::size_t R = targets.size();
  if (R == 0) throw solver_error("no constraints generated for degree " + std::to_string(k));

  const std::size_t samples =
      opts.samples > 0
          ? static_cast<std::size_t>(opts.samples)
          : std::max<std::size_t>({(4 * U + R - 1) / R, 3 * B, 24});
  res.samples = samples;
  res.rows = samples * R;

  // Sample points, drawn up front in a fixed order.
  std::vector<std::array<double, 4>> points(samples);  // u, v, w, p
  {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> mag(0.5, 2.0), unit(0.0, 1.0);
    for (auto& pt : points) {
      for (int tries = 0; tries < 100; ++tries) {
        for (int i = 0; i < 3; ++i)
          pt[i] = (unit(rng) < 0.5 ? -1.0 : 1.0) * mag(rng);
        pt[3] = mag(rng);
        if (std::sqrt(pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]) >= 0.75) break;
      }
    }
  }

  // Evaluate rows.
  struct RowEntry {
    std::uint32_t col;
    double val;
  };
  std::vector<std::vector<RowEntry>> rows(res.rows);
  detail::parallel_blocks(samples, opts.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      EvalEnv env;
      env.values = {{SYM_U, points[s][0]},
                    {SYM_V, points[s][1]},
                    {SYM_W, points[s][2]},
                    {SYM_P, points[s][3]}};
      for (std::size_t t = 0; t < R; ++t) {
        std::vector<RowEntry>& row = rows[s * R + t];
        row.reserve(targets[t].entries.size());
        for (const Entry& e : targets[t].entries) {
          double v = eval(e.coeff, env).value;
          if (v != 0.0) row.push_back({e.col, v});
        }
      }
    }
  });

  // Gram matrix, upper triangle.  Each (i,j) cell is owned by the thread
  // owning column j and accumulated in global row order, so the result is
  // bit-identical for every thread count.
  std::vector<double> gram(U * U, 0.0);
  {
    int nthreads = std::max(1, std::min(opts.threads, 16));
    auto owner = [nthreads](std::uint32_t col) {
      return static_cast<int>((col / 32) % static_cast<unsigned>(nthreads));
    };
    auto work = [&](int tid) {
      for (const auto& row : rows)
        for (std::size_t jj = 0; jj < row.size(); ++jj) {
          if (owner(row[jj].col) != tid) continue;
          double vj = row[jj].val;
          double* gcol = gram.data() + static_cast<std::size_t>(row[jj].col);
          for (std::size_t ii = 0; ii <= jj; ++ii)
            gcol[static_cast<std::size_t>(row[ii].col) * U] += row[ii].val * vj;
        }
    };
    if (nthreads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
  }

  // Eigen prefilter.
  std::vector<double> evecs = gram;
  std::vector<double> eig(U, 0.0);
  {
    int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', static_cast<int>(U),
                              evecs.data(), static_cast<int>(U), eig.data());
    if (info != 0) throw solver_error("dsyevd failed with info " + std::to_string(info));
  }
  std::vector<double> sigma(U);
  for (std::size_t i = 0; i < U; ++i) sigma[i] = std::sqrt(std::max(eig[i], 0.0));
  res.sigma_max = sigma.back();
  if (!(res.sigma_max > 0.0)) throw solver_error("degenerate sample matrix");
  const double threshold = opts.svd_tol * res.sigma_max;

  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < U; ++i)
    if (sigma[i] < opts.candidate_tol * res.sigma_max) cand.push_back(i);
  const std::size_t nc = cand.size();

  auto finish_sigmas = [&](const std::vector<double>& ascending) {
    std::size_t keep = std::min(ascending.size(), res.dim() + 8);
    res.smallest_sigmas.assign(ascending.begin(), ascending.begin() + keep);
  };

  if (nc == 0) {
    res.gap_ratio = sigma.front() / threshold;
    finish_sigmas(sigma);
    return res;
  }

  // Direct SVD of the sampled matrix restricted to the candidate subspace.
  const std::size_t m = res.rows;
  std::vector<double> A(m * nc, 0.0);
  detail::parallel_blocks(m, opts.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r)
      for (const RowEntry& e : rows[r]) {
        const double* vrow = evecs.data() + static_cast<std::size_t>(e.col) * U;
        double* arow = A.data() + r * nc;
        for (std::size_t c = 0; c < nc; ++c) arow[c] += e.val * vrow[cand[c]];
      }
  });
  std::vector<double> svals(nc, 0.0), umat(m * nc, 0.0), vt(nc * nc, 0.0);
  {
    int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<int>(m),
                              static_cast<int>(nc), A.data(), static_cast<int>(nc),
                              svals.data(), umat.data(), static_cast<int>(nc),
                              vt.data(), static_cast<int>(nc));
    if (info != 0) throw solver_error("dgesdd failed with info " + std::to_string(info));
  }
  std::size_t d = 0;
  while (d < nc && svals[nc - 1 - d] < threshold) ++d;

  if (d < nc) {
    res.gap_ratio = svals[nc - 1 - d] / threshold;
  } else {
    // Every candidate was retained; the certificate barrier is the smallest
    // singular value outside the candidate subspace.
    res.gap_ratio = sigma[nc] / threshold;
  }
  {
    std::vector<double> asc(svals.rbegin(), svals.rend());
    for (std::size_t i = nc; i < U; ++i) asc.push_back(sigma[i]);
    std::size_t keep = std::min(asc.size(), d + 8);
    res.smallest_sigmas.assign(asc.begin(), asc.begin() + keep);
  }
  if (d == 0) return res;

  // Nullspace vectors in the original coordinates.
  std::vector<std::vector<double>> N(d, std::vector<double>(U, 0.0));
  std::vector<double> nsigma(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    const double* vrow = vt.data() + (nc - 1 - r) * nc;
    nsigma[r] = svals[nc - 1 - r];
    for (std::size_t col = 0; col < U; ++col) {
      const double* erow = evecs.data() + col * U;
      double acc = 0.0;
      for (std::size_t c = 0; c < nc; ++c) acc += erow[cand[c]] * vrow[c];
      N[r][col] = acc;
    }
  }

  // Canonical RREF basis of the span: pivots in column order, by magnitude.
  {
    std::size_t prow = 0;
    for (std::size_t col = 0; col < U && prow < d; ++col) {
      std::size_t best = prow;
      for (std::size_t r = prow + 1; r < d; ++r)
        if (std::abs(N[r][col]) > std::abs(N[best][col])) best = r;
      if (std::abs(N[best][col]) < 1e-6) continue;
      std::swap(N[prow], N[best]);
      double inv = 1.0 / N[prow][col];
      for (std::size_t j = 0; j < U; ++j) N[prow][j] *= inv;
      for (std::size_t r = 0; r < d; ++r) {
        if (r == prow) continue;
        double f = N[r][col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < U; ++j) N[r][j] -= f * N[prow][j];
      }
      ++prow;
    }
  }

  std::sort(nsigma.begin(), nsigma.end());
  for (std::size_t r = 0; r < d; ++r) {
    NullspaceForm nf;
    nf.sigma = nsigma[std::min(r, nsigma.size() - 1)];
    nf.coords.resize(U, Rational(0));
    nf.rationalized = true;
    for (std::size_t colz = 0; colz < U; ++colz) {
      double x = N[r][colz];
      if (std::abs(x) < 1e-10) continue;
      if (auto q = rationalize(x, 1000000, 1e-6)) {
        nf.coords[colz] = *q;
      } else {
        nf.coords[colz] = detail::approx_rational(x);
        nf.rationalized = false;
      }
    }
    KForm f(k);
    for (std::size_t ti = 0; ti < T; ++ti)
      for (std::size_t j = 0; j < B; ++j) {
        const Rational& q = nf.coords[ti * B + j];
        if (q.is_zero()) continue;
        f.add_term(res.tuples[ti], num(q) * basis.elements[j]);
      }
    nf.form = std::move(f);
    if (nf.rationalized) {
      ConservedReport rep = verify_conserved(nf.form, opts.verify);
      nf.verified = rep.all_zero;
      nf.structural = rep.structural;
    }
    res.forms.push_back(std::move(nf));
  }

  // Refresh the reported sigma list now that the dimension is known.
  {
    std::vector<double> asc(svals.rbegin(), svals.rend());
    for (std::size_t i = nc; i < U; ++i) asc.push_back(sigma[i]);
    finish_sigmas(asc);
  }
  return res;
}

// --- catalog comparison ------------------------------------------------------
//
// Expresses a catalog form exactly in the ansatz basis (expanding powers of
// the speed and rewriting w^2 = s^2 - u^2 - v^2), then fits it onto the span
// of verified solver forms by least squares.  Slots whose coefficient cannot
// be expressed in the basis are flagged as inexpressible; slots where the fit
// disagrees are flagged as outliers and masked one at a time before refitting.
// With exact inputs the masked distance is computed in rational arithmetic.

enum class SlotStatus { Match, Outlier, Inexpressible };

inline const char* to_cstring(SlotStatus s) {
  switch (s) {
    case SlotStatus::Match: return "match";
    case SlotStatus::Outlier: return "outlier";
    case SlotStatus::Inexpressible: return "inexpressible";
  }
  return "?";
}

struct SlotReport {
  Mask mask = 0;
  SlotStatus status = SlotStatus::Match;
  double distance = 0.0;  // final-fit residual; -1 when not defined
  std::string detail;
};

struct CatalogComparison {
  int k = 0;
  CatalogVariant variant = CatalogVariant::Corrected;
  std::size_t span_dim = 0;   // number of verified solver forms used
  std::size_t clean = 0;      // slots with status Match
  std::vector<SlotReport> slots;
  std::vector<Mask> flagged;
  double masked_distance = 0.0;
  bool masked_distance_exact = false;
  bool within_span = false;  // no flags at all
  bool arbitrated = false;   // fit converged within the flag budget
};

namespace detail {

struct UVWPMono {
  Rational c;
  int a = 0, b = 0, cw = 0, e = 0, f = 0;  // u^a v^b w^cw p^e s^f
};

inline bool accumulate_factor(const Expr& factor, Rational& coef, UVWPMono& m) {
  static const std::string s2_text = to_string(speed_squared());
  switch (factor->kind) {
    case Kind::Number:
      coef = coef * factor->value;
      return true;
    case Kind::Symbol:
      if (factor->sym == SYM_U) { m.a += 1; return true; }
      if (factor->sym == SYM_V) { m.b += 1; return true; }
      if (factor->sym == SYM_W) { m.cw += 1; return true; }
      if (factor->sym == SYM_P) { m.e += 1; return true; }
      return false;
    case Kind::Power: {
      const Expr& base = factor->children[0];
      const Rational& q = factor->expo;
      if (base->kind == Kind::Symbol && q.den() == 1) {
        int n = static_cast<int>(q.num());
        if (base->sym == SYM_U) { m.a += n; return true; }
        if (base->sym == SYM_V) { m.b += n; return true; }
        if (base->sym == SYM_W) { m.cw += n; return true; }
        if (base->sym == SYM_P) { m.e += n; return true; }
        return false;
      }
      Rational twice = q * Rational(2);
      if (twice.den() == 1 && to_string(base) == s2_text) {
        m.f += static_cast<int>(twice.num());  // s-units: S^q = s^(2q)
        return true;
      }
      return false;
    }
    default:
      return false;
  }
}

// Exact decomposition of an expanded coefficient into u/v/w/p/s monomials.
inline std::optional<std::vector<UVWPMono>> decompose_uvwps(const Expr& e) {
  std::optional<Expr> expanded = expand_expr(e);
  if (!expanded) return std::nullopt;
  Expr x = *expanded;
  std::vector<Expr> terms;
  if (x->kind == Kind::Sum) terms = x->children;
  else terms = {x};

  std::vector<UVWPMono> out;
  for (const Expr& term : terms) {
    UVWPMono m;
    Rational coef(1);
    bool ok = true;
    if (term->kind == Kind::Product) {
      for (const Expr& f : term->children)
        if (!accumulate_factor(f, coef, m)) { ok = false; break; }
    } else {
      ok = accumulate_factor(term, coef, m);
    }
    if (!ok) return std::nullopt;
    if (coef.is_zero()) continue;
    m.c = coef;
    out.push_back(m);
  }
  return out;
}

// Rewrites w^2 = s^2 - u^2 - v^2 until every monomial has w-exponent 0 or 1.
inline void reduce_w_squared(std::vector<UVWPMono>& monos) {
  std::vector<UVWPMono> work = std::move(monos);
  std::vector<UVWPMono> done;
  while (!work.empty()) {
    UVWPMono m = work.back();
    work.pop_back();
    if (m.cw >= 2) {
      UVWPMono t1 = m, t2 = m, t3 = m;
      t1.cw -= 2; t1.f += 2;
      t2.cw -= 2; t2.a += 2; t2.c = Rational(0) - t2.c;
      t3.cw -= 2; t3.b += 2; t3.c = Rational(0) - t3.c;
      work.push_back(t1);
      work.push_back(t2);
      work.push_back(t3);
    } else {
      done.push_back(m);
    }
  }
  // Merge identical exponent tuples.
  std::sort(done.begin(), done.end(), [](const UVWPMono& l, const UVWPMono& r) {
    return std::array<int, 5>{l.a, l.b, l.cw, l.e, l.f} <
           std::array<int, 5>{r.a, r.b, r.cw, r.e, r.f};
  });
  monos.clear();
  for (const UVWPMono& m : done) {
    if (!monos.empty()) {
      UVWPMono& last = monos.back();
      if (last.a == m.a && last.b == m.b && last.cw == m.cw && last.e == m.e &&
          last.f == m.f) {
        last.c = last.c + m.c;
        continue;
      }
    }
    monos.push_back(m);
  }
  monos.erase(std::remove_if(monos.begin(), monos.end(),
                             [](const UVWPMono& m) { return m.c.is_zero(); }),
              monos.end());
}

inline std::string mono_text(const UVWPMono& m) {
  std::string s = m.c.str();
  auto app = [&s](const char* name, int n) {
    if (n == 0) return;
    s += "*";
    s += name;
    if (n != 1) s += "^" + std::to_string(n);
  };
  app("u", m.a);
  app("v", m.b);
  app("w", m.cw);
  app("p", m.e);
  app("s", m.f);
  return s;
}

// Exact basis coordinates of a coefficient, or the offending monomial text.
inline std::pair<std::optional<std::vector<Rational>>, std::string>
vectorize_coefficient(const Expr& coeff, const AnsatzBasis& basis) {
  auto monos = decompose_uvwps(coeff);
  if (!monos) return {std::nullopt, "non-monomial structure"};
  reduce_w_squared(*monos);
  std::vector<Rational> vec(basis.size(), Rational(0));
  for (const UVWPMono& m : *monos) {
    auto j = basis.index_of(m.a, m.b, m.cw, m.e);
    if (!j || m.f != basis.exponents[*j].f())
      return {std::nullopt, mono_text(m)};
    vec[*j] = vec[*j] + m.c;
  }
  return {vec, ""};
}

}  // namespace detail

inline CatalogComparison compare_with_catalog(const NullspaceResult& ns,
                                              CatalogVariant variant,
                                              double slot_tol = 1e-4,
                                              const AnsatzBasis& basis = default_ansatz_basis()) {
  CatalogComparison cmp;
  cmp.k = ns.k;
  cmp.variant = variant;
  const std::size_t B = basis.size();
  if (ns.unknowns != ns.tuples.size() * B)
    throw solver_error("solver result does not match the ansatz basis");

  std::map<Mask, std::size_t, MaskLess> tuple_index;
  for (std::size_t ti = 0; ti < ns.tuples.size(); ++ti)
    tuple_index[ns.tuples[ti]] = ti;

  // Exact catalog slot vectors; rows sharing a tuple accumulate.
  std::map<Mask, std::vector<Rational>, MaskLess> target;
  std::map<Mask, std::string, MaskLess> inexpressible;
  for (const CatalogTerm& term : catalog_terms(ns.k, variant)) {
    if (!tuple_index.count(term.mask))
      throw solver_error("catalog tuple missing from the solver tuple set");
    auto [vec, bad] =
        detail::vectorize_coefficient(detail::catalog_coefficient(term.coeff), basis);
    if (!vec) {
      inexpressible.emplace(term.mask, bad);
      continue;
    }
    auto it = target.emplace(term.mask, std::vector<Rational>(B, Rational(0))).first;
    for (std::size_t j = 0; j < B; ++j) it->second[j] = it->second[j] + (*vec)[j];
  }

  // Verified span.
  std::vector<const NullspaceForm*> span;
  for (const NullspaceForm& f : ns.forms)
    if (f.verified) span.push_back(&f);
  cmp.span_dim = span.size();

  // Comparison domain: catalog slots plus slots the span can populate.
  std::map<Mask, bool, MaskLess> domain;  // mask -> in fit (not pre-masked)
  for (const auto& [mask, vec] : target) domain[mask] = true;
  for (const auto& [mask, why] : inexpressible) domain[mask] = false;
  for (const NullspaceForm* f : span)
    for (std::size_t ti = 0; ti < ns.tuples.size(); ++ti)
      for (std::size_t j = 0; j < B; ++j)
        if (!f->coords[ti * B + j].is_zero()) {
          domain.emplace(ns.tuples[ti], true);
          break;
        }

  std::vector<Mask> slot_masks;
  for (const auto& [mask, open] : domain) slot_masks.push_back(mask);
  const std::size_t S = slot_masks.size(), d = span.size();

  if (d == 0 || S == 0) {
    for (Mask mask : slot_masks) {
      SlotReport sr{mask, SlotStatus::Outlier, -1.0, "no verified span"};
      if (inexpressible.count(mask)) {
        sr.status = SlotStatus::Inexpressible;
        sr.detail = inexpressible[mask];
      }
      cmp.flagged.push_back(mask);
      cmp.slots.push_back(std::move(sr));
    }
    return cmp;
  }

  // Double-precision copies for the fit.
  auto slot_block = [&](const std::vector<Rational>& coords, Mask mask,
                        std::vector<double>& out) {
    std::size_t ti = tuple_index[mask];
    for (std::size_t j = 0; j < B; ++j)
      out.push_back(coords[ti * B + j].to_double());
  };
  std::vector<std::vector<double>> nmat(d);  // span columns over slots*B
  for (std::size_t r = 0; r < d; ++r)
    for (Mask mask : slot_masks) slot_block(span[r]->coords, mask, nmat[r]);
  std::vector<double> y;
  double scale = 0.0;
  for (Mask mask : slot_masks) {
    auto it = target.find(mask);
    for (std::size_t j = 0; j < B; ++j) {
      double v = it == target.end() ? 0.0 : it->second[j].to_double();
      y.push_back(v);
      scale = std::max(scale, std::abs(v));
    }
  }
  if (scale == 0.0) scale = 1.0;

  std::map<Mask, std::string, MaskLess> outlier_notes;
  std::vector<double> alpha(d, 0.0);
  std::vector<double> slot_resid(S, 0.0);
  bool converged = false;
  for (int iter = 0; iter <= 8; ++iter) {
    // Least squares over unmasked slots via normal equations.
    std::vector<double> G(d * d, 0.0), rhs(d, 0.0);
    for (std::size_t si = 0; si < S; ++si) {
      if (!domain[slot_masks[si]]) continue;
      for (std::size_t j = 0; j < B; ++j) {
        std::size_t idx = si * B + j;
        for (std::size_t r = 0; r < d; ++r) {
          rhs[r] += nmat[r][idx] * y[idx];
          for (std::size_t c = r; c < d; ++c)
            G[r * d + c] += nmat[r][idx] * nmat[c][idx];
        }
      }
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < r; ++c) G[r * d + c] = G[c * d + r];
    // Gaussian elimination with partial pivoting; singular fit -> alpha 0.
    {
      std::vector<double> M = G, b = rhs;
      std::vector<std::size_t> perm(d);
      for (std::size_t i = 0; i < d; ++i) perm[i] = i;
      bool ok = true;
      for (std::size_t col = 0; col < d; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < d; ++r)
          if (std::abs(M[r * d + col]) > std::abs(M[best * d + col])) best = r;
        if (std::abs(M[best * d + col]) < 1e-12) { ok = false; break; }
        for (std::size_t j = 0; j < d; ++j) std::swap(M[col * d + j], M[best * d + j]);
        std::swap(b[col], b[best]);
        for (std::size_t r = col + 1; r < d; ++r) {
          double f = M[r * d + col] / M[col * d + col];
          for (std::size_t j = col; j < d; ++j) M[r * d + j] -= f * M[col * d + j];
          b[r] -= f * b[col];
        }
      }
      if (ok) {
        for (std::size_t col = d; col-- > 0;) {
          double acc = b[col];
          for (std::size_t j = col + 1; j < d; ++j) acc -= M[col * d + j] * alpha[j];
          alpha[col] = acc / M[col * d + col];
        }
      } else {
        std::fill(alpha.begin(), alpha.end(), 0.0);
      }
    }
    // Residuals per slot.
    for (std::size_t si = 0; si < S; ++si) {
      double worst = 0.0;
      for (std::size_t j = 0; j < B; ++j) {
        std::size_t idx = si * B + j;
        double r = -y[idx];
        for (std::size_t c = 0; c < d; ++c) r += alpha[c] * nmat[c][idx];
        worst = std::max(worst, std::abs(r));
      }
      slot_resid[si] = worst;
    }
    std::size_t worst_slot = S;
    double worst = slot_tol * scale;
    for (std::size_t si = 0; si < S; ++si)
      if (domain[slot_masks[si]] && slot_resid[si] > worst) {
        worst = slot_resid[si];
        worst_slot = si;
      }
    if (worst_slot == S) {
      converged = true;
      break;
    }
    domain[slot_masks[worst_slot]] = false;
    outlier_notes[slot_masks[worst_slot]] = "fit disagrees with the verified span";
  }

  // Final reports.
  for (std::size_t si = 0; si < S; ++si) {
    Mask mask = slot_masks[si];
    SlotReport sr;
    sr.mask = mask;
    if (inexpressible.count(mask)) {
      sr.status = SlotStatus::Inexpressible;
      sr.distance = -1.0;
      sr.detail = "outside the ansatz basis: " + inexpressible[mask];
    } else if (outlier_notes.count(mask)) {
      sr.status = SlotStatus::Outlier;
      sr.distance = slot_resid[si] / scale;
      sr.detail = outlier_notes[mask];
    } else {
      sr.status = SlotStatus::Match;
      sr.distance = slot_resid[si] / scale;
      ++cmp.clean;
    }
    if (sr.status != SlotStatus::Match) cmp.flagged.push_back(mask);
    cmp.slots.push_back(std::move(sr));
  }

  // Masked distance, exactly when the fit coefficients rationalize.
  {
    bool exact_ok = true;
    std::vector<Rational> qalpha(d, Rational(0));
    for (std::size_t c = 0; c < d; ++c) {
      if (std::abs(alpha[c]) < 1e-10) continue;
      if (auto q = rationalize(alpha[c], 1000000, 1e-6)) qalpha[c] = *q;
      else { exact_ok = false; break; }
    }
    if (exact_ok) {
      bool all_zero = true;
      for (std::size_t si = 0; si < S && all_zero; ++si) {
        Mask mask = slot_masks[si];
        if (!domain[mask]) continue;
        std::size_t ti = tuple_index[mask];
        auto it = target.find(mask);
        for (std::size_t j = 0; j < B; ++j) {
          Rational r = it == target.end() ? Rational(0) : it->second[j];
          r = Rational(0) - r;
          for (std::size_t c = 0; c < d; ++c)
            r = r + qalpha[c] * span[c]->coords[ti * B + j];
          if (!r.is_zero()) { all_zero = false; break; }
        }
      }
      if (all_zero) {
        cmp.masked_distance = 0.0;
        cmp.masked_distance_exact = true;
      } else {
        exact_ok = false;
      }
    }
    if (!exact_ok) {
      double worst = 0.0;
      for (std::size_t si = 0; si < S; ++si)
        if (domain[slot_masks[si]]) worst = std::max(worst, slot_resid[si]);
      cmp.masked_distance = worst / scale;
      cmp.masked_distance_exact = false;
    }
  }

  std::size_t cap = std::max<std::size_t>(6, S / 4);
  cmp.within_span = cmp.flagged.empty();
  cmp.arbitrated = converged && cmp.flagged.size() <= cap;
  return cmp;
}

// --- joint scaling invariants ------------------------------------------------
//
// Scans monomials x^a y^b z^c t^d u^e1 v^e2 w^e3 p^e4 nu^e5 with bounded
// exponents for joint invariance under both scaling generators.  Because the
// generators act diagonally on monomials (the Lie derivative is a rational
// multiple given by the realized weight), invariance is an exact integer
// condition; the surviving exponent vectors form a lattice, reduced to a
// generating set greedily in order of increasing complexity.

struct ScalingInvariants {
  std::size_t candidates = 0;                 // monomials scanned
  std::vector<std::array<int, 9>> exponents;  // x y z t u v w p nu
  std::vector<Expr> invariants;
  std::vector<std::string> labels;
};

namespace detail {

// Is v in the integer span of the (independent) generators?
inline bool in_integer_span(const std::array<int, 9>& v,
                            const std::vector<std::array<int, 9>>& gens) {
  if (gens.empty()) return false;
  const std::size_t n = 9, g = gens.size();
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(g + 1, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < g; ++c) M[i][c] = Rational(gens[c][i]);
    M[i][g] = Rational(v[i]);
  }
  std::vector<std::size_t> pivot_row;
  std::size_t row = 0;
  for (std::size_t col = 0; col < g && row < n; ++col) {
    std::size_t best = row;
    while (best < n && M[best][col].is_zero()) ++best;
    if (best == n) return false;  // generators assumed independent
    std::swap(M[row], M[best]);
    Rational inv = Rational(1) / M[row][col];
    for (std::size_t j = col; j <= g; ++j) M[row][j] = M[row][j] * inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row || M[r][col].is_zero()) continue;
      Rational f = M[r][col];
      for (std::size_t j = col; j <= g; ++j)
        M[r][j] = M[r][j] - f * M[row][j];
    }
    pivot_row.push_back(row);
    ++row;
  }
  // Consistency: rows below the pivots must have zero right-hand side.
  for (std::size_t r = row; r < n; ++r)
    if (!M[r][g].is_zero()) return false;
  // Integrality of the unique solution.
  for (std::size_t c = 0; c < g; ++c)
    if (M[pivot_row[c]][g].den() != 1) return false;
  return true;
}

}  // namespace detail

inline ScalingInvariants invariant_arguments() {
  static const std::array<SymbolId, 9> syms = {SYM_X, SYM_Y, SYM_Z, SYM_T, SYM_U,
                                              SYM_V, SYM_W, SYM_P, SYM_NU};
  ScalingInvariants out;
  std::vector<std::array<int, 9>> invariant_vectors;

  std::array<int, 9> e{};
  for (e[0] = -2; e[0] <= 2; ++e[0])
    for (e[1] = -2; e[1] <= 2; ++e[1])
      for (e[2] = -2; e[2] <= 2; ++e[2])
        for (e[3] = -2; e[3] <= 2; ++e[3])
          for (e[4] = 0; e[4] <= 1; ++e[4])
            for (e[5] = 0; e[5] <= 1; ++e[5])
              for (e[6] = 0; e[6] <= 1; ++e[6])
                for (e[7] = 0; e[7] <= 1; ++e[7])
                  for (e[8] = 0; e[8] <= 1; ++e[8]) {
                    int complexity = 0;
                    for (int c : e) complexity += std::abs(c);
                    if (complexity == 0 || complexity > 5) continue;
                    ++out.candidates;
                    // Diagonal action: check the realized weight exponents.
                    Weight wsum{};
                    for (int i = 0; i < 9; ++i)
                      wsum = wsum + symbol_weight(syms[i]) * Rational(e[i]);
                    if (!wsum.is_zero()) continue;
                    invariant_vectors.push_back(e);
                  }

  std::sort(invariant_vectors.begin(), invariant_vectors.end(),
            [](const std::array<int, 9>& l, const std::array<int, 9>& r) {
              int cl = 0, cr = 0;
              for (int v : l) cl += std::abs(v);
              for (int v : r) cr += std::abs(v);
              if (cl != cr) return cl < cr;
              return l < r;
            });

  for (const auto& v : invariant_vectors)
    if (!detail::in_integer_span(v, out.exponents)) out.exponents.push_back(v);

  for (const auto& v : out.exponents) {
    Expr m = expr_one();
    for (int i = 0; i < 9; ++i)
      if (v[i] != 0) m = m * pow_e(symbol(syms[i]), Rational(v[i]));
    out.labels.push_back(to_string(m));
    out.invariants.push_back(std::move(m));
  }
  return out;
}

}  // namespace bouton
