#include "psdiag/diagonalizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace psdiag {

namespace {

double sgn(int j) { return j > 0 ? 1.0 : -1.0; }

HomogeneousSymbol checked_free_function(const HomogeneousSymbol& f, int k, const SampleGrid& grid) {
  if (!f.valid() || f.is_zero()) return HomogeneousSymbol::zero(1, 1, -k);
  if (f.rows() != 1 || f.cols() != 1) throw DimensionError("free function must be scalar");
  SymbolProgram prog({f});
  for_each_grid_point(prog, grid, [&](std::array<double, kDim>, double, const SymbolProgram::Workspace& ws) {
    const cplx v = prog.circle_value(0, ws)(0, 0);
    if (std::abs(v.imag()) > 1e-14 * std::max(1.0, std::abs(v))) throw PreconditionError("free function is not real");
  });
  return f.regraded(-k);
}

HomogeneousSymbol mixed_trace_derivative(const HomogeneousSymbol& v) {
  // sum_alpha d^2 v / dx^alpha dxi_alpha
  return v.dx(0).dxi(0) + v.dx(1).dxi(1);
}

// diag(a_c) as an m x m PolySymbol.
PolySymbol diagonal_matrix(const std::vector<PolySymbol>& a, int depth) {
  const int m = static_cast<int>(a.size());
  std::vector<HomogeneousSymbol> comps;
  const double order = a.front().order();
  for (int n = 0; n <= depth; ++n) {
    HomogeneousSymbol c = HomogeneousSymbol::zero(m, m, order - n);
    for (int p = 0; p < m; ++p) {
      CMatrix e = CMatrix::Zero(m, m);
      e(p, p) = 1.0;
      c = c + a[static_cast<std::size_t>(p)].component_or_zero(n) * HomogeneousSymbol::constant(e, 0.0);
    }
    comps.push_back(c);
  }
  return PolySymbol(order, std::move(comps));
}

PolySymbol hstack_poly(const std::vector<DiagonalizerColumn>& cols, int depth) {
  std::vector<HomogeneousSymbol> comps;
  for (int n = 0; n <= depth; ++n) {
    std::vector<HomogeneousSymbol> parts;
    for (const auto& c : cols) parts.push_back(c.B.component_or_zero(n));
    comps.push_back(hstack(parts));
  }
  return PolySymbol(0.0, std::move(comps));
}

}  // namespace

DiagonalizerColumn build_column(const ProjectionBasis& basis, int j, int depth, const std::vector<HomogeneousSymbol>& f,
                                const DiagonalizerOptions& opts) {
  const EigenFrame& frame = basis.frame;
  if (frame.mode == FrameMode::Numeric) throw PreconditionError("diagonalizer needs a frame with derivatives");
  if (depth > basis.depth) throw PreconditionError("projection basis is shallower than the requested depth");
  const int p = frame.pos(j);
  const HomogeneousSymbol& v = frame.v[static_cast<std::size_t>(p)];
  const HomogeneousSymbol& p0 = frame.P[static_cast<std::size_t>(p)];
  const PolySymbol& pj = basis.P[static_cast<std::size_t>(p)];

  DiagonalizerColumn col;
  col.j = j;
  std::vector<HomogeneousSymbol> comps{v};
  if (opts.initial == InitialColumn::SubprincipalFree && depth >= 1)
    comps.push_back(mixed_trace_derivative(v).scaled(cplx(0, -0.5)));

  for (int k = 1; k <= depth; ++k) {
    const HomogeneousSymbol fk =
        checked_free_function(static_cast<std::size_t>(k - 1) < f.size() ? f[static_cast<std::size_t>(k - 1)] : HomogeneousSymbol(), k, opts.grid);
    col.free_functions.push_back(fk);
    const PolySymbol b(0.0, comps);
    const HomogeneousSymbol r = compose_component(adjoint(b, k), b, k).scaled(-1.0);
    const HomogeneousSymbol R = b.component_or_zero(k) - compose_component(pj, b, k);
    const HomogeneousSymbol solv = p0 * R;
    const HomogeneousSymbol q = (r.scaled(0.5) + fk.scaled(cplx(0, 1))) * v - R;
    const HomogeneousSymbol norms_of[] = {r, R, solv};
    const auto norms = sup_norms(norms_of, opts.grid);
    col.log.push_back({k, norms[0], norms[1], norms[2]});
    if (norms[2] > opts.solvability_tolerance)
      throw SolvabilityError("solvability condition violated at order " + std::to_string(k) + " for j = " +
                             std::to_string(j));
    if (static_cast<int>(comps.size()) > k) {
      comps[static_cast<std::size_t>(k)] = comps[static_cast<std::size_t>(k)] + q;
    } else {
      comps.push_back(q);
    }
  }
  col.B = PolySymbol(0.0, comps).truncated(depth);
  return col;
}

HomogeneousSymbol subprincipal_formula(const ProjectionBasis& basis, int j, const HomogeneousSymbol& f) {
  const int p = basis.frame.pos(j);
  const HomogeneousSymbol& v = basis.frame.v[static_cast<std::size_t>(p)];
  const HomogeneousSymbol& p0 = basis.frame.P[static_cast<std::size_t>(p)];
  const HomogeneousSymbol psub = subprincipal(basis.P[static_cast<std::size_t>(p)]);
  const HomogeneousSymbol fr = (f.valid() ? f : HomogeneousSymbol::zero(1, 1, -1.0)).regraded(-1.0);
  const HomogeneousSymbol coef = psub.trace().scaled(0.25) + fr.scaled(cplx(0, 1));
  return coef * v + psub * v + poisson(p0, v).scaled(cplx(0, 0.5));
}

const PolySymbol& Diagonalization::a_of(int j) const {
  const auto it = std::find(column_index.begin(), column_index.end(), j);
  if (it == column_index.end()) throw DimensionError("no column for index " + std::to_string(j));
  return a[static_cast<std::size_t>(it - column_index.begin())];
}

const DiagonalizerColumn& Diagonalization::column_of(int j) const {
  const auto it = std::find(column_index.begin(), column_index.end(), j);
  if (it == column_index.end()) throw DimensionError("no column for index " + std::to_string(j));
  return columns[static_cast<std::size_t>(it - column_index.begin())];
}

double Diagonalization::ledger_max() const {
  double w = 0.0;
  for (const auto& e : ledger) w = std::max(w, e.sup);
  return w;
}

Diagonalization assemble(const ProjectionBasis& basis, std::vector<DiagonalizerColumn> columns, const SampleGrid& grid) {
  const EigenFrame& frame = basis.frame;
  const int m = frame.size();
  if (static_cast<int>(columns.size()) != m) throw PreconditionError("one column per index is required");
  // m+, ..., 1, -1, ..., -m-
  std::sort(columns.begin(), columns.end(), [](const DiagonalizerColumn& a, const DiagonalizerColumn& b) { return a.j > b.j; });
  for (int p = 0; p < m; ++p) frame.pos(columns[static_cast<std::size_t>(p)].j);
  for (int p = 1; p < m; ++p)
    if (columns[static_cast<std::size_t>(p)].j == columns[static_cast<std::size_t>(p - 1)].j)
      throw PreconditionError("duplicate column index");
  const int K = columns.front().B.depth();
  for (const auto& c : columns)
    if (c.B.depth() != K) throw PreconditionError("columns have different depths");

  Diagonalization d;
  d.depth = K;
  d.first_unchecked_order = -K - 1.0;
  for (const auto& c : columns) d.column_index.push_back(c.j);
  d.columns = std::move(columns);
  d.B = hstack_poly(d.columns, K);
  d.B_star = adjoint(d.B, K);
  const PolySymbol& A = basis.A;
  const PolySymbol AB = compose(A, d.B, K);
  const PolySymbol BAB = compose(d.B_star, AB, K);
  for (int p = 0; p < m; ++p) {
    std::vector<HomogeneousSymbol> comps;
    for (int n = 0; n <= K; ++n) comps.push_back(BAB[n].block(p, p, 1, 1));
    d.a.emplace_back(A.order(), std::move(comps));
  }
  d.A_tilde = diagonal_matrix(d.a, K);

  // Ledger.
  std::vector<HomogeneousSymbol> syms;
  std::vector<LedgerEntry> tags;
  auto push = [&](const std::string& name, const PolySymbol& s) {
    for (int n = 0; n <= K; ++n) {
      syms.push_back(s.component_or_zero(n));
      tags.push_back({name, n, s.order() - n, 0.0});
    }
  };
  push("B*B-Id", subtract(compose(d.B_star, d.B, K), PolySymbol::identity(m, K)));
  push("BB*-Id", subtract(compose(d.B, d.B_star, K), PolySymbol::identity(m, K)));
  {
    std::vector<HomogeneousSymbol> comps;
    for (int n = 0; n <= K; ++n) {
      HomogeneousSymbol off = BAB[n];
      for (int p = 0; p < m; ++p) {
        CMatrix e = CMatrix::Zero(m, m);
        e(p, p) = 1.0;
        off = off - BAB[n].block(p, p, 1, 1) * HomogeneousSymbol::constant(e, 0.0);
      }
      comps.push_back(off);
    }
    push("offdiag(B*AB)", PolySymbol(A.order(), comps));
  }
  for (const auto& c : d.columns) {
    const std::string tag = "[j=" + std::to_string(c.j) + "]";
    const PolySymbol& pj = basis.of(c.j);
    const PolySymbol bs = adjoint(c.B, K);
    push("Bj*Bj-Id" + tag, subtract(compose(bs, c.B, K), PolySymbol::identity(1, K)));
    push("PjBj-Bj" + tag, subtract(compose(pj, c.B, K), c.B));
    push("BjBj*-Pj" + tag, subtract(compose(c.B, bs, K), pj));
  }
  const auto norms = sup_norms(syms, grid);
  for (std::size_t i = 0; i < syms.size(); ++i) {
    tags[i].sup = norms[i];
    d.ledger.push_back(tags[i]);
  }
  return d;
}

Diagonalization diagonalize(const ProjectionBasis& basis, int depth, const DiagonalizerOptions& opts) {
  std::vector<DiagonalizerColumn> cols;
  for (int j : basis.frame.J) cols.push_back(build_column(basis, j, depth, {}, opts));
  return assemble(basis, std::move(cols), opts.grid);
}

RecoveryReport verify_recovery(const std::vector<DiagonalizerColumn>& columns, const ProjectionBasis& basis,
                               const SampleGrid& grid) {
  const int m = basis.frame.size();
  const int K = columns.front().B.depth();
  std::vector<HomogeneousSymbol> proj, part;
  PolySymbol sum = PolySymbol::zero(m, m, 0.0, K);
  for (const auto& c : columns) {
    const PolySymbol bb = compose(c.B, adjoint(c.B, K), K);
    const PolySymbol diff = subtract(bb, basis.of(c.j));
    for (int n = 0; n <= K; ++n) proj.push_back(diff.component_or_zero(n));
    sum = add(sum, bb);
  }
  const PolySymbol pdiff = subtract(sum, PolySymbol::identity(m, K));
  for (int n = 0; n <= K; ++n) part.push_back(pdiff.component_or_zero(n));
  RecoveryReport rep;
  for (double x : sup_norms(proj, grid)) rep.projection = std::max(rep.projection, x);
  for (double x : sup_norms(part, grid)) rep.partition = std::max(rep.partition, x);
  return rep;
}

PolySymbol build_auxiliary(const ProjectionBasis& basis, int j) {
  const int K = basis.depth;
  basis.frame.pos(j);
  auto sandwich = [&](int l) {
    const PolySymbol& pl = basis.of(l);
    return compose(adjoint(pl, K), compose(basis.A, pl, K), K);
  };
  PolySymbol out = sandwich(j);
  for (int l : basis.frame.J) {
    if (l == j) continue;
    out = add(out, scale(-sgn(j) * sgn(l), sandwich(l)));
  }
  return out;
}

double verify_conjugated_blocks(const Diagonalization& diag, const ProjectionBasis& basis,
                                const std::vector<PolySymbol>& auxiliary, const SampleGrid& grid) {
  const int K = diag.depth;
  const int m = static_cast<int>(diag.column_index.size());
  if (static_cast<int>(auxiliary.size()) != basis.frame.size()) throw DimensionError("one auxiliary operator per index");
  std::vector<HomogeneousSymbol> syms;
  for (int t = 0; t < basis.frame.size(); ++t) {
    const int j = basis.frame.J[static_cast<std::size_t>(t)];
    const PolySymbol conj = compose(diag.B_star, compose(auxiliary[static_cast<std::size_t>(t)], diag.B, K), K);
    std::vector<PolySymbol> expected;
    for (int p = 0; p < m; ++p) {
      const int l = diag.column_index[static_cast<std::size_t>(p)];
      expected.push_back(l == j ? diag.a[static_cast<std::size_t>(p)] : scale(-sgn(j) * sgn(l), diag.a[static_cast<std::size_t>(p)]));
    }
    const PolySymbol diff = subtract(conj, diagonal_matrix(expected, K));
    for (int n = 0; n <= K; ++n) syms.push_back(diff.component_or_zero(n));
  }
  double w = 0.0;
  for (double x : sup_norms(syms, grid)) w = std::max(w, x);
  return w;
}

void write_ledger(std::ostream& out, const Diagonalization& diag) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << "name,component,degree,sup\n";
  for (const auto& e : diag.ledger)
    out << e.name << ',' << e.component << ',' << std::defaultfloat << e.degree << ',' << std::scientific
        << std::setprecision(6) << e.sup << '\n';
  out << "first_unchecked_order,," << std::defaultfloat << diag.first_unchecked_order << ",\n";
  out.flags(flags);
  out.precision(prec);
}

}  // namespace psdiag
