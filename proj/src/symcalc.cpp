#include "psdiag/symcalc.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace psdiag {

namespace {

bool same_degree(double a, double b) { return std::abs(a - b) < 1e-9; }

int degree_offset(double hi, double lo) {
  const double d = hi - lo;
  const double r = std::round(d);
  if (std::abs(d - r) > 1e-9) throw DimensionError("symbol orders differ by a non-integer");
  return static_cast<int>(r);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

cplx minus_i_pow(int n) {
  static const cplx table[4] = {1.0, cplx(0, -1), -1.0, cplx(0, 1)};
  return table[n % 4];
}

}  // namespace

PolySymbol::PolySymbol(double order, std::vector<HomogeneousSymbol> components)
    : order_(order), components_(std::move(components)) {
  if (components_.empty()) throw DimensionError("polysymbol needs at least one component");
  const int r = components_.front().rows(), c = components_.front().cols();
  for (std::size_t i = 0; i < components_.size(); ++i) {
    auto& comp = components_[i];
    if (comp.rows() != r || comp.cols() != c) throw DimensionError("polysymbol component shape mismatch");
    if (!same_degree(comp.degree(), order - static_cast<double>(i)))
      throw DimensionError("polysymbol component has the wrong degree");
    comp = comp.regraded(order - static_cast<double>(i));
  }
}

PolySymbol PolySymbol::identity(int m, int depth) {
  return PolySymbol(HomogeneousSymbol::identity(m)).extended(depth);
}

PolySymbol PolySymbol::zero(int rows, int cols, double order, int depth) {
  return PolySymbol(HomogeneousSymbol::zero(rows, cols, order)).extended(depth);
}

HomogeneousSymbol PolySymbol::component_or_zero(int i) const {
  if (i <= depth()) return (*this)[i];
  return HomogeneousSymbol::zero(rows(), cols(), order_ - i);
}

PolySymbol PolySymbol::extended(int d) const {
  std::vector<HomogeneousSymbol> comps;
  for (int i = 0; i <= d; ++i) comps.push_back(component_or_zero(i));
  return PolySymbol(order_, std::move(comps));
}

PolySymbol PolySymbol::truncated(int d) const { return extended(std::min(d, depth())); }

PolySymbol PolySymbol::adjoint_pointwise() const {
  std::vector<HomogeneousSymbol> comps;
  for (const auto& c : components_) comps.push_back(c.adjoint());
  return PolySymbol(order_, std::move(comps));
}

PolySymbol add(const PolySymbol& a, const PolySymbol& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  const double top = std::max(a.order(), b.order());
  const double low = std::max(a.lowest_degree(), b.lowest_degree());
  degree_offset(a.order(), b.order());
  const int depth = degree_offset(top, low);
  if (depth < 0) throw DimensionError("add: operands share no degrees");
  const int shift_a = degree_offset(top, a.order());
  const int shift_b = degree_offset(top, b.order());
  std::vector<HomogeneousSymbol> comps;
  for (int i = 0; i <= depth; ++i) {
    const int ia = i - shift_a, ib = i - shift_b;
    const double deg = top - i;
    HomogeneousSymbol s = HomogeneousSymbol::zero(a.rows(), a.cols(), deg);
    if (ia >= 0) s = s + a[ia];
    if (ib >= 0) s = s + b[ib];
    comps.push_back(s);
  }
  return PolySymbol(top, std::move(comps));
}

PolySymbol scale(cplx s, const PolySymbol& a) {
  std::vector<HomogeneousSymbol> comps;
  for (const auto& c : a.components()) comps.push_back(c.scaled(s));
  return PolySymbol(a.order(), std::move(comps));
}

PolySymbol subtract(const PolySymbol& a, const PolySymbol& b) { return add(a, scale(-1.0, b)); }

HomogeneousSymbol compose_component(const PolySymbol& a, const PolySymbol& b, int n) {
  if (a.cols() != b.rows() && !(a.rows() == 1 && a.cols() == 1) && !(b.rows() == 1 && b.cols() == 1))
    throw DimensionError("compose: inner dimensions differ");
  if (n < 0) throw DimensionError("compose: negative depth");
  std::vector<HomogeneousSymbol> terms;
  std::vector<cplx> coefs;
  for (int i = 0; i <= std::min(n, a.depth()); ++i) {
    for (int l = 0; l + i <= n && l <= b.depth(); ++l) {
      const int m = n - i - l;
      for (int a1 = 0; a1 <= m; ++a1) {
        const std::array<int, kDim> alpha{a1, m - a1};
        const HomogeneousSymbol da = a[i].derivative(alpha, {0, 0});
        if (da.is_zero()) continue;
        const HomogeneousSymbol db = b[l].derivative({0, 0}, alpha);
        if (db.is_zero()) continue;
        terms.push_back(da * db);
        coefs.push_back(minus_i_pow(m) / (factorial(alpha[0]) * factorial(alpha[1])));
      }
    }
  }
  const double deg = a.order() + b.order() - n;
  if (!terms.empty()) return linear_combination(terms, coefs);
  const bool matrix = a.cols() == b.rows();
  const int r = (!matrix && a.rows() == 1 && a.cols() == 1) ? b.rows() : a.rows();
  const int c = (!matrix && !(a.rows() == 1 && a.cols() == 1)) ? a.cols() : b.cols();
  return HomogeneousSymbol::zero(r, c, deg);
}

PolySymbol compose(const PolySymbol& a, const PolySymbol& b, int depth) {
  if (depth < 0) throw DimensionError("compose: negative depth");
  std::vector<HomogeneousSymbol> comps;
  for (int n = 0; n <= depth; ++n) comps.push_back(compose_component(a, b, n));
  return PolySymbol(a.order() + b.order(), std::move(comps));
}

HomogeneousSymbol adjoint_component(const PolySymbol& a, int n) {
  if (n < 0) throw DimensionError("adjoint: negative depth");
  std::vector<HomogeneousSymbol> terms;
  std::vector<cplx> coefs;
  for (int i = 0; i <= std::min(n, a.depth()); ++i) {
    const int m = n - i;
    const HomogeneousSymbol ad = a[i].adjoint();
    for (int a1 = 0; a1 <= m; ++a1) {
      const std::array<int, kDim> alpha{a1, m - a1};
      const HomogeneousSymbol d = ad.derivative(alpha, alpha);
      if (d.is_zero()) continue;
      terms.push_back(d);
      coefs.push_back(minus_i_pow(m) / (factorial(alpha[0]) * factorial(alpha[1])));
    }
  }
  const double deg = a.order() - n;
  return terms.empty() ? HomogeneousSymbol::zero(a.cols(), a.rows(), deg) : linear_combination(terms, coefs);
}

PolySymbol adjoint(const PolySymbol& a, int depth) {
  if (depth < 0) throw DimensionError("adjoint: negative depth");
  std::vector<HomogeneousSymbol> comps;
  for (int n = 0; n <= depth; ++n) comps.push_back(adjoint_component(a, n));
  return PolySymbol(a.order(), std::move(comps));
}

const HomogeneousSymbol& principal(const PolySymbol& a) { return a.principal(); }

HomogeneousSymbol subprincipal(const PolySymbol& a) {
  if (a.depth() < 1) throw DimensionError("subprincipal needs a symbol of depth >= 1");
  std::vector<HomogeneousSymbol> terms{a[1]};
  std::vector<cplx> coefs{1.0};
  for (int alpha = 0; alpha < kDim; ++alpha) {
    terms.push_back(a[0].dx(alpha).dxi(alpha));
    coefs.push_back(cplx(0, 0.5));
  }
  return linear_combination(terms, coefs);
}

HomogeneousSymbol poisson(const HomogeneousSymbol& b, const HomogeneousSymbol& c) {
  std::vector<HomogeneousSymbol> terms;
  for (int alpha = 0; alpha < kDim; ++alpha) {
    terms.push_back(b.dx(alpha) * c.dxi(alpha));
    terms.push_back(b.dxi(alpha) * c.dx(alpha));
  }
  const cplx coefs[] = {1.0, -1.0, 1.0, -1.0};
  return linear_combination(terms, coefs);
}

HomogeneousSymbol gen_poisson(const HomogeneousSymbol& b, const HomogeneousSymbol& c, const HomogeneousSymbol& d) {
  std::vector<HomogeneousSymbol> terms;
  for (int alpha = 0; alpha < kDim; ++alpha) {
    terms.push_back(b.dx(alpha) * c * d.dxi(alpha));
    terms.push_back(b.dxi(alpha) * c * d.dx(alpha));
  }
  const cplx coefs[] = {1.0, -1.0, 1.0, -1.0};
  return linear_combination(terms, coefs);
}

HomogeneousSymbol sub_of_product(const PolySymbol& c, const PolySymbol& d) {
  const auto& c0 = c.principal();
  const auto& d0 = d.principal();
  const HomogeneousSymbol terms[] = {c0 * subprincipal(d), subprincipal(c) * d0, poisson(c0, d0)};
  const cplx coefs[] = {1.0, 1.0, cplx(0, 0.5)};
  return linear_combination(terms, coefs);
}

HomogeneousSymbol sub_of_triple(const PolySymbol& p, const PolySymbol& q, const PolySymbol& r) {
  const auto& p0 = p.principal();
  const auto& q0 = q.principal();
  const auto& r0 = r.principal();
  const HomogeneousSymbol terms[] = {subprincipal(p) * q0 * r0, p0 * subprincipal(q) * r0, p0 * q0 * subprincipal(r),
                                     poisson(p0, q0) * r0,      gen_poisson(p0, q0, r0),     p0 * poisson(q0, r0)};
  const cplx h(0, 0.5);
  const cplx coefs[] = {1.0, 1.0, 1.0, h, h, h};
  return linear_combination(terms, coefs);
}

HomogeneousSymbol residual_leading(const PolySymbol& a, double claimed) {
  for (int i = 0; i <= a.depth(); ++i)
    if (a[i].degree() <= claimed + 1e-9) return a[i];
  throw Error("no stored component at or below the claimed order");
}

void dump_samples(const PolySymbol& a, std::ostream& out, const SampleGrid& grid) {
  SymbolProgram prog(a.components());
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << std::setprecision(12) << std::scientific;
  for_each_grid_point(prog, grid, [&](std::array<double, kDim> x, double th, const SymbolProgram::Workspace& ws) {
    for (std::size_t k = 0; k < prog.output_count(); ++k) {
      const CMatrix v = prog.circle_value(k, ws);
      out << k << ' ' << x[0] << ' ' << x[1] << ' ' << th;
      for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j) out << ' ' << v(i, j).real() << ' ' << v(i, j).imag();
      out << '\n';
    }
  });
  out.flags(old_flags);
  out.precision(old_prec);
}

}  // namespace psdiag
