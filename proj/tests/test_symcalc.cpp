#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "psdiag/symcalc.hpp"
#include "psdiag/trig_symbol.hpp"

using namespace psdiag;

namespace {

double grid_sup(const HomogeneousSymbol& a) { return sup_norm(a, SampleGrid{5, 8}); }

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Value of a trig component at (x, xi) summed over terms with given x-frequency.
CMatrix fourier_coefficient(const TrigComponent& c, int n1, int n2, std::array<double, 2> xi) {
  CMatrix out = CMatrix::Zero(c.rows, c.cols);
  const double r = std::hypot(xi[0], xi[1]);
  const double th = std::atan2(xi[1], xi[0]);
  for (const auto& t : c.terms)
    if (t.n1 == n1 && t.n2 == n2) out(t.row, t.col) += t.coef * std::exp(cplx(0, t.k * th)) * std::pow(r, c.degree);
  return out;
}

}  // namespace

TEST_CASE("add aligns degrees and keeps the common reach") {
  std::mt19937_64 rng(1);
  const auto a = random_trig_polysymbol(rng, 2, 2, 2.0, 1);
  const auto b = random_trig_polysymbol(rng, 2, 2, 1.0, 0);
  const auto s = add(a, b);
  CHECK(s.order() == 2.0);
  CHECK(s.depth() == 1);
  CHECK(grid_sup(s[1] - (a[1] + b[0])) < 1e-14);
  const auto z = add(a, scale(-1.0, a));
  for (const auto& c : z.components()) CHECK(grid_sup(c) < 1e-14);
  CHECK(grid_sup(add(a, PolySymbol::zero(2, 2, 2.0, 1))[0] - a[0]) == 0.0);
  CHECK_THROWS_AS(add(a, PolySymbol::zero(3, 3, 2.0)), DimensionError);
}

TEST_CASE("composition with a polynomial symbol terminates exactly") {
  // a = xi_1^2 = |xi|^2 cos^2(theta); b = e^{i x^1}. Op(a)Op(b) has symbol e^{ix}(k1 + 1)^2.
  const auto a = HomogeneousSymbol::leaf(1, 1, 2.0, kDependsTheta, [](const LeafArgs& l) {
    const Jet c = cos(l.theta());
    return std::vector<Jet>{c * c};
  });
  const auto b = HomogeneousSymbol::leaf(1, 1, 0.0, kDependsX1, [](const LeafArgs& l) {
    return std::vector<Jet>{exp(l.x(0) * cplx(0, 1))};
  });
  const auto c = compose(PolySymbol(a), PolySymbol(b), 2);
  const std::array<double, 2> x{0.3, 1.0};
  const std::array<double, 2> k{2.5, -1.5};
  cplx total = 0.0;
  for (const auto& comp : c.components()) total += comp.value(x, k)(0, 0);
  const cplx expected = std::exp(cplx(0, x[0])) * (k[0] + 1.0) * (k[0] + 1.0);
  CHECK(std::abs(total - expected) < 1e-12);
}

TEST_CASE("composition expansion approximates exact toroidal composition") {
  // With b a trig polynomial in x, the exact symbol of Op(a)Op(b) is
  //   c(x, k) = sum_m e^{i m x} a(x, k + m) b_m(k).
  std::mt19937_64 rng(7);
  RandomTrigOptions opts;
  opts.max_x_freq = 1;
  opts.max_theta_freq = 2;
  const auto ta = random_trig_component(rng, 2, 2, 1.0, opts);
  const auto tb = random_trig_component(rng, 2, 2, 0.0, opts);
  const PolySymbol a(ta.to_symbol());
  const PolySymbol b(tb.to_symbol());
  const std::array<double, 2> x{0.4, 2.1};
  auto exact = [&](std::array<double, 2> k) {
    CMatrix c = CMatrix::Zero(2, 2);
    for (int m1 = -1; m1 <= 1; ++m1)
      for (int m2 = -1; m2 <= 1; ++m2) {
        const CMatrix bm = fourier_coefficient(tb, m1, m2, k);
        if (bm.isZero()) continue;
        c += std::exp(cplx(0, m1 * x[0] + m2 * x[1])) * a[0].value(x, {k[0] + m1, k[1] + m2}) * bm;
      }
    return c;
  };
  for (int depth = 0; depth <= 3; ++depth) {
    const auto c = compose(a, b, depth);
    auto error = [&](double scale) {
      const std::array<double, 2> k{0.8 * scale, 0.6 * scale};
      CMatrix s = CMatrix::Zero(2, 2);
      for (const auto& comp : c.components()) s += comp.value(x, k);
      return max_abs(s - exact(k));
    };
    const double e1 = error(200.0), e2 = error(400.0);
    // error ~ |k|^{1 - depth - 1}
    const double rate = std::log2(e1 / e2);
    CHECK(rate == doctest::Approx(static_cast<double>(depth)).epsilon(0.05));
  }
}

TEST_CASE("identity and homomorphism") {
  std::mt19937_64 rng(3);
  const auto a = random_trig_polysymbol(rng, 2, 2, 1.0, 2);
  const auto b = random_trig_polysymbol(rng, 2, 2, -0.5, 2);
  const auto ib = compose(PolySymbol::identity(2, 2), b, 2);
  for (int i = 0; i <= 2; ++i) CHECK(grid_sup(ib[i] - b[i]) < 1e-14);
  const auto ab = compose(a, b, 2);
  CHECK(grid_sup(ab[0] - a[0] * b[0]) < 1e-13);
  CHECK(ab.order() == doctest::Approx(0.5));
}

TEST_CASE("adjoint involution and reversal") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_trig_polysymbol(rng, 2, 2, 1.0, 2);
    const auto b = random_trig_polysymbol(rng, 2, 2, 0.0, 2);
    const auto aa = adjoint(adjoint(a, 2), 2);
    for (int i = 0; i <= 2; ++i) CHECK(grid_sup(aa[i] - a[i]) < 1e-11);
    const auto lhs = adjoint(compose(a, b, 2), 2);
    const auto rhs = compose(adjoint(b, 2), adjoint(a, 2), 2);
    for (int i = 0; i <= 2; ++i) CHECK(grid_sup(lhs[i] - rhs[i]) < 1e-11);
    CHECK(grid_sup(adjoint(a, 2)[0] - a[0].adjoint()) == 0.0);
  }
  // x-constant Hermitian symbol is its own adjoint.
  CMatrix h(2, 2);
  h << 1.0, cplx(0, 2), cplx(0, -2), 3.0;
  const auto c = adjoint(PolySymbol(HomogeneousSymbol::constant(h, 1.0)).extended(2), 2);
  CHECK(grid_sup(c[0] - HomogeneousSymbol::constant(h, 1.0)) == 0.0);
  CHECK(c[1].is_zero());
}

TEST_CASE("subprincipal conventions") {
  CHECK(subprincipal(PolySymbol::identity(2, 1)).is_zero());
  std::mt19937_64 rng(5);
  RandomTrigOptions flat;
  flat.max_x_freq = 0;
  const auto a = random_trig_polysymbol(rng, 2, 2, 2.0, 1, flat);
  CHECK(grid_sup(subprincipal(a) - a[1]) == 0.0);
  CHECK_THROWS_AS(subprincipal(PolySymbol::identity(2, 0)), DimensionError);
  // Self-adjoint operator has Hermitian subprincipal symbol.
  const auto b = random_trig_polysymbol(rng, 2, 2, 1.0, 1);
  const auto sa = add(b, adjoint(b, 1));
  const auto sub = subprincipal(sa);
  CHECK(grid_sup(sub - sub.adjoint()) < 1e-12);
}

TEST_CASE("Poisson bracket identities") {
  std::mt19937_64 rng(9);
  const auto c = random_trig_component(rng, 1, 1, 1.0).to_symbol();
  CHECK(grid_sup(poisson(c, c)) < 1e-12);
  CHECK(poisson(HomogeneousSymbol::identity(2), c).is_zero());
  const auto b = random_trig_component(rng, 2, 2, 1.0).to_symbol();
  const auto d = random_trig_component(rng, 2, 2, 0.0).to_symbol();
  const auto e = random_trig_component(rng, 2, 2, 2.0).to_symbol();
  CHECK(grid_sup(gen_poisson(b, HomogeneousSymbol::identity(2), d) - poisson(b, d)) < 1e-13);
  CHECK(gen_poisson(HomogeneousSymbol::identity(2), d, e).is_zero());
  CHECK(poisson(b, d).degree() == doctest::Approx(0.0));
  // Leibniz: {B, CD} = {B, C} D + {B, C, D}.
  const auto lhs = poisson(b, d * e);
  CHECK(grid_sup(lhs - (poisson(b, d) * e + gen_poisson(b, d, e))) < 1e-11);
}

TEST_CASE("product and triple subprincipal rules on random symbols") {
  std::mt19937_64 rng(2024);
  double worst2 = 0.0, worst3 = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_trig_polysymbol(rng, 2, 2, 1.0, 1);
    const auto q = random_trig_polysymbol(rng, 2, 2, 0.0, 1);
    const auto r = random_trig_polysymbol(rng, 2, 2, 1.0, 1);
    worst2 = std::max(worst2, grid_sup(sub_of_product(p, q) - subprincipal(compose(p, q, 1))));
    worst3 = std::max(worst3, grid_sup(sub_of_triple(p, q, r) - subprincipal(compose(compose(p, q, 1), r, 1))));
  }
  CHECK(worst2 < 1e-11);
  CHECK(worst3 < 1e-10);
  const auto c = random_trig_polysymbol(rng, 2, 2, 1.0, 1);
  CHECK(grid_sup(sub_of_product(c, PolySymbol::identity(2, 1)) - subprincipal(c)) < 1e-14);
  CHECK(grid_sup(sub_of_triple(PolySymbol::identity(2, 1), c, PolySymbol::identity(2, 1)) - subprincipal(c)) < 1e-14);
}

TEST_CASE("homogeneity and periodicity of components") {
  std::mt19937_64 rng(17);
  const auto a = random_trig_polysymbol(rng, 2, 2, 1.5, 1);
  const auto d = a[0].dxi(0).dx(1);
  const std::array<double, 2> x{0.2, 0.9};
  const std::array<double, 2> xi{1.3, -0.4};
  for (double t : {0.5, 2.0, 7.0}) {
    CHECK(max_abs(a[0].value(x, {t * xi[0], t * xi[1]}) - std::pow(t, 1.5) * a[0].value(x, xi)) < 1e-11);
    CHECK(max_abs(d.value(x, {t * xi[0], t * xi[1]}) - std::pow(t, 0.5) * d.value(x, xi)) < 1e-11);
  }
  CHECK(max_abs(d.value({0.0, 0.9}, xi) - d.value({2 * std::acos(-1.0), 0.9}, xi)) < 1e-12);
}

TEST_CASE("residual_leading picks the first component at or below the claim") {
  const auto a = PolySymbol::identity(2, 3);
  CHECK(residual_leading(a, -1.0).degree() == doctest::Approx(-1.0));
  CHECK(residual_leading(a, -0.5).degree() == doctest::Approx(-1.0));
  CHECK(residual_leading(subtract(a, a), 0.0).is_zero());
  CHECK_THROWS_AS(residual_leading(a, -4.0), Error);
}

TEST_CASE("trig table round trip") {
  std::mt19937_64 rng(23);
  std::vector<TrigComponent> comps{random_trig_component(rng, 2, 2, 2.0), random_trig_component(rng, 2, 2, 0.0)};
  std::stringstream ss;
  write_trig_table(ss, comps);
  const auto p = read_trig_table(ss, 2);
  CHECK(p.depth() == 2);
  CHECK(p[1].is_zero());
  CHECK(grid_sup(p[0] - comps[0].to_symbol()) < 1e-14);
  CHECK(grid_sup(p[2] - comps[1].to_symbol()) < 1e-14);
  std::stringstream bad("degree,n1,n2,k,row,col,re,im\n2,0,0,0,0,0,1,0\n1.5,0,0,0,0,0,1,0\n");
  CHECK_THROWS_AS(read_trig_table(bad, 2), Error);
}

TEST_CASE("sample dump has one row per point and component") {
  const auto a = PolySymbol::identity(2, 1);
  std::ostringstream out;
  dump_samples(a, out, SampleGrid{3, 4});
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);  // constant symbols sample a single point
}
