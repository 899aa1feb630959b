#include "doctest.h"

#include <cmath>
#include <random>

#include "psdiag/eigenframe.hpp"
#include "psdiag/trig_symbol.hpp"

using namespace psdiag;

namespace {

HomogeneousSymbol lame_principal(double lambda, double mu) {
  return HomogeneousSymbol::leaf(2, 2, 2.0, kDependsTheta, [=](const LeafArgs& a) {
    const Jet c = cos(a.theta()), s = sin(a.theta());
    return std::vector<Jet>{mu + (lambda + mu) * c * c, (lambda + mu) * c * s, (lambda + mu) * c * s,
                            mu + (lambda + mu) * s * s};
  });
}

// Flat Lame eigendata: v1 = eps p with eigenvalue mu, v2 = p with eigenvalue lambda + 2 mu.
AnalyticEigendata lame_eigendata(double lambda, double mu, double half_turn = 0.0) {
  auto scalar = [](double c) { return HomogeneousSymbol::constant(CMatrix::Constant(1, 1, c), 2.0); };
  auto v1 = HomogeneousSymbol::leaf(2, 1, 0.0, kDependsTheta, [](const LeafArgs& a) {
    return std::vector<Jet>{sin(a.theta()), -cos(a.theta())};
  });
  auto v2 = HomogeneousSymbol::leaf(2, 1, 0.0, kDependsTheta, [half_turn](const LeafArgs& a) {
    const Jet ph = exp(a.theta() * cplx(0, half_turn));
    return std::vector<Jet>{ph * cos(a.theta()), ph * sin(a.theta())};
  });
  return {{scalar(mu), scalar(lambda + 2 * mu)}, {v1, v2}};
}

HomogeneousSymbol random_gapped(std::mt19937_64& rng) {
  RandomTrigOptions o;
  o.amplitude = 0.08;
  o.terms = 4;
  TrigComponent c = random_trig_component(rng, 2, 2, 1.0, o).hermitized();
  c.terms.push_back({0, 0, 0, 0, 0, 1.0});
  c.terms.push_back({0, 0, 0, 1, 1, 4.0});
  return c.to_symbol();
}

double grid_sup(const HomogeneousSymbol& a) { return sup_norm(a, SampleGrid{6, 12}); }

}  // namespace

TEST_CASE("Lame principal symbol eigenvalues at unit covector") {
  const auto a = lame_principal(1.0, 1.0);
  const auto f = decompose_principal(a, lame_eigendata(1.0, 1.0));
  CHECK(f.J == std::vector<int>{1, 2});
  CHECK(f.m_plus == 2);
  CHECK(f.m_minus == 0);
  CHECK(f.h[0].value({0, 0}, {1, 0})(0, 0).real() == doctest::Approx(1.0));
  CHECK(f.h[1].value({0, 0}, {1, 0})(0, 0).real() == doctest::Approx(3.0));
  CHECK(simplicity_margin(f) == doctest::Approx(2.0));
  // Every component of p = (cos theta, sin theta) vanishes somewhere, so no
  // fixed-component gauge exists and eigendata must be supplied.
  CHECK_THROWS_AS(decompose_principal(a), FrameError);
  const auto n = decompose_principal(a, {}, FrameOptions{1e-6, 1e-10, {}, true});
  CHECK(grid_sup(n.h[0] - f.h[0]) < 1e-12);
  CHECK(grid_sup(n.P[1] - f.P[1]) < 1e-12);
}

TEST_CASE("degenerate and nearly degenerate principal symbols are rejected") {
  CHECK_THROWS_AS(decompose_principal(HomogeneousSymbol::identity(2, 2.0)), SimplicityError);
  CHECK_THROWS_AS(decompose_principal(lame_principal(-1.0 + 1e-9, 1.0)), SimplicityError);
}

TEST_CASE("non-elliptic and non-Hermitian symbols are rejected") {
  const auto a = HomogeneousSymbol::leaf(2, 2, 1.0, kDependsX1, [](const LeafArgs& l) {
    const Jet z = l.constant(0.0);
    return std::vector<Jet>{z + 3.0, z, z, cos(l.x(0))};
  });
  CHECK_THROWS_AS(decompose_principal(a), SignChangeError);
  CMatrix c(2, 2);
  c << 1.0, 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(decompose_principal(HomogeneousSymbol::constant(c, 1.0)), FrameError);
}

TEST_CASE("negative eigenvalues get negative indices") {
  CMatrix c(3, 3);
  c << -2.0, 0.1, 0.0, 0.1, 1.0, 0.0, 0.0, 0.0, -5.0;
  const auto f = decompose_principal(HomogeneousSymbol::constant(c, 1.0));
  CHECK(f.J == std::vector<int>{-2, -1, 1});
  CHECK(f.m_minus == 2);
  CHECK(f.h[f.pos(-2)].value({0, 0}, {0, 1})(0, 0).real() == doctest::Approx(-5.0));
}

TEST_CASE("random gapped Hermitian symbols: dense eigensolver oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 4; ++trial) {
    const auto a = random_gapped(rng);
    const auto f = decompose_principal(a);
    HomogeneousSymbol sum = f.P[0] + f.P[1];
    CHECK(grid_sup(sum - HomogeneousSymbol::identity(2)) < 1e-12);
    double dense_gap = 1e300;
    SymbolProgram prog({a});
    for_each_grid_point(prog, SampleGrid{}, [&](std::array<double, 2>, double, const SymbolProgram::Workspace& ws) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(prog.circle_value(0, ws));
      dense_gap = std::min(dense_gap, es.eigenvalues()(1) - es.eigenvalues()(0));
    });
    CHECK(simplicity_margin(f) == doctest::Approx(dense_gap).epsilon(1e-12));
    const auto num = decompose_principal(a, {}, FrameOptions{1e-6, 1e-10, {}, true});
    CHECK(num.mode == FrameMode::Numeric);
    CHECK(grid_sup(num.P[0] - f.P[0]) < 1e-12);
  }
}

TEST_CASE("gauge rotation leaves projections unchanged") {
  const auto f = decompose_principal(lame_principal(1.0, 1.0), lame_eigendata(1.0, 1.0));
  const auto zero = HomogeneousSymbol::zero(1, 1, 0.0);
  const auto f0 = gauge_rotate(f, 1, zero);
  CHECK(grid_sup(f0.v[0] - f.v[0]) == 0.0);
  const auto phi = HomogeneousSymbol::leaf(1, 1, 0.0, kDependsX1 | kDependsTheta, [](const LeafArgs& a) {
    return std::vector<Jet>{a.theta() + 0.5 * sin(a.x(0) + a.theta())};
  });
  const auto g = gauge_rotate(f, 2, phi);
  CHECK(grid_sup(g.P[1] - f.P[1]) < 1e-14);
  CHECK(grid_sup(g.v[1] - f.v[1]) > 0.1);
  const auto v = g.v[1];
  CHECK(grid_sup(v.adjoint() * v - HomogeneousSymbol::identity(1)) < 1e-14);
  const auto bad = HomogeneousSymbol::constant(CMatrix::Constant(1, 1, cplx(0, 1)), 0.0);
  CHECK_THROWS_AS(gauge_rotate(f, 1, bad), FrameError);
}

TEST_CASE("non-periodic supplied eigenvector field is detected") {
  CHECK_THROWS_AS(decompose_principal(lame_principal(1.0, 1.0), lame_eigendata(1.0, 1.0, 0.5)), FrameError);
}
