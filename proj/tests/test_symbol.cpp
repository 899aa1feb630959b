#include "doctest.h"

#include <cmath>

#include "psdiag/symbol.hpp"

using namespace psdiag;

namespace {

// 2x2 circle function with x- and theta-dependence, degree 1.5.
HomogeneousSymbol sample_symbol(double degree = 1.5) {
  return HomogeneousSymbol::leaf(2, 2, degree, kDependsAll, [](const LeafArgs& a) {
    const Jet x1 = a.x(0), x2 = a.x(1), t = a.theta();
    const cplx I(0, 1);
    return std::vector<Jet>{2.0 + cos(x1) * sin(t), sin(x2 + 2.0 * t) + I * cos(x1),
                            exp(0.3 * cos(t)) * x2, 1.0 + 0.5 * cos(x1 + x2) * cos(3.0 * t)};
  });
}

// Hermitian, x1-dependent, gap bounded away from zero.
HomogeneousSymbol hermitian_symbol() {
  return HomogeneousSymbol::leaf(3, 3, 2.0, kDependsX1 | kDependsTheta, [](const LeafArgs& a) {
    const Jet x = a.x(0), t = a.theta();
    const cplx I(0, 1);
    const Jet off = 0.3 * cos(x) + 0.2 * I * sin(t);
    const Jet off2 = 0.1 * sin(x + t);
    const Jet c = a.constant(0.0);
    return std::vector<Jet>{1.0 + 0.2 * cos(t) + c, off, off2,
                            off.conj(), 2.5 + 0.3 * sin(x) + c, 0.2 * I * cos(x + 0.0 * t),
                            off2.conj(), -0.2 * I * cos(x + 0.0 * t), 4.0 + 0.1 * cos(2.0 * t) + c};
  });
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("x and xi derivatives agree with central differences") {
  const auto a = sample_symbol();
  const std::array<double, 2> x{0.4, -1.2};
  const std::array<double, 2> xi{0.8, 1.7};
  const double h = 1e-5;
  for (int alpha = 0; alpha < 2; ++alpha) {
    auto xp = x, xm = x;
    xp[alpha] += h;
    xm[alpha] -= h;
    const CMatrix fd_x = (a.value(xp, xi) - a.value(xm, xi)) / (2 * h);
    CHECK(max_abs(a.dx(alpha).value(x, xi) - fd_x) < 1e-8);
    auto kp = xi, km = xi;
    kp[alpha] += h;
    km[alpha] -= h;
    const CMatrix fd_xi = (a.value(x, kp) - a.value(x, km)) / (2 * h);
    CHECK(max_abs(a.dxi(alpha).value(x, xi) - fd_xi) < 1e-8);
  }
}

TEST_CASE("mixed second derivatives commute and match differences") {
  const auto a = sample_symbol(-0.5);
  const std::array<double, 2> x{1.0, 2.0};
  const std::array<double, 2> xi{-0.6, 0.9};
  const double h = 1e-4;
  auto kp = xi, km = xi;
  kp[1] += h;
  km[1] -= h;
  const CMatrix fd = (a.dx(0).value(x, kp) - a.dx(0).value(x, km)) / (2 * h);
  CHECK(max_abs(a.dxi(1).dx(0).value(x, xi) - fd) < 1e-7);
  CHECK(max_abs(a.dxi(1).dx(0).value(x, xi) - a.dx(0).dxi(1).value(x, xi)) < 1e-12);
  CHECK(max_abs(a.dxi(0).dxi(1).value(x, xi) - a.dxi(1).dxi(0).value(x, xi)) < 1e-12);
  CHECK(a.dxi(0).degree() == doctest::Approx(-1.5));
}

TEST_CASE("algebraic nodes") {
  const auto a = sample_symbol();
  const auto b = sample_symbol(0.0).adjoint();
  const std::array<double, 2> x{0.1, 0.2};
  const std::array<double, 2> xi{0.3, -2.0};
  CHECK(max_abs((a * b).value(x, xi) - a.value(x, xi) * b.value(x, xi)) < 1e-12);
  CHECK(max_abs(a.adjoint().value(x, xi) - a.value(x, xi).adjoint()) < 1e-14);
  CHECK(max_abs(a.transpose().value(x, xi) - a.value(x, xi).transpose()) < 1e-14);
  CHECK(std::abs(a.trace().value(x, xi)(0, 0) - a.value(x, xi).trace()) < 1e-12);
  CHECK(max_abs((a - a).value(x, xi)) < 1e-14);
  const auto s = a.block(0, 1, 1, 1);
  CHECK(max_abs((s * a).value(x, xi) - a.value(x, xi)(0, 1) * a.value(x, xi)) < 1e-12);
  const auto r = s.reciprocal();
  CHECK(std::abs((r * s).value(x, xi)(0, 0) - 1.0) < 1e-12);
  const HomogeneousSymbol cols[] = {a, b.regraded(1.5)};
  const auto hs = hstack(cols);
  CHECK(hs.cols() == 4);
  CHECK(max_abs(hs.value(x, xi).rightCols(2) - b.regraded(1.5).value(x, xi)) < 1e-12);
}

TEST_CASE("structural zeros prune derivatives") {
  const auto c = HomogeneousSymbol::leaf(1, 1, 1.0, kDependsX1 | kDependsTheta,
                                         [](const LeafArgs& a) { return std::vector<Jet>{sin(a.x(0)) * cos(a.theta())}; });
  CHECK(c.dx(1).is_zero());
  CHECK(!c.dx(0).is_zero());
  CHECK((c.dx(1) * c).is_zero());
  CHECK((c + c.dx(1)).node() == c.node());
  CHECK(HomogeneousSymbol::identity(2).dxi(0).is_zero());
}

TEST_CASE("derivative budget is enforced") {
  const auto c = HomogeneousSymbol::leaf(
      1, 1, 0.0, kDependsX1, [](const LeafArgs& a) { return std::vector<Jet>{cos(a.x(0))}; }, 1);
  CHECK_NOTHROW(c.dx(0));
  CHECK_THROWS_AS(c.dx(0).dx(0), BudgetError);
}

TEST_CASE("eigen system derivatives match differences of dense eigenpairs") {
  const auto a = hermitian_symbol();
  const auto es = eigen_system(a.regraded(0.0), {0, 1, 2});
  const std::array<double, 2> x{0.7, 0.0};
  const double th = 0.9;
  auto dense = [&](double xx, double tt) {
    CMatrix m = a.circle_value({xx, 0.0}, tt);
    Eigen::SelfAdjointEigenSolver<CMatrix> s(m);
    CMatrix v = s.eigenvectors();
    for (int j = 0; j < 3; ++j) v.col(j) *= std::abs(v(j, j)) / v(j, j);
    CMatrix out(4, 3);
    out.row(0) = s.eigenvalues().cast<cplx>().transpose();
    out.bottomRows(3) = v;
    return out;
  };
  const CMatrix v0 = es.circle_value(x, th);
  CHECK(max_abs(v0 - dense(x[0], th)) < 1e-12);
  const double h = 1e-5;
  const CMatrix fd_x = (dense(x[0] + h, th) - dense(x[0] - h, th)) / (2 * h);
  CHECK(max_abs(es.dx(0).circle_value(x, th) - fd_x) < 1e-8);
  const CMatrix fd_xx = (dense(x[0] + 1e-3, th) - 2.0 * dense(x[0], th) + dense(x[0] - 1e-3, th)) / 1e-6;
  CHECK(max_abs(es.dx(0).dx(0).circle_value(x, th) - fd_xx) < 1e-5);
  const CMatrix fd_t = (dense(x[0], th + h) - dense(x[0], th - h)) / (2 * h);
  CHECK(max_abs(es.dxi(1).circle_value(x, th) - (std::cos(th) * fd_t)) < 1e-8);
}

TEST_CASE("sup norm samples the grid") {
  const auto c = HomogeneousSymbol::leaf(1, 1, 0.0, kDependsX1,
                                         [](const LeafArgs& a) { return std::vector<Jet>{3.0 * cos(a.x(0))}; });
  CHECK(sup_norm(c) == doctest::Approx(3.0));
  CHECK(sup_norm(HomogeneousSymbol::zero(2, 2, 1.0)) == 0.0);
}
