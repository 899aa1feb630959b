#include "doctest.h"

#include <cmath>
#include <random>

#include "psdiag/diagonalizer.hpp"
#include "psdiag/trig_symbol.hpp"

using namespace psdiag;

namespace {

PolySymbol random_operator(std::mt19937_64& rng, int depth) {
  RandomTrigOptions o;
  o.amplitude = 0.1;
  o.terms = 4;
  o.depends_x2 = false;
  TrigComponent c = random_trig_component(rng, 2, 2, 1.0, o).hermitized();
  c.terms.push_back({0, 0, 0, 0, 0, -1.0});
  c.terms.push_back({0, 0, 0, 1, 1, 3.0});
  std::vector<HomogeneousSymbol> comps{c.to_symbol()};
  for (int k = 1; k <= depth; ++k) comps.push_back(random_trig_component(rng, 2, 2, 1.0 - k, o).to_symbol());
  const PolySymbol b(1.0, comps);
  return scale(0.5, add(b, adjoint(b, depth)));
}

HomogeneousSymbol random_real_function(std::mt19937_64& rng) {
  RandomTrigOptions o;
  o.amplitude = 0.5;
  o.terms = 3;
  o.depends_x2 = false;
  return random_trig_component(rng, 1, 1, 0.0, o).hermitized().to_symbol();
}

const SampleGrid kGrid{6, 12};

double sup(const HomogeneousSymbol& a) { return sup_norm(a, kGrid); }

}  // namespace

TEST_CASE("x-independent operator: columns are the eigenvectors") {
  CMatrix c(2, 2);
  c << 2.0, cplx(1, 1), cplx(1, -1), -3.0;
  const PolySymbol a(HomogeneousSymbol::constant(c, 1.0));
  const auto basis = build_projections(a, decompose_principal(a.principal()), 2);
  const auto d = diagonalize(basis, 2);
  CHECK(d.column_index == std::vector<int>{1, -1});
  for (const auto& col : d.columns) {
    CHECK(col.B[1].is_zero());
    CHECK(col.B[2].is_zero());
  }
  CHECK(d.ledger_max() < 1e-14);
  CHECK(sup(subprincipal_formula(basis, 1, HomogeneousSymbol())) == 0.0);
}

TEST_CASE("perturbed operator: iteration residuals and ledger") {
  std::mt19937_64 rng(314);
  const int K = 3;
  const auto a = random_operator(rng, K);
  const auto basis = build_projections(a, decompose_principal(a.principal()), K);
  DiagonalizerOptions opts;
  opts.grid = kGrid;
  const auto d = diagonalize(basis, K, opts);
  CHECK(d.ledger.size() == static_cast<std::size_t>((3 + 3 * 2) * (K + 1)));
  for (const auto& e : d.ledger) {
    INFO(e.name, " component ", e.component);
    CHECK(e.sup < 1e-10);
  }
  CHECK(d.first_unchecked_order == -4.0);
  for (const auto& col : d.columns) {
    CHECK(col.log.size() == static_cast<std::size_t>(K));
    CHECK(col.log[0].r_norm > 1e-4);  // the iteration has real work to do
    for (const auto& step : col.log) CHECK(step.solvability < 1e-12);
  }
  const auto rec = verify_recovery(d.columns, basis, kGrid);
  CHECK(rec.projection < 1e-10);
  CHECK(rec.partition < 1e-10);
  // Principal symbols of a_j are the eigenvalue fields.
  CHECK(sup(d.a_of(1)[0] - basis.frame.h[1]) < 1e-12);
  CHECK(sup(d.a_of(-1)[0] - basis.frame.h[0]) < 1e-12);
  // Each a_j is self-adjoint at symbol level.
  for (const auto& aj : d.a) {
    const auto diff = subtract(aj, adjoint(aj, K));
    for (int k = 0; k <= K; ++k) CHECK(sup(diff[k]) < 1e-10);
  }
}

TEST_CASE("closed-form subprincipal of B_j matches the first iteration") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = random_operator(rng, 1);
    const auto basis = build_projections(a, decompose_principal(a.principal()), 1);
    for (int j : basis.frame.J) {
      const auto f = trial == 0 ? HomogeneousSymbol() : random_real_function(rng);
      const auto col = build_column(basis, j, 1, {f});
      CHECK(sup(subprincipal(col.B) - subprincipal_formula(basis, j, f)) < 1e-10);
    }
  }
}

TEST_CASE("principal-only initial column reaches the same residuals") {
  std::mt19937_64 rng(8);
  const auto a = random_operator(rng, 2);
  const auto basis = build_projections(a, decompose_principal(a.principal()), 2);
  DiagonalizerOptions opts;
  opts.initial = InitialColumn::PrincipalOnly;
  opts.grid = kGrid;
  const auto d = diagonalize(basis, 2, opts);
  CHECK(d.ledger_max() < 1e-10);
}

TEST_CASE("free functions change a column only along i v") {
  std::mt19937_64 rng(77);
  const int K = 2;
  const auto a = random_operator(rng, K);
  const auto basis = build_projections(a, decompose_principal(a.principal()), K);
  const auto f = random_real_function(rng);
  for (int k0 = 1; k0 <= K; ++k0) {
    std::vector<HomogeneousSymbol> fs(static_cast<std::size_t>(K));
    fs[static_cast<std::size_t>(k0 - 1)] = f;
    const auto c0 = build_column(basis, 1, K);
    const auto c1 = build_column(basis, 1, K, fs);
    const auto& v = basis.frame.v[1];
    for (int k = 1; k < k0; ++k) CHECK(sup(c1.B[k] - c0.B[k]) < 1e-14);
    const auto diff = c1.B[k0] - c0.B[k0];
    const auto along = v.adjoint() * diff;
    CHECK(sup(diff - v * along) < 1e-10);                    // no component orthogonal to v
    CHECK(sup(along + along.adjoint()) < 1e-10);             // purely imaginary
    CHECK(sup(along - f.regraded(-k0).scaled(cplx(0, 1))) < 1e-10);
    // The freedom does not affect the diagonal entries at the subprincipal level.
    const auto d0 = assemble(basis, {c0, build_column(basis, -1, K)}, kGrid);
    const auto d1 = assemble(basis, {c1, build_column(basis, -1, K)}, kGrid);
    CHECK(sup(subprincipal(d0.a_of(1)) - subprincipal(d1.a_of(1))) < 1e-10);
    CHECK(d1.ledger_max() < 1e-10);
  }
}

TEST_CASE("gauge change shifts a_j by the bracket of the phase with h") {
  std::mt19937_64 rng(4);
  const int K = 1;
  const auto a = random_operator(rng, K);
  const auto frame = decompose_principal(a.principal());
  const auto phi = HomogeneousSymbol::leaf(1, 1, 0.0, kDependsX1 | kDependsTheta, [](const LeafArgs& l) {
    return std::vector<Jet>{0.8 * sin(l.x(0)) + 0.3 * cos(l.theta())};
  });
  const auto rotated = gauge_rotate(frame, 1, phi);
  const auto d0 = diagonalize(build_projections(a, frame, K), K);
  const auto d1 = diagonalize(build_projections(a, rotated, K), K);
  const auto& h = frame.h[1];
  CHECK(sup(d1.a_of(1)[0] - d0.a_of(1)[0]) < 1e-12);
  const auto shift = subprincipal(d1.a_of(1)) - subprincipal(d0.a_of(1));
  CHECK(sup(shift - poisson(phi, h)) < 1e-10);
  CHECK(sup(poisson(phi, h)) > 1e-3);
  // The untouched index is unchanged.
  CHECK(sup(subprincipal(d1.a_of(-1)) - subprincipal(d0.a_of(-1))) < 1e-10);
}

TEST_CASE("auxiliary operators conjugate to the signed block form") {
  std::mt19937_64 rng(12);
  const int K = 2;
  const auto a = random_operator(rng, K);
  const auto basis = build_projections(a, decompose_principal(a.principal()), K);
  const auto d = diagonalize(basis, K);
  std::vector<PolySymbol> aux;
  for (int j : basis.frame.J) aux.push_back(build_auxiliary(basis, j));
  CHECK(verify_conjugated_blocks(d, basis, aux, kGrid) < 1e-10);
  for (std::size_t t = 0; t < aux.size(); ++t) {
    const int j = basis.frame.J[t];
    const auto diff = subtract(aux[t], adjoint(aux[t], K));
    for (int k = 0; k <= K; ++k) CHECK(sup(diff[k]) < 1e-10);
    // Exactly one eigenvalue of sign sgn(j), equal to h^{(j)}.
    const CMatrix pr = aux[t][0].circle_value({0.3, 0.0}, 1.1);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pr);
    const double hj = basis.frame.h[static_cast<std::size_t>(basis.frame.pos(j))].circle_value({0.3, 0.0}, 1.1)(0, 0).real();
    int same_sign = 0;
    for (int i = 0; i < 2; ++i)
      if ((es.eigenvalues()(i) > 0) == (j > 0)) {
        ++same_sign;
        CHECK(es.eigenvalues()(i) == doctest::Approx(hj));
      }
    CHECK(same_sign == 1);
  }
}

TEST_CASE("inconsistent projection basis violates solvability") {
  std::mt19937_64 rng(6);
  const auto a = random_operator(rng, 1);
  auto basis = build_projections(a, decompose_principal(a.principal()), 1);
  const auto noise = random_trig_component(rng, 2, 2, -1.0).to_symbol();
  basis.P[1] = PolySymbol(0.0, {basis.P[1][0], basis.P[1][1] + noise});
  CHECK_THROWS_AS(build_column(basis, 1, 1), SolvabilityError);
}
