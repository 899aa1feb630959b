#include "psdiag/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psdiag {

namespace {

HomogeneousSymbol frame_coordinate(const EigenFrame& f, int l, int r, const HomogeneousSymbol& x) {
  return f.v[static_cast<std::size_t>(l)].adjoint() * x * f.v[static_cast<std::size_t>(r)];
}

void check_self_adjoint(const PolySymbol& a, int depth, const ProjectionOptions& opts) {
  const PolySymbol diff = subtract(a.extended(depth), adjoint(a, depth));
  const auto norms = sup_norms(diff.components(), opts.grid);
  for (double n : norms)
    if (n > opts.self_adjoint_tolerance) throw PreconditionError("operator is not self-adjoint at symbol level");
}

}  // namespace

ProjectionBasis build_projections(const PolySymbol& a, const EigenFrame& frame, int depth,
                                  const ProjectionOptions& opts) {
  if (frame.mode == FrameMode::Numeric) throw PreconditionError("projections need a frame with derivatives");
  const int m = frame.size();
  if (a.rows() != m || a.cols() != m) throw DimensionError("operator and frame sizes differ");
  if (depth < 0) throw DimensionError("negative depth");
  check_self_adjoint(a, depth, opts);

  std::vector<std::vector<HomogeneousSymbol>> comps(static_cast<std::size_t>(m));
  for (int p = 0; p < m; ++p) comps[static_cast<std::size_t>(p)].push_back(frame.P[static_cast<std::size_t>(p)]);

  // Outer products v_l v_r^* and reciprocal gaps, shared across orders.
  std::vector<HomogeneousSymbol> outer(static_cast<std::size_t>(m * m)), inv_gap(static_cast<std::size_t>(m * m));
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r) {
      outer[static_cast<std::size_t>(l * m + r)] = frame.v[static_cast<std::size_t>(l)] * frame.v[static_cast<std::size_t>(r)].adjoint();
      if (l != r)
        inv_gap[static_cast<std::size_t>(l * m + r)] = (frame.h[static_cast<std::size_t>(l)] - frame.h[static_cast<std::size_t>(r)]).reciprocal();
    }

  const int solved = opts.complement_last ? m - 1 : m;
  for (int k = 1; k <= depth; ++k) {
    for (int j = 0; j < solved; ++j) {
      const PolySymbol pt(0.0, comps[static_cast<std::size_t>(j)]);
      const HomogeneousSymbol e = compose_component(pt, pt, k);
      const HomogeneousSymbol f = compose_component(a, pt, k) - compose_component(pt, a, k);
      std::vector<HomogeneousSymbol> terms;
      std::vector<cplx> coefs;
      for (int l = 0; l < m; ++l) {
        for (int r = 0; r < m; ++r) {
          HomogeneousSymbol c;
          if (l != r) {
            c = frame_coordinate(frame, l, r, f) * inv_gap[static_cast<std::size_t>(l * m + r)];
            coefs.push_back(-1.0);
          } else {
            c = frame_coordinate(frame, l, l, e);
            coefs.push_back(l == j ? -1.0 : 1.0);
          }
          terms.push_back(c * outer[static_cast<std::size_t>(l * m + r)]);
        }
      }
      comps[static_cast<std::size_t>(j)].push_back(linear_combination(terms, coefs));
    }
    if (opts.complement_last) {
      std::vector<HomogeneousSymbol> terms;
      std::vector<cplx> coefs;
      for (int j = 0; j < m - 1; ++j) {
        terms.push_back(comps[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
        coefs.push_back(-1.0);
      }
      comps[static_cast<std::size_t>(m - 1)].push_back(linear_combination(terms, coefs));
    }
  }

  ProjectionBasis basis{a, frame, depth, {}};
  for (int p = 0; p < m; ++p) basis.P.emplace_back(0.0, comps[static_cast<std::size_t>(p)]);
  return basis;
}

double ProjectionReport::worst() const {
  double w = 0.0;
  for (const auto* v : {&principal, &symmetry, &idempotency, &partition, &commutation})
    for (double x : *v) w = std::max(w, x);
  return w;
}

ProjectionReport verify_projections(const ProjectionBasis& basis, const SampleGrid& grid) {
  const int m = basis.frame.size();
  const int K = basis.depth;
  // Collect every residual component in one program; tags route norms back.
  std::vector<HomogeneousSymbol> syms;
  std::vector<std::pair<int, int>> tags;  // (kind, order)
  auto push = [&](int kind, const PolySymbol& p) {
    for (int k = 0; k <= std::min(K, p.depth()); ++k) {
      syms.push_back(p[k]);
      tags.emplace_back(kind, k);
    }
  };
  PolySymbol sum = PolySymbol::zero(m, m, 0.0, K);
  for (int j = 0; j < m; ++j) {
    const PolySymbol& pj = basis.P[static_cast<std::size_t>(j)];
    syms.push_back(pj[0] - basis.frame.P[static_cast<std::size_t>(j)]);
    tags.emplace_back(0, 0);
    push(1, subtract(pj, adjoint(pj, K)));
    for (int l = 0; l < m; ++l) {
      PolySymbol prod = compose(pj, basis.P[static_cast<std::size_t>(l)], K);
      if (l == j) prod = subtract(prod, pj);
      push(2, prod);
    }
    sum = add(sum, pj);
    push(4, subtract(compose(basis.A, pj, K), compose(pj, basis.A, K)));
  }
  push(3, subtract(sum, PolySymbol::identity(m, K)));
  const auto norms = sup_norms(syms, grid);
  ProjectionReport rep;
  for (auto* v : {&rep.principal, &rep.symmetry, &rep.idempotency, &rep.partition, &rep.commutation})
    v->assign(static_cast<std::size_t>(K + 1), 0.0);
  for (std::size_t i = 0; i < syms.size(); ++i) {
    std::vector<double>* target = nullptr;
    switch (tags[i].first) {
      case 0: target = &rep.principal; break;
      case 1: target = &rep.symmetry; break;
      case 2: target = &rep.idempotency; break;
      case 3: target = &rep.partition; break;
      default: target = &rep.commutation; break;
    }
    auto& slot = (*target)[static_cast<std::size_t>(tags[i].second)];
    slot = std::max(slot, norms[i]);
  }
  return rep;
}

double trace_identity_check(const ProjectionBasis& basis, const SampleGrid& grid) {
  if (basis.depth < 1) throw DimensionError("trace identity needs projections of depth >= 1");
  std::vector<HomogeneousSymbol> syms;
  for (int p = 0; p < basis.frame.size(); ++p) {
    const auto& v = basis.frame.v[static_cast<std::size_t>(p)];
    syms.push_back(poisson(v.adjoint(), v) - subprincipal(basis.P[static_cast<std::size_t>(p)]).trace().scaled(cplx(0, 1)));
  }
  const auto norms = sup_norms(syms, grid);
  return *std::max_element(norms.begin(), norms.end());
}

SignProbe sign_definiteness_probe(const PolySymbol& a, const ProjectionBasis& basis, int j, const Quantizer& quantize,
                                  std::mt19937_64& rng, int batch) {
  const PolySymbol& pj = basis.of(j);
  const int K = basis.depth;
  const PolySymbol paq = compose(adjoint(pj, K), compose(a, pj, K), K);
  const double sgn = j > 0 ? 1.0 : -1.0;
  const CMatrix q = sgn * quantize(paq);
  SignProbe out;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.norm = es.eigenvalues().cwiseAbs().maxCoeff();
  std::normal_distribution<double> nd;
  out.min_rayleigh = std::numeric_limits<double>::infinity();
  for (int b = 0; b < batch; ++b) {
    Eigen::VectorXcd u(q.rows());
    for (int i = 0; i < u.size(); ++i) u(i) = cplx(nd(rng), nd(rng));
    out.min_rayleigh = std::min(out.min_rayleigh, (u.dot(q * u)).real() / u.squaredNorm());
  }
  return out;
}

}  // namespace psdiag
