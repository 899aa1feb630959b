#include "psdiag/elasticity.hpp"

#include <algorithm>
#include <cmath>

#include "psdiag/trig_symbol.hpp"

namespace psdiag {

namespace {

std::uint8_t framing_depends(const Framing& f) {
  std::uint8_t d = kDependsNone;
  for (const auto& t : f.terms) {
    if (t.n1 != 0) d |= kDependsX1;
    if (t.n2 != 0) d |= kDependsX2;
  }
  return d;
}

Jet angle_jet(const Framing& f, const LeafArgs& a) {
  Jet phi = a.constant(f.constant);
  for (const auto& t : f.terms) {
    const Jet arg = a.x(0) * static_cast<double>(t.n1) + a.x(1) * static_cast<double>(t.n2);
    phi += cos(arg) * t.a + sin(arg) * t.b;
  }
  return phi;
}

// xi_alpha / |xi| as a degree-1 symbol.
HomogeneousSymbol covector_component(int alpha) {
  return HomogeneousSymbol::leaf(1, 1, 1.0, kDependsTheta, [alpha](const LeafArgs& a) {
    return std::vector<Jet>{alpha == 0 ? cos(a.theta()) : sin(a.theta())};
  });
}

HomogeneousSymbol epsilon_matrix() {
  CMatrix e(2, 2);
  e << 0, 1, -1, 0;
  return HomogeneousSymbol::constant(e, 0.0);
}

// p = (cos(theta - phi), sin(theta - phi)), the unit covector in frame components.
HomogeneousSymbol frame_covector(const Framing& f, bool rotate_by_epsilon) {
  const auto dep = static_cast<std::uint8_t>(framing_depends(f) | kDependsTheta);
  return HomogeneousSymbol::leaf(2, 1, 0.0, dep, [f, rotate_by_epsilon](const LeafArgs& a) {
    const Jet psi = a.theta() - angle_jet(f, a);
    const Jet c = cos(psi), s = sin(psi);
    if (rotate_by_epsilon) return std::vector<Jet>{s, -c};
    return std::vector<Jet>{c, s};
  });
}

double sup(const HomogeneousSymbol& a, const SampleGrid& g) { return a.is_zero() ? 0.0 : sup_norm(a, g); }

}  // namespace

HomogeneousSymbol Framing::angle() const {
  if (x_independent()) return HomogeneousSymbol::constant(CMatrix::Constant(1, 1, constant), 0.0);
  const Framing self = *this;
  return HomogeneousSymbol::leaf(1, 1, 0.0, framing_depends(*this),
                                 [self](const LeafArgs& a) { return std::vector<Jet>{angle_jet(self, a)}; });
}

HomogeneousSymbol Framing::frame_matrix() const {
  if (x_independent()) {
    CMatrix e(2, 2);
    e << std::cos(constant), -std::sin(constant), std::sin(constant), std::cos(constant);
    return HomogeneousSymbol::constant(e, 0.0);
  }
  const Framing self = *this;
  return HomogeneousSymbol::leaf(2, 2, 0.0, framing_depends(*this), [self](const LeafArgs& a) {
    const Jet phi = angle_jet(self, a);
    const Jet c = cos(phi), s = sin(phi);
    return std::vector<Jet>{c, -s, s, c};
  });
}

void check_convexity(const ElasticitySetup& setup) {
  if (!(setup.mu > 0.0)) throw ConvexityError("strong convexity needs mu > 0");
  if (!(setup.lambda + setup.mu > 0.0)) throw ConvexityError("strong convexity needs lambda + mu > 0");
}

PolySymbol lame_vector_symbol(const ElasticitySetup& setup) {
  check_convexity(setup);
  const double lam = setup.lambda, mu = setup.mu;
  const auto prin = HomogeneousSymbol::leaf(2, 2, 2.0, kDependsTheta, [lam, mu](const LeafArgs& a) {
    const Jet c = cos(a.theta()), s = sin(a.theta());
    return std::vector<Jet>{mu + (lam + mu) * c * c, (lam + mu) * c * s, (lam + mu) * c * s, mu + (lam + mu) * s * s};
  });
  // -mu Ric v: the Ricci tensor of the flat torus vanishes.
  const auto ricci = HomogeneousSymbol::zero(2, 2, 0.0);
  return PolySymbol(2.0, {prin, HomogeneousSymbol::zero(2, 2, 1.0), ricci});
}

PolySymbol build_lame_symbol(const ElasticitySetup& setup) {
  const PolySymbol L = lame_vector_symbol(setup);
  const HomogeneousSymbol E = setup.framing.frame_matrix();
  // rho = 1, so the half-density factors are trivial; S = E^T and S^{-1} = E.
  const PolySymbol S(E.transpose());
  const PolySymbol S_inv(E);
  return compose(compose(S, L, 2), S_inv, 2);
}

std::vector<HomogeneousSymbol> torsion_covector(const Framing& framing) {
  const HomogeneousSymbol E = framing.frame_matrix();
  const HomogeneousSymbol Et = E.transpose();
  // Upsilon^alpha_{beta gamma} = (E d_beta E^T)(alpha, gamma).
  const HomogeneousSymbol U1 = E * Et.dx(0), U2 = E * Et.dx(1);
  // t_alpha = T^alpha_{12} = Upsilon^alpha_{12} - Upsilon^alpha_{21}
  std::vector<HomogeneousSymbol> t;
  for (int alpha = 0; alpha < kDim; ++alpha) t.push_back(U1.block(alpha, 1, 1, 1) - U2.block(alpha, 0, 1, 1));
  return t;
}

HomogeneousSymbol lame_subprincipal_closed_form(const ElasticitySetup& setup) {
  const auto t = torsion_covector(setup.framing);
  const HomogeneousSymbol t_xi = t[0] * covector_component(0) + t[1] * covector_component(1);
  return cplx(0.0, setup.lambda + 3.0 * setup.mu) * (t_xi * epsilon_matrix());
}

HomogeneousSymbol lame_principal_closed_form(const ElasticitySetup& setup) {
  const HomogeneousSymbol p = frame_covector(setup.framing, false);
  const HomogeneousSymbol id = HomogeneousSymbol::identity(2, 2.0);
  return setup.mu * id + (setup.lambda + setup.mu) * (p * p.transpose()).regraded(2.0);
}

AnalyticEigendata lame_eigendata(const ElasticitySetup& setup) {
  check_convexity(setup);
  auto scalar = [](double c) { return HomogeneousSymbol::constant(CMatrix::Constant(1, 1, c), 2.0); };
  return {{scalar(setup.mu), scalar(setup.lambda + 2.0 * setup.mu)},
          {frame_covector(setup.framing, true), frame_covector(setup.framing, false)}};
}

FreeChoice random_free_choice(std::mt19937_64& rng, int m, int depth, double amplitude) {
  RandomTrigOptions o;
  o.amplitude = amplitude;
  o.terms = 3;
  o.max_theta_freq = 2;
  o.depends_x2 = false;
  FreeChoice f(static_cast<std::size_t>(m));
  for (auto& col : f)
    for (int k = 1; k <= depth; ++k) col.push_back(random_trig_component(rng, 1, 1, -k, o).hermitized().to_symbol());
  return f;
}

double LameSubprincipalReport::worst() const {
  double w = std::max({principal_form, subprincipal_form, pj_sub, bracket_pv, b_sub, v_lsub_v, vstar_v, vstar_p_v,
                       vstar_l_v, symmetric_pair});
  for (double a : a_sub) w = std::max(w, a);
  return w;
}

LameSubprincipalReport verify_lame_subprincipal(const ElasticitySetup& setup, int depth,
                                                const std::vector<FreeChoice>& choices, const SampleGrid& grid) {
  if (depth < 1) throw PreconditionError("verification needs depth >= 1");
  const PolySymbol A = build_lame_symbol(setup);
  FrameOptions fo;
  fo.grid = grid;
  const EigenFrame frame = decompose_principal(A.principal(), lame_eigendata(setup), fo);
  ProjectionOptions po;
  po.grid = grid;
  const ProjectionBasis basis = build_projections(A, frame, depth, po);

  LameSubprincipalReport rep;
  const HomogeneousSymbol& prin = A.principal();
  const HomogeneousSymbol sub = subprincipal(A);
  rep.principal_form = sup(prin - lame_principal_closed_form(setup), grid);
  rep.subprincipal_form = sup(sub - lame_subprincipal_closed_form(setup), grid);
  for (int i = 0; i < frame.size(); ++i) {
    const int j = frame.J[static_cast<std::size_t>(i)];
    const auto& v = frame.v[static_cast<std::size_t>(i)];
    const auto& P = frame.P[static_cast<std::size_t>(i)];
    const HomogeneousSymbol vs = v.adjoint();
    rep.pj_sub = std::max(rep.pj_sub, sup(subprincipal(basis.of(j)), grid));
    rep.bracket_pv = std::max(rep.bracket_pv, sup(poisson(P, v), grid));
    rep.v_lsub_v = std::max(rep.v_lsub_v, sup(vs * sub * v, grid));
    rep.vstar_v = std::max(rep.vstar_v, sup(poisson(vs, v), grid));
    rep.vstar_p_v = std::max(rep.vstar_p_v, sup(gen_poisson(vs, P, v), grid));
    rep.vstar_l_v = std::max(rep.vstar_l_v, sup(gen_poisson(vs, prin, v), grid));
    rep.symmetric_pair = std::max(rep.symmetric_pair, sup(vs * poisson(prin, v) + poisson(vs, prin) * v, grid));
  }

  std::vector<FreeChoice> all = choices;
  if (all.empty()) all.emplace_back();
  DiagonalizerOptions dopts;
  dopts.grid = grid;
  for (const auto& choice : all) {
    std::vector<DiagonalizerColumn> cols;
    for (int i = 0; i < frame.size(); ++i) {
      const auto pos = static_cast<std::size_t>(i);
      const std::vector<HomogeneousSymbol> f = pos < choice.size() ? choice[pos] : std::vector<HomogeneousSymbol>{};
      cols.push_back(build_column(basis, frame.J[pos], depth, f, dopts));
      HomogeneousSymbol expected = HomogeneousSymbol::zero(2, 1, -1.0);
      if (!f.empty() && f[0].valid()) expected = cplx(0.0, 1.0) * (f[0].regraded(-1.0) * frame.v[pos]);
      rep.b_sub = std::max(rep.b_sub, sup(subprincipal(cols.back().B) - expected, grid));
    }
    const Diagonalization diag = assemble(basis, std::move(cols), grid);
    double worst = 0.0;
    for (int j : frame.J) worst = std::max(worst, sup(subprincipal(diag.a_of(j)), grid));
    rep.a_sub.push_back(worst);
  }
  return rep;
}

PolySymbol first_order_perturbation(std::mt19937_64& rng, double amplitude) {
  RandomTrigOptions o;
  o.amplitude = amplitude;
  o.terms = 3;
  o.max_theta_freq = 0;
  o.depends_x2 = false;
  const HomogeneousSymbol b1 = random_trig_component(rng, 2, 2, 0.0, o).hermitized().to_symbol();
  const HomogeneousSymbol b2 = random_trig_component(rng, 2, 2, 0.0, o).hermitized().to_symbol();
  const HomogeneousSymbol c = random_trig_component(rng, 2, 2, 0.0, o).hermitized().to_symbol();
  const HomogeneousSymbol w1 = b1 * covector_component(0) + b2 * covector_component(1);
  const HomogeneousSymbol w0 = cplx(0.0, -0.5) * (b1.dx(0) + b2.dx(1)) + c;
  return PolySymbol(1.0, {w1, w0});
}

std::vector<std::string> preset_names() { return {"lame-flat", "lame-rotated", "lame-perturbed", "laplacian"}; }

Preset make_preset(const std::string& name, const PresetOptions& opts) {
  ElasticitySetup setup{opts.lambda, opts.mu, Framing::standard()};
  if (name == "lame-flat") return {name, build_lame_symbol(setup), lame_eigendata(setup)};
  if (name == "lame-rotated") {
    setup.framing = Framing::rotated();
    return {name, build_lame_symbol(setup), lame_eigendata(setup)};
  }
  if (name == "lame-perturbed") {
    std::mt19937_64 rng(opts.seed);
    return {name, add(build_lame_symbol(setup), first_order_perturbation(rng, opts.perturbation)),
            lame_eigendata(setup)};
  }
  if (name == "laplacian") {
    const auto one = [](double deg) { return HomogeneousSymbol::constant(CMatrix::Constant(1, 1, 1.0), deg); };
    return {name, PolySymbol(2.0, {one(2.0), HomogeneousSymbol::zero(1, 1, 1.0)}), AnalyticEigendata{{one(2.0)}, {one(0.0)}}};
  }
  throw UnknownPresetError("unknown preset '" + name + "'");
}

}  // namespace psdiag
