// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Tolerances and sizes are pinned here; runtimes are part of each criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "psdiag/elasticity.hpp"
#include "psdiag/spectra.hpp"
#include "psdiag/trig_symbol.hpp"

using namespace psdiag;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double worst_component(const PolySymbol& a, const SampleGrid& g) {
  double w = 0.0;
  for (int i = 0; i <= a.depth(); ++i) w = std::max(w, sup_norm(a[i], g));
  return w;
}

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
  return random_trig_component(rng, 1, 1, 0.0, o).hermitized().to_symbol();
}

// 1. Algebra self-consistency on random 2x2 trig symbols.
Outcome algebra() {
  const SampleGrid g{5, 8};
  std::mt19937_64 rng(20240101);
  double sub2 = 0.0, sub3 = 0.0, hom = 0.0, inv = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto p = random_trig_polysymbol(rng, 2, 2, 1.0, 2);
    const auto q = random_trig_polysymbol(rng, 2, 2, 0.0, 2);
    const auto r = random_trig_polysymbol(rng, 2, 2, 1.0, 1);
    sub2 = std::max(sub2, sup_norm(sub_of_product(p, q) - subprincipal(compose(p, q, 1)), g));
    sub3 = std::max(sub3, sup_norm(sub_of_triple(p, q, r) - subprincipal(compose(compose(p, q, 1), r, 1)), g));
    hom = std::max(hom, worst_component(subtract(adjoint(compose(p, q, 2), 2), compose(adjoint(q, 2), adjoint(p, 2), 2)), g));
    inv = std::max(inv, worst_component(subtract(adjoint(adjoint(p, 2), 2), p), g));
  }
  return {sub2 < 1e-10 && sub3 < 1e-10 && hom < 1e-11 && inv < 1e-11,
          std::to_string(trials) + " symbols: product " + sci(sub2) + ", triple " + sci(sub3) + " (tol 1e-10); adjoint homomorphism " +
              sci(hom) + ", involution " + sci(inv) + " (tol 1e-11)"};
}

// 2. Diagonalizer residual ledger for the rotated-framing elasticity operator.
Outcome residuals() {
  const auto pre = make_preset("lame-rotated");
  const int K = 3;
  const auto basis = build_projections(pre.A, decompose_principal(pre.A.principal(), pre.eigendata), K);
  const auto d = diagonalize(basis, K);
  double worst = 0.0;
  std::string where;
  for (const auto& e : d.ledger)
    if (e.sup >= worst) {
      worst = e.sup;
      where = e.name + " order " + std::to_string(e.component);
    }
  const std::size_t expected = (3 + 3 * 2) * (K + 1);
  return {d.ledger.size() == expected && worst < 1e-10,
          std::to_string(d.ledger.size()) + " ledger rows at K = 3, max " + sci(worst) + " at " + where + " (tol 1e-10)"};
}

// 3. Closed-form (B_j)_sub against the first iteration.
Outcome closed_form_b_sub() {
  const SampleGrid g{8, 16};
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int cases = 0;
  auto check = [&](const ProjectionBasis& basis, const HomogeneousSymbol& f) {
    for (int j : basis.frame.J) {
      const auto col = build_column(basis, j, 1, {f});
      worst = std::max(worst, sup_norm(subprincipal(col.B) - subprincipal_formula(basis, j, f), g));
      ++cases;
    }
  };
  for (int t = 0; t < 5; ++t) {
    const auto a = random_operator(rng, 1);
    const auto basis = build_projections(a, decompose_principal(a.principal()), 1);
    check(basis, HomogeneousSymbol());
    check(basis, random_real_function(rng));
  }
  for (const char* name : {"lame-rotated", "lame-perturbed"}) {
    PresetOptions o;
    o.perturbation = 0.1;
    const auto pre = make_preset(name, o);
    const auto basis = build_projections(pre.A, decompose_principal(pre.A.principal(), pre.eigendata), 1);
    check(basis, HomogeneousSymbol());
    check(basis, random_real_function(rng));
  }
  return {worst < 1e-10, std::to_string(cases) + " columns, max " + sci(worst) + " (tol 1e-10)"};
}

// 4. Zero subprincipal symbols of the diagonalized elasticity operator.
Outcome lame_subprincipal() {
  std::mt19937_64 rng(4);
  std::vector<FreeChoice> choices{{}};
  for (int i = 0; i < 3; ++i) choices.push_back(random_free_choice(rng, 2, 3));
  const SampleGrid g{8, 16};
  const auto rot = verify_lame_subprincipal({1.0, 1.0, Framing::rotated()}, 3, choices, g);
  const auto flat = verify_lame_subprincipal({1.0, 1.0, Framing::standard()}, 3, {}, g);
  double a_sub = *std::max_element(rot.a_sub.begin(), rot.a_sub.end());
  return {rot.worst() < 1e-10 && flat.worst() < 1e-10 && rot.a_sub.size() == 4,
          "(a_j)_sub over f = 0 and 3 random f: " + sci(a_sub) + "; (P_j)_sub " + sci(rot.pj_sub) + ", {P,v} " +
              sci(rot.bracket_pv) + ", v*L_sub v " + sci(rot.v_lsub_v) + ", worst identity " +
              sci(std::max(rot.worst(), flat.worst())) + " (tol 1e-10)"};
}

// 5. Flat elasticity spectra against the multiplier oracle.
Outcome exact_spectra() {
  const int N = 16;
  const auto pre = make_preset("lame-flat");
  const auto frame = decompose_principal(pre.A.principal(), pre.eigendata);
  const double window = reliable_window(frame, N);
  const auto diag = diagonalize(build_projections(pre.A, frame, 2), 2);
  const auto sa = spectrum(quantize(pre.A, N), window);
  const auto st = spectrum(quantize(diag.A_tilde, N), window);
  std::vector<std::vector<double>> sj;
  for (int j : frame.J) sj.push_back(spectrum(quantize(diag.a_of(j), N), window).eigenvalues);

  std::vector<double> oracle;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      if (a != 0 || b != 0) {
        oracle.push_back(a * a + b * b);
        oracle.push_back(3.0 * (a * a + b * b));
      }
  std::sort(oracle.begin(), oracle.end());

  const auto pa = sa.positive_in_window();
  const auto pt = st.positive_in_window();
  double vs_diag = pa.size() == pt.size() ? 0.0 : 1e300;
  double vs_oracle = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (i < pt.size()) vs_diag = std::max(vs_diag, std::abs(pa[i] - pt[i]));
    vs_oracle = std::max(vs_oracle, std::abs(pa[i] - oracle[i]));
  }
  const auto mo = match_offset(sa.eigenvalues, merge_positive(sj), window);
  return {pa.size() > 200 && vs_diag < 1e-10 && vs_oracle < 1e-10 && mo.z == 0 && mo.max < 1e-10,
          std::to_string(pa.size()) + " eigenvalues in window " + std::to_string(window).substr(0, 5) + ": A vs diag " +
              sci(vs_diag) + ", A vs oracle " + sci(vs_oracle) + ", offset z = " + std::to_string(mo.z) + " max dev " +
              sci(mo.max) + " (tol 1e-10)"};
}

// Shared by 6 and 7.
struct PerturbedRun {
  int K = 0;
  ClosenessStats stats;
  std::vector<double> zeta;
};
struct PerturbedData {
  double window = 0.0;
  std::vector<double> spec_a;
  std::vector<PerturbedRun> runs;
};

PerturbedData perturbed_runs() {
  const int N = 16;
  const auto pre = make_preset("lame-perturbed");
  const auto frame = decompose_principal(pre.A.principal(), pre.eigendata);
  PerturbedData out;
  out.window = reliable_window(frame, N);
  out.spec_a = spectrum(quantize(pre.A, N), out.window).eigenvalues;
  for (int K : {2, 3}) {
    const auto diag = diagonalize(build_projections(pre.A, frame, K), K);
    std::vector<std::vector<double>> sj;
    for (int j : frame.J) sj.push_back(spectrum(quantize(diag.a_of(j), N), out.window).eigenvalues);
    out.runs.push_back({K, closeness_stats(out.spec_a, sj, out.window), merge_positive(sj)});
  }
  return out;
}

// 6. Decay of spectral distances in k and in K.
Outcome decay(const PerturbedData& d) {
  const auto& s2 = d.runs[0].stats;
  const auto& s3 = d.runs[1].stats;
  const bool in_k = s2.upper_half_median < s2.lower_half_median && s3.upper_half_median < s3.lower_half_median;
  const bool in_K = s3.median < s2.median;
  return {in_k && in_K, "K=2 median " + sci(s2.median) + " (lower " + sci(s2.lower_half_median) + ", upper " +
                            sci(s2.upper_half_median) + "); K=3 median " + sci(s3.median) + " (lower " +
                            sci(s3.lower_half_median) + ", upper " + sci(s3.upper_half_median) + ")"};
}

// 7. Partition with equal eigenvalue counts per interval.
Outcome partition(const PerturbedData& d) {
  bool ok = true;
  std::string detail;
  std::vector<double> pos;
  for (double e : d.spec_a)
    if (e > 0.0) pos.push_back(e);
  for (const auto& run : d.runs) {
    const int n_max = partition_size_for(d.window, 1.0, 2.0, 2);
    const auto p = build_partition({pos, run.zeta}, 1.0, 2.0, 2, n_max);
    bool clear = p.C > 0.0;
    for (int n = 1; n <= n_max; ++n)
      clear = clear && p.clearance[static_cast<std::size_t>(n)] >= p.C * (1 - 1e-12);
    std::size_t windowed = 0, mismatched = 0;
    for (const auto& row : interval_counts(p, {pos, run.zeta}))
      if (row.hi <= d.window) {
        ++windowed;
        if (row.counts[0] != row.counts[1]) ++mismatched;
      }
    ok = ok && clear && mismatched == 0 && windowed > 0;
    detail += (detail.empty() ? "" : "; ") + std::string("K=") + std::to_string(run.K) + ": C = " + sci(p.C) + ", " +
              std::to_string(mismatched) + " of " + std::to_string(windowed) + " windowed intervals differ";
  }
  return {ok, detail};
}

// 8. Gram orthonormalization and the eigenvalue count lower bound.
Outcome gram_and_lower_bound() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double resid = 0.0;
  bool bound = true;
  for (int t = 0; t < 1000; ++t) {
    const int r = dim(rng);
    CMatrix E(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) E(i, j) = cplx(u(rng), u(rng));
    E = 0.5 * (E + E.adjoint()).eval();
    E *= std::abs(u(rng)) / (3.0 * r * r * E.cwiseAbs().maxCoeff());
    const auto g = gram_orthonormalize(CMatrix::Identity(r, r) + E);
    resid = std::max(resid, g.residual);
    bound = bound && g.g_defect <= g.f_defect;
  }

  const auto q = quantize(make_preset("lame-perturbed", {1.0, 1.0, 5, 0.05}).A, 4);
  const auto s = spectrum(q, std::numeric_limits<double>::infinity(), true);
  const int r = 6, first = 30;
  CMatrix v = s.eigenvectors.middleCols(first, r);
  std::normal_distribution<double> nd(0.0, 1e-6);
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < r; ++j) v(i, j) += cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<CMatrix> qr(v);
  v = qr.householderQ() * CMatrix::Identity(v.rows(), r);
  const CMatrix qv = q.apply(v);
  std::vector<double> mu;
  double eps = 0.0;
  for (int k = 0; k < r; ++k) {
    mu.push_back(v.col(k).dot(qv.col(k)).real());
    eps = std::max(eps, (qv.col(k) - mu.back() * v.col(k)).norm());
  }
  std::sort(mu.begin(), mu.end());
  const auto lb = eigencount_lower_bound(q, s, mu, v, eps);
  return {resid <= 1e-12 && bound && lb.holds(), "1000 Gram matrices: max |GFG - I| " + sci(resid) +
                                                     (bound ? ", bound holds" : ", bound VIOLATED") + "; lower bound with eps " +
                                                     sci(eps) + ": " + std::to_string(lb.count) + " >= " + std::to_string(r) +
                                                     " in [" + std::to_string(lb.lo) + ", " + std::to_string(lb.hi) + "]"};
}

// 9. Weyl's law.
Outcome weyl() {
  const int N = 32;
  const auto el = make_preset("lame-flat");
  const auto ef = decompose_principal(el.A.principal(), el.eigendata);
  const auto se = spectrum(quantize(el.A, N), reliable_window(ef, N));
  const double le = se.window;
  const auto ne = se.counting(le);
  const double re = static_cast<double>(ne) / le / (4.0 * kPi / 3.0);

  const auto lap = make_preset("laplacian");
  const auto lf = decompose_principal(lap.A.principal(), lap.eigendata);
  const auto sl = spectrum(quantize(lap.A, N), reliable_window(lf, N));
  const double ll = sl.window;
  const auto nl = sl.counting(ll);
  std::size_t lattice = 0;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      if (a * a + b * b > 0 && a * a + b * b < ll) ++lattice;
  const double rl = static_cast<double>(nl) / ll / kPi;
  return {ne >= 500 && std::abs(re - 1.0) < 0.15 && nl == lattice && std::abs(rl - 1.0) < 0.10,
          "Lame N(" + std::to_string(static_cast<int>(le)) + ") = " + std::to_string(ne) + ", ratio to 4pi/3 " +
              std::to_string(re).substr(0, 6) + " (tol 15%); |xi|^2 N(" + std::to_string(static_cast<int>(ll)) + ") = " +
              std::to_string(nl) + " vs lattice " + std::to_string(lattice) + ", ratio to pi " + std::to_string(rl).substr(0, 6) +
              " (tol 10%)"};
}

// 10. Second Weyl coefficient.
Outcome second_weyl() {
  auto run = [](const char* name) {
    const auto pre = make_preset(name);
    const auto basis = build_projections(pre.A, decompose_principal(pre.A.principal(), pre.eigendata), 2);
    const auto diag = diagonalize(basis, 2);
    return second_weyl_coefficient(basis, &diag);
  };
  const auto flat = run("lame-flat");
  const auto rot = run("lame-rotated");
  return {std::abs(flat.a_total) < 1e-8 && std::abs(rot.difference()) < 1e-6,
          "lame-flat w = " + sci(flat.a_total) + " (tol 1e-8); lame-rotated A side " + sci(rot.a_total) + ", diagonal side " +
              sci(rot.diag_total) + " (tol 1e-6 on difference)"};
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto gate = [&](int id, const char* title, double budget_s, const std::function<Outcome()>& fn) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool in_time = secs <= budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d %s: %s; %.1f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
  };

  gate(1, "symbol algebra", 60, algebra);
  gate(2, "diagonalizer residuals", 120, residuals);
  gate(3, "closed-form (B_j)_sub", 120, closed_form_b_sub);
  gate(4, "Lame (a_j)_sub = 0", 120, lame_subprincipal);
  gate(5, "exact-oracle spectra", 180, exact_spectra);
  PerturbedData data;
  const auto t0 = clock::now();
  bool have_data = true;
  try {
    data = perturbed_runs();
  } catch (const std::exception& e) {
    have_data = false;
    std::printf("perturbed runs failed: %s\n", e.what());
  }
  const double shared = std::chrono::duration<double>(clock::now() - t0).count();
  gate(6, "spectral closeness decay", 600 - shared, [&] { return have_data ? decay(data) : Outcome{}; });
  gate(7, "partition counts", 600 - shared, [&] { return have_data ? partition(data) : Outcome{}; });
  std::printf("     (criteria 6 and 7 share %.1f s of quantization)\n", shared);
  gate(8, "Gram and lower bound", 60, gram_and_lower_bound);
  gate(9, "Weyl's law", 300, weyl);
  gate(10, "second Weyl coefficient", 300, second_weyl);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
