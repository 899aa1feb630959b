#include "psdiag/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace psdiag {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lo);
  }
  return m;
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// 1D DFT coefficients for frequencies -band..band.
std::vector<cplx> twiddles(int nq, int band) {
  std::vector<cplx> tw(static_cast<std::size_t>((2 * band + 1) * nq));
  for (int f = -band; f <= band; ++f)
    for (int p = 0; p < nq; ++p)
      tw[static_cast<std::size_t>((f + band) * nq + p)] = std::polar(1.0 / nq, -kTwoPi * f * p / nq);
  return tw;
}

struct Assembly {
  CMatrix matrix;
  bool resolved = true;
};

Assembly assemble_dense(const SymbolProgram& prog, const std::vector<double>& degrees, int m, int N, int nq,
                        double tail_tol) {
  const auto dep = prog.depends();
  const bool a1 = dep & kDependsX1, a2 = dep & kDependsX2;
  const int n1 = a1 ? nq : 1, n2 = a2 ? nq : 1;
  const int band = nq / 2 - 1;
  const int quarter = nq / 4;
  const int b1 = a1 ? band : 0, b2 = a2 ? band : 0;
  const int w1 = 2 * b1 + 1, w2 = 2 * b2 + 1;
  const auto tw = twiddles(nq, band);
  auto twf = [&](int f, int p) { return tw[static_cast<std::size_t>((f + band) * nq + p)]; };
  const std::size_t ncomp = degrees.size();
  const int side = 2 * N + 1;
  const int dim = m * side * side;

  // Group nonzero modes by primitive direction.
  std::map<std::pair<int, int>, std::vector<std::array<int, 2>>> groups;
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const int g = std::gcd(std::abs(k1), std::abs(k2));
      groups[{k1 / g, k2 / g}].push_back({k1, k2});
    }

  Assembly out;
  out.matrix = CMatrix::Zero(dim, dim);
  auto ws = prog.make_workspace();
  // coefficient arrays per component: [comp][(f1 * w2 + f2) * m*m + entry]
  std::vector<std::vector<cplx>> coef(ncomp, std::vector<cplx>(static_cast<std::size_t>(w1 * w2 * m * m)));
  std::vector<cplx> partial(static_cast<std::size_t>(n1 * w2 * m * m));
  std::vector<CMatrix> samples(static_cast<std::size_t>(n1 * n2) * ncomp);
  double global_max = 0.0, global_tail = 0.0;

  for (const auto& [dir, modes] : groups) {
    const double th = std::atan2(static_cast<double>(dir.second), static_cast<double>(dir.first));
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2) {
        prog.run({kTwoPi * i1 / nq, kTwoPi * i2 / nq}, th, ws);
        for (std::size_t c = 0; c < ncomp; ++c)
          samples[static_cast<std::size_t>(i1 * n2 + i2) * ncomp + c] = prog.circle_value(c, ws);
      }
    for (std::size_t c = 0; c < ncomp; ++c) {
      // transform along x2, then x1
      std::fill(partial.begin(), partial.end(), cplx{});
      for (int i1 = 0; i1 < n1; ++i1)
        for (int f2 = -b2; f2 <= b2; ++f2)
          for (int i2 = 0; i2 < n2; ++i2) {
            const cplx w = a2 ? twf(f2, i2) : cplx(1.0);
            const CMatrix& s = samples[static_cast<std::size_t>(i1 * n2 + i2) * ncomp + c];
            cplx* dst = &partial[static_cast<std::size_t>((i1 * w2 + f2 + b2) * m * m)];
            for (int e = 0; e < m * m; ++e) dst[e] += w * s(e / m, e % m);
          }
      auto& cc = coef[c];
      std::fill(cc.begin(), cc.end(), cplx{});
      for (int f1 = -b1; f1 <= b1; ++f1)
        for (int i1 = 0; i1 < n1; ++i1) {
          const cplx w = a1 ? twf(f1, i1) : cplx(1.0);
          for (int f2 = 0; f2 < w2; ++f2) {
            const cplx* src = &partial[static_cast<std::size_t>((i1 * w2 + f2) * m * m)];
            cplx* dst = &cc[static_cast<std::size_t>(((f1 + b1) * w2 + f2) * m * m)];
            for (int e = 0; e < m * m; ++e) dst[e] += w * src[e];
          }
        }
      for (int f1 = -b1; f1 <= b1; ++f1)
        for (int f2 = -b2; f2 <= b2; ++f2) {
          const bool tail = std::max(std::abs(f1), std::abs(f2)) >= quarter;
          const cplx* p = &cc[static_cast<std::size_t>(((f1 + b1) * w2 + f2 + b2) * m * m)];
          for (int e = 0; e < m * m; ++e) {
            const double a = std::abs(p[e]);
            global_max = std::max(global_max, a);
            if (tail) global_tail = std::max(global_tail, a);
          }
        }
    }
    for (const auto& k : modes) {
      const double r = std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
      const double chi = cutoff_chi(r);
      if (chi == 0.0) continue;
      std::vector<double> weight(ncomp);
      for (std::size_t c = 0; c < ncomp; ++c) weight[c] = chi * std::pow(r, degrees[c]);
      const int col_mode = (k[0] + N) * side + (k[1] + N);
      for (int f1 = -b1; f1 <= b1; ++f1) {
        const int r1 = k[0] + f1;
        if (r1 < -N || r1 > N) continue;
        for (int f2 = -b2; f2 <= b2; ++f2) {
          const int r2 = k[1] + f2;
          if (r2 < -N || r2 > N) continue;
          const int row_mode = (r1 + N) * side + (r2 + N);
          const std::size_t off = static_cast<std::size_t>(((f1 + b1) * w2 + f2 + b2) * m * m);
          for (int e = 0; e < m * m; ++e) {
            cplx v{};
            for (std::size_t c = 0; c < ncomp; ++c) v += weight[c] * coef[c][off + static_cast<std::size_t>(e)];
            out.matrix(row_mode * m + e / m, col_mode * m + e % m) = v;
          }
        }
      }
    }
  }
  out.resolved = global_tail <= tail_tol * global_max || global_max == 0.0;
  return out;
}

}  // namespace

double cutoff_chi(double r) { return smooth_step((r - 0.5) / 0.5); }

CMatrix QuantizedOperator::dense() const {
  if (!block_diagonal) return matrix;
  CMatrix d = CMatrix::Zero(dim, dim);
  for (int i = 0; i < mode_count(); ++i) d.block(i * m, i * m, m, m) = blocks[static_cast<std::size_t>(i)];
  return d;
}

CMatrix QuantizedOperator::apply(const CMatrix& u) const {
  if (!block_diagonal) return matrix * u;
  CMatrix r(u.rows(), u.cols());
  for (int i = 0; i < mode_count(); ++i)
    r.middleRows(i * m, m) = blocks[static_cast<std::size_t>(i)] * u.middleRows(i * m, m);
  return r;
}

QuantizedOperator quantize(const PolySymbol& symbol, int N, const QuantizeOptions& opts) {
  if (symbol.rows() != symbol.cols()) throw DimensionError("quantize needs a square symbol");
  if (N < 1) throw DimensionError("quantize needs a positive cutoff");
  QuantizedOperator q;
  q.N = N;
  q.m = symbol.rows();
  q.order = symbol.order();
  q.dim = q.m * q.mode_count();
  std::vector<double> degrees;
  for (const auto& c : symbol.components()) degrees.push_back(c.degree());
  SymbolProgram prog(symbol.components());
  const int m = q.m;

  if ((prog.depends() & (kDependsX1 | kDependsX2)) == 0) {
    q.block_diagonal = true;
    q.blocks.assign(static_cast<std::size_t>(q.mode_count()), CMatrix::Zero(m, m));
    auto ws = prog.make_workspace();
    double top = 0.0;
    for (int i = 0; i < q.mode_count(); ++i) {
      const auto k = q.mode(i);
      const double r = std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
      const double chi = cutoff_chi(r);
      if (chi == 0.0) continue;
      prog.run({0.0, 0.0}, std::atan2(static_cast<double>(k[1]), static_cast<double>(k[0])), ws);
      CMatrix b = CMatrix::Zero(m, m);
      for (std::size_t c = 0; c < degrees.size(); ++c) b += chi * std::pow(r, degrees[c]) * prog.circle_value(c, ws);
      if (chi == 1.0) q.asymmetry_norm = std::max(q.asymmetry_norm, 0.5 * max_abs(b - b.adjoint()));
      top = std::max(top, max_abs(b));
      q.blocks[static_cast<std::size_t>(i)] = 0.5 * (b + b.adjoint());
    }
    if (top > 0.0 && q.asymmetry_norm > opts.asymmetry_threshold * top)
      throw PreconditionError("quantized symbol is not Hermitian: relative asymmetry " +
                              std::to_string(q.asymmetry_norm / top));
    return q;
  }

  int nq = std::max(8, opts.x_points);
  Assembly a;
  for (;;) {
    a = assemble_dense(prog, degrees, m, N, nq, opts.tail_tolerance);
    if (a.resolved) break;
    if (2 * nq > opts.max_x_points)
      throw QuadratureError("x-dependence of the symbol is not resolved with " + std::to_string(nq) +
                            " points per direction");
    nq *= 2;
  }
  q.x_points = nq;
  // Asymmetry over modes where the cutoff is inactive; the cutoff itself breaks symmetry at k = 0.
  std::vector<int> live;
  for (int i = 0; i < q.mode_count(); ++i) {
    const auto k = q.mode(i);
    if (cutoff_chi(std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]))) == 1.0)
      for (int c = 0; c < m; ++c) live.push_back(i * m + c);
  }
  double asym = 0.0;
  for (int i : live)
    for (int j : live) asym = std::max(asym, std::abs(a.matrix(i, j) - std::conj(a.matrix(j, i))));
  q.asymmetry_norm = 0.5 * asym;
  const double top = max_abs(a.matrix);
  if (top > 0.0 && q.asymmetry_norm > opts.asymmetry_threshold * top)
    throw PreconditionError("quantized symbol is not Hermitian: relative asymmetry " +
                            std::to_string(q.asymmetry_norm / top));
  q.matrix = 0.5 * (a.matrix + a.matrix.adjoint());
  return q;
}

std::vector<double> SpectrumReport::positive() const {
  std::vector<double> p;
  for (double e : eigenvalues)
    if (e > 0.0) p.push_back(e);
  return p;
}

std::vector<double> SpectrumReport::positive_in_window() const {
  std::vector<double> p;
  for (double e : eigenvalues)
    if (e > 0.0 && e <= window) p.push_back(e);
  return p;
}

std::size_t SpectrumReport::counting(double lambda) const {
  if (lambda <= 0.0) return 0;
  const auto lo = std::upper_bound(eigenvalues.begin(), eigenvalues.end(), 0.0);
  const auto hi = std::lower_bound(eigenvalues.begin(), eigenvalues.end(), lambda);
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

SpectrumReport spectrum(const QuantizedOperator& q, double window, bool vectors) {
  SpectrumReport rep;
  rep.window = window;
  if (q.block_diagonal) {
    std::vector<std::pair<double, std::pair<int, int>>> all;
    std::vector<CMatrix> vecs;
    for (int i = 0; i < q.mode_count(); ++i) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(q.blocks[static_cast<std::size_t>(i)]);
      for (int c = 0; c < q.m; ++c) all.push_back({es.eigenvalues()(c), {i, c}});
      if (vectors) vecs.push_back(es.eigenvectors());
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& e : all) rep.eigenvalues.push_back(e.first);
    if (vectors) {
      rep.eigenvectors = CMatrix::Zero(q.dim, q.dim);
      for (std::size_t n = 0; n < all.size(); ++n) {
        const auto [mode, c] = all[n].second;
        rep.eigenvectors.block(mode * q.m, static_cast<Eigen::Index>(n), q.m, 1) =
            vecs[static_cast<std::size_t>(mode)].col(c);
      }
    }
    return rep;
  }
  CMatrix a = q.matrix;
  std::vector<double> w(static_cast<std::size_t>(q.dim));
  const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', q.dim, a.data(), q.dim, w.data());
  if (info != 0) throw Error("zheevd failed with info " + std::to_string(info));
  rep.eigenvalues = std::move(w);
  if (vectors) rep.eigenvectors = std::move(a);
  return rep;
}

double reliable_window(const EigenFrame& frame, int N, const SampleGrid& grid) {
  std::vector<HomogeneousSymbol> hs;
  for (std::size_t i = 0; i < frame.J.size(); ++i)
    if (frame.J[i] > 0 || frame.m_plus == 0) hs.push_back(frame.h[i]);
  if (hs.empty()) return 0.0;
  const double s = hs.front().degree();
  double h_min = std::numeric_limits<double>::infinity();
  SymbolProgram prog(hs);
  for_each_grid_point(prog, grid, [&](std::array<double, kDim>, double, const SymbolProgram::Workspace& ws) {
    for (std::size_t i = 0; i < hs.size(); ++i) h_min = std::min(h_min, std::abs(ws.output(i).entry(0, 0)[0]));
  });
  return h_min * std::pow(0.5 * N, s);
}

std::vector<double> merge_positive(const std::vector<std::vector<double>>& spectra) {
  std::vector<double> all;
  for (const auto& s : spectra)
    for (double e : s)
      if (e > 0.0) all.push_back(e);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

std::vector<double> sorted_positive(std::span<const double> s) {
  std::vector<double> p;
  for (double e : s)
    if (e > 0.0) p.push_back(e);
  std::sort(p.begin(), p.end());
  return p;
}

// Nearest element of a sorted, nonempty list.
double nearest_in(const std::vector<double>& sorted, double x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end()) return sorted.back();
  if (it == sorted.begin()) return *it;
  const double hi = *it, lo = *(it - 1);
  return (x - lo <= hi - x) ? lo : hi;
}

std::vector<ClosenessRow> closeness_rows(const std::vector<double>& from, const std::vector<double>& to, double window) {
  std::vector<ClosenessRow> rows;
  if (to.empty()) return rows;
  for (std::size_t k = 0; k < from.size() && from[k] <= window; ++k) {
    const double n = nearest_in(to, from[k]);
    rows.push_back({k + 1, from[k], n, std::abs(from[k] - n)});
  }
  return rows;
}

}  // namespace

ClosenessStats closeness_stats(std::span<const double> spec_a, const std::vector<std::vector<double>>& spec_aj,
                               double window, int blocks) {
  ClosenessStats st;
  const auto lam = sorted_positive(spec_a);
  const auto zeta = merge_positive(spec_aj);
  st.forward = closeness_rows(lam, zeta, window);
  for (const auto& s : spec_aj) st.backward.push_back(closeness_rows(sorted_positive(s), lam, window));
  if (st.forward.empty()) return st;
  std::vector<double> d, rel;
  for (const auto& r : st.forward) {
    d.push_back(r.distance);
    rel.push_back(r.distance / r.lambda);
  }
  st.median = median_of(d);
  st.max = *std::max_element(d.begin(), d.end());
  st.median_relative = median_of(rel);
  const auto half = d.size() / 2;
  st.lower_half_median = median_of({d.begin(), d.begin() + static_cast<std::ptrdiff_t>(half)});
  st.upper_half_median = median_of({d.begin() + static_cast<std::ptrdiff_t>(half), d.end()});
  const auto nb = static_cast<std::size_t>(std::max(1, blocks));
  for (std::size_t b = 0; b < nb; ++b) {
    const auto lo = d.size() * b / nb, hi = d.size() * (b + 1) / nb;
    st.block_medians.push_back(median_of({d.begin() + static_cast<std::ptrdiff_t>(lo),
                                          d.begin() + static_cast<std::ptrdiff_t>(hi)}));
  }
  return st;
}

OffsetMatch match_offset(std::span<const double> spec_a, std::span<const double> zeta_in, double window, int z_max,
                         std::size_t min_pairs) {
  const auto lam = sorted_positive(spec_a);
  const auto zeta = sorted_positive(zeta_in);
  std::vector<int> order;
  for (int z = 0; z <= z_max; ++z) {
    order.push_back(z);
    if (z != 0) order.push_back(-z);
  }
  std::sort(order.begin(), order.end(), [](int a, int b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  });
  OffsetMatch best;
  bool found = false;
  for (int z : order) {
    OffsetMatch cur;
    cur.z = z;
    for (std::size_t k = 0; k < lam.size() && lam[k] <= window; ++k) {
      const auto idx = static_cast<std::ptrdiff_t>(k) + z;
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(zeta.size())) continue;
      cur.k.push_back(k + 1);
      cur.deviations.push_back(std::abs(lam[k] - zeta[static_cast<std::size_t>(idx)]));
    }
    if (cur.deviations.size() < min_pairs) continue;
    cur.median = median_of(cur.deviations);
    cur.max = *std::max_element(cur.deviations.begin(), cur.deviations.end());
    if (!found || cur.median < best.median) {
      best = std::move(cur);
      found = true;
    }
  }
  if (!found)
    throw InsufficientDataError("fewer than " + std::to_string(min_pairs) + " eigenvalue pairs in the window");
  return best;
}

int partition_size_for(double lambda, double alpha, double s, int d) {
  const double beta = 1.0 / (1.0 + alpha * d / s);
  return static_cast<int>(std::ceil(std::pow(std::max(lambda, 1.0) + 1.0, 1.0 / beta))) + 1;
}

Partition build_partition(const std::vector<std::vector<double>>& spectra, double alpha, double s, int d, int n_max,
                          int candidates) {
  if (alpha <= 0.0 || s <= 0.0 || d < 1 || n_max < 1) throw PreconditionError("invalid partition parameters");
  Partition p;
  p.alpha = alpha;
  p.beta = 1.0 / (1.0 + alpha * d / s);
  p.gamma = 1.0 + d * p.beta / s;
  std::vector<std::vector<double>> sorted;
  for (const auto& sp : spectra) sorted.push_back(sorted_positive(sp));
  std::vector<double> cs;
  const int nc = std::max(3, candidates | 1);
  for (int i = 0; i < nc; ++i) cs.push_back(-p.beta / 4 + (p.beta / 2) * i / (nc - 1));
  std::stable_sort(cs.begin(), cs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  auto dist = [&](double x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sp : sorted)
      if (!sp.empty()) best = std::min(best, std::abs(nearest_in(sp, x) - x));
    return best;
  };
  p.nu.push_back(0.0);
  p.c.push_back(0.0);
  p.clearance.push_back(std::numeric_limits<double>::infinity());
  p.C = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const double base = std::pow(static_cast<double>(n), p.beta);
    double best_c = 0.0, best_d = -1.0;
    for (double c : cs) {
      const double dd = dist(base + c / n);
      if (dd > best_d) {
        best_d = dd;
        best_c = c;
      }
    }
    if (best_d <= 0.0) {
      std::ostringstream msg;
      msg << "no admissible endpoint for n = " << n << " near " << base << ":";
      for (const auto& sp : sorted) {
        auto lo = std::lower_bound(sp.begin(), sp.end(), base - p.beta / (4.0 * n));
        for (; lo != sp.end() && *lo <= base + p.beta / (4.0 * n); ++lo) msg << ' ' << *lo;
      }
      throw Error(msg.str());
    }
    p.nu.push_back(base + best_c / n);
    p.c.push_back(best_c);
    const double cl = best_d * std::pow(static_cast<double>(n), p.gamma);
    p.clearance.push_back(cl);
    p.C = std::min(p.C, cl);
  }
  return p;
}

std::vector<IntervalCount> interval_counts(const Partition& p, const std::vector<std::vector<double>>& spectra) {
  std::vector<std::vector<double>> sorted;
  for (const auto& sp : spectra) sorted.push_back(sorted_positive(sp));
  std::vector<IntervalCount> rows;
  for (std::size_t n = 0; n + 1 < p.nu.size(); ++n) {
    IntervalCount row;
    row.n = static_cast<int>(n);
    row.lo = p.nu[n];
    row.hi = p.nu[n + 1];
    for (const auto& sp : sorted) {
      const auto a = std::upper_bound(sp.begin(), sp.end(), row.lo);
      const auto b = std::upper_bound(sp.begin(), sp.end(), row.hi);
      row.counts.push_back(static_cast<std::size_t>(b - a));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

GramResult gram_orthonormalize(const CMatrix& F) {
  const auto r = F.rows();
  if (r == 0 || F.cols() != r) throw DimensionError("gram_orthonormalize needs a square matrix");
  if (max_abs(F - F.adjoint()) > 1e-12) throw PreconditionError("Gram matrix is not Hermitian");
  const CMatrix I = CMatrix::Identity(r, r);
  GramResult g;
  g.f_defect = max_abs(F - I);
  if (g.f_defect > 1.0 / (3.0 * static_cast<double>(r * r)))
    throw PreconditionError("Gram matrix too far from the identity: max |F - I| = " + std::to_string(g.f_defect));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (F + F.adjoint()));
  const Eigen::VectorXd isq = es.eigenvalues().array().rsqrt();
  g.G = es.eigenvectors() * isq.asDiagonal() * es.eigenvectors().adjoint();
  g.residual = max_abs(g.G * F * g.G - I);
  g.g_defect = max_abs(g.G - I);
  if (g.residual > 1e-12) throw Error("inverse square root lost accuracy: " + std::to_string(g.residual));
  if (g.g_defect > g.f_defect) throw Error("max-norm bound |G - I| <= |F - I| violated");
  return g;
}

LowerBoundReport eigencount_lower_bound(const QuantizedOperator& q, const SpectrumReport& spec,
                                        std::span<const double> mu, const CMatrix& u, double eps) {
  const auto r = static_cast<std::size_t>(u.cols());
  if (mu.size() != r || u.rows() != q.dim) throw DimensionError("eigencount_lower_bound shape mismatch");
  if (r == 0) return {};
  if (max_abs(u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())) > 1e-10)
    throw PreconditionError("trial vectors are not orthonormal");
  LowerBoundReport rep;
  rep.r = r;
  const CMatrix qu = q.apply(u);
  for (std::size_t k = 0; k < r; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    rep.max_residual = std::max(rep.max_residual, (qu.col(kk) - mu[k] * u.col(kk)).norm());
  }
  if (rep.max_residual > eps) throw PreconditionError("trial residual exceeds eps");
  const auto [lo, hi] = std::minmax_element(mu.begin(), mu.end());
  const double pad = std::sqrt(static_cast<double>(r)) * eps;
  rep.lo = *lo - pad;
  rep.hi = *hi + pad;
  for (double e : spec.eigenvalues)
    if (e >= rep.lo && e <= rep.hi) ++rep.count;
  return rep;
}

namespace {

// Runs fn over the active x-grid times the theta grid; the int numbers the x-points.
void sweep(const SymbolProgram& prog, const SampleGrid& grid,
           const std::function<void(std::array<double, kDim>, int, double, const SymbolProgram::Workspace&)>& fn) {
  const auto dep = prog.depends();
  const int n1 = (dep & kDependsX1) ? grid.n_x : 1;
  const int n2 = (dep & kDependsX2) ? grid.n_x : 1;
  auto ws = prog.make_workspace();
  int xi = 0;
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2, ++xi) {
      const std::array<double, kDim> x{kTwoPi * i1 / grid.n_x, kTwoPi * i2 / grid.n_x};
      for (int it = 0; it < grid.n_theta; ++it) {
        const double th = kTwoPi * it / grid.n_theta;
        prog.run(x, th, ws);
        fn(x, xi, th, ws);
      }
    }
}

int x_point_count(const SymbolProgram& prog, const SampleGrid& grid) {
  const auto dep = prog.depends();
  return ((dep & kDependsX1) ? grid.n_x : 1) * ((dep & kDependsX2) ? grid.n_x : 1);
}

}  // namespace

double weyl_coefficient(const EigenFrame& frame, const SampleGrid& grid) {
  std::vector<HomogeneousSymbol> hs;
  for (std::size_t i = 0; i < frame.J.size(); ++i)
    if (frame.J[i] > 0) hs.push_back(frame.h[i]);
  if (hs.empty()) return 0.0;
  const double s = hs.front().degree();
  constexpr int d = kDim;
  SymbolProgram prog(hs);
  double sum = 0.0;
  sweep(prog, grid, [&](std::array<double, kDim>, int, double, const SymbolProgram::Workspace& ws) {
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double g = ws.output(i).entry(0, 0)[0].real();
      if (!(g > 0.0)) throw QuadratureError("positive eigenvalue branch is not positive");
      sum += std::pow(g, -d / s) / d;
    }
  });
  // (2 pi)^{-2} * (2 pi)^2 mean_x * (2 pi / n_theta) sum_theta
  const int nx = x_point_count(prog, grid);
  return sum * kTwoPi / grid.n_theta / nx;
}

double weyl_prediction(const EigenFrame& frame, double lambda, const SampleGrid& grid) {
  if (lambda <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < frame.J.size(); ++i)
    if (frame.J[i] > 0) s = frame.h[i].degree();
  if (s == 0.0) return 0.0;
  return weyl_coefficient(frame, grid) * std::pow(lambda, kDim / s);
}

LocalCounting local_counting(const QuantizedOperator& q, const SpectrumReport& spec, double lambda, int n) {
  LocalCounting lc;
  lc.n = n > 0 ? n : 2 * q.N + 2;
  lc.density.assign(static_cast<std::size_t>(lc.n * lc.n), 0.0);
  lc.count = spec.counting(lambda);
  if (lc.count == 0) return lc;
  if (spec.eigenvectors.cols() != q.dim) throw PreconditionError("local_counting needs eigenvectors");
  const int side = q.side(), m = q.m, nn = lc.n;
  // e^{i k x_p} per direction
  CMatrix ex(side, nn);
  for (int k = -q.N; k <= q.N; ++k)
    for (int p = 0; p < nn; ++p) ex(k + q.N, p) = std::polar(1.0, kTwoPi * k * p / nn);
  const double norm = 1.0 / (kTwoPi * kTwoPi);
  for (std::size_t idx = 0; idx < spec.eigenvalues.size(); ++idx) {
    const double e = spec.eigenvalues[idx];
    if (!(e > 0.0 && e < lambda)) continue;
    const auto col = spec.eigenvectors.col(static_cast<Eigen::Index>(idx));
    for (int c = 0; c < m; ++c) {
      CMatrix coef(side, side);
      for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) coef(i, j) = col((i * side + j) * m + c);
      const CMatrix vals = ex.transpose() * coef * ex;  // (p1, p2)
      for (int p1 = 0; p1 < nn; ++p1)
        for (int p2 = 0; p2 < nn; ++p2) lc.density[static_cast<std::size_t>(p1 * nn + p2)] += norm * std::norm(vals(p1, p2));
    }
  }
  const double cell = (kTwoPi / nn) * (kTwoPi / nn);
  lc.integral = cell * std::accumulate(lc.density.begin(), lc.density.end(), 0.0);
  return lc;
}

SecondWeylReport second_weyl_coefficient(const ProjectionBasis& basis, const Diagonalization* diag,
                                         const SampleGrid& grid) {
  if (basis.depth < 1) throw PreconditionError("second Weyl coefficient needs projections of depth >= 1");
  if (diag && diag->depth < 1) throw PreconditionError("second Weyl coefficient needs a_j of depth >= 1");
  constexpr int d = kDim;
  const auto& frame = basis.frame;
  const HomogeneousSymbol a_sub = subprincipal(basis.A.extended(std::max(1, basis.A.depth())));
  const HomogeneousSymbol& a_prin = basis.A.principal();
  SecondWeylReport rep;
  std::vector<HomogeneousSymbol> outs;
  for (std::size_t i = 0; i < frame.J.size(); ++i) {
    const int j = frame.J[i];
    if (j <= 0) continue;
    rep.J.push_back(j);
    const auto& P = frame.P[i];
    const auto& h = frame.h[i];
    const HomogeneousSymbol pj_sub = subprincipal(basis.of(j));
    const HomogeneousSymbol integrand =
        (P * a_sub + cplx(0, 0.5) * (poisson(P, P) * a_prin) - cplx(1.0 / (d - 1)) * (h * pj_sub)).trace();
    outs.push_back(h);
    outs.push_back(integrand);
    outs.push_back(diag ? subprincipal(diag->a_of(j).extended(std::max(1, diag->a_of(j).depth())))
                        : HomogeneousSymbol::zero(1, 1, integrand.degree()));
  }
  const std::size_t nj = rep.J.size();
  rep.a_side.assign(nj, 0.0);
  rep.diag_side.assign(nj, 0.0);
  if (nj == 0) return rep;
  const double s = outs[0].degree();
  const double rho = outs[1].degree();
  SymbolProgram prog(outs);
  const int nx = x_point_count(prog, grid);
  std::vector<double> local(static_cast<std::size_t>(nx), 0.0);
  std::vector<std::array<double, kDim>> xs(static_cast<std::size_t>(nx));
  const double pref = -static_cast<double>(d * (d - 1)) / std::pow(kTwoPi, d);
  const double dtheta = kTwoPi / grid.n_theta;
  sweep(prog, grid, [&](std::array<double, kDim> x, int xi, double, const SymbolProgram::Workspace& ws) {
    xs[static_cast<std::size_t>(xi)] = x;
    for (std::size_t k = 0; k < nj; ++k) {
      const double g = ws.output(3 * k).entry(0, 0)[0].real();
      if (!(g > 0.0)) throw QuadratureError("fiber {h < 1} is unbounded");
      const double R = std::pow(g, -1.0 / s);
      const double radial = std::pow(R, rho + d) / (rho + d);
      const cplx fa = ws.output(3 * k + 1).entry(0, 0)[0];
      const cplx fd = ws.output(3 * k + 2).entry(0, 0)[0];
      rep.imag_residual = std::max({rep.imag_residual, std::abs(fa.imag()), std::abs(fd.imag())});
      const double wa = pref * fa.real() * radial * dtheta;
      local[static_cast<std::size_t>(xi)] += wa;
      rep.a_side[k] += wa;
      rep.diag_side[k] += pref * fd.real() * radial * dtheta;
    }
  });
  const double xw = kTwoPi * kTwoPi / nx;
  for (std::size_t k = 0; k < nj; ++k) {
    rep.a_side[k] *= xw;
    rep.diag_side[k] *= xw;
    rep.a_total += rep.a_side[k];
    rep.diag_total += rep.diag_side[k];
  }
  for (int i = 0; i < nx; ++i)
    rep.density.push_back({xs[static_cast<std::size_t>(i)][0], xs[static_cast<std::size_t>(i)][1],
                           local[static_cast<std::size_t>(i)]});
  return rep;
}

void write_eigenvalues(std::ostream& out, const std::vector<std::pair<std::string, const SpectrumReport*>>& tables) {
  out << "index,value,source\n";
  out.precision(15);
  for (const auto& [tag, rep] : tables)
    for (std::size_t i = 0; i < rep->eigenvalues.size(); ++i) out << i + 1 << ',' << rep->eigenvalues[i] << ',' << tag << '\n';
}

void write_closeness(std::ostream& out, const std::vector<ClosenessRow>& rows) {
  out << "k,lambda,nearest,distance\n";
  out.precision(15);
  for (const auto& r : rows) out << r.k << ',' << r.lambda << ',' << r.nearest << ',' << r.distance << '\n';
}

void write_partition(std::ostream& out, const std::vector<IntervalCount>& rows) {
  out << "n,nu,N_A,n_diag\n";
  out.precision(15);
  for (const auto& r : rows) {
    out << r.n << ',' << r.lo;
    for (std::size_t i = 0; i < 2; ++i) out << ',' << (i < r.counts.size() ? r.counts[i] : 0);
    out << '\n';
  }
}

void write_weyl(std::ostream& out, const std::vector<WeylRow>& rows) {
  out << "lambda,count,prediction,ratio\n";
  out.precision(15);
  for (const auto& r : rows) out << r.lambda << ',' << r.count << ',' << r.prediction << ',' << r.ratio() << '\n';
}

}  // namespace psdiag
