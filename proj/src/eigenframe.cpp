#include "psdiag/eigenframe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace psdiag {

int EigenFrame::pos(int j) const {
  const auto it = std::find(J.begin(), J.end(), j);
  if (it == J.end()) throw DimensionError("index " + std::to_string(j) + " not in frame");
  return static_cast<int>(it - J.begin());
}

namespace {

struct PointwiseSpectrum {
  int m_plus = -1;
  std::vector<double> min_component;  // per eigenvector position and component, min over grid of |v_c|
};

// Dense pointwise checks on the principal symbol itself.
PointwiseSpectrum scan_principal(const HomogeneousSymbol& a, const FrameOptions& opts) {
  const int m = a.rows();
  PointwiseSpectrum out;
  out.min_component.assign(static_cast<std::size_t>(m * m), std::numeric_limits<double>::infinity());
  SymbolProgram prog({a});
  for_each_grid_point(prog, opts.grid, [&](std::array<double, kDim> x, double th, const SymbolProgram::Workspace& ws) {
    const CMatrix g = prog.circle_value(0, ws);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw FrameError("principal symbol is not Hermitian at x = (" + std::to_string(x[0]) + ", " +
                       std::to_string(x[1]) + "), theta = " + std::to_string(th));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    const Eigen::VectorXd& lam = es.eigenvalues();
    int pos = 0;
    for (int i = 0; i < m; ++i) {
      if (std::abs(lam(i)) < opts.gap_tolerance) throw SignChangeError("principal symbol is not elliptic (eigenvalue near 0)");
      if (lam(i) > 0) ++pos;
    }
    for (int i = 0; i + 1 < m; ++i)
      if (lam(i + 1) - lam(i) < opts.gap_tolerance)
        throw SimplicityError("eigenvalue gap " + std::to_string(lam(i + 1) - lam(i)) + " below tolerance");
    if (out.m_plus >= 0 && pos != out.m_plus) throw SignChangeError("number of positive eigenvalues is not constant");
    out.m_plus = pos;
    for (int j = 0; j < m; ++j)
      for (int c = 0; c < m; ++c) {
        auto& mc = out.min_component[static_cast<std::size_t>(j * m + c)];
        mc = std::min(mc, std::abs(es.eigenvectors()(c, j)));
      }
  });
  return out;
}

void validate_frame(const HomogeneousSymbol& a, const EigenFrame& f, const FrameOptions& opts) {
  const int m = a.rows();
  std::vector<HomogeneousSymbol> outs{a};
  for (const auto& h : f.h) outs.push_back(h);
  for (const auto& v : f.v) outs.push_back(v);
  SymbolProgram prog(outs);
  const double tol = opts.check_tolerance;
  auto fail = [](const std::string& what, std::array<double, kDim> x, double th) {
    throw FrameError(what + " at x = (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                     "), theta = " + std::to_string(th));
  };
  for_each_grid_point(prog, opts.grid, [&](std::array<double, kDim> x, double th, const SymbolProgram::Workspace& ws) {
    const CMatrix g = prog.circle_value(0, ws);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    CMatrix V(m, m);
    Eigen::VectorXd hv(m);
    for (int p = 0; p < m; ++p) {
      const cplx hp = prog.circle_value(1 + static_cast<std::size_t>(p), ws)(0, 0);
      if (std::abs(hp.imag()) > tol * scale) fail("eigenvalue field is not real", x, th);
      hv(p) = hp.real();
      V.col(p) = prog.circle_value(1 + static_cast<std::size_t>(m + p), ws);
      const int j = f.J[static_cast<std::size_t>(p)];
      if ((j > 0) != (hv(p) > 0)) throw SignChangeError("sign of eigenvalue field " + std::to_string(j) + " does not match its index");
      if (p > 0 && hv(p) - hv(p - 1) < opts.gap_tolerance)
        throw SimplicityError("eigenvalue fields not strictly increasing or gap below tolerance");
    }
    if ((V.adjoint() * V - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > tol) fail("eigenvectors not orthonormal", x, th);
    if ((V * V.adjoint() - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > tol) fail("projections do not sum to identity", x, th);
    if ((V * hv.cast<cplx>().asDiagonal() * V.adjoint() - g).cwiseAbs().maxCoeff() > tol * scale)
      fail("sum of h P differs from the principal symbol", x, th);
  });
}

// Jumps between neighbouring points of a refined periodic grid reveal
// discontinuous or non-periodic eigenvector fields.
void check_continuity(const EigenFrame& f, const SampleGrid& grid) {
  SymbolProgram prog(f.v);
  const auto dep = prog.depends();
  const int nx = 2 * grid.n_x, nt = 2 * grid.n_theta;
  const int n1 = (dep & kDependsX1) ? nx : 1;
  const int n2 = (dep & kDependsX2) ? nx : 1;
  const int n3 = (dep & kDependsTheta) ? nt : 1;
  const double two_pi = 2.0 * std::acos(-1.0);
  std::vector<CMatrix> vals(static_cast<std::size_t>(n1) * n2 * n3);
  auto ws = prog.make_workspace();
  const int m = f.size();
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) {
        prog.run({two_pi * i1 / nx, two_pi * i2 / nx}, two_pi * i3 / nt, ws);
        CMatrix V(m, m);
        for (int p = 0; p < m; ++p) V.col(p) = prog.circle_value(static_cast<std::size_t>(p), ws);
        vals[(static_cast<std::size_t>(i1) * n2 + i2) * n3 + i3] = V;
      }
  auto at = [&](int i1, int i2, int i3) -> const CMatrix& {
    return vals[(static_cast<std::size_t>((i1 + n1) % n1) * n2 + (i2 + n2) % n2) * n3 + (i3 + n3) % n3];
  };
  constexpr double kJump = 0.5;
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) {
        const CMatrix& c = at(i1, i2, i3);
        double jump = 0.0;
        if (n1 > 1) jump = std::max(jump, (at(i1 + 1, i2, i3) - c).colwise().norm().maxCoeff());
        if (n2 > 1) jump = std::max(jump, (at(i1, i2 + 1, i3) - c).colwise().norm().maxCoeff());
        if (n3 > 1) jump = std::max(jump, (at(i1, i2, i3 + 1) - c).colwise().norm().maxCoeff());
        if (jump > kJump) throw FrameError("eigenvector field is discontinuous or not periodic on the sample grid");
      }
}

}  // namespace

EigenFrame decompose_principal(const HomogeneousSymbol& a_prin, const std::optional<AnalyticEigendata>& supplied,
                               const FrameOptions& opts) {
  if (a_prin.rows() != a_prin.cols()) throw DimensionError("principal symbol must be square");
  const int m = a_prin.rows();
  const double s = a_prin.degree();
  const PointwiseSpectrum scan = scan_principal(a_prin, opts);

  EigenFrame f;
  f.m_plus = scan.m_plus;
  f.m_minus = m - scan.m_plus;
  for (int p = 0; p < m; ++p) f.J.push_back(p < f.m_minus ? p - f.m_minus : p - f.m_minus + 1);

  if (supplied) {
    if (static_cast<int>(supplied->h.size()) != m || static_cast<int>(supplied->v.size()) != m)
      throw DimensionError("supplied eigendata has the wrong number of fields");
    for (int p = 0; p < m; ++p) {
      const auto& h = supplied->h[static_cast<std::size_t>(p)];
      const auto& v = supplied->v[static_cast<std::size_t>(p)];
      if (h.rows() != 1 || h.cols() != 1 || std::abs(h.degree() - s) > 1e-12)
        throw DimensionError("eigenvalue field must be scalar with the degree of the principal symbol");
      if (v.rows() != m || v.cols() != 1 || std::abs(v.degree()) > 1e-12)
        throw DimensionError("eigenvector field must be an m x 1 symbol of degree 0");
    }
    f.h = supplied->h;
    f.v = supplied->v;
    f.mode = FrameMode::Analytic;
  } else {
    std::vector<int> gauge(static_cast<std::size_t>(m), -1);
    f.mode = FrameMode::Numeric;
    if (!opts.numeric) {
      f.mode = FrameMode::Propagated;
      for (int j = 0; j < m; ++j) {
        int best = 0;
        for (int c = 1; c < m; ++c)
          if (scan.min_component[static_cast<std::size_t>(j * m + c)] > scan.min_component[static_cast<std::size_t>(j * m + best)])
            best = c;
        if (scan.min_component[static_cast<std::size_t>(j * m + best)] < 1e-3)
          throw FrameError("no eigenvector component stays away from zero; supply analytic eigendata");
        gauge[static_cast<std::size_t>(j)] = best;
      }
    }
    const auto es = eigen_system(a_prin.regraded(0.0), gauge);
    for (int p = 0; p < m; ++p) {
      f.h.push_back(es.block(0, p, 1, 1).regraded(s));
      f.v.push_back(es.block(1, p, m, 1));
    }
  }
  for (const auto& v : f.v) f.P.push_back(v * v.adjoint());
  validate_frame(a_prin, f, opts);
  if (f.mode != FrameMode::Numeric) check_continuity(f, opts.grid);
  return f;
}

EigenFrame gauge_rotate(const EigenFrame& frame, int j, const HomogeneousSymbol& phi, const SampleGrid& grid) {
  if (phi.rows() != 1 || phi.cols() != 1 || std::abs(phi.degree()) > 1e-12)
    throw DimensionError("gauge function must be a scalar symbol of degree 0");
  SymbolProgram prog({phi});
  for_each_grid_point(prog, grid, [&](std::array<double, kDim>, double, const SymbolProgram::Workspace& ws) {
    const cplx p = prog.circle_value(0, ws)(0, 0);
    if (std::abs(p.imag()) > 1e-14 * std::max(1.0, std::abs(p))) throw FrameError("gauge function is not real");
  });
  EigenFrame out = frame;
  const int p = frame.pos(j);
  out.v[static_cast<std::size_t>(p)] = phi.scaled(cplx(0, 1)).exp() * frame.v[static_cast<std::size_t>(p)];
  out.P[static_cast<std::size_t>(p)] = out.v[static_cast<std::size_t>(p)] * out.v[static_cast<std::size_t>(p)].adjoint();
  return out;
}

double simplicity_margin(const EigenFrame& frame, const SampleGrid& grid) {
  SymbolProgram prog(frame.h);
  double margin = std::numeric_limits<double>::infinity();
  for_each_grid_point(prog, grid, [&](std::array<double, kDim>, double, const SymbolProgram::Workspace& ws) {
    std::vector<double> h;
    for (std::size_t p = 0; p < prog.output_count(); ++p) h.push_back(prog.circle_value(p, ws)(0, 0).real());
    for (std::size_t a = 0; a < h.size(); ++a)
      for (std::size_t b = a + 1; b < h.size(); ++b) margin = std::min(margin, std::abs(h[a] - h[b]));
  });
  return margin;
}

}  // namespace psdiag
