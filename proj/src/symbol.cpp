#include "psdiag/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace psdiag {

void JetMatrix::reset(int rows, int cols, int stride) {
  rows_ = rows;
  cols_ = cols;
  stride_ = stride;
  data_.assign(static_cast<std::size_t>(rows) * cols * stride, cplx{});
}

CMatrix JetMatrix::values() const {
  CMatrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = entry(i, j)[0];
  return m;
}

LeafArgs::LeafArgs(int nvars, int order, std::array<int, kDim> x_var, int theta_var, std::array<double, kDim> x,
                   double theta)
    : nvars_(nvars), order_(order), x_var_(x_var), theta_var_(theta_var), x_(x), theta_(theta) {}

Jet LeafArgs::x(int alpha) const {
  const auto a = static_cast<std::size_t>(alpha);
  if (x_var_[a] < 0) return Jet(nvars_, order_, x_[a]);
  return Jet::variable(nvars_, order_, x_var_[a], x_[a]);
}

Jet LeafArgs::theta() const { return Jet::variable(nvars_, order_, theta_var_, theta_); }

namespace {

int stride_of(const SymbolNode::EvalArgs& args) { return args.basis->size(args.order); }

void zero_fill(JetMatrix& out) {
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) std::fill_n(out.entry(i, j), out.stride(), cplx{});
}

class LeafNode final : public SymbolNode {
 public:
  LeafNode(int rows, int cols, double degree, std::uint8_t depends, LeafFunction fn, int budget)
      : SymbolNode(Kind::Leaf, rows, cols, degree), fn_(std::move(fn)) {
    depends_ = depends;
    budget_ = budget;
  }

  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    LeafArgs leaf(args.nvars, args.order, args.x_var, args.theta_var, args.x, args.theta);
    const auto jets = fn_(leaf);
    if (jets.size() != static_cast<std::size_t>(rows_) * cols_) throw DimensionError("leaf returned wrong entry count");
    const int n = stride_of(args);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        const Jet& e = jets[static_cast<std::size_t>(i) * cols_ + j];
        if (e.nvars() != args.nvars) throw DimensionError("leaf jet has wrong variable count");
        cplx* o = out.entry(i, j);
        const int have = std::min<int>(n, static_cast<int>(e.size()));
        std::copy_n(e.data(), have, o);
        std::fill(o + have, o + n, cplx{});
      }
    }
  }

 private:
  LeafFunction fn_;
};

class ConstantNode final : public SymbolNode {
 public:
  ConstantNode(const CMatrix& c, double degree, bool zero)
      : SymbolNode(Kind::Constant, static_cast<int>(c.rows()), static_cast<int>(c.cols()), degree), c_(c) {
    is_zero_ = zero;
  }
  void evaluate(const EvalArgs&, JetMatrix& out) const override {
    zero_fill(out);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out.entry(i, j)[0] = c_(i, j);
  }
  const CMatrix& matrix() const { return c_; }

 private:
  CMatrix c_;
};

class LinCombNode final : public SymbolNode {
 public:
  LinCombNode(std::vector<NodePtr> terms, std::vector<cplx> coefs, int rows, int cols, double degree)
      : SymbolNode(Kind::LinComb, rows, cols, degree), coefs_(std::move(coefs)) {
    children_ = std::move(terms);
    for (const auto& c : children_) {
      depends_ |= c->depends();
      budget_ = std::min(budget_, c->budget());
    }
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    zero_fill(out);
    for (std::size_t t = 0; t < children_.size(); ++t) {
      const JetMatrix& c = *args.children[t];
      const cplx s = coefs_[t];
      for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
          const cplx* src = c.entry(i, j);
          cplx* dst = out.entry(i, j);
          for (int k = 0; k < n; ++k) dst[k] += s * src[k];
        }
      }
    }
  }

 private:
  std::vector<cplx> coefs_;
};

class ProductNode final : public SymbolNode {
 public:
  enum class Mode { Matrix, LeftScalar, RightScalar };
  ProductNode(NodePtr a, NodePtr b, Mode mode, int rows, int cols, double degree)
      : SymbolNode(Kind::Product, rows, cols, degree), mode_(mode) {
    depends_ = a->depends() | b->depends();
    budget_ = std::min(a->budget(), b->budget());
    children_ = {std::move(a), std::move(b)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const JetMatrix& a = *args.children[0];
    const JetMatrix& b = *args.children[1];
    zero_fill(out);
    const bool a_scalar = mode_ == Mode::LeftScalar;
    const bool b_scalar = mode_ == Mode::RightScalar;
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        cplx* dst = out.entry(i, j);
        if (a_scalar) {
          jet_mul_acc(*args.basis, args.order, a.entry(0, 0), b.entry(i, j), dst);
        } else if (b_scalar) {
          jet_mul_acc(*args.basis, args.order, a.entry(i, j), b.entry(0, 0), dst);
        } else {
          for (int k = 0; k < a.cols(); ++k) jet_mul_acc(*args.basis, args.order, a.entry(i, k), b.entry(k, j), dst);
        }
      }
    }
  }

 private:
  Mode mode_;
};

class AdjointNode final : public SymbolNode {
 public:
  AdjointNode(NodePtr a, bool conjugate)
      : SymbolNode(conjugate ? Kind::Adjoint : Kind::Transpose, a->cols(), a->rows(), a->degree()),
        conjugate_(conjugate) {
    depends_ = a->depends();
    budget_ = a->budget();
    children_ = {std::move(a)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    const JetMatrix& a = *args.children[0];
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        const cplx* src = a.entry(j, i);
        cplx* dst = out.entry(i, j);
        if (conjugate_) {
          for (int k = 0; k < n; ++k) dst[k] = std::conj(src[k]);
        } else {
          std::copy_n(src, n, dst);
        }
      }
    }
  }

 private:
  bool conjugate_;
};

class DerivXNode final : public SymbolNode {
 public:
  DerivXNode(NodePtr a, int alpha) : SymbolNode(Kind::DerivX, a->rows(), a->cols(), a->degree()), alpha_(alpha) {
    depends_ = a->depends();
    budget_ = a->budget() - 1;
    children_ = {std::move(a)};
  }
  int child_order_offset(std::size_t) const override { return 1; }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    const int var = args.x_var[static_cast<std::size_t>(alpha_)];
    const JetMatrix& a = *args.children[0];
    if (var < 0) {
      zero_fill(out);
      return;
    }
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        const cplx* src = a.entry(i, j);
        cplx* dst = out.entry(i, j);
        for (int k = 0; k < n; ++k) {
          const int s = args.basis->shifted(k, var);
          dst[k] = static_cast<double>(args.basis->exponent(k)[static_cast<std::size_t>(var)] + 1) * src[s];
        }
      }
    }
  }

 private:
  int alpha_;
};

// d/dxi_alpha of |xi|^rho g(theta) is |xi|^{rho-1} times
//   rho cos(theta) g - sin(theta) g'   (alpha = 0)
//   rho sin(theta) g + cos(theta) g'   (alpha = 1).
class DerivXiNode final : public SymbolNode {
 public:
  DerivXiNode(NodePtr a, int alpha)
      : SymbolNode(Kind::DerivXi, a->rows(), a->cols(), a->degree() - 1.0), alpha_(alpha) {
    depends_ = a->depends() | kDependsTheta;
    budget_ = a->budget() - 1;
    children_ = {std::move(a)};
  }
  int child_order_offset(std::size_t) const override { return 1; }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    const int tv = args.theta_var;
    const double rho = children_[0]->degree();
    const JetMatrix& a = *args.children[0];
    const cplx* c = args.cos_theta->data();
    const cplx* s = args.sin_theta->data();
    const cplx* first = alpha_ == 0 ? c : s;
    const cplx* second = alpha_ == 0 ? s : c;
    const double sign = alpha_ == 0 ? -1.0 : 1.0;
    std::vector<cplx> g_theta(static_cast<std::size_t>(n));
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        const cplx* src = a.entry(i, j);
        cplx* dst = out.entry(i, j);
        std::fill_n(dst, n, cplx{});
        for (int k = 0; k < n; ++k) {
          const int sh = args.basis->shifted(k, tv);
          g_theta[static_cast<std::size_t>(k)] =
              static_cast<double>(args.basis->exponent(k)[static_cast<std::size_t>(tv)] + 1) * src[sh];
        }
        if (rho != 0.0) jet_mul_acc_scaled(*args.basis, args.order, rho, first, src, dst);
        jet_mul_acc_scaled(*args.basis, args.order, sign, second, g_theta.data(), dst);
      }
    }
  }

 private:
  int alpha_;
};

class UnaryNode final : public SymbolNode {
 public:
  enum class Op { Reciprocal, Exp };
  UnaryNode(NodePtr a, Op op, double degree) : SymbolNode(Kind::Unary, 1, 1, degree), op_(op) {
    depends_ = a->depends();
    budget_ = a->budget();
    children_ = {std::move(a)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    Jet j(args.nvars, args.order);
    std::copy_n(args.children[0]->entry(0, 0), n, j.data());
    const Jet r = op_ == Op::Reciprocal ? reciprocal(j) : psdiag::exp(j);
    std::copy_n(r.data(), n, out.entry(0, 0));
  }

 private:
  Op op_;
};

class TraceNode final : public SymbolNode {
 public:
  explicit TraceNode(NodePtr a) : SymbolNode(Kind::Trace, 1, 1, a->degree()) {
    depends_ = a->depends();
    budget_ = a->budget();
    children_ = {std::move(a)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    const JetMatrix& a = *args.children[0];
    cplx* dst = out.entry(0, 0);
    std::fill_n(dst, n, cplx{});
    for (int i = 0; i < a.rows(); ++i) {
      const cplx* src = a.entry(i, i);
      for (int k = 0; k < n; ++k) dst[k] += src[k];
    }
  }
};

class BlockNode final : public SymbolNode {
 public:
  BlockNode(NodePtr a, int r0, int c0, int rows, int cols)
      : SymbolNode(Kind::Block, rows, cols, a->degree()), r0_(r0), c0_(c0) {
    depends_ = a->depends();
    budget_ = a->budget();
    children_ = {std::move(a)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) std::copy_n(args.children[0]->entry(r0_ + i, c0_ + j), n, out.entry(i, j));
  }

 private:
  int r0_, c0_;
};

class HStackNode final : public SymbolNode {
 public:
  HStackNode(std::vector<NodePtr> cols, int rows, int total_cols, double degree)
      : SymbolNode(Kind::HStack, rows, total_cols, degree) {
    children_ = std::move(cols);
    for (const auto& c : children_) {
      depends_ |= c->depends();
      budget_ = std::min(budget_, c->budget());
    }
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    int c0 = 0;
    for (std::size_t t = 0; t < children_.size(); ++t) {
      const JetMatrix& c = *args.children[t];
      for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < c.cols(); ++j) std::copy_n(c.entry(i, j), n, out.entry(i, c0 + j));
      c0 += c.cols();
    }
  }
};

class RegradeNode final : public SymbolNode {
 public:
  RegradeNode(NodePtr a, double degree) : SymbolNode(Kind::Regrade, a->rows(), a->cols(), degree) {
    depends_ = a->depends();
    budget_ = a->budget();
    is_zero_ = a->is_zero();
    children_ = {std::move(a)};
  }
  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int n = stride_of(args);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) std::copy_n(args.children[0]->entry(i, j), n, out.entry(i, j));
  }
};

// Eigenpairs of a Hermitian jet matrix M(t) = sum_beta M_beta t^beta, solved
// order by order. For a simple eigenvalue,
//   (M_0 - l_0) v_beta = S + l_beta v_0,
//   S = -sum_{g != 0} M_g v_{beta-g} + sum_{g != 0, beta} l_g v_{beta-g},
// so l_beta = -v_0^* S and v_beta is fixed up to a multiple of v_0 whose real
// part comes from normalization and imaginary part from the gauge.
class EigenNode final : public SymbolNode {
 public:
  EigenNode(NodePtr a, std::vector<int> gauge)
      : SymbolNode(Kind::Eigen, a->rows() + 1, a->cols(), 0.0), gauge_(std::move(gauge)) {
    depends_ = a->depends();
    budget_ = a->budget();
    for (int g : gauge_)
      if (g < 0) budget_ = 0;
    children_ = {std::move(a)};
  }

  void evaluate(const EvalArgs& args, JetMatrix& out) const override {
    const int m = cols_;
    const int n = stride_of(args);
    const JetMatrix& a = *args.children[0];
    const auto& basis = *args.basis;
    const int nv = args.nvars;

    std::vector<CMatrix> M(static_cast<std::size_t>(n), CMatrix(m, m));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M[static_cast<std::size_t>(k)](i, j) = a.entry(i, j)[k];
    CMatrix m0 = 0.5 * (M[0] + M[0].adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m0);
    const Eigen::VectorXd lam0 = es.eigenvalues();
    CMatrix V0 = es.eigenvectors();

    zero_fill(out);
    for (int j = 0; j < m; ++j) {
      int g = gauge_[static_cast<std::size_t>(j)];
      if (g < 0) {
        g = 0;
        for (int i = 1; i < m; ++i)
          if (std::abs(V0(i, j)) > std::abs(V0(g, j)) * (1.0 + 1e-12)) g = i;
      }
      const cplx vg = V0(g, j);
      if (std::abs(vg) == 0.0) throw Error("eigen gauge component vanishes");
      V0.col(j) *= std::conj(vg) / std::abs(vg);
      V0(g, j) = std::abs(V0(g, j));

      std::vector<Eigen::VectorXcd> v(static_cast<std::size_t>(n));
      std::vector<cplx> lam(static_cast<std::size_t>(n));
      v[0] = V0.col(j);
      lam[0] = lam0(j);
      for (int b = 1; b < n; ++b) {
        const MultiIndex& eb = basis.exponent(b);
        Eigen::VectorXcd S = Eigen::VectorXcd::Zero(m);
        double T = 0.0;
        // Enumerate gamma <= beta componentwise.
        MultiIndex eg{};
        while (true) {
          MultiIndex ed{};
          for (int q = 0; q < nv; ++q) ed[static_cast<std::size_t>(q)] = eb[static_cast<std::size_t>(q)] - eg[static_cast<std::size_t>(q)];
          const int gi = basis.index(eg);
          const int di = basis.index(ed);
          if (gi != 0) {
            S -= M[static_cast<std::size_t>(gi)] * v[static_cast<std::size_t>(di)];
            if (gi != b) S += lam[static_cast<std::size_t>(gi)] * v[static_cast<std::size_t>(di)];
            if (di != 0) T += std::real(v[static_cast<std::size_t>(gi)].dot(v[static_cast<std::size_t>(di)]));
          }
          int q = 0;
          for (; q < nv; ++q) {
            auto& c = eg[static_cast<std::size_t>(q)];
            if (c < eb[static_cast<std::size_t>(q)]) {
              ++c;
              break;
            }
            c = 0;
          }
          if (q == nv) break;
        }
        const cplx lb = -v[0].dot(S);
        lam[static_cast<std::size_t>(b)] = lb;
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(m);
        for (int l = 0; l < m; ++l) {
          if (l == j) continue;
          const double gap = lam0(l) - lam0(j);
          w += V0.col(l) * (V0.col(l).dot(S) / gap);
        }
        int g = gauge_[static_cast<std::size_t>(j)];
        const double re_c = -0.5 * T;
        const double im_c = -std::imag(w(g)) / std::real(V0(g, j));
        v[static_cast<std::size_t>(b)] = w + cplx(re_c, im_c) * V0.col(j);
      }
      for (int k = 0; k < n; ++k) {
        out.entry(0, j)[k] = lam[static_cast<std::size_t>(k)];
        for (int i = 0; i < m; ++i) out.entry(1 + i, j)[k] = v[static_cast<std::size_t>(k)](i);
      }
    }
  }

 private:
  std::vector<int> gauge_;
};

HomogeneousSymbol make(std::shared_ptr<SymbolNode> n) { return HomogeneousSymbol(std::move(n)); }

void require_budget(const HomogeneousSymbol& a) {
  if (a.budget() <= 0) throw BudgetError("derivative budget of symbol exhausted");
}

bool close_degree(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

HomogeneousSymbol HomogeneousSymbol::leaf(int rows, int cols, double degree, std::uint8_t depends, LeafFunction fn,
                                          int budget) {
  if (rows <= 0 || cols <= 0) throw DimensionError("leaf symbol must be non-empty");
  return make(std::make_shared<LeafNode>(rows, cols, degree, depends, std::move(fn), budget));
}

HomogeneousSymbol HomogeneousSymbol::constant(const CMatrix& c, double degree) {
  return make(std::make_shared<ConstantNode>(c, degree, c.isZero(0.0)));
}

HomogeneousSymbol HomogeneousSymbol::zero(int rows, int cols, double degree) {
  return make(std::make_shared<ConstantNode>(CMatrix::Zero(rows, cols), degree, true));
}

HomogeneousSymbol HomogeneousSymbol::identity(int m, double degree) {
  return constant(CMatrix::Identity(m, m), degree);
}

int HomogeneousSymbol::rows() const { return node_->rows(); }
int HomogeneousSymbol::cols() const { return node_->cols(); }
double HomogeneousSymbol::degree() const { return node_->degree(); }
std::uint8_t HomogeneousSymbol::depends() const { return node_->depends(); }
int HomogeneousSymbol::budget() const { return node_->budget(); }
bool HomogeneousSymbol::is_zero() const { return node_->is_zero(); }

HomogeneousSymbol HomogeneousSymbol::dx(int alpha) const {
  const auto a = static_cast<std::size_t>(alpha);
  if (alpha < 0 || alpha >= kDim) throw DimensionError("x-derivative index out of range");
  if (node_->dx_cache_[a]) return HomogeneousSymbol(node_->dx_cache_[a]);
  HomogeneousSymbol r;
  const std::uint8_t bit = alpha == 0 ? kDependsX1 : kDependsX2;
  if (is_zero() || !(depends() & bit)) {
    r = zero(rows(), cols(), degree());
  } else {
    require_budget(*this);
    r = make(std::make_shared<DerivXNode>(node_, alpha));
  }
  node_->dx_cache_[a] = r.node();
  return r;
}

HomogeneousSymbol HomogeneousSymbol::dxi(int alpha) const {
  const auto a = static_cast<std::size_t>(alpha);
  if (alpha < 0 || alpha >= kDim) throw DimensionError("xi-derivative index out of range");
  if (node_->dxi_cache_[a]) return HomogeneousSymbol(node_->dxi_cache_[a]);
  HomogeneousSymbol r;
  if (is_zero() || (close_degree(degree(), 0.0) && !(depends() & kDependsTheta))) {
    r = zero(rows(), cols(), degree() - 1.0);
  } else {
    require_budget(*this);
    r = make(std::make_shared<DerivXiNode>(node_, alpha));
  }
  node_->dxi_cache_[a] = r.node();
  return r;
}

HomogeneousSymbol HomogeneousSymbol::derivative(std::array<int, kDim> xi_order, std::array<int, kDim> x_order) const {
  HomogeneousSymbol r = *this;
  for (int alpha = 0; alpha < kDim; ++alpha)
    for (int k = 0; k < x_order[static_cast<std::size_t>(alpha)]; ++k) r = r.dx(alpha);
  for (int alpha = 0; alpha < kDim; ++alpha)
    for (int k = 0; k < xi_order[static_cast<std::size_t>(alpha)]; ++k) r = r.dxi(alpha);
  return r;
}

HomogeneousSymbol HomogeneousSymbol::adjoint() const {
  if (node_->adjoint_cache_) return HomogeneousSymbol(node_->adjoint_cache_);
  HomogeneousSymbol r;
  if (is_zero()) {
    r = zero(cols(), rows(), degree());
  } else if (node_->kind() == SymbolNode::Kind::Adjoint) {
    r = HomogeneousSymbol(node_->children()[0]);
  } else {
    r = make(std::make_shared<AdjointNode>(node_, true));
  }
  node_->adjoint_cache_ = r.node();
  return r;
}

HomogeneousSymbol HomogeneousSymbol::transpose() const {
  if (is_zero()) return zero(cols(), rows(), degree());
  return make(std::make_shared<AdjointNode>(node_, false));
}

HomogeneousSymbol HomogeneousSymbol::scaled(cplx s) const {
  const HomogeneousSymbol terms[] = {*this};
  const cplx coefs[] = {s};
  return linear_combination(terms, coefs);
}

HomogeneousSymbol HomogeneousSymbol::trace() const {
  if (rows() != cols()) throw DimensionError("trace of non-square symbol");
  if (is_zero()) return zero(1, 1, degree());
  return make(std::make_shared<TraceNode>(node_));
}

HomogeneousSymbol HomogeneousSymbol::block(int r0, int c0, int nrows, int ncols) const {
  if (r0 < 0 || c0 < 0 || nrows <= 0 || ncols <= 0 || r0 + nrows > rows() || c0 + ncols > cols())
    throw DimensionError("block out of range");
  if (is_zero()) return zero(nrows, ncols, degree());
  if (r0 == 0 && c0 == 0 && nrows == rows() && ncols == cols()) return *this;
  return make(std::make_shared<BlockNode>(node_, r0, c0, nrows, ncols));
}

HomogeneousSymbol HomogeneousSymbol::regraded(double deg) const {
  if (close_degree(deg, degree())) return *this;
  if (is_zero()) return zero(rows(), cols(), deg);
  if (node_->kind() == SymbolNode::Kind::Constant) return constant(static_cast<const ConstantNode&>(*node_).matrix(), deg);
  return make(std::make_shared<RegradeNode>(node_, deg));
}

HomogeneousSymbol HomogeneousSymbol::reciprocal() const {
  if (rows() != 1 || cols() != 1) throw DimensionError("reciprocal of non-scalar symbol");
  if (is_zero()) throw Error("reciprocal of zero symbol");
  return make(std::make_shared<UnaryNode>(node_, UnaryNode::Op::Reciprocal, -degree()));
}

HomogeneousSymbol HomogeneousSymbol::exp() const {
  if (rows() != 1 || cols() != 1) throw DimensionError("exp of non-scalar symbol");
  if (!close_degree(degree(), 0.0)) throw Error("exp of symbol with nonzero degree");
  if (is_zero()) return identity(1, 0.0);
  return make(std::make_shared<UnaryNode>(node_, UnaryNode::Op::Exp, 0.0));
}

CMatrix HomogeneousSymbol::circle_value(std::array<double, kDim> x, double theta) const {
  SymbolProgram prog({*this});
  auto ws = prog.make_workspace();
  prog.run(x, theta, ws);
  return prog.circle_value(0, ws);
}

CMatrix HomogeneousSymbol::value(std::array<double, kDim> x, std::array<double, kDim> xi) const {
  const double r = std::hypot(xi[0], xi[1]);
  if (r == 0.0) throw Error("homogeneous symbol evaluated at xi = 0");
  return std::pow(r, degree()) * circle_value(x, std::atan2(xi[1], xi[0]));
}

HomogeneousSymbol linear_combination(std::span<const HomogeneousSymbol> terms, std::span<const cplx> coefs) {
  if (terms.empty()) throw DimensionError("empty linear combination");
  if (terms.size() != coefs.size()) throw DimensionError("coefficient count mismatch");
  const int r = terms[0].rows(), c = terms[0].cols();
  const double deg = terms[0].degree();
  std::vector<NodePtr> nodes;
  std::vector<cplx> kept;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].rows() != r || terms[i].cols() != c) throw DimensionError("linear combination shape mismatch");
    if (!close_degree(terms[i].degree(), deg)) throw DimensionError("linear combination degree mismatch");
    if (terms[i].is_zero() || coefs[i] == cplx{}) continue;
    nodes.push_back(terms[i].node());
    kept.push_back(coefs[i]);
  }
  if (nodes.empty()) return HomogeneousSymbol::zero(r, c, deg);
  if (nodes.size() == 1 && kept[0] == cplx(1.0)) return HomogeneousSymbol(nodes[0]);
  if (std::all_of(nodes.begin(), nodes.end(), [](const NodePtr& n) { return n->kind() == SymbolNode::Kind::Constant; })) {
    CMatrix sum = CMatrix::Zero(r, c);
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += kept[i] * static_cast<const ConstantNode&>(*nodes[i]).matrix();
    return HomogeneousSymbol::constant(sum, deg);
  }
  return HomogeneousSymbol(std::make_shared<LinCombNode>(std::move(nodes), std::move(kept), r, c, deg));
}

HomogeneousSymbol operator+(const HomogeneousSymbol& a, const HomogeneousSymbol& b) {
  const HomogeneousSymbol t[] = {a, b};
  const cplx c[] = {1.0, 1.0};
  return linear_combination(t, c);
}

HomogeneousSymbol operator-(const HomogeneousSymbol& a, const HomogeneousSymbol& b) {
  const HomogeneousSymbol t[] = {a, b};
  const cplx c[] = {1.0, -1.0};
  return linear_combination(t, c);
}

HomogeneousSymbol operator-(const HomogeneousSymbol& a) { return a.scaled(-1.0); }

HomogeneousSymbol operator*(cplx s, const HomogeneousSymbol& a) { return a.scaled(s); }

HomogeneousSymbol operator*(const HomogeneousSymbol& a, const HomogeneousSymbol& b) {
  int rows = 0, cols = 0;
  auto mode = ProductNode::Mode::Matrix;
  const bool a_scalar = a.rows() == 1 && a.cols() == 1;
  const bool b_scalar = b.rows() == 1 && b.cols() == 1;
  if (a.cols() == b.rows()) {
    rows = a.rows();
    cols = b.cols();
  } else if (a_scalar) {
    rows = b.rows();
    cols = b.cols();
    mode = ProductNode::Mode::LeftScalar;
  } else if (b_scalar) {
    rows = a.rows();
    cols = a.cols();
    mode = ProductNode::Mode::RightScalar;
  } else {
    throw DimensionError("symbol product shape mismatch");
  }
  const double deg = a.degree() + b.degree();
  if (a.is_zero() || b.is_zero()) return HomogeneousSymbol::zero(rows, cols, deg);
  if (a.node()->kind() == SymbolNode::Kind::Constant && b.node()->kind() == SymbolNode::Kind::Constant) {
    const CMatrix& ma = static_cast<const ConstantNode&>(*a.node()).matrix();
    const CMatrix& mb = static_cast<const ConstantNode&>(*b.node()).matrix();
    if (mode == ProductNode::Mode::LeftScalar) return HomogeneousSymbol::constant(ma(0, 0) * mb, deg);
    if (mode == ProductNode::Mode::RightScalar) return HomogeneousSymbol::constant(ma * mb(0, 0), deg);
    return HomogeneousSymbol::constant(ma * mb, deg);
  }
  return HomogeneousSymbol(std::make_shared<ProductNode>(a.node(), b.node(), mode, rows, cols, deg));
}

HomogeneousSymbol hstack(std::span<const HomogeneousSymbol> columns) {
  if (columns.empty()) throw DimensionError("empty hstack");
  const int r = columns[0].rows();
  const double deg = columns[0].degree();
  int total = 0;
  bool all_zero = true;
  std::vector<NodePtr> nodes;
  for (const auto& c : columns) {
    if (c.rows() != r) throw DimensionError("hstack row mismatch");
    if (!close_degree(c.degree(), deg)) throw DimensionError("hstack degree mismatch");
    total += c.cols();
    all_zero = all_zero && c.is_zero();
    nodes.push_back(c.node());
  }
  if (all_zero) return HomogeneousSymbol::zero(r, total, deg);
  if (nodes.size() == 1) return columns[0];
  return HomogeneousSymbol(std::make_shared<HStackNode>(std::move(nodes), r, total, deg));
}

HomogeneousSymbol eigen_system(const HomogeneousSymbol& hermitian, std::vector<int> gauge) {
  if (hermitian.rows() != hermitian.cols()) throw DimensionError("eigen_system needs a square symbol");
  if (gauge.size() != static_cast<std::size_t>(hermitian.rows())) throw DimensionError("gauge size mismatch");
  for (int g : gauge)
    if (g >= hermitian.rows()) throw DimensionError("gauge component out of range");
  return HomogeneousSymbol(std::make_shared<EigenNode>(hermitian.node(), std::move(gauge)));
}

// ---------------------------------------------------------------------------

const JetMatrix& SymbolProgram::Workspace::output(std::size_t i) const { return values[output_slots[i]]; }

SymbolProgram::SymbolProgram(std::vector<HomogeneousSymbol> outputs, int output_order)
    : outputs_(std::move(outputs)) {
  if (output_order < 0) throw BudgetError("negative output order");
  std::unordered_map<const SymbolNode*, std::size_t> slot;
  // Iterative post-order DFS.
  std::vector<std::pair<const SymbolNode*, std::size_t>> stack;
  for (const auto& out : outputs_) {
    if (!out.valid()) throw Error("invalid symbol in program");
    const SymbolNode* root = out.node().get();
    if (slot.count(root)) continue;
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->children().size()) {
        const SymbolNode* child = node->children()[next++].get();
        if (!slot.count(child)) stack.push_back({child, 0});
        continue;
      }
      if (!slot.count(node)) {
        slot[node] = nodes_.size();
        nodes_.push_back(node);
      }
      stack.pop_back();
    }
  }
  for (const auto& out : outputs_) output_slots_.push_back(slot.at(out.node().get()));

  order_.assign(nodes_.size(), -1);
  for (auto s : output_slots_) order_[s] = std::max(order_[s], output_order);
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const SymbolNode* node = nodes_[k];
    if (order_[k] < 0) continue;
    for (std::size_t c = 0; c < node->children().size(); ++c) {
      const auto cs = slot.at(node->children()[c].get());
      order_[cs] = std::max(order_[cs], order_[k] + node->child_order_offset(c));
    }
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const SymbolNode* node = nodes_[k];
    if (order_[k] > kMaxJetOrder) throw BudgetError("required jet order exceeds the supported maximum");
    if (order_[k] > node->budget() && !node->is_zero())
      throw BudgetError("symbol evaluated beyond its derivative budget");
    max_order_ = std::max(max_order_, order_[k]);
    depends_ |= node->depends();
  }
  child_offsets_.push_back(0);
  for (const SymbolNode* node : nodes_) {
    for (const auto& c : node->children()) child_slots_.push_back(slot.at(c.get()));
    child_offsets_.push_back(child_slots_.size());
  }
  int nv = 0;
  if (depends_ & kDependsX1) x_var_[0] = nv++;
  if (depends_ & kDependsX2) x_var_[1] = nv++;
  theta_var_ = nv++;
  nvars_ = nv;
}

SymbolProgram::Workspace SymbolProgram::make_workspace() const {
  Workspace ws;
  const auto& basis = MonomialBasis::for_vars(nvars_);
  ws.values.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    ws.values[k].reset(nodes_[k]->rows(), nodes_[k]->cols(), basis.size(std::max(order_[k], 0)));
  ws.child_ptrs.reserve(child_slots_.size());
  for (auto s : child_slots_) ws.child_ptrs.push_back(&ws.values[s]);
  ws.output_slots = output_slots_;
  return ws;
}

void SymbolProgram::run(std::array<double, kDim> x, double theta, Workspace& ws) const {
  const auto& basis = MonomialBasis::for_vars(nvars_);
  const Jet t = Jet::variable(nvars_, max_order_, theta_var_, theta);
  ws.cos_theta = cos(t);
  ws.sin_theta = sin(t);
  SymbolNode::EvalArgs args{};
  args.nvars = nvars_;
  args.x = x;
  args.theta = theta;
  args.cos_theta = &ws.cos_theta;
  args.sin_theta = &ws.sin_theta;
  args.basis = &basis;
  args.theta_var = theta_var_;
  args.x_var = x_var_;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (order_[k] < 0) continue;
    args.order = order_[k];
    args.children = std::span<const JetMatrix* const>(ws.child_ptrs.data() + child_offsets_[k],
                                                      child_offsets_[k + 1] - child_offsets_[k]);
    nodes_[k]->evaluate(args, ws.values[k]);
  }
}

void for_each_grid_point(const SymbolProgram& program, const SampleGrid& grid,
                         const std::function<void(std::array<double, kDim>, double, const SymbolProgram::Workspace&)>& fn) {
  const auto dep = program.depends();
  const int n1 = (dep & kDependsX1) ? grid.n_x : 1;
  const int n2 = (dep & kDependsX2) ? grid.n_x : 1;
  const int nt = (dep & kDependsTheta) ? grid.n_theta : 1;
  const double two_pi = 2.0 * std::numbers::pi;
  auto ws = program.make_workspace();
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const std::array<double, kDim> x{two_pi * i1 / grid.n_x, two_pi * i2 / grid.n_x};
      for (int it = 0; it < nt; ++it) {
        const double th = two_pi * it / grid.n_theta;
        program.run(x, th, ws);
        fn(x, th, ws);
      }
    }
  }
}

std::vector<double> sup_norms(std::span<const HomogeneousSymbol> symbols, const SampleGrid& grid) {
  std::vector<double> norms(symbols.size(), 0.0);
  std::vector<HomogeneousSymbol> live;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i].is_zero()) continue;
    live.push_back(symbols[i]);
    where.push_back(i);
  }
  if (live.empty()) return norms;
  SymbolProgram prog(live);
  for_each_grid_point(prog, grid, [&](std::array<double, kDim>, double, const SymbolProgram::Workspace& ws) {
    for (std::size_t i = 0; i < live.size(); ++i) {
      const JetMatrix& v = ws.output(i);
      double& nrm = norms[where[i]];
      for (int r = 0; r < v.rows(); ++r)
        for (int c = 0; c < v.cols(); ++c) nrm = std::max(nrm, std::abs(v.entry(r, c)[0]));
    }
  });
  return norms;
}

double sup_norm(const HomogeneousSymbol& a, const SampleGrid& grid) {
  const HomogeneousSymbol s[] = {a};
  return sup_norms(s, grid)[0];
}

}  // namespace psdiag
