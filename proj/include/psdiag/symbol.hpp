#pragma once

// Homogeneous matrix symbols on T^2 x (R^2 \ 0).
//
// A homogeneous symbol of degree rho is stored through its restriction to the
// unit circle: a(x, xi) = |xi|^rho g(x, theta) with xi = |xi| (cos theta, sin theta).
// Symbols are immutable expression DAGs; values and exact derivatives are
// obtained by compiling a SymbolProgram and running it on jets in
// (x^1, x^2, theta).

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psdiag/jet.hpp"

namespace psdiag {

inline constexpr int kDim = 2;
inline constexpr int kDefaultDerivativeBudget = kMaxJetOrder;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Dependence flags of a symbol: which of x^1, x^2, theta it may depend on.
enum DependsOn : std::uint8_t {
  kDependsNone = 0,
  kDependsX1 = 1,
  kDependsX2 = 2,
  kDependsTheta = 4,
  kDependsAll = 7,
};

using CMatrix = Eigen::MatrixXcd;

class JetMatrix {
 public:
  JetMatrix() = default;
  void reset(int rows, int cols, int stride);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int stride() const { return stride_; }
  cplx* entry(int i, int j) { return data_.data() + (static_cast<std::size_t>(i) * cols_ + j) * stride_; }
  const cplx* entry(int i, int j) const {
    return data_.data() + (static_cast<std::size_t>(i) * cols_ + j) * stride_;
  }
  CMatrix values() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int stride_ = 0;
  std::vector<cplx> data_;
};

/// What a leaf evaluator sees: seeded jets for the coordinates.
class LeafArgs {
 public:
  LeafArgs(int nvars, int order, std::array<int, kDim> x_var, int theta_var, std::array<double, kDim> x,
           double theta);
  int order() const { return order_; }
  int nvars() const { return nvars_; }
  /// Coordinate x^alpha (alpha = 0, 1) as a jet; constant if the program does not vary it.
  Jet x(int alpha) const;
  Jet theta() const;
  Jet constant(cplx c) const { return Jet(nvars_, order_, c); }

 private:
  int nvars_;
  int order_;
  std::array<int, kDim> x_var_;
  int theta_var_;
  std::array<double, kDim> x_;
  double theta_;
};

/// Row-major rows*cols jets describing the circle function g(x, theta).
using LeafFunction = std::function<std::vector<Jet>(const LeafArgs&)>;

class SymbolNode;
using NodePtr = std::shared_ptr<const SymbolNode>;

class HomogeneousSymbol {
 public:
  HomogeneousSymbol() = default;
  explicit HomogeneousSymbol(NodePtr node) : node_(std::move(node)) {}

  static HomogeneousSymbol leaf(int rows, int cols, double degree, std::uint8_t depends, LeafFunction fn,
                                int budget = kDefaultDerivativeBudget);
  /// |xi|^degree * c for a constant matrix c.
  static HomogeneousSymbol constant(const CMatrix& c, double degree);
  static HomogeneousSymbol zero(int rows, int cols, double degree);
  static HomogeneousSymbol identity(int m, double degree = 0.0);

  bool valid() const { return static_cast<bool>(node_); }
  const NodePtr& node() const { return node_; }
  int rows() const;
  int cols() const;
  double degree() const;
  std::uint8_t depends() const;
  int budget() const;
  bool is_zero() const;

  /// d/dx^alpha, alpha in {0, 1}.
  HomogeneousSymbol dx(int alpha) const;
  /// d/dxi_alpha, computed from the circle data through the Euler relation.
  HomogeneousSymbol dxi(int alpha) const;
  /// d_xi^beta d_x^gamma.
  HomogeneousSymbol derivative(std::array<int, kDim> xi_order, std::array<int, kDim> x_order) const;
  HomogeneousSymbol adjoint() const;
  HomogeneousSymbol transpose() const;
  HomogeneousSymbol scaled(cplx s) const;
  HomogeneousSymbol trace() const;
  HomogeneousSymbol block(int r0, int c0, int rows, int cols) const;
  /// Same circle function, declared with another homogeneity degree.
  HomogeneousSymbol regraded(double degree) const;
  /// Elementwise function on a 1x1 symbol.
  HomogeneousSymbol reciprocal() const;
  HomogeneousSymbol exp() const;

  /// Value at (x, xi), xi != 0.
  CMatrix value(std::array<double, kDim> x, std::array<double, kDim> xi) const;
  /// Value of the circle function g(x, theta).
  CMatrix circle_value(std::array<double, kDim> x, double theta) const;

 private:
  NodePtr node_;
};

HomogeneousSymbol operator+(const HomogeneousSymbol& a, const HomogeneousSymbol& b);
HomogeneousSymbol operator-(const HomogeneousSymbol& a, const HomogeneousSymbol& b);
HomogeneousSymbol operator-(const HomogeneousSymbol& a);
/// Matrix product; a 1x1 factor acts as a scalar.
HomogeneousSymbol operator*(const HomogeneousSymbol& a, const HomogeneousSymbol& b);
HomogeneousSymbol operator*(cplx s, const HomogeneousSymbol& a);
HomogeneousSymbol linear_combination(std::span<const HomogeneousSymbol> terms, std::span<const cplx> coefs);
HomogeneousSymbol hstack(std::span<const HomogeneousSymbol> columns);

/// Pointwise eigen-decomposition of a Hermitian matrix symbol, propagated to
/// all Taylor orders. Output is (m+1) x m: row 0 holds ascending eigenvalues of
/// the circle function, rows 1..m hold the matching eigenvectors as columns.
/// gauge[j] >= 0 fixes the phase by making component gauge[j] of eigenvector j
/// real and positive as a function; gauge[j] < 0 selects the pointwise
/// largest-modulus component and disables derivatives.
HomogeneousSymbol eigen_system(const HomogeneousSymbol& hermitian, std::vector<int> gauge);

class SymbolNode {
 public:
  enum class Kind { Leaf, Constant, LinComb, Product, Adjoint, Transpose, DerivX, DerivXi, Unary, Trace, Block, HStack, Regrade, Eigen };

  SymbolNode(Kind kind, int rows, int cols, double degree) : kind_(kind), rows_(rows), cols_(cols), degree_(degree) {}
  virtual ~SymbolNode() = default;

  struct EvalArgs {
    int order;
    int nvars;
    std::array<double, kDim> x;
    double theta;
    std::span<const JetMatrix* const> children;
    const Jet* cos_theta;
    const Jet* sin_theta;
    const MonomialBasis* basis;
    int theta_var;
    std::array<int, kDim> x_var;
  };

  virtual void evaluate(const EvalArgs& args, JetMatrix& out) const = 0;
  virtual int child_order_offset(std::size_t /*i*/) const { return 0; }

  Kind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double degree() const { return degree_; }
  std::uint8_t depends() const { return depends_; }
  int budget() const { return budget_; }
  bool is_zero() const { return is_zero_; }
  const std::vector<NodePtr>& children() const { return children_; }

 protected:
  friend class HomogeneousSymbol;
  Kind kind_;
  int rows_;
  int cols_;
  double degree_;
  std::uint8_t depends_ = kDependsNone;
  int budget_ = kDefaultDerivativeBudget;
  bool is_zero_ = false;
  std::vector<NodePtr> children_;
  // Builders are single-threaded; these caches are filled during construction only.
  mutable std::array<NodePtr, kDim> dx_cache_{};
  mutable std::array<NodePtr, kDim> dxi_cache_{};
  mutable NodePtr adjoint_cache_{};
};

/// A compiled evaluation plan for a set of output symbols.
class SymbolProgram {
 public:
  explicit SymbolProgram(std::vector<HomogeneousSymbol> outputs, int output_order = 0);

  class Workspace {
   public:
    const JetMatrix& output(std::size_t i) const;

   private:
    friend class SymbolProgram;
    std::vector<JetMatrix> values;
    std::vector<const JetMatrix*> child_ptrs;
    std::vector<std::size_t> output_slots;
    Jet cos_theta, sin_theta;
  };

  Workspace make_workspace() const;
  void run(std::array<double, kDim> x, double theta, Workspace& ws) const;
  /// Order-0 circle values of output i after run().
  CMatrix circle_value(std::size_t i, const Workspace& ws) const { return ws.output(i).values(); }

  std::uint8_t depends() const { return depends_; }
  std::size_t output_count() const { return outputs_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  const HomogeneousSymbol& output_symbol(std::size_t i) const { return outputs_[i]; }

 private:
  std::vector<HomogeneousSymbol> outputs_;
  std::vector<const SymbolNode*> nodes_;  // topological order, children first
  std::vector<int> order_;
  std::vector<std::size_t> child_offsets_;  // into flattened child slot list
  std::vector<std::size_t> child_slots_;
  std::vector<std::size_t> output_slots_;
  std::uint8_t depends_ = kDependsNone;
  int nvars_ = 1;
  int max_order_ = 0;
  std::array<int, kDim> x_var_{-1, -1};
  int theta_var_ = 0;
};

/// Tensor sample grid: n_x points per x-direction, n_theta points on the circle.
struct SampleGrid {
  int n_x = 8;
  int n_theta = 16;
};

/// Evaluate the circle functions of `symbols` on the grid; inactive x-directions
/// are sampled once. fn(point_index, x, theta, workspace).
void for_each_grid_point(const SymbolProgram& program, const SampleGrid& grid,
                         const std::function<void(std::array<double, kDim>, double, const SymbolProgram::Workspace&)>& fn);

/// Max-abs entry of the circle function over the grid.
double sup_norm(const HomogeneousSymbol& a, const SampleGrid& grid = {});
std::vector<double> sup_norms(std::span<const HomogeneousSymbol> symbols, const SampleGrid& grid = {});

}  // namespace psdiag
