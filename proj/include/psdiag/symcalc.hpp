#pragma once

// Truncated polyhomogeneous matrix symbols and their asymptotic calculus
// (left quantization, D_x = -i d/dx).

#include <iosfwd>
#include <span>
#include <vector>

#include "psdiag/symbol.hpp"

namespace psdiag {

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// a ~ a_s + a_{s-1} + ... + a_{s-K}; components beyond K are absent.
class PolySymbol {
 public:
  PolySymbol() = default;
  /// components[i] must have degree order - i and common shape.
  PolySymbol(double order, std::vector<HomogeneousSymbol> components);
  explicit PolySymbol(const HomogeneousSymbol& principal) : PolySymbol(principal.degree(), {principal}) {}

  static PolySymbol identity(int m, int depth = 0);
  static PolySymbol zero(int rows, int cols, double order, int depth = 0);

  double order() const { return order_; }
  int depth() const { return static_cast<int>(components_.size()) - 1; }
  int rows() const { return components_.front().rows(); }
  int cols() const { return components_.front().cols(); }
  double lowest_degree() const { return order_ - depth(); }
  const HomogeneousSymbol& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  const std::vector<HomogeneousSymbol>& components() const { return components_; }
  const HomogeneousSymbol& principal() const { return components_.front(); }

  /// Component of degree order - i, or an explicit zero when i > depth.
  HomogeneousSymbol component_or_zero(int i) const;
  /// Pad with explicit zero components (or truncate) to the given depth.
  PolySymbol extended(int depth) const;
  PolySymbol truncated(int depth) const;
  PolySymbol adjoint_pointwise() const;

 private:
  double order_ = 0.0;
  std::vector<HomogeneousSymbol> components_;
};

/// Sum aligned by degree; the result reaches down to the higher of the two lowest degrees.
PolySymbol add(const PolySymbol& a, const PolySymbol& b);
PolySymbol subtract(const PolySymbol& a, const PolySymbol& b);
PolySymbol scale(cplx s, const PolySymbol& a);

/// Left-symbol composition sum_alpha (1/alpha!) d_xi^alpha a . D_x^alpha b through
/// `depth` components; components missing from the inputs count as zero.
PolySymbol compose(const PolySymbol& a, const PolySymbol& b, int depth);
/// Single component n (degree s_a + s_b - n) of compose(a, b, n).
HomogeneousSymbol compose_component(const PolySymbol& a, const PolySymbol& b, int n);
/// sum_alpha (1/alpha!) d_xi^alpha D_x^alpha a^dagger through `depth` components.
PolySymbol adjoint(const PolySymbol& a, int depth);
HomogeneousSymbol adjoint_component(const PolySymbol& a, int n);

const HomogeneousSymbol& principal(const PolySymbol& a);
/// a_{s-1} + (i/2) sum_alpha d^2 a_s / dx^alpha dxi_alpha.
HomogeneousSymbol subprincipal(const PolySymbol& a);

/// {B, C} = sum_alpha (B_{x^alpha} C_{xi_alpha} - B_{xi_alpha} C_{x^alpha}).
HomogeneousSymbol poisson(const HomogeneousSymbol& b, const HomogeneousSymbol& c);
/// {B, C, D} = sum_alpha (B_{x^alpha} C D_{xi_alpha} - B_{xi_alpha} C D_{x^alpha}).
HomogeneousSymbol gen_poisson(const HomogeneousSymbol& b, const HomogeneousSymbol& c, const HomogeneousSymbol& d);

/// (CD)_sub = C_prin D_sub + C_sub D_prin + (i/2){C_prin, D_prin}.
HomogeneousSymbol sub_of_product(const PolySymbol& c, const PolySymbol& d);
/// (PQR)_sub via the three-factor rule with {P,Q}R, {P,Q,R} and P{Q,R}.
HomogeneousSymbol sub_of_triple(const PolySymbol& p, const PolySymbol& q, const PolySymbol& r);

/// Highest-degree stored component of degree <= claimed.
HomogeneousSymbol residual_leading(const PolySymbol& a, double claimed_vanishing_through);

/// One row per grid point and component: component, x1, x2, theta, then re/im of entries row-major.
void dump_samples(const PolySymbol& a, std::ostream& out, const SampleGrid& grid = {});

}  // namespace psdiag
