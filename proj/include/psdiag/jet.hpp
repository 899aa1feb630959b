#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A jet of order n in k variables stores the Taylor coefficients c_beta of a
// function at a base point for all multi-indices |beta| <= n, so that
//   f(p + t) = sum_beta c_beta t^beta + O(|t|^{n+1}).
// Arithmetic on jets is exact forward-mode differentiation to order n.
// Monomials are stored in graded order, so the coefficients of an order-n jet
// are a prefix of the coefficients of any higher-order jet.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace psdiag {

using cplx = std::complex<double>;

inline constexpr int kMaxJetVars = 3;
inline constexpr int kMaxJetOrder = 16;

using MultiIndex = std::array<int, kMaxJetVars>;

class MonomialBasis {
 public:
  struct Triple {
    int a, b, c;
  };

  static const MonomialBasis& for_vars(int nvars);

  int nvars() const { return nvars_; }
  int size(int order) const { return size_by_order_[static_cast<std::size_t>(order)]; }
  int degree(int idx) const { return degree_[static_cast<std::size_t>(idx)]; }
  const MultiIndex& exponent(int idx) const { return exponents_[static_cast<std::size_t>(idx)]; }
  int index(const MultiIndex& e) const;
  /// Index of the monomial exponent(idx) + e_var, or -1 beyond kMaxJetOrder.
  int shifted(int idx, int var) const {
    return shift_[static_cast<std::size_t>(idx) * kMaxJetVars + static_cast<std::size_t>(var)];
  }
  /// All (a, b, c) with exponent(a) + exponent(b) = exponent(c), deg(c) <= order.
  std::span<const Triple> product_terms(int order) const {
    return {triples_.data(), static_cast<std::size_t>(triples_by_order_[static_cast<std::size_t>(order)])};
  }

 private:
  explicit MonomialBasis(int nvars);

  int nvars_;
  std::vector<MultiIndex> exponents_;
  std::vector<int> degree_;
  std::vector<int> size_by_order_;
  std::vector<int> shift_;
  std::vector<int> lookup_;
  std::vector<Triple> triples_;
  std::vector<int> triples_by_order_;
};

// out += a * b, truncated at `order`. Inputs may be longer (higher order) jets.
void jet_mul_acc(const MonomialBasis& basis, int order, const cplx* a, const cplx* b, cplx* out);
void jet_mul_acc_scaled(const MonomialBasis& basis, int order, cplx scale, const cplx* a, const cplx* b,
                        cplx* out);

class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order, cplx value = 0.0);

  static Jet variable(int nvars, int order, int var, double value);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  const MonomialBasis& basis() const { return MonomialBasis::for_vars(nvars_); }
  std::size_t size() const { return coef_.size(); }

  cplx value() const { return coef_[0]; }
  cplx& operator[](std::size_t i) { return coef_[i]; }
  const cplx& operator[](std::size_t i) const { return coef_[i]; }
  cplx* data() { return coef_.data(); }
  const cplx* data() const { return coef_.data(); }

  /// Partial derivative d^beta f at the base point (coefficient times beta!).
  cplx derivative(const MultiIndex& beta) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator*=(cplx s);
  Jet& operator+=(cplx s) {
    coef_[0] += s;
    return *this;
  }

  Jet conj() const;

 private:
  int nvars_ = 1;
  int order_ = 0;
  std::vector<cplx> coef_ = std::vector<cplx>(1);
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(Jet a);
Jet operator+(Jet a, cplx s);
Jet operator+(cplx s, Jet a);
Jet operator-(Jet a, cplx s);
Jet operator-(cplx s, const Jet& a);
Jet operator*(Jet a, cplx s);
Jet operator*(cplx s, Jet a);
Jet operator/(Jet a, cplx s);

/// f(a) for analytic f given f^{(k)}(a0), k = 0..order.
Jet compose_taylor(const Jet& a, std::span<const cplx> derivs_at_value);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet sqrt(const Jet& a);
Jet log(const Jet& a);
Jet pow(const Jet& a, double p);
Jet reciprocal(const Jet& a);

}  // namespace psdiag
