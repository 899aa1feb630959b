#include "psdiag/jet.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace psdiag {

namespace {

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

int lookup_key(const MultiIndex& e, int nvars) {
  int key = 0;
  for (int v = 0; v < nvars; ++v) key = key * (kMaxJetOrder + 1) + e[static_cast<std::size_t>(v)];
  return key;
}

void enumerate_degree(int nvars, int deg, int var, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[static_cast<std::size_t>(var)] = deg;
    out.push_back(cur);
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[static_cast<std::size_t>(var)] = k;
    enumerate_degree(nvars, deg - k, var + 1, cur, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int nvars) : nvars_(nvars) {
  if (nvars < 1 || nvars > kMaxJetVars) throw std::invalid_argument("jet variable count out of range");
  for (int deg = 0; deg <= kMaxJetOrder; ++deg) {
    MultiIndex cur{};
    enumerate_degree(nvars, deg, 0, cur, exponents_);
    size_by_order_.push_back(static_cast<int>(exponents_.size()));
  }
  const auto n = exponents_.size();
  degree_.resize(n);
  lookup_.assign(static_cast<std::size_t>(ipow(kMaxJetOrder + 1, nvars)), -1);
  for (std::size_t i = 0; i < n; ++i) {
    int d = 0;
    for (int v = 0; v < nvars; ++v) d += exponents_[i][static_cast<std::size_t>(v)];
    degree_[i] = d;
    lookup_[static_cast<std::size_t>(lookup_key(exponents_[i], nvars))] = static_cast<int>(i);
  }
  shift_.assign(n * kMaxJetVars, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int v = 0; v < nvars; ++v) {
      if (degree_[i] == kMaxJetOrder) continue;
      MultiIndex e = exponents_[i];
      e[static_cast<std::size_t>(v)] += 1;
      shift_[i * kMaxJetVars + static_cast<std::size_t>(v)] = index(e);
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (degree_[a] + degree_[b] > kMaxJetOrder) continue;
      MultiIndex e{};
      for (int v = 0; v < nvars; ++v)
        e[static_cast<std::size_t>(v)] = exponents_[a][static_cast<std::size_t>(v)] + exponents_[b][static_cast<std::size_t>(v)];
      triples_.push_back({static_cast<int>(a), static_cast<int>(b), index(e)});
    }
  }
  std::stable_sort(triples_.begin(), triples_.end(), [this](const Triple& x, const Triple& y) {
    return degree_[static_cast<std::size_t>(x.c)] < degree_[static_cast<std::size_t>(y.c)];
  });
  triples_by_order_.assign(kMaxJetOrder + 1, 0);
  for (const auto& t : triples_) {
    for (int o = degree_[static_cast<std::size_t>(t.c)]; o <= kMaxJetOrder; ++o) ++triples_by_order_[static_cast<std::size_t>(o)];
  }
}

const MonomialBasis& MonomialBasis::for_vars(int nvars) {
  static std::once_flag flags[kMaxJetVars];
  static std::unique_ptr<MonomialBasis> bases[kMaxJetVars];
  if (nvars < 1 || nvars > kMaxJetVars) throw std::invalid_argument("jet variable count out of range");
  const auto slot = static_cast<std::size_t>(nvars - 1);
  std::call_once(flags[slot], [&] { bases[slot].reset(new MonomialBasis(nvars)); });
  return *bases[slot];
}

int MonomialBasis::index(const MultiIndex& e) const {
  int deg = 0;
  for (int v = 0; v < nvars_; ++v) {
    if (e[static_cast<std::size_t>(v)] < 0) return -1;
    deg += e[static_cast<std::size_t>(v)];
  }
  if (deg > kMaxJetOrder) return -1;
  return lookup_[static_cast<std::size_t>(lookup_key(e, nvars_))];
}

void jet_mul_acc(const MonomialBasis& basis, int order, const cplx* a, const cplx* b, cplx* out) {
  for (const auto& t : basis.product_terms(order)) out[t.c] += a[t.a] * b[t.b];
}

void jet_mul_acc_scaled(const MonomialBasis& basis, int order, cplx scale, const cplx* a, const cplx* b,
                        cplx* out) {
  for (const auto& t : basis.product_terms(order)) out[t.c] += scale * a[t.a] * b[t.b];
}

Jet::Jet(int nvars, int order, cplx value) : nvars_(nvars), order_(order) {
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order out of range");
  coef_.assign(static_cast<std::size_t>(MonomialBasis::for_vars(nvars).size(order)), cplx{});
  coef_[0] = value;
}

Jet Jet::variable(int nvars, int order, int var, double value) {
  Jet j(nvars, order, value);
  if (order >= 1) {
    MultiIndex e{};
    e[static_cast<std::size_t>(var)] = 1;
    j.coef_[static_cast<std::size_t>(j.basis().index(e))] = 1.0;
  }
  return j;
}

cplx Jet::derivative(const MultiIndex& beta) const {
  const int idx = basis().index(beta);
  if (idx < 0 || static_cast<std::size_t>(idx) >= coef_.size()) return 0.0;
  double fact = 1.0;
  for (int v = 0; v < nvars_; ++v)
    for (int k = 2; k <= beta[static_cast<std::size_t>(v)]; ++k) fact *= k;
  return coef_[static_cast<std::size_t>(idx)] * fact;
}

namespace {
void check_compatible(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("jet variable count mismatch");
}
}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o);
  const auto n = std::min(coef_.size(), o.coef_.size());
  if (o.order_ < order_) {
    coef_.resize(o.coef_.size());
    order_ = o.order_;
  }
  for (std::size_t i = 0; i < n; ++i) coef_[i] += o.coef_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o);
  const auto n = std::min(coef_.size(), o.coef_.size());
  if (o.order_ < order_) {
    coef_.resize(o.coef_.size());
    order_ = o.order_;
  }
  for (std::size_t i = 0; i < n; ++i) coef_[i] -= o.coef_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& c : coef_) c *= s;
  return *this;
}

Jet Jet::conj() const {
  Jet r = *this;
  for (auto& c : r.coef_) c = std::conj(c);
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r(a.nvars(), std::min(a.order(), b.order()));
  jet_mul_acc(a.basis(), r.order(), a.data(), b.data(), r.data());
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator-(Jet a) { return a *= -1.0; }
Jet operator+(Jet a, cplx s) { return a += s; }
Jet operator+(cplx s, Jet a) { return a += s; }
Jet operator-(Jet a, cplx s) { return a += -s; }
Jet operator-(cplx s, const Jet& a) { return (-a) + s; }
Jet operator*(Jet a, cplx s) { return a *= s; }
Jet operator*(cplx s, Jet a) { return a *= s; }
Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }

Jet compose_taylor(const Jet& a, std::span<const cplx> derivs) {
  const int n = a.order();
  Jet delta = a;
  delta[0] = 0.0;
  Jet result(a.nvars(), n, derivs[0]);
  Jet power(a.nvars(), n, 1.0);
  double fact = 1.0;
  for (int k = 1; k <= n && static_cast<std::size_t>(k) < derivs.size(); ++k) {
    power = power * delta;
    fact *= k;
    const cplx coeff = derivs[static_cast<std::size_t>(k)] / fact;
    if (coeff == cplx{}) continue;
    for (std::size_t i = 0; i < result.size(); ++i) result[i] += coeff * power[i];
  }
  return result;
}

Jet sin(const Jet& a) {
  const cplx v = a.value();
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1);
  const cplx s = std::sin(v), c = std::cos(v);
  for (std::size_t k = 0; k < d.size(); ++k) {
    switch (k % 4) {
      case 0: d[k] = s; break;
      case 1: d[k] = c; break;
      case 2: d[k] = -s; break;
      default: d[k] = -c; break;
    }
  }
  return compose_taylor(a, d);
}

Jet cos(const Jet& a) {
  const cplx v = a.value();
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1);
  const cplx s = std::sin(v), c = std::cos(v);
  for (std::size_t k = 0; k < d.size(); ++k) {
    switch (k % 4) {
      case 0: d[k] = c; break;
      case 1: d[k] = -s; break;
      case 2: d[k] = -c; break;
      default: d[k] = s; break;
    }
  }
  return compose_taylor(a, d);
}

Jet exp(const Jet& a) {
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1, std::exp(a.value()));
  return compose_taylor(a, d);
}

Jet pow(const Jet& a, double p) {
  const cplx v = a.value();
  if (v == cplx{}) throw std::domain_error("jet pow at zero");
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1);
  double coeff = 1.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = coeff * std::pow(v, p - static_cast<double>(k));
    coeff *= (p - static_cast<double>(k));
  }
  return compose_taylor(a, d);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet reciprocal(const Jet& a) {
  const cplx v = a.value();
  if (v == cplx{}) throw std::domain_error("jet reciprocal at zero");
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1);
  cplx inv = 1.0 / v;
  cplx term = inv;
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = term;
    term *= -static_cast<double>(k + 1) * inv;
  }
  return compose_taylor(a, d);
}

Jet log(const Jet& a) {
  const cplx v = a.value();
  if (v == cplx{}) throw std::domain_error("jet log at zero");
  std::vector<cplx> d(static_cast<std::size_t>(a.order()) + 1);
  d[0] = std::log(v);
  cplx term = 1.0 / v;
  for (std::size_t k = 1; k < d.size(); ++k) {
    d[k] = term;
    term *= -static_cast<double>(k) / v;
  }
  return compose_taylor(a, d);
}

}  // namespace psdiag
