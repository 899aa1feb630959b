#pragma once

// Pointwise eigenstructure of a Hermitian principal symbol.

#include <optional>
#include <vector>

#include "psdiag/symcalc.hpp"

namespace psdiag {

class SimplicityError : public Error {
 public:
  using Error::Error;
};

class SignChangeError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

enum class FrameMode {
  Analytic,    // closed-form eigendata supplied by the caller
  Propagated,  // eigenpairs carried through jets by perturbation theory, fixed-component gauge
  Numeric,     // pointwise values only; no derivatives
};

struct EigenFrame {
  std::vector<int> J;  // -m_minus..-1, 1..m_plus
  std::vector<HomogeneousSymbol> h;  // degree s, scalar
  std::vector<HomogeneousSymbol> v;  // degree 0, m x 1
  std::vector<HomogeneousSymbol> P;  // degree 0, m x m
  int m_plus = 0;
  int m_minus = 0;
  FrameMode mode = FrameMode::Analytic;

  int size() const { return static_cast<int>(J.size()); }
  /// Position of index j in J.
  int pos(int j) const;
};

/// Eigenvalue and eigenvector fields, ascending in the eigenvalue.
struct AnalyticEigendata {
  std::vector<HomogeneousSymbol> h;
  std::vector<HomogeneousSymbol> v;
};

struct FrameOptions {
  double gap_tolerance = 1e-6;
  double check_tolerance = 1e-10;
  SampleGrid grid{};
  /// Without supplied eigendata: false propagates eigenpairs through jets, true gives a numeric frame.
  bool numeric = false;
};

EigenFrame decompose_principal(const HomogeneousSymbol& a_prin, const std::optional<AnalyticEigendata>& supplied = {},
                               const FrameOptions& opts = {});

/// v^{(j)} -> e^{i phi} v^{(j)} for a real scalar degree-0 phi.
EigenFrame gauge_rotate(const EigenFrame& frame, int j, const HomogeneousSymbol& phi, const SampleGrid& grid = {});

/// Min over the grid of the smallest eigenvalue gap at |xi| = 1.
double simplicity_margin(const EigenFrame& frame, const SampleGrid& grid = {});

}  // namespace psdiag
