#pragma once

// Pseudodifferential projections P_j commuting with A, built order by order.

#include <functional>
#include <random>
#include <vector>

#include "psdiag/eigenframe.hpp"

namespace psdiag {

struct ProjectionBasis {
  PolySymbol A;
  EigenFrame frame;
  int depth = 0;
  std::vector<PolySymbol> P;  // same order as frame.J

  const PolySymbol& of(int j) const { return P[static_cast<std::size_t>(frame.pos(j))]; }
};

struct ProjectionOptions {
  /// Tolerance for the symbol-level self-adjointness precondition on A.
  double self_adjoint_tolerance = 1e-10;
  /// Build the last projection as Id minus the others instead of solving for it.
  bool complement_last = false;
  SampleGrid grid{};
};

ProjectionBasis build_projections(const PolySymbol& a, const EigenFrame& frame, int depth,
                                  const ProjectionOptions& opts = {});

/// Grid sup-norms of the defining conditions, per order k = 0..depth.
struct ProjectionReport {
  std::vector<double> principal;     // (P_j)_prin - P^{(j)}, order 0 only meaningful
  std::vector<double> symmetry;      // P_j - P_j^*
  std::vector<double> idempotency;   // P_j P_l - delta_jl P_j
  std::vector<double> partition;     // sum_j P_j - Id
  std::vector<double> commutation;   // [A, P_j]
  double worst() const;
};

ProjectionReport verify_projections(const ProjectionBasis& basis, const SampleGrid& grid = {});

/// max_j sup |{[v^{(j)}]^*, v^{(j)}} - i tr((P_j)_sub)|.
double trace_identity_check(const ProjectionBasis& basis, const SampleGrid& grid = {});

/// Maps a symbol to a dense Hermitian matrix (see spectra::quantize).
using Quantizer = std::function<CMatrix(const PolySymbol&)>;

struct SignProbe {
  double min_rayleigh = 0.0;     // min over the random batch of sgn(j) <u, Q u> / <u, u>
  double min_eigenvalue = 0.0;   // smallest eigenvalue of sgn(j) Q
  double norm = 0.0;             // spectral norm of Q
  double relative_violation() const { return min_eigenvalue < 0.0 ? -min_eigenvalue / norm : 0.0; }
};

/// Probes sgn(j) P_j^* A P_j >= 0 on the quantized operator.
SignProbe sign_definiteness_probe(const PolySymbol& a, const ProjectionBasis& basis, int j, const Quantizer& quantize,
                                  std::mt19937_64& rng, int batch = 64);

}  // namespace psdiag
