#pragma once

// Toroidal quantization of matrix symbols on Fourier modes |k|_inf <= N, dense
// spectra, and the spectral comparisons between A and its diagonalization.

#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "psdiag/diagonalizer.hpp"

namespace psdiag {

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Too few eigenvalues in the reliable window for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Smooth cutoff, 0 for r <= 1/2 and 1 for r >= 1.
double cutoff_chi(double r);
inline constexpr const char* kCutoffDescriptor = "smoothstep-exp[0.5,1]";

struct QuantizeOptions {
  int x_points = 32;       // initial quadrature points per active x-direction
  int max_x_points = 512;  // doubling stops here
  /// Resolved if the upper half of the computed x-frequency band is below this, relative to the largest coefficient.
  double tail_tolerance = 1e-13;
  /// Bound on max |Q - Q^*| / max |Q| before symmetrization. Truncated symbols are
  /// self-adjoint only up to their lowest retained order, so this is loose.
  double asymmetry_threshold = 1e-2;
};

struct QuantizedOperator {
  int N = 0;
  int m = 0;
  int dim = 0;
  double order = 0.0;
  bool block_diagonal = false;
  CMatrix matrix;               // dense, when !block_diagonal
  std::vector<CMatrix> blocks;  // m x m per mode, when block_diagonal
  double asymmetry_norm = 0.0;  // max |Q - Q^*| / 2 before symmetrization
  int x_points = 0;             // quadrature actually used (0 if x-independent)
  std::string chi = kCutoffDescriptor;

  int side() const { return 2 * N + 1; }
  int mode_count() const { return side() * side(); }
  /// Modes are ordered with k1 outer, k2 inner; unknowns are mode * m + component.
  int mode_index(int k1, int k2) const { return (k1 + N) * side() + (k2 + N); }
  std::array<int, kDim> mode(int idx) const { return {idx / side() - N, idx % side() - N}; }
  CMatrix dense() const;
  CMatrix apply(const CMatrix& u) const;
};

/// (Op u)(x) = sum_k e^{ik.x} chi(|k|) sigma(x, k) u^(k) in the orthonormal basis e^{ik.x}/(2 pi),
/// symmetrized as (Q + Q^*)/2.
QuantizedOperator quantize(const PolySymbol& symbol, int N, const QuantizeOptions& opts = {});

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending, with multiplicity
  CMatrix eigenvectors;             // columns, only when requested
  double window = std::numeric_limits<double>::infinity();

  bool in_window(std::size_t i) const { return std::abs(eigenvalues[i]) <= window; }
  std::vector<double> positive() const;
  std::vector<double> positive_in_window() const;
  /// N(lambda) = #{k : 0 < lambda_k < lambda}.
  std::size_t counting(double lambda) const;
};

SpectrumReport spectrum(const QuantizedOperator& q, double window = std::numeric_limits<double>::infinity(),
                        bool vectors = false);

/// h_min (N/2)^s with h_min the smallest positive eigenvalue of the principal symbol at |xi| = 1.
double reliable_window(const EigenFrame& frame, int N, const SampleGrid& grid = {});

struct ClosenessRow {
  std::size_t k = 0;  // 1-based position in the positive spectrum
  double lambda = 0.0;
  double nearest = 0.0;
  double distance = 0.0;
};

struct ClosenessStats {
  std::vector<ClosenessRow> forward;                // lambda_k vs union of sigma+(a_j)
  std::vector<std::vector<ClosenessRow>> backward;  // ell_k^{(j)} vs sigma+(A), per j
  double median = 0.0;
  double max = 0.0;
  double median_relative = 0.0;  // median of distance / lambda
  double lower_half_median = 0.0;
  double upper_half_median = 0.0;
  std::vector<double> block_medians;  // medians over consecutive blocks of the window
};

ClosenessStats closeness_stats(std::span<const double> spec_a, const std::vector<std::vector<double>>& spec_aj,
                               double window, int blocks = 4);

/// Sorted union of the positive parts.
std::vector<double> merge_positive(const std::vector<std::vector<double>>& spectra);

struct OffsetMatch {
  int z = 0;
  std::vector<std::size_t> k;      // 1-based indices of lambda_k in the window with a partner
  std::vector<double> deviations;  // |lambda_k - zeta_{k+z}|
  double median = 0.0;
  double max = 0.0;
};

/// z minimizing the median of |lambda_k - zeta_{k+z}| over |z| <= z_max; ties go to the smallest |z|.
OffsetMatch match_offset(std::span<const double> spec_a, std::span<const double> zeta, double window, int z_max = 10,
                         std::size_t min_pairs = 20);

struct Partition {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::vector<double> nu;         // nu_0 = 0, nu_1, ..., nu_{n_max}
  std::vector<double> c;          // c_n, c_0 = 0
  std::vector<double> clearance;  // dist(nu_n, spectra) n^gamma
  double C = 0.0;                 // min clearance, +inf if all spectra are empty
};

/// nu_n = n^beta + c_n / n with c_n in [-beta/4, beta/4] maximizing the distance to all spectra.
Partition build_partition(const std::vector<std::vector<double>>& spectra, double alpha, double s, int d, int n_max,
                          int candidates = 401);

/// n_max with nu_{n_max} beyond lambda.
int partition_size_for(double lambda, double alpha, double s, int d);

struct IntervalCount {
  int n = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;  // per spectrum, over (nu_n, nu_{n+1}]
};
std::vector<IntervalCount> interval_counts(const Partition& p, const std::vector<std::vector<double>>& spectra);

struct GramResult {
  CMatrix G;
  double residual = 0.0;   // max |GFG - I|
  double g_defect = 0.0;   // max |G - I|
  double f_defect = 0.0;   // max |F - I|
};
/// G = F^{-1/2} for Hermitian F with max |F - I| <= 1/(3 r^2).
GramResult gram_orthonormalize(const CMatrix& F);

struct LowerBoundReport {
  std::size_t r = 0;
  std::size_t count = 0;
  double lo = 0.0;
  double hi = 0.0;
  double max_residual = 0.0;
  bool holds() const { return count >= r; }
};
/// Given orthonormal u_k with |(Q - mu_k) u_k| <= eps, counts eigenvalues in [mu_1 - sqrt(r) eps, mu_r + sqrt(r) eps].
LowerBoundReport eigencount_lower_bound(const QuantizedOperator& q, const SpectrumReport& spec,
                                        std::span<const double> mu, const CMatrix& u, double eps);

/// b = (2 pi)^{-2} sum_{j>0} int dx int_{h_j < 1} dxi.
double weyl_coefficient(const EigenFrame& frame, const SampleGrid& grid = {32, 128});
/// b lambda^{d/s}.
double weyl_prediction(const EigenFrame& frame, double lambda, const SampleGrid& grid = {32, 128});

struct LocalCounting {
  int n = 0;                     // grid points per direction
  std::vector<double> density;   // N(x, lambda) at x = 2 pi (i1, i2) / n, row-major in (i1, i2)
  double integral = 0.0;         // trapezoidal integral over T^2
  std::size_t count = 0;         // N(lambda)
};
/// Requires eigenvectors in `spec`. n = 0 picks 2N + 2.
LocalCounting local_counting(const QuantizedOperator& q, const SpectrumReport& spec, double lambda, int n = 0);

struct SecondWeylReport {
  std::vector<int> J;              // positive indices
  std::vector<double> a_side;      // global int w^{(j)} dx
  std::vector<double> diag_side;   // global -d(d-1)/(2 pi)^d int int_{h_j<1} (a_j)_sub
  double a_total = 0.0;
  double diag_total = 0.0;
  double imag_residual = 0.0;      // largest imaginary part met in the integrals
  std::vector<std::array<double, 3>> density;  // (x1, x2, sum_j w^{(j)}(x))
  double difference() const { return a_total - diag_total; }
};
/// Needs basis depth >= 1; diag may be null to skip the diagonal side.
SecondWeylReport second_weyl_coefficient(const ProjectionBasis& basis, const Diagonalization* diag,
                                         const SampleGrid& grid = {32, 128});

void write_eigenvalues(std::ostream& out, const std::vector<std::pair<std::string, const SpectrumReport*>>& tables);
void write_closeness(std::ostream& out, const std::vector<ClosenessRow>& rows);
void write_partition(std::ostream& out, const std::vector<IntervalCount>& rows);
struct WeylRow {
  double lambda = 0.0;
  std::size_t count = 0;
  double prediction = 0.0;
  double ratio() const { return prediction > 0.0 ? static_cast<double>(count) / prediction : 0.0; }
};
void write_weyl(std::ostream& out, const std::vector<WeylRow>& rows);

}  // namespace psdiag
