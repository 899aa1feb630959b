#pragma once

// Almost-unitary diagonalization: columns B_j with B_j^* B_j = Id and
// P_j B_j = B_j modulo order -K-1, assembled into B and A~ = B^* A B.

#include <string>
#include <vector>

#include "psdiag/projections.hpp"

namespace psdiag {

class SolvabilityError : public Error {
 public:
  using Error::Error;
};

enum class InitialColumn {
  /// B_{j,0} = v - (i/2) sum_alpha d^2 v / dx^alpha dxi_alpha, so that (B_{j,0})_sub = 0.
  SubprincipalFree,
  /// B_{j,0} = v only.
  PrincipalOnly,
};

struct DiagonalizerOptions {
  double solvability_tolerance = 1e-9;
  InitialColumn initial = InitialColumn::SubprincipalFree;
  SampleGrid grid{};
};

struct IterationStep {
  int k = 0;
  double r_norm = 0.0;
  double R_norm = 0.0;
  double solvability = 0.0;  // sup |P^{(j)} R_{j,k}|
};

struct DiagonalizerColumn {
  int j = 0;
  PolySymbol B;                                 // m x 1, order 0, depth K
  std::vector<HomogeneousSymbol> free_functions;  // f_{j,k}, k = 1..K, degree -k
  std::vector<IterationStep> log;
};

/// f[k-1] is f_{j,k}: a real scalar circle function (any declared degree; regraded to -k).
/// Missing entries are zero.
DiagonalizerColumn build_column(const ProjectionBasis& basis, int j, int depth,
                                const std::vector<HomogeneousSymbol>& f = {}, const DiagonalizerOptions& opts = {});

/// (1/4 tr (P_j)_sub + i f) v + (P_j)_sub v + (i/2) {P^{(j)}, v}.
HomogeneousSymbol subprincipal_formula(const ProjectionBasis& basis, int j, const HomogeneousSymbol& f);

struct LedgerEntry {
  std::string name;
  int component = 0;
  double degree = 0.0;  // homogeneity degree of the checked component
  double sup = 0.0;
};

struct Diagonalization {
  std::vector<int> column_index;  // j for each column of B: m+, ..., 1, -1, ..., -m-
  std::vector<DiagonalizerColumn> columns;  // same order
  PolySymbol B;
  PolySymbol B_star;
  PolySymbol A_tilde;
  std::vector<PolySymbol> a;  // scalar a_j = B_j^* A B_j, same order as columns
  std::vector<LedgerEntry> ledger;
  int depth = 0;
  double first_unchecked_order = 0.0;

  const PolySymbol& a_of(int j) const;
  const DiagonalizerColumn& column_of(int j) const;
  double ledger_max() const;
};

/// Assembles B, A~ and the residual ledger. Columns may be in any order.
Diagonalization assemble(const ProjectionBasis& basis, std::vector<DiagonalizerColumn> columns,
                         const SampleGrid& grid = {});

/// Convenience: all columns with zero free functions, then assemble.
Diagonalization diagonalize(const ProjectionBasis& basis, int depth, const DiagonalizerOptions& opts = {});

/// max_j sup |B_j B_j^* - P_j| and sup |sum_j B_j B_j^* - Id| over all orders.
struct RecoveryReport {
  double projection = 0.0;
  double partition = 0.0;
};
RecoveryReport verify_recovery(const std::vector<DiagonalizerColumn>& columns, const ProjectionBasis& basis,
                               const SampleGrid& grid = {});

/// A_j = P_j^* A P_j - sgn(j) sum_{l != j} sgn(l) P_l^* A P_l.
PolySymbol build_auxiliary(const ProjectionBasis& basis, int j);

/// Max over j, orders and entries of B^* A_j B minus its block-diagonal form.
double verify_conjugated_blocks(const Diagonalization& diag, const ProjectionBasis& basis,
                                const std::vector<PolySymbol>& auxiliary, const SampleGrid& grid = {});

void write_ledger(std::ostream& out, const Diagonalization& diag);

}  // namespace psdiag
