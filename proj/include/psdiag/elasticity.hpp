#pragma once

// Linear elasticity on the flat 2-torus as an operator on 2-columns of
// half-densities, L_{1/2} = S L S^{-1}, and the named operator presets.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "psdiag/diagonalizer.hpp"

namespace psdiag {

class ConvexityError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class UnknownPresetError : public Error {
 public:
  using Error::Error;
};

/// Orthonormal framing e_j = R(phi(x)) e_j^{std}, phi(x) = c + sum a cos(n.x) + b sin(n.x).
struct Framing {
  struct Term {
    int n1 = 0, n2 = 0;
    double a = 0.0, b = 0.0;
  };
  double constant = 0.0;
  std::vector<Term> terms;

  static Framing standard() { return {}; }
  static Framing constant_angle(double c) { return {c, {}}; }
  /// phi(x) = cos x^1.
  static Framing rotated() { return {0.0, {{1, 0, 1.0, 0.0}}}; }

  bool x_independent() const { return terms.empty(); }
  /// phi as a real 1x1 degree-0 symbol.
  HomogeneousSymbol angle() const;
  /// E with E(alpha, j) = e_j^alpha.
  HomogeneousSymbol frame_matrix() const;
};

struct ElasticitySetup {
  double lambda = 1.0;
  double mu = 1.0;
  Framing framing;
};

void check_convexity(const ElasticitySetup& setup);

/// Symbol of L: mu |xi|^2 I + (lambda + mu) xi xi^T, with the (zero) Ricci term as a degree-0 component.
PolySymbol lame_vector_symbol(const ElasticitySetup& setup);
/// Full symbol of L_{1/2} = S L S^{-1}, (S v)^j = e^j_alpha v^alpha; exact (order 2, depth 2).
PolySymbol build_lame_symbol(const ElasticitySetup& setup);

/// t_alpha = (1/2) T_alpha^{beta gamma} epsilon_{beta gamma} from the Weitzenbock connection of the framing.
std::vector<HomogeneousSymbol> torsion_covector(const Framing& framing);
/// i (lambda + 3 mu) t^alpha xi_alpha epsilon.
HomogeneousSymbol lame_subprincipal_closed_form(const ElasticitySetup& setup);
/// mu |xi|^2 I + (lambda + mu) |xi|^2 p p^T.
HomogeneousSymbol lame_principal_closed_form(const ElasticitySetup& setup);

/// h1 = mu |xi|^2 with v1 = epsilon p, h2 = (lambda + 2 mu) |xi|^2 with v2 = p.
AnalyticEigendata lame_eigendata(const ElasticitySetup& setup);

/// Free functions f_{j,k}: outer index is the position of j in the frame, inner is k - 1.
using FreeChoice = std::vector<std::vector<HomogeneousSymbol>>;
/// Seeded real trigonometric f_{j,k}, k = 1..depth, for m columns.
FreeChoice random_free_choice(std::mt19937_64& rng, int m, int depth, double amplitude = 0.5);

struct LameSubprincipalReport {
  std::vector<double> a_sub;      // max_j sup |(a_j)_sub| per free choice
  double principal_form = 0.0;    // L_prin minus its closed form
  double subprincipal_form = 0.0; // L_sub minus i (lambda + 3 mu) t^alpha xi_alpha epsilon
  double pj_sub = 0.0;            // max_j sup |(P_j)_sub|
  double bracket_pv = 0.0;        // max_j sup |{P^{(j)}, v^{(j)}}|
  double b_sub = 0.0;             // max over choices and j of |(B_j)_sub - i f_{j,1} v^{(j)}|
  double v_lsub_v = 0.0;          // max_j sup |v^* L_sub v|
  double vstar_v = 0.0;           // max_j sup |{v^*, v}|
  double vstar_p_v = 0.0;         // max_j sup |{v^*, P^{(j)}, v}|
  double vstar_l_v = 0.0;         // max_j sup |{v^*, L_prin, v}|
  double symmetric_pair = 0.0;    // max_j sup |v^* {L_prin, v} + {v^*, L_prin} v|
  double worst() const;
};

/// Builds projections and columns to depth K for every free choice (an empty list means f = 0 only).
LameSubprincipalReport verify_lame_subprincipal(const ElasticitySetup& setup, int depth, const std::vector<FreeChoice>& choices = {},
                                   const SampleGrid& grid = {});

struct PresetOptions {
  double lambda = 1.0;
  double mu = 1.0;
  std::uint64_t seed = 7;
  double perturbation = 0.002;  // amplitude of the first-order perturbation in lame-perturbed
};

struct Preset {
  std::string name;
  PolySymbol A;
  std::optional<AnalyticEigendata> eigendata;
};

/// lame-flat, lame-rotated, lame-perturbed, laplacian.
Preset make_preset(const std::string& name, const PresetOptions& opts = {});
std::vector<std::string> preset_names();

/// eps (b^alpha xi_alpha - (i/2) d_alpha b^alpha + c): exactly self-adjoint for Hermitian b, c.
PolySymbol first_order_perturbation(std::mt19937_64& rng, double amplitude);

}  // namespace psdiag
