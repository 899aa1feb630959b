#pragma once

// Symbols whose circle functions are finite trigonometric polynomials
//   g(x, theta) = sum c e^{i (n1 x^1 + n2 x^2 + k theta)}.

#include <iosfwd>
#include <random>
#include <vector>

#include "psdiag/symcalc.hpp"

namespace psdiag {

struct TrigTerm {
  int n1 = 0, n2 = 0, k = 0;
  int row = 0, col = 0;
  cplx coef;
};

struct TrigComponent {
  double degree = 0.0;
  int rows = 1, cols = 1;
  std::vector<TrigTerm> terms;

  HomogeneousSymbol to_symbol() const;
  /// Adds the conjugate-transposed term for every term, making g Hermitian.
  TrigComponent hermitized() const;
};

struct RandomTrigOptions {
  int max_x_freq = 2;
  int max_theta_freq = 2;
  int terms = 6;
  double amplitude = 1.0;
  bool depends_x2 = true;
};

TrigComponent random_trig_component(std::mt19937_64& rng, int rows, int cols, double degree,
                                    const RandomTrigOptions& opts = {});
/// Components of degree order, order-1, ..., order-depth.
PolySymbol random_trig_polysymbol(std::mt19937_64& rng, int rows, int cols, double order, int depth,
                                  const RandomTrigOptions& opts = {});

/// Table with header `degree,n1,n2,k,row,col,re,im`; one line per coefficient.
/// Components are grouped by degree, which must be integer-spaced; gaps become zero components.
PolySymbol read_trig_table(std::istream& in, int m);
void write_trig_table(std::ostream& out, const std::vector<TrigComponent>& comps);

}  // namespace psdiag
