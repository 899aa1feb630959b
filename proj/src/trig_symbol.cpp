#include "psdiag/trig_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace psdiag {

HomogeneousSymbol TrigComponent::to_symbol() const {
  std::uint8_t dep = kDependsNone;
  for (const auto& t : terms) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) throw DimensionError("trig term index out of range");
    if (t.n1 != 0) dep |= kDependsX1;
    if (t.n2 != 0) dep |= kDependsX2;
    if (t.k != 0) dep |= kDependsTheta;
  }
  if (terms.empty()) return HomogeneousSymbol::zero(rows, cols, degree);
  if (dep == kDependsNone) {
    CMatrix c = CMatrix::Zero(rows, cols);
    for (const auto& t : terms) c(t.row, t.col) += t.coef;
    return HomogeneousSymbol::constant(c, degree);
  }
  const int r = rows, c = cols;
  const std::vector<TrigTerm> ts = terms;
  return HomogeneousSymbol::leaf(r, c, degree, dep, [r, c, ts](const LeafArgs& a) {
    std::vector<Jet> out(static_cast<std::size_t>(r) * c, a.constant(0.0));
    const Jet x1 = a.x(0), x2 = a.x(1), th = a.theta();
    const cplx I(0, 1);
    for (const auto& t : ts) {
      const Jet phase = (static_cast<double>(t.n1) * x1 + static_cast<double>(t.n2) * x2 + static_cast<double>(t.k) * th) * I;
      out[static_cast<std::size_t>(t.row) * c + t.col] += t.coef * exp(phase);
    }
    return out;
  });
}

TrigComponent TrigComponent::hermitized() const {
  if (rows != cols) throw DimensionError("hermitized needs a square component");
  TrigComponent h = *this;
  for (const auto& t : terms) h.terms.push_back({-t.n1, -t.n2, -t.k, t.col, t.row, std::conj(t.coef)});
  return h;
}

TrigComponent random_trig_component(std::mt19937_64& rng, int rows, int cols, double degree,
                                    const RandomTrigOptions& opts) {
  std::uniform_int_distribution<int> fx(-opts.max_x_freq, opts.max_x_freq);
  std::uniform_int_distribution<int> ft(-opts.max_theta_freq, opts.max_theta_freq);
  std::uniform_int_distribution<int> fr(0, rows - 1), fc(0, cols - 1);
  std::normal_distribution<double> nd(0.0, opts.amplitude);
  TrigComponent comp{degree, rows, cols, {}};
  for (int t = 0; t < opts.terms; ++t) {
    TrigTerm term;
    term.n1 = fx(rng);
    term.n2 = opts.depends_x2 ? fx(rng) : 0;
    term.k = ft(rng);
    term.row = fr(rng);
    term.col = fc(rng);
    const double re = nd(rng);
    const double im = nd(rng);
    term.coef = cplx(re, im);
    comp.terms.push_back(term);
  }
  return comp;
}

PolySymbol random_trig_polysymbol(std::mt19937_64& rng, int rows, int cols, double order, int depth,
                                  const RandomTrigOptions& opts) {
  std::vector<HomogeneousSymbol> comps;
  for (int i = 0; i <= depth; ++i) comps.push_back(random_trig_component(rng, rows, cols, order - i, opts).to_symbol());
  return PolySymbol(order, std::move(comps));
}

PolySymbol read_trig_table(std::istream& in, int m) {
  std::map<double, TrigComponent, std::greater<>> by_degree;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 6, "degree") == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double degree, re, im;
    TrigTerm t;
    if (!(ls >> degree >> t.n1 >> t.n2 >> t.k >> t.row >> t.col >> re >> im))
      throw Error("malformed trig table line " + std::to_string(lineno));
    t.coef = cplx(re, im);
    auto& comp = by_degree[degree];
    comp.degree = degree;
    comp.rows = m;
    comp.cols = m;
    comp.terms.push_back(t);
  }
  if (by_degree.empty()) throw Error("trig table has no coefficients");
  const double top = by_degree.begin()->first;
  const double low = by_degree.rbegin()->first;
  const double span = top - low;
  if (std::abs(span - std::round(span)) > 1e-9) throw Error("trig table degrees are not integer-spaced");
  std::vector<HomogeneousSymbol> comps;
  std::size_t matched = 0;
  for (int i = 0; i <= static_cast<int>(std::round(span)); ++i) {
    const double deg = top - i;
    auto it = std::find_if(by_degree.begin(), by_degree.end(), [&](const auto& kv) { return std::abs(kv.first - deg) < 1e-9; });
    if (it == by_degree.end()) {
      comps.push_back(HomogeneousSymbol::zero(m, m, deg));
    } else {
      ++matched;
      comps.push_back(it->second.to_symbol());
    }
  }
  if (matched != by_degree.size()) throw Error("trig table degrees are not integer-spaced");
  return PolySymbol(top, std::move(comps));
}

void write_trig_table(std::ostream& out, const std::vector<TrigComponent>& comps) {
  out << "degree,n1,n2,k,row,col,re,im\n";
  out << std::setprecision(17);
  for (const auto& c : comps)
    for (const auto& t : c.terms)
      out << c.degree << ',' << t.n1 << ',' << t.n2 << ',' << t.k << ',' << t.row << ',' << t.col << ','
          << t.coef.real() << ',' << t.coef.imag() << '\n';
}

}  // namespace psdiag
