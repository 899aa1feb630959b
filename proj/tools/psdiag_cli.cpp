// psdiag: batch driver for the diagonalization, spectral and Weyl checks.
//
// Exit codes: 0 success, 1 numerical failure (e.g. unresolved quadrature),
// 2 configuration error, 3 insufficient data, 4 tolerance failure.

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psdiag/elasticity.hpp"
#include "psdiag/spectra.hpp"
#include "psdiag/trig_symbol.hpp"

using namespace psdiag;
namespace fs = std::filesystem;

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInsufficient = 3;
constexpr int kExitTolerance = 4;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string preset;
  std::string symbol_file;  // trig table, used when no preset is given
  int m = 2;
  int d = 2;
  double lambda = 1.0;
  double mu = 1.0;
  double perturbation = 0.002;
  std::uint64_t seed = 7;
  int depth = 3;
  int N = 16;
  double window = 0.0;  // 0: reliable window only
  double tolerance = 1e-10;
  double asymmetry = 1e-2;
  int grid_x = 8;
  int grid_theta = 16;
  std::vector<std::string> free;  // "j:path" trig tables of degrees -1, -2, ...
  std::string out = "psdiag-out";
  // subcommand options
  double alpha = 1.0;
  int weyl_points = 10;
  std::string framing = "rotated";

  SampleGrid grid() const { return {grid_x, grid_theta}; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(6) << v;
  return ss.str();
}

/// Canonical key = value listing; the config hash is taken over this plus the contents of referenced files.
std::vector<std::pair<std::string, std::string>> canonical(const RunConfig& c, const std::string& command) {
  std::vector<std::pair<std::string, std::string>> kv{
      {"command", command},
      {"preset", c.preset},
      {"symbol", c.symbol_file},
      {"m", std::to_string(c.m)},
      {"d", std::to_string(c.d)},
      {"lambda", fmt(c.lambda)},
      {"mu", fmt(c.mu)},
      {"perturbation", fmt(c.perturbation)},
      {"seed", std::to_string(c.seed)},
      {"depth", std::to_string(c.depth)},
      {"N", std::to_string(c.N)},
      {"window", fmt(c.window)},
      {"tolerance", fmt(c.tolerance)},
      {"asymmetry", fmt(c.asymmetry)},
      {"grid", std::to_string(c.grid_x) + "x" + std::to_string(c.grid_theta)},
      {"alpha", fmt(c.alpha)},
      {"weyl-points", std::to_string(c.weyl_points)},
      {"framing", c.framing},
  };
  for (const auto& f : c.free) kv.emplace_back("free", f);
  return kv;
}

class Manifest {
 public:
  Manifest(const RunConfig& c, const std::string& command) : config_(canonical(c, command)) {
    std::string blob;
    for (const auto& [k, v] : config_) blob += k + "=" + v + "\n";
    if (!c.symbol_file.empty() && c.preset.empty()) blob += read_file(c.symbol_file);
    for (const auto& f : c.free) {
      const auto colon = f.find(':');
      if (colon != std::string::npos) blob += read_file(f.substr(colon + 1));
    }
    hash_ = sha256_hex(blob);
  }
  void tolerance(const std::string& k, double v) { tolerances_.emplace_back(k, sci(v)); }
  void result(const std::string& k, const std::string& v) { results_.emplace_back(k, v); }
  void result(const std::string& k, double v) { results_.emplace_back(k, fmt(v)); }
  void ledger(const Diagonalization& d) {
    std::ostringstream ss;
    write_ledger(ss, d);
    ledger_ = ss.str();
  }
  void status(const std::string& s) { status_ = s; }

  void write(const fs::path& path) const {
    std::ofstream out(path);
    out << "config_hash sha256:" << hash_ << "\n\n[config]\n";
    for (const auto& [k, v] : config_) out << k << " = " << v << '\n';
    out << "\n[tolerances]\n";
    for (const auto& [k, v] : tolerances_) out << k << " = " << v << '\n';
    out << "\n[results]\n";
    for (const auto& [k, v] : results_) out << k << " = " << v << '\n';
    if (!ledger_.empty()) out << "\n[ledger]\n" << ledger_;
    out << "\nstatus = " << status_ << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::pair<std::string, std::string>> tolerances_;
  std::vector<std::pair<std::string, std::string>> results_;
  std::string ledger_;
  std::string hash_;
  std::string status_ = "ok";
};

struct Operator {
  std::string name;
  PolySymbol A;
  std::optional<AnalyticEigendata> eigendata;
};

Operator build_operator(const RunConfig& c) {
  if (c.d != 2) throw ConfigError("only d = 2 is supported");
  if (!c.preset.empty()) {
    PresetOptions o{c.lambda, c.mu, c.seed, c.perturbation};
    try {
      auto p = make_preset(c.preset, o);
      return {p.name, p.A, p.eigendata};
    } catch (const UnknownPresetError& e) {
      std::string names;
      for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      throw ConfigError(std::string(e.what()) + " (known: " + names + ")");
    }
  }
  if (c.symbol_file.empty()) throw ConfigError("no operator: give --preset or --symbol");
  std::istringstream in(read_file(c.symbol_file));
  try {
    return {"custom", read_trig_table(in, c.m), std::nullopt};
  } catch (const Error& e) {
    throw ConfigError(c.symbol_file + ": " + e.what());
  }
}

/// Parses "j:path" entries into f_{j,k} = component of degree -k.
std::map<int, std::vector<HomogeneousSymbol>> free_functions(const RunConfig& c, const EigenFrame& frame) {
  std::map<int, std::vector<HomogeneousSymbol>> out;
  for (const auto& entry : c.free) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) throw ConfigError("free function entry '" + entry + "' is not j:path");
    int j = 0;
    try {
      j = std::stoi(entry.substr(0, colon));
    } catch (const std::exception&) {
      throw ConfigError("bad index in '" + entry + "'");
    }
    if (std::find(frame.J.begin(), frame.J.end(), j) == frame.J.end())
      throw ConfigError("free function index " + std::to_string(j) + " is not an eigenvalue index");
    std::istringstream in(read_file(entry.substr(colon + 1)));
    PolySymbol f;
    try {
      f = read_trig_table(in, 1);
    } catch (const Error& e) {
      throw ConfigError(entry + ": " + e.what());
    }
    auto& fj = out[j];
    fj.assign(static_cast<std::size_t>(c.depth), HomogeneousSymbol::zero(1, 1, 0.0));
    for (int i = 0; i <= f.depth(); ++i) {
      const int k = static_cast<int>(std::lround(-f[i].degree()));
      if (k < 1) throw ConfigError(entry + ": free functions have degrees -1, -2, ...");
      if (k > c.depth) continue;
      if (sup_norm(f[i] - f[i].adjoint(), c.grid()) > 1e-12) throw ConfigError(entry + ": free functions must be real");
      fj[static_cast<std::size_t>(k - 1)] = f[i];
    }
  }
  return out;
}

struct Pipeline {
  Operator op;
  EigenFrame frame;
  ProjectionBasis basis;
  Diagonalization diag;
};

Pipeline run_pipeline(const RunConfig& c) {
  if (c.depth < 1) throw ConfigError("depth must be at least 1");
  Pipeline p{build_operator(c), {}, {}, {}};
  FrameOptions fo;
  fo.grid = c.grid();
  p.frame = decompose_principal(p.op.A.principal(), p.op.eigendata, fo);
  ProjectionOptions po;
  po.grid = c.grid();
  p.basis = build_projections(p.op.A, p.frame, c.depth, po);
  const auto f = free_functions(c, p.frame);
  DiagonalizerOptions dopt;
  dopt.grid = c.grid();
  std::vector<DiagonalizerColumn> cols;
  for (int j : p.frame.J) {
    const auto it = f.find(j);
    cols.push_back(build_column(p.basis, j, c.depth, it == f.end() ? std::vector<HomogeneousSymbol>{} : it->second, dopt));
  }
  p.diag = assemble(p.basis, std::move(cols), c.grid());
  return p;
}

fs::path prepare_out(const RunConfig& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

std::string label(int j) { return "a_" + std::to_string(j); }

void report(const std::string& k, const std::string& v) { std::cout << std::left << std::setw(28) << k << v << '\n'; }

int cmd_diagonalize(const RunConfig& c) {
  Manifest man(c, "diagonalize");
  man.tolerance("ledger", c.tolerance);
  const auto p = run_pipeline(c);
  const auto dir = prepare_out(c);
  {
    std::ofstream out(dir / "ledger.csv");
    write_ledger(out, p.diag);
  }
  for (std::size_t i = 0; i < p.diag.columns.size(); ++i) {
    const int j = p.diag.column_index[i];
    std::ofstream a(dir / ("symbol_" + label(j) + ".txt"));
    dump_samples(p.diag.a[i], a, c.grid());
    std::ofstream b(dir / ("symbol_B_" + std::to_string(j) + ".txt"));
    dump_samples(p.diag.columns[i].B, b, c.grid());
  }
  const double worst = p.diag.ledger_max();
  man.ledger(p.diag);
  man.result("operator", p.op.name);
  man.result("ledger_max", worst);
  man.result("first_unchecked_order", p.diag.first_unchecked_order);
  const bool ok = worst < c.tolerance;
  man.status(ok ? "ok" : "tolerance-failure");
  man.write(dir / "manifest.txt");
  report("operator", p.op.name);
  report("depth", std::to_string(c.depth));
  report("ledger max", sci(worst));
  report("status", ok ? "ok" : "tolerance failure");
  return ok ? 0 : kExitTolerance;
}

int cmd_spectra(const RunConfig& c) {
  Manifest man(c, "spectra");
  man.tolerance("asymmetry", c.asymmetry);
  const auto p = run_pipeline(c);
  const auto dir = prepare_out(c);
  QuantizeOptions qo;
  qo.asymmetry_threshold = c.asymmetry;
  double window = reliable_window(p.frame, c.N, c.grid());
  if (c.window > 0.0) window = std::min(window, c.window);

  const auto qa = quantize(p.op.A, c.N, qo);
  const auto sa = spectrum(qa, window);
  std::vector<SpectrumReport> sj;
  std::vector<std::vector<double>> lists;
  for (int j : p.frame.J) {
    sj.push_back(spectrum(quantize(p.diag.a_of(j), c.N, qo), window));
    lists.push_back(sj.back().eigenvalues);
  }
  {
    std::vector<std::pair<std::string, const SpectrumReport*>> tables{{"A", &sa}};
    for (std::size_t i = 0; i < sj.size(); ++i) tables.emplace_back(label(p.frame.J[i]), &sj[i]);
    std::ofstream out(dir / "eigenvalues.csv");
    write_eigenvalues(out, tables);
  }
  const auto st = closeness_stats(sa.eigenvalues, lists, window);
  {
    std::ofstream out(dir / "closeness.csv");
    write_closeness(out, st.forward);
  }
  const auto zeta = merge_positive(lists);
  const auto pos = sa.positive();
  const int n_max = partition_size_for(window, c.alpha, p.op.A.order(), c.d);
  const auto part = build_partition({pos, zeta}, c.alpha, p.op.A.order(), c.d, n_max);
  const auto counts = interval_counts(part, {pos, zeta});
  {
    std::ofstream out(dir / "partition.csv");
    write_partition(out, counts);
  }
  std::size_t mismatched = 0, windowed = 0;
  for (const auto& row : counts)
    if (row.hi <= window) {
      ++windowed;
      if (row.counts[0] != row.counts[1]) ++mismatched;
    }

  man.result("operator", p.op.name);
  man.result("window", window);
  man.result("x_points", static_cast<double>(qa.x_points));
  man.result("asymmetry_A", qa.asymmetry_norm);
  man.result("pairs", static_cast<double>(st.forward.size()));
  man.result("median_distance", st.median);
  man.result("max_distance", st.max);
  man.result("lower_half_median", st.lower_half_median);
  man.result("upper_half_median", st.upper_half_median);
  man.result("partition_C", part.C);
  man.result("partition_intervals", static_cast<double>(windowed));
  man.result("partition_mismatched", static_cast<double>(mismatched));
  report("operator", p.op.name);
  report("window", fmt(window));
  report("eigenvalues in window", std::to_string(st.forward.size()));
  report("median distance", sci(st.median));
  report("lower/upper half median", sci(st.lower_half_median) + " / " + sci(st.upper_half_median));
  report("partition C", sci(part.C));
  report("mismatched intervals", std::to_string(mismatched) + " of " + std::to_string(windowed));

  int code = 0;
  try {
    const auto mo = match_offset(sa.eigenvalues, zeta, window);
    std::ofstream out(dir / "offset.csv");
    out << "k,deviation\n" << std::setprecision(17);
    for (std::size_t i = 0; i < mo.k.size(); ++i) out << mo.k[i] << ',' << mo.deviations[i] << '\n';
    man.result("offset_z", static_cast<double>(mo.z));
    man.result("offset_median", mo.median);
    man.result("offset_max", mo.max);
    report("offset z", std::to_string(mo.z));
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    man.status("insufficient-data");
    code = kExitInsufficient;
  }
  man.write(dir / "manifest.txt");
  return code;
}

int cmd_weyl(const RunConfig& c) {
  Manifest man(c, "weyl");
  const auto p = run_pipeline(c);
  const auto dir = prepare_out(c);
  const double b = weyl_coefficient(p.frame);
  double window = reliable_window(p.frame, c.N, c.grid());
  if (c.window > 0.0) window = std::min(window, c.window);
  QuantizeOptions qo;
  qo.asymmetry_threshold = c.asymmetry;
  const auto s = spectrum(quantize(p.op.A, c.N, qo), window);
  std::vector<WeylRow> rows;
  for (int i = 1; i <= c.weyl_points; ++i) {
    const double lam = window * i / c.weyl_points;
    rows.push_back({lam, s.counting(lam), weyl_prediction(p.frame, lam)});
  }
  {
    std::ofstream out(dir / "weyl.csv");
    write_weyl(out, rows);
  }
  const auto w = second_weyl_coefficient(p.basis, &p.diag);
  {
    std::ofstream out(dir / "second_weyl.csv");
    out << "j,a_side,diag_side\n" << std::setprecision(17);
    for (std::size_t i = 0; i < w.J.size(); ++i) out << w.J[i] << ',' << w.a_side[i] << ',' << w.diag_side[i] << '\n';
    out << "total," << w.a_total << ',' << w.diag_total << '\n';
  }
  {
    std::ofstream out(dir / "second_weyl_density.csv");
    out << "x1,x2,density\n" << std::setprecision(17);
    for (const auto& r : w.density) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  }
  man.result("operator", p.op.name);
  man.result("weyl_b", b);
  man.result("window", window);
  man.result("count_at_window", static_cast<double>(rows.back().count));
  man.result("ratio_at_window", rows.back().ratio());
  man.result("second_weyl_A", w.a_total);
  man.result("second_weyl_diag", w.diag_total);
  man.result("second_weyl_difference", w.difference());
  man.write(dir / "manifest.txt");
  report("operator", p.op.name);
  report("b", fmt(b));
  report("N(window)/prediction", fmt(rows.back().ratio()));
  report("second Weyl (A side)", sci(w.a_total));
  report("second Weyl (diagonal side)", sci(w.diag_total));
  return 0;
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass() const { return value < tolerance; }
};

int finish_checks(const std::vector<Check>& checks, Manifest& man, const fs::path& dir, const std::string& file) {
  bool ok = true;
  std::ofstream out(dir / file);
  out << "check,value,tolerance,pass\n";
  for (const auto& ch : checks) {
    out << ch.name << ',' << sci(ch.value) << ',' << sci(ch.tolerance) << ',' << (ch.pass() ? 1 : 0) << '\n';
    man.tolerance(ch.name, ch.tolerance);
    man.result(ch.name, sci(ch.value));
    report(ch.name, sci(ch.value) + (ch.pass() ? "  ok" : "  FAIL"));
    ok = ok && ch.pass();
  }
  man.status(ok ? "ok" : "tolerance-failure");
  man.write(dir / "manifest.txt");
  return ok ? 0 : kExitTolerance;
}

int cmd_verify(const RunConfig& c) {
  Manifest man(c, "verify");
  const auto p = run_pipeline(c);
  const auto dir = prepare_out(c);
  const auto g = c.grid();
  std::vector<Check> checks;
  checks.push_back({"projections", verify_projections(p.basis, g).worst(), c.tolerance});
  checks.push_back({"trace_identity", trace_identity_check(p.basis, g), c.tolerance});
  checks.push_back({"ledger", p.diag.ledger_max(), c.tolerance});
  const auto rec = verify_recovery(p.diag.columns, p.basis, g);
  checks.push_back({"recovery_projection", rec.projection, c.tolerance});
  checks.push_back({"recovery_partition", rec.partition, c.tolerance});
  std::vector<PolySymbol> aux;
  for (int j : p.frame.J) aux.push_back(build_auxiliary(p.basis, j));
  checks.push_back({"conjugated_blocks", verify_conjugated_blocks(p.diag, p.basis, aux, g), c.tolerance});
  for (std::size_t i = 0; i < p.diag.columns.size(); ++i) {
    const int j = p.diag.column_index[i];
    const auto& col = p.diag.columns[i];
    if (col.log.empty()) continue;
    const auto formula = subprincipal_formula(p.basis, j, col.free_functions.empty() ? HomogeneousSymbol::zero(1, 1, -1.0)
                                                                                      : col.free_functions[0]);
    checks.push_back({"B_sub_formula_" + std::to_string(j), sup_norm(subprincipal(col.B) - formula, g), c.tolerance});
  }
  if (p.op.name == "lame-flat" || p.op.name == "lame-rotated") {
    ElasticitySetup setup{c.lambda, c.mu, p.op.name == "lame-rotated" ? Framing::rotated() : Framing::standard()};
    checks.push_back({"lame_a_sub", verify_lame_subprincipal(setup, c.depth, {}, g).worst(), c.tolerance});
  }
  man.ledger(p.diag);
  man.result("operator", p.op.name);
  report("operator", p.op.name);
  return finish_checks(checks, man, dir, "verify.csv");
}

int cmd_elasticity_demo(const RunConfig& c) {
  Manifest man(c, "elasticity-demo");
  const auto dir = prepare_out(c);
  Framing framing;
  if (c.framing == "rotated") framing = Framing::rotated();
  else if (c.framing != "standard") throw ConfigError("framing must be 'standard' or 'rotated'");
  const ElasticitySetup setup{c.lambda, c.mu, framing};
  check_convexity(setup);
  const auto g = c.grid();

  std::mt19937_64 rng(c.seed);
  std::vector<FreeChoice> choices{{}};
  for (int i = 0; i < 3; ++i) choices.push_back(random_free_choice(rng, 2, c.depth));
  const auto rep = verify_lame_subprincipal(setup, c.depth, choices, g);
  std::vector<Check> checks;
  for (std::size_t i = 0; i < rep.a_sub.size(); ++i)
    checks.push_back({"a_sub_choice_" + std::to_string(i), rep.a_sub[i], c.tolerance});
  checks.push_back({"principal_closed_form", rep.principal_form, c.tolerance});
  checks.push_back({"subprincipal_closed_form", rep.subprincipal_form, c.tolerance});
  checks.push_back({"P_sub", rep.pj_sub, c.tolerance});
  checks.push_back({"bracket_P_v", rep.bracket_pv, c.tolerance});
  checks.push_back({"B_sub", rep.b_sub, c.tolerance});
  checks.push_back({"v_Lsub_v", rep.v_lsub_v, c.tolerance});
  checks.push_back({"bracket_vstar_v", rep.vstar_v, c.tolerance});
  checks.push_back({"bracket_vstar_P_v", rep.vstar_p_v, c.tolerance});
  checks.push_back({"bracket_vstar_L_v", rep.vstar_l_v, c.tolerance});
  checks.push_back({"symmetric_pair", rep.symmetric_pair, c.tolerance});
  const auto t = torsion_covector(framing);
  const auto phi = framing.angle();
  checks.push_back({"torsion_minus_dphi", std::max(sup_norm(t[0] - phi.dx(0), g), sup_norm(t[1] - phi.dx(1), g)), c.tolerance});

  // Framing invariance of the quantized spectrum, compared by closeness: the
  // cutoff at k = 0 moves a few isolated eigenvalues.
  if (!framing.x_independent()) {
    QuantizeOptions qo;
    qo.asymmetry_threshold = c.asymmetry;
    const double window = c.mu * (c.N / 2.0) * (c.N / 2.0);
    const auto flat = spectrum(quantize(build_lame_symbol({c.lambda, c.mu, Framing::standard()}), c.N, qo));
    const auto rot = spectrum(quantize(build_lame_symbol(setup), c.N, qo));
    const auto st = closeness_stats(rot.eigenvalues, {flat.eigenvalues}, window);
    std::ofstream out(dir / "framing.csv");
    write_closeness(out, st.forward);
    checks.push_back({"framing_median_distance", st.median, 1e-6});
  }
  return finish_checks(checks, man, dir, "elasticity.csv");
}

void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("--preset", c.preset, "Operator preset: lame-flat, lame-rotated, lame-perturbed, laplacian");
  app.add_option("--symbol", c.symbol_file, "Trig-coefficient table (degree,n1,n2,k,row,col,re,im)");
  app.add_option("--m", c.m, "Matrix size of a custom symbol")->check(CLI::PositiveNumber);
  app.add_option("--d", c.d, "Dimension (2 only)");
  app.add_option("--lambda", c.lambda, "Lame parameter lambda");
  app.add_option("--mu", c.mu, "Lame parameter mu");
  app.add_option("--perturbation", c.perturbation, "Amplitude for lame-perturbed")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", c.seed, "Seed for every randomized choice");
  app.add_option("--depth,-K", c.depth, "Truncation depth K")->check(CLI::Range(1, 8));
  app.add_option("--N", c.N, "Fourier cutoff |k|_inf <= N")->check(CLI::Range(1, 64));
  app.add_option("--window", c.window, "Upper bound for the spectral window (0: reliable window)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tolerance", c.tolerance, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--asymmetry", c.asymmetry, "Quantization asymmetry bound")->check(CLI::PositiveNumber);
  app.add_option("--grid-x", c.grid_x, "Grid points per x-direction")->check(CLI::PositiveNumber);
  app.add_option("--grid-theta", c.grid_theta, "Grid points on the circle")->check(CLI::PositiveNumber);
  app.add_option("--free", c.free, "Free functions j:path, trig tables of degrees -1, -2, ...");
  app.add_option("--out,-o", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbol-level diagonalization of elliptic systems on the torus"};
  app.set_config("--config", "", "Key-value config file");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig c;
  add_common(app, c);

  auto* diag = app.add_subcommand("diagonalize", "Build B and a_j; write the residual ledger and symbol dumps");
  auto* spectra = app.add_subcommand("spectra", "Quantize A and a_j; eigenvalue, closeness, offset and partition tables");
  spectra->add_option("--alpha", c.alpha, "Partition exponent")->check(CLI::PositiveNumber);
  auto* weyl = app.add_subcommand("weyl", "Counting function versus Weyl's law; second Weyl coefficient");
  weyl->add_option("--points", c.weyl_points, "Rows in the counting table")->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("verify", "All symbol-level invariants");
  auto* demo = app.add_subcommand("elasticity-demo", "Lame subprincipal identities and framing invariance");
  demo->add_option("--framing", c.framing, "standard or rotated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (diag->parsed()) return cmd_diagonalize(c);
    if (spectra->parsed()) return cmd_spectra(c);
    if (weyl->parsed()) return cmd_weyl(c);
    if (verify->parsed()) return cmd_verify(c);
    if (demo->parsed()) return cmd_elasticity_demo(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    return kExitInsufficient;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}
