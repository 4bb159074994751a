#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdl/approxfun.hpp"
#include "mdl/arith.hpp"
#include "mdl/bounds.hpp"
#include "mdl/errors.hpp"
#include "mdl/experiments.hpp"
#include "mdl/intervals.hpp"
#include "mdl/parallel.hpp"
#include "mdl/rotation.hpp"

namespace mdl::cli {

namespace {

using approxfun::ApproxFunction;
using realnum::CertifiedReal;

std::string u(std::uint64_t v) { return std::to_string(v); }
std::string est(const Estimate& e) { return format_estimate(e); }

void count(Report& r, Decision d, const std::string& what) {
  if (d == Decision::Indeterminate) ++r.indeterminate;
  if (d == Decision::False) r.failures.push_back(what);
}

void add_invariants(Report& r, const std::vector<experiments::Invariant>& inv) {
  for (const auto& i : inv) {
    r.note("invariant:" + i.name, decision(i.pass));
    count(r, i.pass, i.name + (i.detail.empty() ? "" : ": " + i.detail));
  }
}

Report discrepancy(const Config& c) {
  Report r;
  const auto gamma = c.real("gamma");
  const unsigned H = c.H_or(50);
  if (c.N > 20000) throw BudgetExceeded("discrepancy supports N <= 20000");
  const rotation::Orbit orbit(gamma, c.N);
  const auto series = rotation::discrepancy_series(orbit);
  const rotation::EtkTable etk(gamma, H);
  const auto b72 = rotation::verify_72_bound(gamma, 1, c.N, c.N, rotation::SigmaMode::PerN);
  auto& t = r.table("");
  t.columns = {"N", "discrepancy", "discrepancy_err", "etk_bound", "etk_dominates",
               "scaled_discrepancy", "bound72", "sigma", "bound72_pass"};
  std::uint64_t etk_fail = 0, b72_fail = 0;
  for (std::uint64_t N = 1; N <= c.N; ++N) {
    const auto& d = series[N - 1];
    const Estimate e = etk.bound(N, H);
    std::string dom = "n/a";
    if (e.hi() < 1) {
      const Estimate de = d.estimate();
      const Decision ok = de.hi() <= e.lo() ? Decision::True
                          : de.lo() > e.hi() ? Decision::False
                                             : Decision::Indeterminate;
      dom = decision(ok);
      if (ok == Decision::False) ++etk_fail;
      if (ok == Decision::Indeterminate) ++r.indeterminate;
    }
    const auto& row72 = b72.rows[N - 1];
    std::string p72 = "n/a";
    if (row72.asserted) {
      p72 = decision(row72.pass);
      if (row72.pass == Decision::False) ++b72_fail;
    }
    t.rows.push_back({u(N), fraction(d.value), format_long_double(d.err, 6), est(e), dom,
                      est(row72.scaled_discrepancy), est(row72.bound), est(row72.sigma), p72});
  }
  r.indeterminate += b72.indeterminate;
  if (etk_fail) r.failures.push_back(u(etk_fail) + " rows with discrepancy above the ETK bound");
  if (b72_fail) r.failures.push_back(u(b72_fail) + " rows violating the 72-bound");
  r.note("gamma", gamma.label());
  r.note("H", u(H));
  r.note("etk_failures", u(etk_fail));
  r.note("bound72_failures", u(b72_fail));
  return r;
}

bounds::BoundsConfig bounds_cfg(const Config& c) {
  bounds::BoundsConfig b;
  b.H = c.H_or(4);
  b.psi = c.psi_function();
  b.gamma = c.real("gamma");
  b.threads = c.threads;
  try {
    b.validate();
  } catch (const std::exception& e) {
    throw ConfigSemanticError("H", e.what());
  }
  return b;
}

Report master_check(const Config& c, const RunOptions& opt) {
  Report r;
  const auto b = bounds_cfg(c);
  if (c.Q > intervals::kGridQMax) throw BudgetExceeded("master-check supports Q <= 16384");
  if (opt.per_pair) {
    if (c.Q > 2000) throw BudgetExceeded("per-pair output supports Q <= 2000");
    auto& t = r.table("");
    t.columns = {"q_small", "q", "gcd", "branch", "lhs", "rhs", "ratio", "chi", "pass", "c0_implied"};
    const intervals::PairKernel k(b.psi, b.gamma, c.Q, c.threads);
    for (std::uint64_t q = 2; q <= c.Q; ++q) {
      for (std::uint64_t qs = 1; qs < q; ++qs) {
        const auto row = bounds::master_check(qs, q, b);
        const std::string ratio = sgn(row.rhs) > 0 ? fraction(row.measure / row.rhs) : "n/a";
        t.rows.push_back({u(qs), u(q), u(row.g), row.branch1 ? "1" : "2", fraction(row.measure),
                          fraction(row.rhs), ratio, row.branch1 ? decision(row.chi) : "n/a",
                          decision(row.pass), row.branch1 ? "n/a" : fraction(row.c0_implied)});
        count(r, row.pass, "pair (" + u(qs) + "," + u(q) + ")");
      }
    }
    return r;
  }
  const auto scan = bounds::master_scan(c.Q, b);
  auto& t = r.table("");
  t.columns = {"q", "pairs", "branch1", "branch2", "failures", "indeterminate", "max_c0_implied"};
  for (const auto& s : scan.per_q)
    t.rows.push_back({u(s.q), u(s.pairs), u(s.branch1), u(s.branch2), u(s.failures), u(s.indeterminate),
                      fraction(s.max_c0_implied)});
  r.indeterminate = scan.indeterminate;
  if (scan.failures) r.failures.push_back(u(scan.failures) + " pairs violate the branch-1 bound");
  r.note("pairs", u(scan.pairs));
  r.note("branch1", u(scan.branch1));
  r.note("branch2", u(scan.branch2));
  r.note("failures", u(scan.failures));
  r.note("max_c0_implied", fraction(scan.max_c0_implied));
  r.note("max_c0_pair", u(scan.max_c0_q_small) + "," + u(scan.max_c0_q));
  return r;
}

Report counting_sum(const Config& c) {
  Report r;
  const auto psi = c.psi_function();
  const auto gamma = c.real("gamma");
  if (c.Q > 20000) throw BudgetExceeded("counting-sum supports Q <= 20000");
  const intervals::PairKernel k(psi, gamma, c.Q, c.threads);
  struct Row {
    bounds::CountingSum s;
    bounds::CountingDecomposition d;
  };
  auto rows = parallel_reduce<std::vector<Row>>(
      1, c.Q + 1, 16, c.threads, {},
      [&](std::uint64_t b, std::uint64_t e) {
        std::vector<Row> v;
        for (std::uint64_t q = b; q < e; ++q) v.push_back({bounds::counting_sum(q, k), bounds::counting_decomposition(q, k)});
        return v;
      },
      [](std::vector<Row> a, std::vector<Row> b) {
        for (auto& x : b) a.push_back(std::move(x));
        return a;
      });
  auto& t = r.table("");
  t.columns = {"q", "psi", "S", "S_lo", "S_hi", "indeterminate", "decomposition_total", "identity",
               "tail_small", "low_levels", "high_levels", "S_violations"};
  std::uint64_t mism = 0, viol = 0;
  for (const auto& row : rows) {
    const bool same = row.d.total == row.s.value();
    if (!same) ++mism;
    viol += row.d.S_violations;
    r.indeterminate += row.s.indeterminate;
    t.rows.push_back({u(row.s.q), fraction(row.s.psi_q), fraction(row.s.value()), fraction(row.s.value_lo()),
                      fraction(row.s.value_hi()), u(row.s.indeterminate), fraction(row.d.total), boolean(same),
                      fraction(row.d.tail_small), fraction(row.d.low_levels), fraction(row.d.high_levels),
                      u(row.d.S_violations)});
  }
  auto& cells = r.table("decomposition");
  cells.columns = {"r", "k", "size", "hits", "contribution", "radius", "S", "hits_within_S"};
  for (const auto& cell : rows.back().d.cells)
    cells.rows.push_back({u(cell.r), u(cell.k), u(cell.size), u(cell.hits), fraction(cell.contribution),
                          cell.interval_defined ? format_long_double(cell.radius, 21) : "n/a",
                          cell.interval_defined ? u(cell.S) : "n/a",
                          cell.interval_defined ? decision(cell.hits_within_S) : "n/a"});
  if (c.Q >= 16) {
    const auto ratio = bounds::counting_lemma_ratio(16, c.Q, psi, gamma, c.threads);
    auto& rt = r.table("ratio");
    rt.columns = {"q", "S", "ratio"};
    for (const auto& row : ratio.rows) rt.rows.push_back({u(row.q), fraction(row.S), est(row.ratio)});
    r.note("max_ratio", est(ratio.max_ratio));
    r.note("max_ratio_q", u(ratio.argmax));
  }
  if (mism) r.failures.push_back(u(mism) + " q where the decomposition total differs from S(q)");
  r.note("identity_mismatches", u(mism));
  r.note("S_violations", u(viol));
  return r;
}

Report harman(const Config& c) {
  Report r;
  const auto psi = c.psi_function();
  const auto gamma = c.real("gamma");
  if (c.Q > 2000) throw BudgetExceeded("harman-c0 supports Q <= 2000");
  std::vector<std::uint64_t> qs = c.checkpoints;
  if (qs.empty()) {
    for (std::uint64_t v = 2; v < c.Q; v *= 2) qs.push_back(v);
    qs.push_back(c.Q);
  }
  const auto series = bounds::harman_c0_series(qs, psi, gamma, c.threads);
  auto& t = r.table("");
  t.columns = {"q_max", "sup", "sup_approx", "q_small", "q", "pairs"};
  bool mono = true;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& h = series[i];
    if (i > 0 && h.sup < series[i - 1].sup) mono = false;
    t.rows.push_back({u(qs[i]), fraction(h.sup), approx(h.sup), u(h.q_small), u(h.q), u(h.pairs)});
  }
  if (!mono) r.failures.push_back("C0 estimate decreased with q_max");
  r.note("sup", fraction(series.back().sup));
  return r;
}

Report f_tail(const Config& c) {
  Report r;
  if (c.Q > 1000000) throw BudgetExceeded("f-tail supports Q <= 10^6");
  auto& t = r.table("");
  t.columns = {"Q", "K", "C", "moment", "rhs", "moment_ok", "threshold", "tail_count", "tail_indeterminate",
               "tail_limit", "tail_ok", "markov_ok", "K_Q"};
  for (unsigned K : c.K_list()) {
    const auto f = bounds::f_moment_tail_check(c.Q, K);
    t.rows.push_back({u(f.Q), u(K), est(f.C), est(f.moment), est(f.rhs), decision(f.moment_ok),
                      format_long_double(f.threshold), u(f.tail.count), u(f.tail.indeterminate),
                      format_long_double(f.tail_limit), decision(f.tail_ok), decision(f.markov_ok),
                      format_long_double(f.K_Q, 6)});
    count(r, f.moment_ok, "moment bound at K = " + u(K));
    count(r, f.tail_ok, "tail count at K = " + u(K));
    count(r, f.markov_ok, "Markov consistency at K = " + u(K));
  }
  return r;
}

void coverage_tables(Report& r, const experiments::ExperimentReport& rep, const std::string& prefix) {
  auto& t = r.table(prefix);
  t.columns = {"Q", "sum_measure", "sum_pairs", "ce_bound", "union_measure", "ce_bound_approx",
               "union_measure_approx"};
  for (const auto& c : rep.checkpoints)
    t.rows.push_back({u(c.Q), fraction(c.sum_measure), fraction(c.sum_pairs), fraction(c.ce_bound),
                      c.union_measure ? fraction(*c.union_measure) : "n/a", approx(c.ce_bound),
                      c.union_measure ? approx(*c.union_measure) : "n/a"});
  auto& w = r.table(prefix.empty() ? "windows" : prefix + "_windows");
  w.columns = {"Q1", "Q2", "union_measure", "union_measure_approx"};
  for (const auto& x : rep.windows) w.rows.push_back({u(x.Q1), u(x.Q2), fraction(x.measure), approx(x.measure)});
  for (const auto& [k, v] : rep.diagnostics) r.note(k, v);
  add_invariants(r, rep.invariants);
}

experiments::ExperimentConfig exp_cfg(const Config& c) {
  experiments::ExperimentConfig e;
  e.psi = c.psi_function();
  e.Q = c.Q;
  e.checkpoints = c.checkpoints;
  e.H = c.H_or(4);
  e.k = c.k;
  e.seed = c.seed;
  e.mc_samples = c.mc_samples;
  e.threads = c.threads;
  try {
    (void)e.schedule();
  } catch (const std::exception& ex) {
    throw ConfigSemanticError("checkpoints", ex.what());
  }
  return e;
}

Report coverage(const Config& c) {
  Report r;
  r.header = experiments::kProxyHeader;
  auto e = exp_cfg(c);
  e.gammas = {c.real("gamma")};
  coverage_tables(r, experiments::union_coverage_scan(e), "");
  return r;
}

Report multiplicative(const Config& c) {
  Report r;
  r.header = experiments::kProxyHeader;
  const auto rep = experiments::multiplicative_pipeline(c.psi_function(), c.real("beta"), c.real("gamma"),
                                                        c.real("gamma2"), c.Q, c.threads);
  coverage_tables(r, rep.coverage, "");
  auto& d = r.table("condition_d");
  d.columns = {"Q", "sum", "members", "indeterminate"};
  for (const auto& x : rep.condition_d.condition_d)
    d.rows.push_back({u(x.Q), est(x.sum), u(x.members), u(x.indeterminate)});
  auto& b = r.table("bkl");
  b.columns = {"k", "l", "count", "indeterminate", "degenerate", "normalized"};
  for (const auto& x : rep.bkl.cells)
    b.rows.push_back({u(x.k), u(x.l), u(x.count), u(x.indeterminate), boolean(x.degenerate), fraction(x.normalized)});
  r.note("B_members", u(rep.B_members));
  r.note("B_indeterminate", u(rep.B_indeterminate));
  r.note("bkl_c_fit", fraction(rep.bkl.c_fit));
  r.note("bkl_c_fit_nondegenerate", fraction(rep.bkl.c_fit_nondegenerate));
  r.indeterminate += rep.B_indeterminate;
  return r;
}

Report highdim(const Config& c) {
  Report r;
  r.header = experiments::kProxyHeader;
  auto e = exp_cfg(c);
  e.gammas = c.gamma_list();
  const auto rep = experiments::highdim_experiment(e);
  auto& t = r.table("");
  t.columns = {"Q", "sum_measure", "sum_pairs", "ce_bound", "ce_bound_approx", "union_measure", "mc_estimate",
               "mc_half_width", "mc_hits", "mc_samples"};
  for (const auto& x : rep.checkpoints) {
    std::vector<std::string> row{u(x.Q), fraction(x.sum_measure), fraction(x.sum_pairs), fraction(x.ce_bound),
                                 approx(x.ce_bound), x.union_measure ? fraction(*x.union_measure) : "n/a"};
    if (x.monte_carlo) {
      row.push_back(format_long_double(x.monte_carlo->p_hat));
      row.push_back(format_long_double(x.monte_carlo->half_width));
      row.push_back(u(x.monte_carlo->hits));
      row.push_back(u(x.monte_carlo->N));
    } else {
      row.insert(row.end(), {"n/a", "n/a", "n/a", "n/a"});
    }
    t.rows.push_back(std::move(row));
  }
  auto& cl = r.table("classes");
  cl.columns = {"l", "count", "a_l", "ce_bound"};
  for (const auto& x : rep.classes)
    cl.rows.push_back({u(x.l), u(x.count), est(x.a_l), x.ce_bound ? fraction(*x.ce_bound) : "n/a"});
  for (const auto& [k, v] : rep.diagnostics) r.note(k, v);
  add_invariants(r, rep.invariants);
  return r;
}

Report szusz(const Config& c) {
  Report r;
  const auto psi = c.psi_function();
  if (c.Q > 1000000) throw BudgetExceeded("szusz-shrink supports Q <= 10^6");
  experiments::SzuszResult res;
  try {
    res = experiments::szusz_shrink(psi, c.Q);
  } catch (const NotMonotone& e) {
    r.failures.push_back(e.what());
    r.note("error", "NotMonotone");
    return r;
  }
  auto& t = r.table("");
  t.columns = {"q", "psi", "psi_shrunk"};
  std::uint64_t bad = 0;
  for (std::uint64_t q = 1; q <= c.Q; ++q) {
    const mpq_class a = psi.eval(q), b = res.shrunk.eval(q);
    const mpq_class half(1, 2 * q);
    if (b > a || b > std::max(a, half)) ++bad;
    t.rows.push_back({u(q), fraction(a), fraction(b)});
  }
  auto& w = r.table("windows");
  w.columns = {"lo", "hi", "sum", "sum_approx", "at_least_quarter"};
  std::uint64_t small = 0;
  for (const auto& x : res.windows) {
    const bool ok = x.sum >= mpq_class(1, 4);
    if (!ok) ++small;
    w.rows.push_back({u(x.lo), u(x.hi), fraction(x.sum), approx(x.sum), boolean(ok)});
  }
  if (bad) r.failures.push_back(u(bad) + " q with psi' above psi");
  if (small) r.failures.push_back(u(small) + " windows with sum below 1/4");
  r.note("changed", boolean(res.changed));
  r.note("triggers", u(res.triggers.size()));
  r.note("first_trigger", res.triggers.empty() ? "none" : u(res.triggers.front()));
  return r;
}

// Small configurations for the determinism self-test.
Config self_test_config(const Config& base, const std::string& sub) {
  Config c = base;
  c.subcommand = sub;
  c.checkpoints.clear();
  c.H.reset();
  c.K.clear();
  c.gammas.clear();
  if (sub == "discrepancy") c.N = 300;
  if (sub == "master-check") c.Q = 300;
  if (sub == "counting-sum") c.Q = 200;
  if (sub == "harman-c0") c.Q = 100;
  if (sub == "f-tail") c.Q = 5000;
  if (sub == "coverage") c.Q = 256;
  if (sub == "multiplicative") {
    c.Q = 256;
    c.psi = "c_over_q_log_loglog2:1";
    c.psi_q0.reset();
    c.filters.clear();
  }
  if (sub == "highdim") {
    c.Q = 64;
    c.k = 2;
    c.mc_samples = 20000;
  }
  if (sub == "szusz-shrink") {
    c.Q = 1000;
    c.psi = "constant:1/4";
    c.psi_q0.reset();
    c.filters.clear();
  }
  return c;
}

Report self_test(const Config& base) {
  Report r;
  auto& t = r.table("");
  t.columns = {"subcommand", "threads", "bytes", "fnv1a", "identical"};
  for (const auto& sub : subcommand_names()) {
    if (sub == "self-test") continue;
    std::string ref;
    for (unsigned th : {1u, 2u, 8u}) {
      Config c = self_test_config(base, sub);
      c.threads = th;
      const Report rep = run_subcommand(sub, c);
      std::string bytes = to_json(rep);
      for (const auto& tb : rep.tables) bytes += to_csv(tb);
      if (th == 1) ref = bytes;
      const bool same = bytes == ref;
      if (!same) r.failures.push_back(sub + " differs at " + u(th) + " threads");
      char h[17];
      std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
      t.rows.push_back({sub, u(th), u(bytes.size()), h, boolean(same)});
    }
  }
  return r;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"discrepancy", "master-check", "counting-sum", "harman-c0",
                                              "f-tail",      "coverage",     "multiplicative", "highdim",
                                              "szusz-shrink", "self-test"};
  return names;
}

Report run_subcommand(const std::string& sub, const Config& cfg, const RunOptions& opt) {
  Report r;
  if (sub == "discrepancy") r = discrepancy(cfg);
  else if (sub == "master-check") r = master_check(cfg, opt);
  else if (sub == "counting-sum") r = counting_sum(cfg);
  else if (sub == "harman-c0") r = harman(cfg);
  else if (sub == "f-tail") r = f_tail(cfg);
  else if (sub == "coverage") r = coverage(cfg);
  else if (sub == "multiplicative") r = multiplicative(cfg);
  else if (sub == "highdim") r = highdim(cfg);
  else if (sub == "szusz-shrink") r = szusz(cfg);
  else if (sub == "self-test") r = self_test(cfg);
  else throw ConfigSemanticError("subcommand", "unknown subcommand '" + sub + "'");
  r.subcommand = sub;
  return r;
}

void write_artifacts(const Report& r, const Config& cfg, double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  std::vector<std::string> files;
  for (const auto& t : r.tables) {
    const std::string name = csv_name(r, t);
    write_atomic((dir / name).string(), to_csv(t));
    files.push_back(name);
  }
  const std::string json_name = r.subcommand + ".json";
  write_atomic((dir / json_name).string(), to_json(r));
  files.push_back(json_name);

  Config hashed = cfg;
  hashed.threads = 1;
  hashed.out.clear();
  hashed.subcommand = r.subcommand;
  nlohmann::ordered_json m;
  m["tool"] = "mdl";
  m["version"] = kToolVersion;
  char h[17];
  std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(fnv1a(emit_config(hashed))));
  m["config_hash"] = h;
  m["precision"] = {{"start_digits", cfg.policy().start_digits}, {"max_digits", cfg.policy().max_digits}};
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["wall_seconds"] = wall_seconds;
  m["subcommand"] = r.subcommand;
  m["files"] = files;
  m["passed"] = r.failures.empty();
  m["failures"] = r.failures;
  m["indeterminate"] = r.indeterminate;
  m["indeterminate_cap"] = cfg.indeterminate_cap;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.summary) s[k] = v;
  m["summary"] = s;
  write_atomic((dir / "manifest.json").string(), m.dump(2) + "\n");
}

int exit_code(const Report& r, const Config& cfg) {
  if (!r.failures.empty()) return kExitAssertion;
  if (r.indeterminate > cfg.indeterminate_cap) return kExitIndeterminate;
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"mdl: desk-scale verifiers for inhomogeneous metric Diophantine approximation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, gamma, beta, gamma2, psi, out;
  std::uint64_t Q = 0, N = 0, H = 0, seed = 0, cap = 0, mc = 0;
  unsigned k = 0, threads = 0, digits = 0;
  std::vector<unsigned> K;
  std::vector<std::string> gammas;
  bool per_pair = false;
  auto* o_config = app.add_option("--config", config_path, "Experiment config file");
  auto* o_gamma = app.add_option("--gamma", gamma, "Inhomogeneous shift (preset, p/q, or decimal[:err])");
  auto* o_beta = app.add_option("--beta", beta, "Multiplicative base");
  auto* o_gamma2 = app.add_option("--gamma2", gamma2, "Multiplicative shift");
  auto* o_gammas = app.add_option("--gammas", gammas, "Shifts for highdim, one per dimension");
  auto* o_psi = app.add_option("--psi", psi, "family:c or table:q=v,...");
  auto* o_Q = app.add_option("--Q", Q, "Range limit");
  auto* o_N = app.add_option("--N", N, "Orbit length");
  auto* o_H = app.add_option("--H", H, "ETK cutoff or master-lemma H");
  auto* o_k = app.add_option("--k", k, "Dimension");
  auto* o_K = app.add_option("--K", K, "Moment exponents for f-tail");
  auto* o_digits = app.add_option("--precision-digits", digits, "Starting precision in decimal digits");
  auto* o_seed = app.add_option("--seed", seed, "Monte Carlo seed");
  auto* o_mc = app.add_option("--mc-samples", mc, "Monte Carlo sample count");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads");
  auto* o_out = app.add_option("--out", out, "Output directory");
  auto* o_cap = app.add_option("--indeterminate-cap", cap, "Allowed indeterminate count");
  app.add_flag("--per-pair", per_pair, "master-check: one row per pair");
  for (const auto& s : subcommand_names()) app.add_subcommand(s, s);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  Config cfg;
  try {
    if (o_config->count()) cfg = parse_config(config_path);
    if (o_gamma->count()) cfg.gamma = gamma;
    if (o_beta->count()) cfg.beta = beta;
    if (o_gamma2->count()) cfg.gamma2 = gamma2;
    if (o_gammas->count()) cfg.gammas = gammas;
    if (o_psi->count()) cfg.psi = psi;
    if (o_Q->count()) cfg.Q = Q;
    if (o_N->count()) cfg.N = N;
    if (o_H->count()) cfg.H = H;
    if (o_k->count()) cfg.k = k;
    if (o_K->count()) cfg.K = K;
    if (o_digits->count()) cfg.precision_digits = digits;
    if (o_seed->count()) cfg.seed = seed;
    if (o_mc->count()) cfg.mc_samples = mc;
    if (o_threads->count()) cfg.threads = threads;
    if (o_out->count()) cfg.out = out;
    if (o_cap->count()) cfg.indeterminate_cap = cap;
    if (!cfg.subcommand.empty() && cfg.subcommand != sub)
      std::cerr << "note: config names subcommand '" << cfg.subcommand << "'; running '" << sub << "'\n";
    cfg.subcommand = sub;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunOptions opt;
    opt.per_pair = per_pair;
    const Report r = run_subcommand(sub, cfg, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_artifacts(r, cfg, wall);
    for (const auto& f : r.failures) std::cerr << "assertion failed: " << f << "\n";
    const int rc = exit_code(r, cfg);
    if (rc == kExitIndeterminate)
      std::cerr << "indeterminate count " << r.indeterminate << " exceeds cap " << cfg.indeterminate_cap << "\n";
    std::cout << sub << ": " << (rc == kExitOk ? "ok" : "failed") << " (" << cfg.out << ")\n";
    return rc;
  } catch (const ConfigSemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const RangeExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const IndeterminateAtPrecision& e) {
    std::cerr << "indeterminate: " << e.what() << "\n";
    return kExitIndeterminate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
}

}  // namespace mdl::cli
