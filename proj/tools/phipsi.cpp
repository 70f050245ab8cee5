// SPDX-License-Identifier: Apache-2.0

// Command-line front end: exact values, constants, sweeps, density histograms, witnesses and
// progression sums. Exit codes: 0 ok, 2 usage/argument, 3 domain, 4 resource, 5 budget.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phipsi/phipsi.hpp"

namespace {

using namespace phipsi;

enum exit_code { ok = 0, failure = 1, usage = 2, domain = 3, resource = 4, budget = 5 };

struct run_config {
  std::string n_text = "1";
  std::uint64_t x = 0;
  std::uint64_t cutoff = 1'000'000;
  std::uint64_t m = 1;
  std::vector<std::uint64_t> checkpoints;
  double c1 = 1.0;
  double b3 = 4.0 * std::exp(3.0) * 1.1;
  unsigned rounds = 40;
  std::string mode = "auto";
  std::size_t segment_size = default_segment_size;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out_path;
  std::string format = "csv";
  std::string extremes_path;
};

struct big_context {
  factor_budget budget;
  big_factorization factor(const big_nat& n) const { return factor_big(n, std::nullopt, budget); }
};

void emit(const run_config& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) throw resource_error("cannot open output file " + cfg.out_path);
  out << text;
}

std::string fmt(double v) { return detail::format_double(v); }

int cmd_compute(const run_config& cfg) {
  big_nat n;
  try {
    n = big_nat(cfg.n_text);
  } catch (const std::exception&) {
    throw argument_error("compute: n must be a decimal natural, got '" + cfg.n_text + "'");
  }
  if (n < 1) throw argument_error("compute: n must be >= 1");
  const big_context ctx;
  const auto c = compose<big_nat>(n, ctx);
  const big_nat phi_n = c.phi_n.value(), psi_n = c.psi_n.value();
  const big_nat phi_phi = phi(c.phi_n), psi_phi = psi(c.phi_n), phi_psi = phi(c.psi_n);
  const exact_ratio I(psi_phi, phi_psi), K(psi_phi, phi_phi);

  std::ostringstream os;
  if (cfg.format == "json") {
    auto ratio = [](const exact_ratio& q) {
      return nlohmann::json{{"num", q.num().str()}, {"den", q.den().str()}, {"value", q.to_double()}};
    };
    nlohmann::json j{{"n", n.str()},
                     {"phi", phi_n.str()},
                     {"psi", psi_n.str()},
                     {"phi_phi", phi_phi.str()},
                     {"psi_phi", psi_phi.str()},
                     {"phi_psi", phi_psi.str()},
                     {"I", ratio(I)},
                     {"K", ratio(K)}};
    os << j.dump(2) << '\n';
  } else {
    os << "n = " << n << " = " << c.n << '\n'
       << "phi(n) = " << phi_n << '\n'
       << "psi(n) = " << psi_n << '\n'
       << "phi(phi(n)) = " << phi_phi << '\n'
       << "psi(phi(n)) = " << psi_phi << '\n'
       << "phi(psi(n)) = " << phi_psi << '\n'
       << "I(n) = " << I << " ~ " << fmt(I.to_double()) << '\n'
       << "K(n) = " << K << " ~ " << fmt(K.to_double()) << '\n';
  }
  emit(cfg, os.str());
  return ok;
}

int cmd_constants(const run_config& cfg) {
  if (cfg.cutoff < 2) throw argument_error("constants: cutoff must be >= 2");
  const auto c = c0(cfg.cutoff);
  const auto minus = mertens_minus(cfg.cutoff);
  const auto plus = mertens_plus(cfg.cutoff);
  std::ostringstream os;
  if (cfg.format == "json") {
    nlohmann::json j{
        {"euler_gamma", euler_gamma()},
        {"leading_constant", leading_constant()},
        {"c0", {{"cutoff", c.cutoff}, {"value", c.value}, {"tail_bound", c.tail_bound}}},
        {"mertens_minus", {{"cutoff", minus.product.cutoff}, {"value", minus.product.value}, {"predicted", minus.predicted}, {"ratio", minus.ratio()}}},
        {"mertens_plus", {{"cutoff", plus.product.cutoff}, {"value", plus.product.value}, {"predicted", plus.predicted}, {"ratio", plus.ratio()}}}};
    os << j.dump(2) << '\n';
  } else {
    os << "quantity,cutoff,value,tail_bound,predicted,ratio\n";
    os << "euler_gamma,," << fmt(euler_gamma()) << ",,,\n";
    os << "leading_constant,," << fmt(leading_constant()) << ",,,\n";
    os << "c0," << c.cutoff << ',' << fmt(c.value) << ',' << fmt(c.tail_bound) << ",,\n";
    os << "mertens_minus," << minus.product.cutoff << ',' << fmt(minus.product.value) << ",0," << fmt(minus.predicted)
       << ',' << fmt(minus.ratio()) << '\n';
    os << "mertens_plus," << plus.product.cutoff << ',' << fmt(plus.product.value) << ",0," << fmt(plus.predicted)
       << ',' << fmt(plus.ratio()) << '\n';
  }
  emit(cfg, os.str());
  return ok;
}

int cmd_average(const run_config& cfg) {
  sweep_config sc;
  sc.c1 = cfg.c1;
  sc.workers = cfg.workers;
  sc.segment_size = cfg.segment_size;
  const auto result = sweep(cfg.x, cfg.checkpoints, sc);
  std::ostringstream os;
  if (cfg.format == "json")
    os << summary_json(result.rows).dump(2) << '\n';
  else
    write_summary_csv(os, result.rows);
  emit(cfg, os.str());
  if (!cfg.extremes_path.empty()) {
    std::ofstream ext(cfg.extremes_path, std::ios::binary);
    if (!ext) throw resource_error("cannot open " + cfg.extremes_path);
    write_extremes_csv(ext, result.extremes);
  }
  return ok;
}

int cmd_density(const run_config& cfg) {
  density_config dc;
  dc.b3 = cfg.b3;
  dc.workers = cfg.workers;
  dc.segment_size = cfg.segment_size;
  const auto result = density_experiment(cfg.x, dc);
  std::ostringstream os;
  if (cfg.format == "json")
    os << density_json(result).dump(2) << '\n';
  else
    write_density_csv(os, result);
  emit(cfg, os.str());
  return ok;
}

int cmd_witness(const run_config& cfg) {
  witness_options opts;
  opts.rounds = cfg.rounds;
  witness_mode mode;
  if (cfg.mode == "exact")
    mode = witness_mode::exact;
  else if (cfg.mode == "bound_only")
    mode = witness_mode::bound_only;
  else
    mode = cfg.x <= opts.exact_cap ? witness_mode::exact : witness_mode::bound_only;
  const auto report = construct_witness(cfg.x, mode, opts);
  emit(cfg, witness_json(report).dump(2) + "\n");
  return ok;
}

int cmd_sumprog(const run_config& cfg) {
  const auto s = prog_recip_sum(cfg.x, cfg.m);
  std::ostringstream os;
  if (cfg.format == "json") {
    nlohmann::json j{{"x", cfg.x}, {"m", cfg.m}, {"sum", s.sum}, {"phi_m", s.phi_m},
                     {"normalized", detail::json_double(s.normalized)}};
    os << j.dump(2) << '\n';
  } else {
    os << "x,m,sum,phi_m,normalized\n"
       << cfg.x << ',' << cfg.m << ',' << fmt(s.sum) << ',' << s.phi_m << ',' << fmt(s.normalized) << '\n';
  }
  emit(cfg, os.str());
  return ok;
}

void add_common(CLI::App* cmd, run_config& cfg) {
  cmd->add_option("--c1", cfg.c1, "constant c1 in g(x) = c1 log_2 x / log_3 x")->check(CLI::PositiveNumber);
  cmd->add_option("--b3", cfg.b3, "constant b3 in the omega bound b3 log_2^2 x")->check(CLI::PositiveNumber);
  cmd->add_option("--rounds", cfg.rounds, "extra probable-prime rounds above 2^64")->check(CLI::Range(1u, 1000u));
  cmd->add_option("--segment-size", cfg.segment_size, "smallest-prime-factor segment length")
      ->check(CLI::Range(std::size_t{1} << 16, std::size_t{1} << 30));
  cmd->add_option("--workers", cfg.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", cfg.out_path, "output file (stdout when empty)");
  cmd->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  run_config cfg;
  CLI::App app{"Exact and bulk evaluation of psi(phi(n))/phi(psi(n)) and psi(phi(n))/phi(phi(n))"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* compute = app.add_subcommand("compute", "print phi, psi, their compositions, I(n) and K(n) exactly");
  compute->add_option("n", cfg.n_text, "natural number (any size)")->required();
  add_common(compute, cfg);

  auto* constants = app.add_subcommand("constants", "gamma, 6/pi^2 e^(2 gamma), c0 and the Mertens products");
  constants->add_option("--cutoff", cfg.cutoff, "largest prime bound for the truncated products");
  add_common(constants, cfg);

  auto* average = app.add_subcommand("average", "average-order sweep with prefix rows at each checkpoint");
  average->add_option("--x", cfg.x, "sweep bound")->required()->check(CLI::PositiveNumber);
  average->add_option("--checkpoints", cfg.checkpoints, "increasing checkpoints <= x (default: x)")->delimiter(',');
  average->add_option("--extremes", cfg.extremes_path, "also write running-extreme diagnostics CSV here");
  add_common(average, cfg);

  auto* density = app.add_subcommand("density", "normalized I and K histograms over (sqrt x, x]");
  density->add_option("--x", cfg.x, "upper bound")->required();
  add_common(density, cfg);

  auto* witness = app.add_subcommand("witness", "extremal construction n = PQ with P = 1, Q = -1 mod lcm(1..x)");
  witness->add_option("--x", cfg.x, "lcm bound")->required();
  witness->add_option("--mode", cfg.mode, "exact, bound_only, or auto (exact when x <= 40)")
      ->check(CLI::IsMember({"auto", "exact", "bound_only"}));
  add_common(witness, cfg);

  auto* sumprog = app.add_subcommand("sumprog", "S(x, m) = sum of 1/q over primes q <= x with m | q + 1");
  sumprog->add_option("--x", cfg.x, "prime bound")->required();
  sumprog->add_option("--m", cfg.m, "modulus")->required();
  add_common(sumprog, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*compute) return cmd_compute(cfg);
    if (*constants) return cmd_constants(cfg);
    if (*average) return cmd_average(cfg);
    if (*density) return cmd_density(cfg);
    if (*witness) return cmd_witness(cfg);
    if (*sumprog) return cmd_sumprog(cfg);
  } catch (const argument_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return domain;
  } catch (const resource_error& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return resource;
  } catch (const budget_error& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return budget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return failure;
}
