// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "phipsi/arith.hpp"
#include "phipsi/constants.hpp"
#include "phipsi/error.hpp"
#include "phipsi/exact_ratio.hpp"
#include "phipsi/iterated_log.hpp"
#include "phipsi/sieve.hpp"
#include "phipsi/summation.hpp"

namespace phipsi {

enum class arith_fn { phi, psi };

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// num/den as a correctly rounded double.
inline double ratio_to_double(std::uint64_t num, std::uint64_t den) {
  constexpr std::uint64_t exact_limit = std::uint64_t{1} << 53;
  if (num <= exact_limit && den <= exact_limit) return static_cast<double>(num) / static_cast<double>(den);
  return divide_to_double(big_nat(num), big_nat(den));
}

/// Smallest prime counted by h with the given real threshold: primes p > threshold.
inline std::uint64_t h_cut(double threshold) {
  if (!(threshold >= 1.0)) return 1;
  return static_cast<std::uint64_t>(std::floor(threshold));
}

/// Exact sum of 1/p over the primes p > cut of f, as an unreduced num/den pair of 64-bit values.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> recip_sum_u64(const factorization& f, std::uint64_t cut) {
  std::uint64_t den = 1;
  for (const auto& pp : f)
    if (pp.prime > cut && __builtin_mul_overflow(den, pp.prime, &den)) return std::nullopt;
  std::uint64_t num = 0;
  for (const auto& pp : f)
    if (pp.prime > cut && __builtin_add_overflow(num, den / pp.prime, &num)) return std::nullopt;
  return std::pair{num, den};
}

inline double recip_sum_double(const factorization& f, std::uint64_t cut) {
  if (auto r = recip_sum_u64(f, cut)) return ratio_to_double(r->first, r->second);
  exact_ratio sum;
  for (const auto& pp : f)
    if (pp.prime > cut) sum += exact_ratio(big_nat(1), big_nat(pp.prime));
  return sum.to_double();
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

inline nlohmann::json json_double(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace detail

/// h_f(n) = sum of 1/p over primes p | f(n) with p > threshold.
template <class Ctx>
  requires factor_context<Ctx>
exact_ratio h_stat(std::uint64_t n, arith_fn kind, double threshold, const Ctx& ctx) {
  if (!(threshold > 0.0)) throw argument_error("h_stat: threshold must be positive");
  const auto c = compose<std::uint64_t>(n, ctx);
  const auto& f = kind == arith_fn::phi ? c.phi_n : c.psi_n;
  const std::uint64_t cut = detail::h_cut(threshold);
  if (auto r = detail::recip_sum_u64(f, cut)) return exact_ratio(r->first, r->second);
  exact_ratio sum;
  for (const auto& pp : f)
    if (pp.prime > cut) sum += exact_ratio(big_nat(1), big_nat(pp.prime));
  return sum;
}

/// Membership in A(x) with an explicit modulus M0: sqrt(x) < n <= x and M0 | gcd(phi(n), psi(n)).
template <class Ctx>
  requires factor_context<Ctx>
bool in_set_A(std::uint64_t n, std::uint64_t x, const factorization& m0, const Ctx& ctx) {
  if (n < 2 || x < 2) throw argument_error("in_set_A: n and x must be >= 2");
  if (n > x || n <= isqrt(x)) return false;
  const auto c = compose<std::uint64_t>(n, ctx);
  return m0.divides(c.phi_n) && m0.divides(c.psi_n);
}

/// Membership in A(x) with M0 = M_0(x) evaluated at the sweep bound x.
template <class Ctx>
  requires factor_context<Ctx>
bool in_set_A(std::uint64_t n, std::uint64_t x, double c1, const Ctx& ctx) {
  if (n < 2 || x < 2) throw argument_error("in_set_A: n and x must be >= 2");
  return in_set_A(n, x, m_zero(static_cast<double>(x), c1).factors, ctx);
}

/// Membership in B(x): sqrt(x) < n <= x and both h-statistics (threshold log_2 x) below 1/sqrt(log_3 x).
template <class Ctx>
  requires factor_context<Ctx>
bool in_set_B(std::uint64_t n, std::uint64_t x, const Ctx& ctx) {
  const double l2 = iterated_log(static_cast<double>(x), 2);
  const double l3 = iterated_log(static_cast<double>(x), 3);
  if (!(l3 > 0.0)) throw domain_error("in_set_B needs x > e^e");
  if (n > x || n <= isqrt(x)) return false;
  const double bound = 1.0 / std::sqrt(l3);
  return h_stat(n, arith_fn::phi, l2, ctx).to_double() < bound && h_stat(n, arith_fn::psi, l2, ctx).to_double() < bound;
}

struct d_classification {
  bool in_d1 = false;  // omega(n) > 3e log_2 x
  bool in_d2 = false;  // some p | n has omega(p - 1) >= b
  bool in_d3 = false;  // some p | n has omega(p + 1) >= b
  std::uint64_t b = 0;
};

inline std::uint64_t d_class_b(std::uint64_t x) {
  return static_cast<std::uint64_t>(std::floor(std::exp(2.0) * iterated_log(static_cast<double>(x), 2)));
}

template <class Ctx>
  requires factor_context<Ctx>
d_classification classify_D(std::uint64_t n, std::uint64_t x, const Ctx& ctx) {
  if (x < 16) throw argument_error("classify_D: x must be >= 16");
  if (n < 1) throw argument_error("classify_D: n must be >= 1");
  const double l2 = iterated_log(static_cast<double>(x), 2);
  d_classification d;
  d.b = d_class_b(x);
  const auto f = ctx.factor(n);
  d.in_d1 = static_cast<double>(f.size()) > 3.0 * std::numbers::e * l2;
  for (const auto& pp : f) {
    if (ctx.factor(pp.prime - 1).size() >= d.b) d.in_d2 = true;
    if (ctx.factor(pp.prime + 1).size() >= d.b) d.in_d3 = true;
  }
  return d;
}

struct prog_sum {
  double sum = 0.0;           // S(x, m)
  std::uint64_t phi_m = 1;
  double normalized = 0.0;    // S(x, m) phi(m) / log_2 x, NaN when log_2 x <= 0
};

/// S(x, m) = sum of 1/q over primes q <= x with m | q + 1.
inline prog_sum prog_recip_sum(std::uint64_t x, std::uint64_t m) {
  if (x < 2) throw argument_error("prog_recip_sum: x must be >= 2");
  if (m < 1) throw argument_error("prog_recip_sum: m must be >= 1");
  compensated_sum s;
  for_each_prime(2, x + 1, [&](std::uint64_t q) {
    if ((q + 1) % m == 0) s.add(1.0 / static_cast<double>(q));
  });
  prog_sum out;
  out.sum = s.value();
  out.phi_m = phi<std::uint64_t>(trial_factor(m));
  const double l2 = std::log(std::log(static_cast<double>(x)));
  out.normalized = l2 > 0.0 ? out.sum * static_cast<double>(out.phi_m) / l2 : detail::nan;
  return out;
}

/// I(n) and K(n) divided by their density-one predictions, normalized with log_3 of `scale`.
template <class Ctx>
  requires factor_context<Ctx>
std::pair<double, double> normalized_density_sample_at(std::uint64_t n, double scale, const Ctx& ctx) {
  const double l3 = iterated_log(scale, 3);
  if (!(l3 > 0.0)) throw domain_error("normalized density sample needs log_3 > 0 (argument > e^e)");
  const auto c = compose<std::uint64_t>(n, ctx);
  const auto psi_phi = psi<std::uint64_t>(c.phi_n);
  const double I = detail::ratio_to_double(psi_phi, phi<std::uint64_t>(c.psi_n));
  const double K = detail::ratio_to_double(psi_phi, phi<std::uint64_t>(c.phi_n));
  // prod_{p | n} (p-1)/(p+1) is exactly phi(n)/psi(n).
  const double shape = detail::ratio_to_double(c.phi_n.value_u64(), c.psi_n.value_u64());
  const double base = leading_constant() * l3 * l3;
  return {I / (base * shape), K / base};
}

template <class Ctx>
  requires factor_context<Ctx>
std::pair<double, double> normalized_density_sample(std::uint64_t n, const Ctx& ctx) {
  if (n < 16) throw domain_error("normalized density sample needs n > e^e");
  return normalized_density_sample_at(n, static_cast<double>(n), ctx);
}

// ---------------------------------------------------------------------------------------------
// Bulk sweep

struct summary_row {
  std::uint64_t x = 0;
  double mean_I = 0;
  double mean_K = 0;
  double mean_phi_over_psi = 0;
  double pred_I = 0;
  double pred_K = 0;
  double frac_positive = 0;
  double frac_in_A = 0;
  double mean_h_phi = 0;
  double mean_h_psi = 0;
};

/// Running extremes of the five normalized quantities whose limits are known; n >= 16 only (log_2 n > 1).
struct extreme_value {
  double value = detail::nan;
  std::uint64_t at = 0;
};

struct extremes_row {
  std::uint64_t x = 0;
  extreme_value min_phi_loglog;       // phi(n) log_2 n / n
  extreme_value max_psi_phi;          // psi(phi(n)) / (n log_2 n)
  extreme_value max_psi;              // psi(n) / (n log_2 n)
  extreme_value min_phi_psi_loglog;   // phi(psi(n)) log_2 n / n
  extreme_value max_K_loglog2;        // psi(phi(n)) / (phi(phi(n)) log_2^2 n)
};

struct sweep_config {
  double c1 = 1.0;
  unsigned workers = 1;
  std::size_t segment_size = default_segment_size;
  std::size_t max_entries = default_table_budget;
  std::uint64_t c0_cutoff = 1'000'000;
  std::uint64_t chunk = std::uint64_t{1} << 16;  // accumulation block; fixed so output ignores workers
};

struct sweep_result {
  std::vector<summary_row> rows;
  std::vector<extremes_row> extremes;
};

/// Exact per-n quantities that every sweep statistic is built from.
struct n_values {
  std::uint64_t n = 1;
  factorization f, phi_f, psi_f;
  std::uint64_t phi = 1, psi = 1, psi_phi = 1, phi_phi = 1, phi_psi = 1;
};

template <class Ctx>
  requires factor_context<Ctx>
n_values evaluate(std::uint64_t n, const Ctx& ctx) {
  n_values v;
  v.n = n;
  auto c = compose<std::uint64_t>(n, ctx);
  v.f = std::move(c.n);
  v.phi_f = std::move(c.phi_n);
  v.psi_f = std::move(c.psi_n);
  v.phi = v.phi_f.value_u64();
  v.psi = v.psi_f.value_u64();
  v.psi_phi = psi<std::uint64_t>(v.phi_f);
  v.phi_phi = phi<std::uint64_t>(v.phi_f);
  v.phi_psi = phi<std::uint64_t>(v.psi_f);
  return v;
}

namespace detail {

inline void keep_min(extreme_value& e, double v, std::uint64_t n) {
  if (std::isnan(e.value) || v < e.value) e = {v, n};
}
inline void keep_max(extreme_value& e, double v, std::uint64_t n) {
  if (std::isnan(e.value) || v > e.value) e = {v, n};
}
inline void merge_min(extreme_value& e, const extreme_value& o) {
  if (!std::isnan(o.value)) keep_min(e, o.value, o.at);
}
inline void merge_max(extreme_value& e, const extreme_value& o) {
  if (!std::isnan(o.value)) keep_max(e, o.value, o.at);
}

struct block_aggregate {
  compensated_sum sum_I, sum_K, sum_ratio;
  std::uint64_t positive = 0;
  std::vector<std::uint64_t> in_a;        // per distinct M0
  std::vector<compensated_sum> h_phi;     // per distinct h cut
  std::vector<compensated_sum> h_psi;
  extremes_row ext;

  block_aggregate(std::size_t a_keys, std::size_t h_keys) : in_a(a_keys, 0), h_phi(h_keys), h_psi(h_keys) {}

  void merge(const block_aggregate& o) {
    sum_I.merge(o.sum_I);
    sum_K.merge(o.sum_K);
    sum_ratio.merge(o.sum_ratio);
    positive += o.positive;
    for (std::size_t i = 0; i < in_a.size(); ++i) in_a[i] += o.in_a[i];
    for (std::size_t i = 0; i < h_phi.size(); ++i) {
      h_phi[i].merge(o.h_phi[i]);
      h_psi[i].merge(o.h_psi[i]);
    }
    merge_min(ext.min_phi_loglog, o.ext.min_phi_loglog);
    merge_max(ext.max_psi_phi, o.ext.max_psi_phi);
    merge_max(ext.max_psi, o.ext.max_psi);
    merge_min(ext.min_phi_psi_loglog, o.ext.min_phi_psi_loglog);
    merge_max(ext.max_K_loglog2, o.ext.max_K_loglog2);
  }
};

}  // namespace detail

/// One pass over n = 1..x producing a summary row (prefix statistics over n <= c) for every
/// checkpoint c. Blocks are fixed by x, the checkpoints and cfg.chunk, accumulated in index
/// order and merged in block order, so the output does not depend on cfg.workers.
inline sweep_result sweep(std::uint64_t x, std::vector<std::uint64_t> checkpoints, const sweep_config& cfg = {}) {
  if (x < 1) throw argument_error("sweep: x must be >= 1");
  if (cfg.chunk == 0) throw argument_error("sweep: chunk must be positive");
  if (checkpoints.empty()) checkpoints.push_back(x);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > x) throw argument_error("sweep: checkpoints must lie in [1, x]");
    if (i && checkpoints[i] <= checkpoints[i - 1]) throw argument_error("sweep: checkpoints must be increasing");
  }

  const spf_index ctx(x + 2, {cfg.segment_size, cfg.max_entries, std::max(1u, cfg.workers)});

  // Distinct M0 moduli and h cuts needed by the checkpoints.
  std::vector<std::uint64_t> m0_values, h_cuts;
  struct plan {
    std::uint64_t c, root;
    std::optional<std::size_t> a_key;
    std::size_t h_key;
  };
  std::vector<plan> plans;
  auto key_of = [](std::vector<std::uint64_t>& keys, std::uint64_t v) {
    auto it = std::find(keys.begin(), keys.end(), v);
    if (it != keys.end()) return static_cast<std::size_t>(it - keys.begin());
    keys.push_back(v);
    return keys.size() - 1;
  };
  for (std::uint64_t c : checkpoints) {
    plan p{c, isqrt(c), std::nullopt, 0};
    if (c >= 16) p.a_key = key_of(m0_values, m_zero(static_cast<double>(c), cfg.c1).factors.value_u64());
    const double threshold = c > 1 ? std::log(std::log(static_cast<double>(c))) : -std::numeric_limits<double>::infinity();
    p.h_key = key_of(h_cuts, detail::h_cut(threshold));
    plans.push_back(p);
  }

  std::set<std::uint64_t> cuts{0, x};
  for (std::uint64_t b = cfg.chunk; b < x; b += cfg.chunk) cuts.insert(b);
  for (const auto& p : plans) {
    cuts.insert(p.c);
    cuts.insert(p.root);
  }
  const std::vector<std::uint64_t> bounds(cuts.begin(), cuts.end());
  const std::size_t blocks = bounds.size() - 1;

  auto run_block = [&](std::size_t i) {
    detail::block_aggregate agg(m0_values.size(), h_cuts.size());
    for (std::uint64_t n = bounds[i] + 1; n <= bounds[i + 1]; ++n) {
      const n_values v = evaluate(n, ctx);
      agg.sum_I.add(detail::ratio_to_double(v.psi_phi, v.phi_psi));
      agg.sum_K.add(detail::ratio_to_double(v.psi_phi, v.phi_phi));
      agg.sum_ratio.add(detail::ratio_to_double(v.phi, v.psi));
      if (v.psi_phi > v.phi_psi) ++agg.positive;
      for (std::size_t k = 0; k < m0_values.size(); ++k)
        if (v.phi % m0_values[k] == 0 && v.psi % m0_values[k] == 0) ++agg.in_a[k];
      for (std::size_t k = 0; k < h_cuts.size(); ++k) {
        agg.h_phi[k].add(detail::recip_sum_double(v.phi_f, h_cuts[k]));
        agg.h_psi[k].add(detail::recip_sum_double(v.psi_f, h_cuts[k]));
      }
      if (n >= 16) {
        const double nd = static_cast<double>(n);
        const double l2 = std::log(std::log(nd));
        detail::keep_min(agg.ext.min_phi_loglog, static_cast<double>(v.phi) * l2 / nd, n);
        detail::keep_max(agg.ext.max_psi_phi, static_cast<double>(v.psi_phi) / (nd * l2), n);
        detail::keep_max(agg.ext.max_psi, static_cast<double>(v.psi) / (nd * l2), n);
        detail::keep_min(agg.ext.min_phi_psi_loglog, static_cast<double>(v.phi_psi) * l2 / nd, n);
        detail::keep_max(agg.ext.max_K_loglog2, detail::ratio_to_double(v.psi_phi, v.phi_phi) / (l2 * l2), n);
      }
    }
    return agg;
  };

  std::vector<std::optional<detail::block_aggregate>> results(blocks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < blocks;) results[i] = run_block(i);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  const double c0_value = c0(cfg.c0_cutoff).value;
  const double lead = leading_constant();

  sweep_result out;
  detail::block_aggregate running(m0_values.size(), h_cuts.size());
  std::vector<std::vector<std::uint64_t>> in_a_at_root(plans.size());
  std::size_t next_plan = 0;
  auto snapshot_roots = [&](std::uint64_t pos) {
    for (std::size_t j = 0; j < plans.size(); ++j)
      if (plans[j].root == pos) in_a_at_root[j] = running.in_a;
  };
  snapshot_roots(0);
  for (std::size_t i = 0; i < blocks; ++i) {
    running.merge(*results[i]);
    const std::uint64_t pos = bounds[i + 1];
    snapshot_roots(pos);
    while (next_plan < plans.size() && plans[next_plan].c == pos) {
      const plan& p = plans[next_plan];
      const double cd = static_cast<double>(p.c);
      summary_row row;
      row.x = p.c;
      row.mean_I = running.sum_I.value() / cd;
      row.mean_K = running.sum_K.value() / cd;
      row.mean_phi_over_psi = running.sum_ratio.value() / cd;
      if (p.c >= 3) {
        const double l3 = std::log(std::log(std::log(cd)));
        row.pred_K = lead * l3 * l3;
        row.pred_I = c0_value * row.pred_K;
      } else {
        row.pred_I = row.pred_K = detail::nan;
      }
      row.frac_positive = static_cast<double>(running.positive) / cd;
      row.frac_in_A = p.a_key ? static_cast<double>(running.in_a[*p.a_key] - in_a_at_root[next_plan][*p.a_key]) / cd
                              : detail::nan;
      row.mean_h_phi = running.h_phi[p.h_key].value() / cd;
      row.mean_h_psi = running.h_psi[p.h_key].value() / cd;
      out.rows.push_back(row);

      extremes_row ext = running.ext;
      ext.x = p.c;
      out.extremes.push_back(ext);
      ++next_plan;
    }
  }
  return out;
}

inline constexpr const char* summary_csv_header =
    "x,mean_I,mean_K,mean_phi_over_psi,pred_I,pred_K,frac_positive,frac_in_A,mean_h_phi,mean_h_psi";

inline void write_summary_csv(std::ostream& os, const std::vector<summary_row>& rows) {
  os << summary_csv_header << '\n';
  for (const auto& r : rows) {
    os << r.x;
    for (double v : {r.mean_I, r.mean_K, r.mean_phi_over_psi, r.pred_I, r.pred_K, r.frac_positive, r.frac_in_A,
                     r.mean_h_phi, r.mean_h_psi})
      os << ',' << detail::format_double(v);
    os << '\n';
  }
}

inline nlohmann::json summary_json(const std::vector<summary_row>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"x", r.x},
                   {"mean_I", detail::json_double(r.mean_I)},
                   {"mean_K", detail::json_double(r.mean_K)},
                   {"mean_phi_over_psi", detail::json_double(r.mean_phi_over_psi)},
                   {"pred_I", detail::json_double(r.pred_I)},
                   {"pred_K", detail::json_double(r.pred_K)},
                   {"frac_positive", detail::json_double(r.frac_positive)},
                   {"frac_in_A", detail::json_double(r.frac_in_A)},
                   {"mean_h_phi", detail::json_double(r.mean_h_phi)},
                   {"mean_h_psi", detail::json_double(r.mean_h_psi)}});
  }
  return arr;
}

inline void write_extremes_csv(std::ostream& os, const std::vector<extremes_row>& rows) {
  os << "x,min_phi_loglog,at,max_psi_phi,at,max_psi,at,min_phi_psi_loglog,at,max_K_loglog2,at\n";
  for (const auto& r : rows) {
    os << r.x;
    for (const auto* e : {&r.min_phi_loglog, &r.max_psi_phi, &r.max_psi, &r.min_phi_psi_loglog, &r.max_K_loglog2})
      os << ',' << detail::format_double(e->value) << ',' << e->at;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------------------------
// Density experiment over (sqrt x, x]

struct density_config {
  double b3 = 4.0 * std::exp(3.0) * 1.1;
  unsigned workers = 1;
  std::size_t segment_size = default_segment_size;
  std::size_t max_entries = default_table_budget;
  std::size_t bins = 64;
};

struct density_bin {
  double lo, hi;
  std::uint64_t I_log3n = 0, K_log3n = 0, I_log3x = 0, K_log3x = 0;
};

struct density_summary {
  std::uint64_t x = 0;
  std::uint64_t samples = 0;          // n in (sqrt x, x] with n > e^e
  double frac_in_B = 0;               // over (sqrt x, x]
  std::uint64_t b = 0;
  std::uint64_t count_d1 = 0, count_d2 = 0, count_d3 = 0;  // over n <= x
  double omega_bound = 0;             // b3 log_2^2 x
  std::uint64_t omega_phi_exceeds = 0, omega_psi_exceeds = 0;
  std::uint64_t max_omega_phi = 0, max_omega_psi = 0;
  double mean_omega_phi = 0, mean_omega_psi = 0;
};

struct density_result {
  density_summary summary;
  std::vector<density_bin> bins;
};

inline density_result density_experiment(std::uint64_t x, const density_config& cfg = {}) {
  if (x < 16) throw domain_error("density experiment needs x > e^e");
  if (cfg.bins == 0) throw argument_error("density experiment needs at least one bin");
  const spf_index ctx(x + 2, {cfg.segment_size, cfg.max_entries, std::max(1u, cfg.workers)});
  const double xd = static_cast<double>(x);
  const double l2x = iterated_log(xd, 2);
  const double l3x = iterated_log(xd, 3);
  const double lead = leading_constant();
  const std::uint64_t root = isqrt(x);
  const std::uint64_t b = d_class_b(x);
  const double bound_B = 1.0 / std::sqrt(l3x);
  const std::uint64_t h_cut_x = detail::h_cut(l2x);

  struct sample {
    double I_n, K_n, I_x, K_x;
  };
  struct block {
    std::vector<sample> samples;
    std::uint64_t in_b = 0, d1 = 0, d2 = 0, d3 = 0, phi_exc = 0, psi_exc = 0, max_phi = 0, max_psi = 0;
    std::uint64_t sum_omega_phi = 0, sum_omega_psi = 0;
  };
  const std::uint64_t chunk = std::uint64_t{1} << 16;
  const std::size_t blocks = static_cast<std::size_t>((x + chunk - 1) / chunk);
  const double omega_bound = cfg.b3 * l2x * l2x;

  auto run_block = [&](std::size_t i) {
    block blk;
    const std::uint64_t lo = i * chunk + 1, hi = std::min<std::uint64_t>((i + 1) * chunk, x);
    for (std::uint64_t n = lo; n <= hi; ++n) {
      const n_values v = evaluate(n, ctx);
      const auto wphi = v.phi_f.size(), wpsi = v.psi_f.size();
      blk.sum_omega_phi += wphi;
      blk.sum_omega_psi += wpsi;
      blk.max_phi = std::max<std::uint64_t>(blk.max_phi, wphi);
      blk.max_psi = std::max<std::uint64_t>(blk.max_psi, wpsi);
      if (static_cast<double>(wphi) > omega_bound) ++blk.phi_exc;
      if (static_cast<double>(wpsi) > omega_bound) ++blk.psi_exc;
      if (static_cast<double>(v.f.size()) > 3.0 * std::numbers::e * l2x) ++blk.d1;
      bool d2 = false, d3 = false;
      for (const auto& pp : v.f) {
        d2 = d2 || ctx.factor(pp.prime - 1).size() >= b;
        d3 = d3 || ctx.factor(pp.prime + 1).size() >= b;
      }
      blk.d2 += d2;
      blk.d3 += d3;
      if (n <= root) continue;
      if (detail::recip_sum_double(v.phi_f, h_cut_x) < bound_B && detail::recip_sum_double(v.psi_f, h_cut_x) < bound_B)
        ++blk.in_b;
      if (n < 16) continue;
      const double I = detail::ratio_to_double(v.psi_phi, v.phi_psi);
      const double K = detail::ratio_to_double(v.psi_phi, v.phi_phi);
      const double shape = detail::ratio_to_double(v.phi, v.psi);
      const double l3n = std::log(std::log(std::log(static_cast<double>(n))));
      const double base_n = lead * l3n * l3n, base_x = lead * l3x * l3x;
      blk.samples.push_back({I / (base_n * shape), K / base_n, I / (base_x * shape), K / base_x});
    }
    return blk;
  };

  std::vector<block> results(blocks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < blocks;) results[i] = run_block(i);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  density_result out;
  auto& s = out.summary;
  s.x = x;
  s.b = b;
  s.omega_bound = omega_bound;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::uint64_t omega_phi_total = 0, omega_psi_total = 0;
  for (const auto& blk : results) {
    s.samples += blk.samples.size();
    s.count_d1 += blk.d1;
    s.count_d2 += blk.d2;
    s.count_d3 += blk.d3;
    s.omega_phi_exceeds += blk.phi_exc;
    s.omega_psi_exceeds += blk.psi_exc;
    s.max_omega_phi = std::max(s.max_omega_phi, blk.max_phi);
    s.max_omega_psi = std::max(s.max_omega_psi, blk.max_psi);
    omega_phi_total += blk.sum_omega_phi;
    omega_psi_total += blk.sum_omega_psi;
    s.frac_in_B += static_cast<double>(blk.in_b);
    for (const auto& smp : blk.samples)
      for (double v : {smp.I_n, smp.K_n, smp.I_x, smp.K_x}) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  s.frac_in_B /= static_cast<double>(x - root);
  s.mean_omega_phi = static_cast<double>(omega_phi_total) / xd;
  s.mean_omega_psi = static_cast<double>(omega_psi_total) / xd;

  if (s.samples == 0) return out;
  const double log_lo = std::log(lo), span = std::max(std::log(hi) - log_lo, 1e-300);
  const auto nb = cfg.bins;
  for (std::size_t k = 0; k < nb; ++k)
    out.bins.push_back({std::exp(log_lo + span * static_cast<double>(k) / static_cast<double>(nb)),
                        std::exp(log_lo + span * static_cast<double>(k + 1) / static_cast<double>(nb))});
  auto bin_of = [&](double v) {
    auto k = static_cast<std::size_t>((std::log(v) - log_lo) / span * static_cast<double>(nb));
    return std::min(k, nb - 1);
  };
  for (const auto& blk : results)
    for (const auto& smp : blk.samples) {
      ++out.bins[bin_of(smp.I_n)].I_log3n;
      ++out.bins[bin_of(smp.K_n)].K_log3n;
      ++out.bins[bin_of(smp.I_x)].I_log3x;
      ++out.bins[bin_of(smp.K_x)].K_log3x;
    }
  return out;
}

inline void write_density_csv(std::ostream& os, const density_result& r) {
  os << "bin,lo,hi,I_log3n,K_log3n,I_log3x,K_log3x\n";
  for (std::size_t k = 0; k < r.bins.size(); ++k) {
    const auto& b = r.bins[k];
    os << k << ',' << detail::format_double(b.lo) << ',' << detail::format_double(b.hi) << ',' << b.I_log3n << ','
       << b.K_log3n << ',' << b.I_log3x << ',' << b.K_log3x << '\n';
  }
}

inline nlohmann::json density_json(const density_result& r) {
  const auto& s = r.summary;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"I_log3n", b.I_log3n}, {"K_log3n", b.K_log3n},
                    {"I_log3x", b.I_log3x}, {"K_log3x", b.K_log3x}});
  return {{"summary",
           {{"x", s.x},
            {"samples", s.samples},
            {"frac_in_B", s.frac_in_B},
            {"b", s.b},
            {"count_D1", s.count_d1},
            {"count_D2", s.count_d2},
            {"count_D3", s.count_d3},
            {"omega_bound", s.omega_bound},
            {"omega_phi_exceeds", s.omega_phi_exceeds},
            {"omega_psi_exceeds", s.omega_psi_exceeds},
            {"max_omega_phi", s.max_omega_phi},
            {"max_omega_psi", s.max_omega_psi},
            {"mean_omega_phi", s.mean_omega_phi},
            {"mean_omega_psi", s.mean_omega_psi}}},
          {"bins", bins}};
}

}  // namespace phipsi
