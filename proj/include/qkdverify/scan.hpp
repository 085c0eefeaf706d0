// Threshold scans: for each loss probability p, bisect the depolarizing
// rate e for the boundary where the verdict flips from the precondition
// holding to no key being distillable. Verdict monotonicity in e is
// checked with a coarse scan before bisecting rather than assumed.
// Rows are independent and evaluated concurrently; output order follows
// the grid regardless of completion order.

#pragma once

#include "qkdverify/verifier.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace qkdverify {

struct ScanConfig {
  std::string protocol;
  Mode mode = Mode::TwoWay;
  double theta = 0.0;
  std::optional<double> alpha;
  double p_min = 0.0;
  double p_max = 0.95;
  int p_steps = 21;
  double tol = 1e-4;  // bisection tolerance on e

  void validate() const {
    if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max))
      throw std::invalid_argument("scan: p grid outside [0, 1]");
    if (p_steps < 1) throw std::invalid_argument("scan: need at least one p step");
    if (!(tol > 0.0)) throw std::invalid_argument("scan: tolerance must be positive");
  }
};

struct ScanRow {
  double p = 0.0;
  double e_star = std::numeric_limits<double>::quiet_NaN();
  double qber_star = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // ok | endpoint-low | endpoint-high | non-monotone | solver-failure
  long iterations = 0;
};

/// Single-point verdict for a protocol under the channel.
inline VerdictReport check_point(const ProtocolSpec& spec, Mode mode,
                                 const ChannelParams& params, const SolveOptions& opts = {}) {
  const auto data = correlations(spec, apply_channel(spec, params));
  const auto ec = build_equivalence_class(data);
  return mode == Mode::TwoWay ? two_way_check(ec, opts) : one_way_check(ec, mode, opts);
}

namespace detail {

inline ScanRow scan_row(const ProtocolSpec& spec, const ScanConfig& cfg, double p) {
  ScanRow row;
  row.p = p;

  bool failed = false;
  auto verdict = [&](double e) {
    auto report = check_point(spec, cfg.mode, {p, e, cfg.theta});
    row.iterations += report.solver.iterations;
    if (report.solver.status == SolveStatus::NumericalFailure) failed = true;
    return report.decision;
  };

  // Coarse pass: verdicts must flip from holding to not holding at most
  // once as e grows. Marginal results count as the no-key side (they sit
  // on the boundary itself).
  const double coarse[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  bool seen_flip = false;
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  for (double e : coarse) {
    const Decision d = verdict(e);
    if (failed) {
      row.status = "solver-failure";
      return row;
    }
    if (d == Decision::PreconditionHolds) {
      if (seen_flip) {
        row.status = "non-monotone";
        return row;
      }
      lo = e;
    } else {
      if (!seen_flip) hi = e;
      seen_flip = true;
    }
  }

  if (std::isnan(lo)) {  // no key even at e = 0
    row.e_star = 0.0;
    row.status = "endpoint-low";
  } else if (!seen_flip) {  // precondition holds all the way to e = 1
    row.e_star = 1.0;
    row.status = "endpoint-high";
  } else {
    row.status = "ok";
    while (hi - lo > cfg.tol) {
      const double mid = 0.5 * (lo + hi);
      const Decision d = verdict(mid);
      if (failed) {
        row.status = "solver-failure";
        return row;
      }
      if (d == Decision::Marginal) {  // boundary hit within solver noise
        lo = hi = mid;
        break;
      }
      (d == Decision::PreconditionHolds ? lo : hi) = mid;
    }
    row.e_star = 0.5 * (lo + hi);
  }
  row.qber_star = qber_analytic(spec, row.e_star, cfg.theta);
  return row;
}

}  // namespace detail

inline std::vector<ScanRow> threshold_scan(const ScanConfig& cfg) {
  cfg.validate();
  const ProtocolSpec spec = make_protocol(cfg.protocol, cfg.alpha);

  std::vector<double> grid(cfg.p_steps);
  for (int i = 0; i < cfg.p_steps; ++i)
    grid[i] = cfg.p_steps == 1
                  ? cfg.p_min
                  : cfg.p_min + (cfg.p_max - cfg.p_min) * i / (cfg.p_steps - 1);

  std::vector<ScanRow> rows(grid.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(grid.size())));
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
      rows[i] = detail::scan_row(spec, cfg, grid[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

namespace detail {

inline std::string format_sig12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

/// Fixed CSV rendering: header p,e_star,qber_star,status,iterations with
/// 12-significant-digit values and \n line endings. Byte-identical for
/// identical configs.
inline std::string scan_to_csv(const std::vector<ScanRow>& rows) {
  std::string out = "p,e_star,qber_star,status,iterations\n";
  for (const auto& r : rows) {
    out += detail::format_sig12(r.p);
    out += ',';
    out += detail::format_sig12(r.e_star);
    out += ',';
    out += detail::format_sig12(r.qber_star);
    out += ',';
    out += r.status;
    out += ',';
    out += std::to_string(r.iterations);
    out += '\n';
  }
  return out;
}

}  // namespace qkdverify
