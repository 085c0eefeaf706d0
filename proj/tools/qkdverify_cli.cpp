// Command-line front end: single-point precondition checks, threshold
// scans over the loss probability, witness dumps, and QBER evaluation.
//
// Exit codes for `check`: 0 when the secret-key precondition holds,
// 2 when no key is distillable, 3 on a marginal verdict, 1 on errors.

#include "qkdverify/qkdverify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace qkdverify;

struct CommonArgs {
  std::string protocol;
  std::string mode = "two-way";
  double theta = 0.0;
  double alpha = -1.0;
  bool verbose = false;

  std::optional<double> alpha_opt() const {
    return alpha >= 0 ? std::optional<double>(alpha) : std::nullopt;
  }
};

void add_protocol_flags(CLI::App* cmd, CommonArgs& args, bool with_mode = true) {
  cmd->add_option("--protocol", args.protocol, "Protocol name")
      ->required()
      ->check(CLI::IsMember(protocol_names()));
  if (with_mode)
    cmd->add_option("--mode", args.mode, "Reconciliation mode")
        ->check(CLI::IsMember({"two-way", "rr", "dr"}));
  cmd->add_option("--theta", args.theta, "Collective rotation angle (radians)");
  cmd->add_option("--alpha", args.alpha, "Signal amplitude for two-state / four-plus-two");
  cmd->add_flag("--verbose", args.verbose, "Per-iteration solver trace on stderr");
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << content;
}

int exit_code_for(Decision d) {
  switch (d) {
    case Decision::PreconditionHolds: return 0;
    case Decision::NoKey: return 2;
    case Decision::Marginal: return 3;
  }
  return 1;
}

int run_check(const CommonArgs& args, double p, double e, const std::string& format) {
  auto spec = make_protocol(args.protocol, args.alpha_opt());
  SolveOptions opts;
  opts.verbose = args.verbose;
  auto report = check_point(spec, mode_from_string(args.mode), {p, e, args.theta}, opts);
  const double qber = qber_analytic(spec, e, args.theta);

  if (format == "json") {
    json out = verdict_to_json(report);
    out["protocol"] = args.protocol;
    out["p"] = p;
    out["e"] = e;
    out["theta"] = args.theta;
    out["qber"] = qber;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "protocol:      " << args.protocol << "\n"
              << "mode:          " << args.mode << "\n"
              << "p, e, theta:   " << p << ", " << e << ", " << args.theta << "\n"
              << "decision:      " << to_string(report.decision) << "\n"
              << "t_star:        " << detail::format_sig12(report.t_star) << "\n"
              << "witness value: " << detail::format_sig12(report.witness.value) << "\n"
              << "qber:          " << detail::format_sig12(qber) << "\n";
  }
  return exit_code_for(report.decision);
}

int run_scan(const CommonArgs& args, const ScanConfig& cfg_in, const std::string& out_path,
             const std::string& format) {
  ScanConfig cfg = cfg_in;
  cfg.protocol = args.protocol;
  cfg.mode = mode_from_string(args.mode);
  cfg.theta = args.theta;
  cfg.alpha = args.alpha_opt();
  auto rows = threshold_scan(cfg);
  if (format == "json")
    write_output(out_path, scan_to_json(cfg, rows).dump(2) + "\n");
  else
    write_output(out_path, scan_to_csv(rows));
  return 0;
}

int run_witness(const CommonArgs& args, double p, double e, const std::string& out_path) {
  auto spec = make_protocol(args.protocol, args.alpha_opt());
  SolveOptions opts;
  opts.verbose = args.verbose;
  auto report = check_point(spec, mode_from_string(args.mode), {p, e, args.theta}, opts);
  if (report.decision == Decision::Marginal) {
    std::cerr << "refusing to dump a witness at a marginal point (|t*| <= "
              << kFeasibilityTol << "); move off the boundary\n";
    return 1;
  }
  json out = witness_to_json(report.witness, report.t_star);
  out["protocol"] = args.protocol;
  out["mode"] = args.mode;
  out["p"] = p;
  out["e"] = e;
  out["theta"] = args.theta;
  if (args.alpha_opt()) out["alpha"] = *args.alpha_opt();
  out["decision"] = to_string(report.decision);
  write_output(out_path, out.dump(2) + "\n");
  return 0;
}

int run_qber(const CommonArgs& args, double p, double e, const std::string& format) {
  auto spec = make_protocol(args.protocol, args.alpha_opt());
  const double analytic = qber_analytic(spec, e, args.theta);
  const double simulated = qber_simulated(spec, apply_channel(spec, {p, e, args.theta}));
  if (format == "json") {
    json out = {{"protocol", args.protocol}, {"e", e},
                {"theta", args.theta},       {"p", p},
                {"analytic", analytic},      {"simulated", simulated}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "qber analytic:  " << detail::format_sig12(analytic) << "\n"
              << "qber simulated: " << detail::format_sig12(simulated) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secret-key precondition checks for single-photon QKD under loss"};
  app.require_subcommand(1);

  CommonArgs check_args, scan_args, wit_args, qber_args;
  double check_p = 0.0, check_e = 0.0, wit_p = 0.0, wit_e = 0.0;
  double qber_p = 0.0, qber_e = 0.0;
  std::string check_format = "text", scan_format = "csv", qber_format = "text";
  std::string scan_out, wit_out;
  ScanConfig scan_cfg;

  auto* check = app.add_subcommand("check", "Verdict for a single channel point");
  add_protocol_flags(check, check_args);
  check->add_option("--p", check_p, "Photon loss probability")->required();
  check->add_option("--e", check_e, "Depolarizing rate")->required();
  check->add_option("--format", check_format)->check(CLI::IsMember({"text", "json"}));

  auto* scan = app.add_subcommand("scan", "Threshold curve e*(p) by bisection");
  add_protocol_flags(scan, scan_args);
  scan->add_option("--p-min", scan_cfg.p_min, "Grid start");
  scan->add_option("--p-max", scan_cfg.p_max, "Grid end");
  scan->add_option("--p-steps", scan_cfg.p_steps, "Grid points");
  scan->add_option("--tol", scan_cfg.tol, "Bisection tolerance on e");
  scan->add_option("--out", scan_out, "Output path (default stdout)");
  scan->add_option("--format", scan_format)->check(CLI::IsMember({"csv", "json"}));

  auto* wit = app.add_subcommand("witness", "Dump the optimal witness at a channel point");
  add_protocol_flags(wit, wit_args);
  wit->add_option("--p", wit_p, "Photon loss probability")->required();
  wit->add_option("--e", wit_e, "Depolarizing rate")->required();
  wit->add_option("--out", wit_out, "Output path (default stdout)");

  auto* qber = app.add_subcommand("qber", "Quantum bit error rate at a channel point");
  add_protocol_flags(qber, qber_args, false);
  qber->add_option("--e", qber_e, "Depolarizing rate")->required();
  qber->add_option("--p", qber_p, "Photon loss probability (QBER is p-independent)");
  qber->add_option("--format", qber_format)->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(check_args, check_p, check_e, check_format);
    if (scan->parsed()) return run_scan(scan_args, scan_cfg, scan_out, scan_format);
    if (wit->parsed()) return run_witness(wit_args, wit_p, wit_e, wit_out);
    if (qber->parsed()) return run_qber(qber_args, qber_p, qber_e, qber_format);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
