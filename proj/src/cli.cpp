#include "qnm/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qnm/linear_solver.hpp"
#include "qnm/nonlinear_mode.hpp"
#include "qnm/optimizer.hpp"
#include "qnm/perturbation.hpp"
#include "qnm/profile_io.hpp"
#include "qnm/resonance_finder.hpp"

namespace qnm::cli {

namespace {

struct BoundsFlags {
  double eps_lo = 1.0;
  double eps_hi = 1.0;
  double eps_outer = 1.0;
  double length = 1.0;
  double c = 1.0;

  DesignSpace space() const {
    DesignSpace s{eps_lo, eps_hi, eps_outer, length, c};
    s.validate();
    return s;
  }
};

void add_bounds(CLI::App* cmd, BoundsFlags& b) {
  cmd->add_option("--eps-lo", b.eps_lo, "Lower permittivity bound")->required();
  cmd->add_option("--eps-hi", b.eps_hi, "Upper permittivity bound")->required();
  cmd->add_option("--eps-outer", b.eps_outer, "Exterior permittivity")->capture_default_str();
  cmd->add_option("--length", b.length, "Cavity length")->capture_default_str();
  cmd->add_option("--c", b.c, "Speed of light")->capture_default_str();
}

struct OmegaFlags {
  double re = 0.0;
  double im = 0.0;
  Complex value() const { return {re, im}; }
};

void add_omega(CLI::App* cmd, OmegaFlags& o) {
  cmd->add_option("--omega-re", o.re, "Re omega")->required();
  cmd->add_option("--omega-im", o.im, "Im omega")->required();
}

std::string fmt(double v) { return format_double(v); }

std::string json_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out + "]";
}

std::string optimize_report(const OptimalDesign& d) {
  std::ostringstream o;
  o << "{\n"
    << "  \"alpha\": " << fmt(d.alpha) << ",\n"
    << "  \"beta_min\": " << fmt(d.beta_min) << ",\n"
    << "  \"theta_star\": " << fmt(d.theta_star) << ",\n"
    << "  \"residual\": " << fmt(d.linear_residual) << ",\n"
    << "  \"n_layers\": " << d.cavity.size() << ",\n"
    << "  \"switch_points\": " << json_array(d.mode.trace.switch_points()) << "\n"
    << "}\n";
  return o.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resonances and minimal-decay designs of 1-D open cavities"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on the error stream");

  // resonances
  auto* res_cmd = app.add_subcommand("resonances", "Resonances of a cavity inside a window");
  std::string res_profile;
  SearchWindow window;
  res_cmd->add_option("--profile", res_profile, "Profile JSON")->required()->check(CLI::ExistingFile);
  res_cmd->add_option("--re-min", window.re_min)->required();
  res_cmd->add_option("--re-max", window.re_max)->required();
  res_cmd->add_option("--im-min", window.im_min)->required();
  res_cmd->add_option("--im-max", window.im_max)->required();
  res_cmd->add_option("--nx", window.nx)->capture_default_str();
  res_cmd->add_option("--ny", window.ny)->capture_default_str();
  res_cmd->add_option("--tol", window.tol_residual, "Residual tolerance |F|")->capture_default_str();

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "Minimal-decay cavity at a fixed frequency");
  double opt_alpha = 0.0;
  BoundsFlags opt_bounds;
  OptimizerOptions opt_options;
  std::string opt_out;
  std::string opt_report;
  std::string opt_trace;
  opt_cmd->add_option("--alpha", opt_alpha, "Target Re omega")->required();
  add_bounds(opt_cmd, opt_bounds);
  opt_cmd->add_option("--beta-max", opt_options.beta_max, "Upper end of the beta scan (<= 0: automatic)");
  opt_cmd->add_option("--n-theta", opt_options.n_theta)->capture_default_str();
  opt_cmd->add_option("--n-beta", opt_options.n_beta)->capture_default_str();
  opt_cmd->add_option("--out", opt_out, "Output profile JSON")->required();
  opt_cmd->add_option("--report", opt_report, "Report JSON file (default: standard output)");
  opt_cmd->add_option("--trace", opt_trace, "Extremal mode CSV");

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Check a design for optimality at omega");
  std::string ver_profile;
  OmegaFlags ver_omega;
  VerifyOptions ver_options;
  ver_cmd->add_option("--profile", ver_profile, "Profile JSON")->required()->check(CLI::ExistingFile);
  add_omega(ver_cmd, ver_omega);
  ver_cmd->add_option("--seed", ver_options.seed, "Seed for the random probe directions")->capture_default_str();
  ver_cmd->add_option("--n-directions", ver_options.n_directions)->capture_default_str()->check(
      CLI::PositiveNumber);
  ver_cmd->add_option("--tol", ver_options.residual_tol, "Residual tolerance |F|")->capture_default_str();

  // perturb
  auto* per_cmd = app.add_subcommand("perturb", "First-order shift against a re-solved eigenvalue");
  std::string per_profile;
  std::string per_direction;
  OmegaFlags per_omega;
  double per_zeta = 0.0;
  per_cmd->add_option("--profile", per_profile, "Profile JSON")->required()->check(CLI::ExistingFile);
  add_omega(per_cmd, per_omega);
  per_cmd->add_option("--direction", per_direction, "Direction JSON")->required()->check(CLI::ExistingFile);
  per_cmd->add_option("--zeta", per_zeta, "Step size")->required();

  // wmap
  auto* wmap_cmd = app.add_subcommand("wmap", "W on a (theta, beta) grid");
  double wmap_alpha = 0.0;
  double wmap_beta_min = 0.0;
  double wmap_beta_max = 0.0;
  int wmap_n_theta = 96;
  int wmap_n_beta = 64;
  BoundsFlags wmap_bounds;
  wmap_cmd->add_option("--alpha", wmap_alpha)->required();
  wmap_cmd->add_option("--beta-min", wmap_beta_min)->required();
  wmap_cmd->add_option("--beta-max", wmap_beta_max)->required();
  wmap_cmd->add_option("--n-theta", wmap_n_theta)->capture_default_str();
  wmap_cmd->add_option("--n-beta", wmap_n_beta)->capture_default_str();
  add_bounds(wmap_cmd, wmap_bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (res_cmd->parsed()) {
      window.validate();
      const Cavity cavity = read_profile(res_profile).cavity;
      const ResonanceSearch search = find_resonances(cavity, window);
      out << "re_omega,im_omega,residual,degeneracy_abs\n";
      for (const auto& r : search.roots) {
        out << fmt(r.omega.real()) << ',' << fmt(r.omega.imag()) << ',' << fmt(r.residual) << ','
            << fmt(std::abs(r.degeneracy_indicator)) << '\n';
      }
      if (verbose) {
        err << search.roots.size() << " resonance(s), " << search.unresolved.size() << " unresolved seed(s)\n";
      }
      return kExitOk;
    }

    if (opt_cmd->parsed()) {
      const DesignSpace space = opt_bounds.space();
      const OptimalDesign design = optimize(opt_alpha, space, opt_options);
      ProfileDocument doc{kProfileVersion, design.cavity,
                          {{"alpha", fmt(design.alpha)},
                           {"beta_min", fmt(design.beta_min)},
                           {"theta_star", fmt(design.theta_star)}}};
      write_profile(opt_out, doc);
      const std::string report = optimize_report(design);
      if (opt_report.empty()) {
        out << report;
      } else {
        write_text_file(opt_report, report);
      }
      if (!opt_trace.empty()) write_text_file(opt_trace, design.mode.trace.to_csv());
      if (verbose) {
        err << design.all_roots.size() << " zero(s) of W with beta <= " << design.beta_max << "; "
            << design.cavity.size() << " layer(s)\n";
      }
      return kExitOk;
    }

    if (ver_cmd->parsed()) {
      const Cavity cavity = read_profile(ver_profile).cavity;
      const VerificationReport report = verify_design(cavity, ver_omega.value(), ver_options);
      out << "residual " << fmt(report.linear_residual) << '\n'
          << "residual_ok " << (report.residual_ok ? "true" : "false") << '\n'
          << "admissible " << (report.admissible ? "true" : "false") << '\n'
          << "bang_bang " << (report.bang_bang ? "true" : "false") << '\n'
          << "locally_optimal " << (report.locally_optimal ? "true" : "false") << '\n'
          << "directions " << report.directions_used << '\n'
          << "worst_descent " << fmt(report.worst_descent) << '\n'
          << "status " << (report.passed() ? "pass" : "fail") << '\n';
      for (const auto& f : report.failures) err << "verify: " << f << '\n';
      return report.passed() ? kExitOk : kExitVerifyFailed;
    }

    if (per_cmd->parsed()) {
      if (!(per_zeta != 0.0) || !std::isfinite(per_zeta)) throw StructuralError("--zeta must be finite and nonzero");
      const Cavity cavity = read_profile(per_profile).cavity;
      const StepFunction h = read_direction(per_direction);
      const ShiftComparison cmp = compare_with_resolve(cavity, per_omega.value(), h, per_zeta);
      out << "predicted " << fmt(cmp.predicted.real()) << ' ' << fmt(cmp.predicted.imag()) << '\n'
          << "resolved " << fmt(cmp.resolved.real()) << ' ' << fmt(cmp.resolved.imag()) << '\n'
          << "remainder " << fmt(cmp.remainder) << '\n'
          << "remainder_ratio " << fmt(cmp.remainder_ratio) << '\n';
      const double room = max_feasible_step(cavity, h);
      if (per_zeta > room) err << "perturb: warning: zeta exceeds the admissible step " << fmt(room) << '\n';
      return kExitOk;
    }

    if (wmap_cmd->parsed()) {
      const DesignSpace space = wmap_bounds.space();
      const auto grid = sample_W(wmap_alpha, wmap_beta_min, wmap_beta_max, wmap_n_theta, wmap_n_beta, space);
      out << "theta,beta,abs_w,re_w,im_w\n";
      for (const auto& p : grid) {
        out << fmt(p.theta) << ',' << fmt(p.beta) << ',' << fmt(std::abs(p.w)) << ',' << fmt(p.w.real()) << ','
            << fmt(p.w.imag()) << '\n';
      }
      return kExitOk;
    }
  } catch (const NoZeroFound& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoZero;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace qnm::cli
