// Command-line front end. Talks to the library only through rtd.h.
//
// Exit codes: 0 ok, 1 verify found violations, 2 usage/parse/validation
// error, 3 unsupported input, 4 result not exact under --exact-only,
// 5 distillation hypothesis not met, 70 internal error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtd.h"

namespace {

using nlohmann::json;

// Every item must be a complete number; CLI11 would read "" as 0.
std::optional<std::vector<double>> parse_grid(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') return std::nullopt;
    out.push_back(v);
  }
  return out;
}

struct Handles {
  rtd_state* state = nullptr;
  rtd_state* target = nullptr;
  rtd_report* report = nullptr;
  ~Handles() {
    rtd_state_free(state);
    rtd_state_free(target);
    rtd_report_free(report);
  }
};

int exit_code(rtd_status s) {
  switch (s) {
    case RTD_OK: return 0;
    case RTD_ERR_UNSUPPORTED: return 3;
    case RTD_ERR_NOT_EXACT: return 4;
    case RTD_ERR_HYPOTHESIS: return 5;
    case RTD_ERR_INTERNAL: return 70;
    default: return 2;
  }
}

int report_error(rtd_status s) {
  std::cerr << "rtd: " << rtd_status_name(s) << ": " << rtd_last_error() << "\n";
  return exit_code(s);
}

struct Globals {
  std::string theory;
  std::string state_path;
  std::string target_path;
  std::size_t target_dim = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::optional<std::uint64_t> seed;
  bool json_out = false;
  bool exact_only = false;
  std::optional<double> tol;
};

void print_text(const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "schema" || key == "csv") continue;
    if (key == "output_state") {
      std::cout << key << ": (" << value["kind"].get<std::string>() << ", dims " << value["dims"].dump()
                << "; use --out or --json)\n";
      continue;
    }
    if (value.is_string()) std::cout << key << ": " << value.get<std::string>() << "\n";
    else if (value.is_array() && !value.empty() && value.front().is_string()) {
      std::cout << key << ":\n";
      for (const auto& v : value) std::cout << "  - " << v.get<std::string>() << "\n";
    } else if (!value.is_array() || !value.empty()) {
      std::cout << key << ": " << value.dump() << "\n";
    }
  }
}

bool report_exact(const rtd_report* r) {
  int exact = 1;
  if (rtd_report_get_bool(r, "exact", &exact) != RTD_OK) return true;
  return exact != 0;
}

int emit(const Globals& g, const rtd_report* r) {
  const json j = json::parse(rtd_report_to_json(r));
  if (g.json_out) std::cout << j.dump(2) << "\n";
  else print_text(j);
  if (g.exact_only && !report_exact(r)) {
    std::cerr << "rtd: result is not exact (--exact-only)\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds and measures for one-shot resource distillation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(rtd_version()));

  Globals g;
  app.add_option("--theory", g.theory, "coherence | entanglement | purity");
  app.add_option("--state", g.state_path, "input state file (JSON)");
  auto* target_opt = app.add_option("--target", g.target_path, "target pure state file (JSON)");
  app.add_option("--target-dim", g.target_dim, "use the theory's unit state on this local dimension as target")
      ->excludes(target_opt);
  app.add_option("--delta", g.delta, "resource generation allowed to free operations");
  app.add_option("--epsilon", g.epsilon, "error in the final state");
  app.add_option("--seed", g.seed, "seed for randomized steps");
  app.add_flag("--json", g.json_out, "print the JSON report");
  app.add_flag("--exact-only", g.exact_only, "fail with exit 4 when the result is heuristic");
  app.add_option("--tol", g.tol, "tolerance (default 1e-9, or RTD_TOL)");

  auto* gmin = app.add_subcommand("gmin", "G_min and its smoothed variant");
  std::optional<double> smooth;
  bool pure_ball = false;
  gmin->add_option("--smooth", smooth, "smoothing radius epsilon");
  gmin->add_flag("--pure", pure_ball, "use the pure-state ball");

  auto* rob = app.add_subcommand("robustness", "global, free or delta-free robustness");
  std::string rob_kind;
  rob->add_option("--kind", rob_kind, "global | free | delta")
      ->required()
      ->check(CLI::IsMember({"global", "free", "delta"}));

  auto* bound = app.add_subcommand("bound", "rate interval [lower, upper]");

  auto* distill = app.add_subcommand("distill", "build and check the measure-and-prepare map");
  std::size_t copies = 0;
  std::string out_path;
  bool allow_unverified = false;
  std::size_t samples = 1000;
  distill->add_option("-m,--copies", copies, "number of target copies")->required();
  distill->add_option("--out", out_path, "write the output state here");
  distill->add_flag("--allow-unverified", allow_unverified, "build even when the sufficient condition fails");
  distill->add_option("--samples", samples, "product-state samples for entanglement certification");

  auto* verify = app.add_subcommand("verify", "run invariant suites");
  std::string suite = "all";
  std::size_t dim_max = 4, trials = 50;
  verify->add_option("--suite", suite, "suite name or all");
  verify->add_option("--dim-max", dim_max, "largest local dimension");
  verify->add_option("--trials", trials, "random instances per suite and dimension");

  auto* sweep = app.add_subcommand("sweep", "rate interval over a (delta, epsilon) grid, as CSV");
  std::vector<std::string> delta_text, eps_text;
  bool r_column = false;
  std::size_t threads = 0;
  sweep->add_option("--delta-grid", delta_text, "comma-separated delta values")->delimiter(',');
  sweep->add_option("--epsilon-grid", eps_text, "comma-separated epsilon values")->delimiter(',');
  sweep->add_flag("--robustness-column", r_column, "append R^delta(rho)");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "rtd: " << e.what() << "\n";
    return 2;
  }

  rtd_options opts;
  rtd_options_default(&opts);
  if (const char* env = std::getenv("RTD_TOL")) {
    char* end = nullptr;
    const double t = std::strtod(env, &end);
    if (end == env || *end != '\0') {
      std::cerr << "rtd: RTD_TOL is not a number\n";
      return 2;
    }
    opts.tol = t;
  }
  if (g.tol) opts.tol = *g.tol;
  opts.delta = g.delta;
  opts.epsilon = g.epsilon;
  opts.seed = g.seed.value_or(0);
  if (g.delta < 0) {
    std::cerr << "rtd: --delta must be nonnegative\n";
    return 2;
  }
  if (g.epsilon < 0 || g.epsilon > 1) {
    std::cerr << "rtd: --epsilon must lie in [0, 1]\n";
    return 2;
  }

  Handles h;
  if (verify->parsed()) {
    if (!g.seed) {
      std::cerr << "rtd: verify requires --seed\n";
      return 2;
    }
    opts.dim_max = dim_max;
    opts.trials = trials;
    const auto s = rtd_verify(suite.c_str(), &opts, &h.report);
    if (s != RTD_OK) return report_error(s);
    const json j = json::parse(rtd_report_to_json(h.report));
    if (g.json_out) {
      std::cout << j.dump(2) << "\n";
    } else {
      for (const auto& sr : j["suites"])
        std::cout << sr["name"].get<std::string>() << ": " << sr["checks"] << " checks, " << sr["failures"]
                  << " failures, " << sr["seconds"].get<double>() << " s\n";
      for (const auto& f : j["failures"]) std::cout << f.dump() << "\n";
    }
    int passed = 0;
    rtd_report_get_bool(h.report, "passed", &passed);
    std::cout << (passed ? "PASS" : "FAIL") << "\n";
    return passed ? 0 : 1;
  }

  if (g.theory.empty()) {
    std::cerr << "rtd: --theory is required\n";
    return 2;
  }
  rtd_theory theory;
  if (auto s = rtd_theory_parse(g.theory.c_str(), &theory); s != RTD_OK) return report_error(s);
  if (g.state_path.empty()) {
    std::cerr << "rtd: --state is required\n";
    return 2;
  }
  if (auto s = rtd_state_load(g.state_path.c_str(), &h.state); s != RTD_OK) return report_error(s);
  if (!g.target_path.empty()) {
    if (auto s = rtd_state_load(g.target_path.c_str(), &h.target); s != RTD_OK) return report_error(s);
  } else if (g.target_dim) {
    if (auto s = rtd_state_unit(theory, g.target_dim, 1, &h.target); s != RTD_OK) return report_error(s);
  }

  // Results that depend on a seeded search need an explicit seed.
  const bool mixed = !rtd_state_is_pure(h.state);
  const bool randomized = (gmin->parsed() && smooth && mixed) || (rob->parsed() && rob_kind == "delta" && mixed) ||
                          ((bound->parsed() || sweep->parsed()) && mixed) ||
                          (distill->parsed() && (theory == RTD_ENTANGLEMENT || mixed));
  if (randomized && !g.seed) {
    std::cerr << "rtd: this command is randomized for the given input; pass --seed\n";
    return 2;
  }

  rtd_status s = RTD_OK;
  if (gmin->parsed()) {
    opts.smooth = smooth.has_value();
    opts.epsilon = smooth.value_or(0.0);
    opts.pure_ball = pure_ball;
    if (opts.epsilon < 0 || opts.epsilon > 1) {
      std::cerr << "rtd: --smooth must lie in [0, 1]\n";
      return 2;
    }
    s = rtd_gmin(theory, h.state, &opts, &h.report);
  } else if (rob->parsed()) {
    const auto kind = rob_kind == "global" ? RTD_ROBUSTNESS_GLOBAL
                      : rob_kind == "free" ? RTD_ROBUSTNESS_FREE
                                           : RTD_ROBUSTNESS_DELTA;
    s = rtd_robustness(theory, h.state, kind, &opts, &h.report);
  } else if (bound->parsed()) {
    s = rtd_bound(theory, h.state, h.target, &opts, &h.report);
  } else if (distill->parsed()) {
    opts.allow_unverified = allow_unverified;
    opts.sample_size = samples;
    s = rtd_distill(theory, h.state, h.target, copies, &opts, &h.report);
    if (s == RTD_ERR_HYPOTHESIS && h.report) {
      double lhs = 0, rhs = 0;
      rtd_report_get_double(h.report, "lhs", &lhs);
      rtd_report_get_double(h.report, "rhs", &rhs);
      std::cerr << "rtd: hypothesis not met: G_min of the effect = " << lhs << " < requirement = " << rhs << "\n";
      if (g.json_out) std::cout << rtd_report_to_json(h.report) << "\n";
      return 5;
    }
    if (s == RTD_OK && !out_path.empty()) {
      const char* text = nullptr;
      rtd_report_get_string(h.report, "output_state", &text);
      std::ofstream f(out_path, std::ios::binary);
      if (!f || !(f << text << "\n")) {
        std::cerr << "rtd: cannot write " << out_path << "\n";
        return 2;
      }
    }
  } else if (sweep->parsed()) {
    const auto delta_grid = parse_grid(delta_text), eps_grid = parse_grid(eps_text);
    if (!delta_grid || !eps_grid || delta_grid->empty() || eps_grid->empty()) {
      std::cerr << "rtd: sweep needs nonempty numeric --delta-grid and --epsilon-grid\n";
      return 2;
    }
    opts.robustness_column = r_column;
    opts.threads = threads;
    s = rtd_sweep(theory, h.state, h.target, delta_grid->data(), delta_grid->size(), eps_grid->data(), eps_grid->size(),
                  &opts, &h.report);
    if (s != RTD_OK) return report_error(s);
    if (g.json_out) {
      std::cout << rtd_report_to_json(h.report) << "\n";
    } else {
      const char* csv = nullptr;
      rtd_report_get_string(h.report, "csv", &csv);
      std::cout << csv;
    }
    if (g.exact_only) {
      const json j = json::parse(rtd_report_to_json(h.report));
      for (const auto& row : j["rows"])
        if (!row["exact"].get<bool>()) {
          std::cerr << "rtd: sweep contains heuristic rows (--exact-only)\n";
          return 4;
        }
    }
    return 0;
  }
  if (s != RTD_OK) return report_error(s);
  return emit(g, h.report);
}
