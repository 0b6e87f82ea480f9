// Command-line front end: run | bound | complexity | lowerbound | admissibility.
// Exit codes: 0 ok, 1 a bound or check failed, 2 usage or input error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olreg/olreg.hpp"

namespace {

int emit(const olreg::CommandResult& r, const std::string& out) {
  if (out.empty()) {
    std::cout << r.csv;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return 2;
    }
    f << r.csv;
  }
  return r.exit_code;
}

std::shared_ptr<const olreg::FunctionClass> maybe_class(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const olreg::FunctionClass>(olreg::load_class(path));
}

std::optional<olreg::ShatteredTree> maybe_tree(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return olreg::load_tree(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online regression: forecasters, regret bounds and complexity measures"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out;
  std::uint64_t seed = 0;
  std::optional<double> bound_B;
  unsigned threads = 0;
  app.add_option("--out", out, "Write CSV here instead of stdout");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--bound-B", bound_B, "Response bound B")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // run
  olreg::RunConfig run;
  std::string run_class, run_tree;
  auto* run_cmd = app.add_subcommand("run", "Play seeded games and compare regret to its bound");
  run_cmd->add_option("--forecaster", run.forecaster)->check(CLI::IsMember({"finite", "vaw"}));
  run_cmd->add_option("--env", run.env)->check(CLI::IsMember({"shatter", "block", "iid"}));
  run_cmd->add_option("--class", run_class, "Class file (JSON)");
  run_cmd->add_option("--tree", run_tree, "Shattered tree file (JSON)");
  run_cmd->add_option("--n", run.horizons, "Horizons")->delimiter(',');
  run_cmd->add_option("--reps", run.reps, "Games per horizon");
  run_cmd->add_option("--alpha", run.alpha);
  run_cmd->add_option("--lambda", run.lambda);
  run_cmd->add_option("--noise-sd", run.noise_sd);
  run_cmd->add_option("--beta", run.beta);
  run_cmd->add_option("--blocks-k", run.blocks_k);
  run_cmd->add_option("--dim", run.dim);
  run_cmd->add_option("--temperature-scale", run.temperature_scale);
  run_cmd->add_option("--f-star", run.f_star, "Member index generating iid responses");

  // bound
  olreg::BoundConfig bound;
  std::string bound_entropy;
  auto* bound_cmd = app.add_subcommand("bound", "Tabulate normalized rates and chaining bounds");
  bound_cmd->add_option("--regime", bound.regime, "power:p=<v> | paramlog:d=<v> | finite:size=<k>");
  bound_cmd->add_option("--n", bound.horizons)->delimiter(',');
  bound_cmd->add_option("--L-star", bound.L_star);
  bound_cmd->add_flag("--with-constants", bound.with_constants);
  bound_cmd->add_option("--entropy", bound_entropy, "Entropy for the dudley column");

  // complexity
  olreg::ComplexityConfig cx;
  std::string cx_class, cx_tree, cx_mu = "zero";
  auto* cx_cmd = app.add_subcommand("complexity", "Covers, fat-shattering and offset Rademacher");
  cx_cmd->add_option("--class", cx_class)->required();
  cx_cmd->add_option("--tree", cx_tree);
  cx_cmd->add_option("--depth", cx.depth);
  cx_cmd->add_option("--beta", cx.beta);
  cx_cmd->add_option("--samples", cx.samples);
  cx_cmd->add_option("--mu", cx_mu)->check(CLI::IsMember({"zero", "witness"}));
  cx_cmd->add_option("--max-fat-depth", cx.max_fat_depth);

  // lowerbound
  olreg::LowerBoundConfig lb;
  auto* lb_cmd = app.add_subcommand("lowerbound", "Witness the lower bounds with tree adversaries");
  lb_cmd->add_option("--env", lb.env)->check(CLI::IsMember({"shatter", "block"}));
  lb_cmd->add_option("--forecaster", lb.forecaster)->check(CLI::IsMember({"finite", "vaw"}));
  lb_cmd->add_option("--beta", lb.beta);
  lb_cmd->add_option("--depth", lb.depth);
  lb_cmd->add_option("--blocks-k", lb.blocks_k);
  lb_cmd->add_option("--episodes", lb.episodes);
  lb_cmd->add_option("--lambda", lb.lambda);
  lb_cmd->add_option("--temperature-scale", lb.temperature_scale);

  // admissibility
  olreg::AdmissibilityConfig adm;
  std::string adm_class;
  auto* adm_cmd = app.add_subcommand("admissibility", "Check the one-step admissibility inequality");
  adm_cmd->add_option("--relaxation", adm.relaxation)
      ->check(CLI::IsMember({"finite", "vaw", "corrupted"}));
  adm_cmd->add_option("--class", adm_class);
  adm_cmd->add_option("--histories", adm.histories);
  adm_cmd->add_option("--n", adm.horizon, "Rounds per history");
  adm_cmd->add_option("--grid", adm.grid_points, "Points in the response grid");
  adm_cmd->add_option("--lambda", adm.lambda);
  adm_cmd->add_option("--dim", adm.dim);
  adm_cmd->add_option("--temperature-scale", adm.temperature_scale);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      run.cls = maybe_class(run_class);
      run.tree = maybe_tree(run_tree);
      run.seed = seed;
      run.threads = threads;
      if (bound_B) run.bound_B = *bound_B;
      return emit(olreg::cmd_run(run), out);
    }
    if (*bound_cmd) {
      if (bound_B) bound.bound_B = *bound_B;
      std::optional<olreg::EntropyFunction> h;
      if (!bound_entropy.empty()) h = olreg::parse_entropy(bound_entropy);
      return emit(olreg::cmd_bound(bound, h), out);
    }
    if (*cx_cmd) {
      cx.cls = maybe_class(cx_class);
      cx.tree = maybe_tree(cx_tree);
      cx.use_witness_mu = cx_mu == "witness";
      cx.seed = seed;
      cx.threads = threads;
      if (bound_B) cx.bound_B = *bound_B;
      return emit(olreg::cmd_complexity(cx), out);
    }
    if (*lb_cmd) {
      lb.seed = seed;
      lb.threads = threads;
      if (bound_B) lb.bound_B = *bound_B;
      return emit(olreg::cmd_lowerbound(lb), out);
    }
    if (*adm_cmd) {
      adm.cls = maybe_class(adm_class);
      adm.seed = seed;
      adm.threads = threads;
      if (bound_B) adm.bound_B = *bound_B;
      return emit(olreg::cmd_admissibility(adm), out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
