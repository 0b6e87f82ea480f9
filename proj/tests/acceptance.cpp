// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "olreg/olreg.hpp"

namespace {

using olreg::Covariate;
using olreg::FunctionClass;
using olreg::Vector;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool passed, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (passed ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!passed) ++failures;
}

void note(int id, const std::string& detail) {
  std::cout << "  note " << id << ": " << detail << std::endl;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Regret of the exponential-weights forecaster against block and iid play.
void finite_experts_bound() {
  const auto t0 = Clock::now();
  std::size_t games = 0, violations = 0;
  double worst = -1e300;
  std::size_t games2 = 0, violations2 = 0;
  for (std::size_t size : {2u, 5u, 16u}) {
    for (double B : {1.0, 2.0}) {
      for (const char* env : {"block", "iid"}) {
        for (double scale : {1.0, 2.0}) {
          olreg::RunConfig c;
          c.forecaster = "finite";
          c.env = env;
          c.cls = std::make_shared<const FunctionClass>(
              olreg::random_class(size, 4, olreg::mix_seed(size, static_cast<std::uint64_t>(B))));
          c.horizons = {50};
          c.reps = 17;
          c.bound_B = B;
          c.seed = olreg::mix_seed(size * 10 + static_cast<std::size_t>(B), env[0]);
          c.temperature_scale = scale;
          for (const auto& r : olreg::run_rows(c)) {
            const bool bad = r.regret > r.bound + 1e-9;
            if (scale == 1.0) {
              ++games, violations += bad;
              worst = std::max(worst, r.regret - r.bound);
            } else {
              ++games2, violations2 += bad;
            }
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, violations == 0 && games >= 200 && secs < 10.0,
         std::to_string(games) + " games, " + std::to_string(violations) +
             " above B^2*log|F|, worst regret-bound " + fmt(worst) + ", " + fmt(secs) + " s");
  note(1, "doubled temperature against 2*B^2*log|F|: " + std::to_string(violations2) +
              " violations in " + std::to_string(games2) + " games");
}

void vaw_bound() {
  const auto t0 = Clock::now();
  olreg::RunConfig c;
  c.forecaster = "vaw";
  c.env = "iid";
  c.dim = 3;
  c.lambda = 1.0;
  c.bound_B = 1.0;
  c.horizons = {200};
  c.reps = 100;
  c.seed = 2024;
  std::size_t violations = 0;
  double worst = -1e300;
  const auto rows = olreg::run_rows(c);
  for (const auto& r : rows) {
    if (r.regret > r.bound + 1e-6) ++violations;
    worst = std::max(worst, r.regret - r.bound);
  }
  const double secs = seconds_since(t0);
  report(2, violations == 0 && rows.size() == 100 && secs < 30.0,
         std::to_string(rows.size()) + " seeds, " + std::to_string(violations) +
             " violations, bound " + fmt(rows.front().bound) + ", worst regret-bound " + fmt(worst) +
             ", " + fmt(secs) + " s");
}

struct LedgerCheck {
  std::size_t games = 0, short_ledgers = 0, negative_slack_rounds = 0;
};

template <class X>
void tally_ledger(LedgerCheck& out, const olreg::Relaxation<X>& rel, const olreg::Transcript<X>& tr,
                  double final_regret) {
  const auto ledger = olreg::relaxation_ledger(rel, tr);
  double telescoped = ledger.back().rel_after;
  for (const auto& e : ledger) {
    telescoped += e.rel_before - e.rel_after;
    if (e.slack() < -1e-9) ++out.negative_slack_rounds;
  }
  ++out.games;
  if (telescoped < final_regret - 1e-9) ++out.short_ledgers;
}

void admissibility() {
  const auto t0 = Clock::now();
  auto worst = [](const std::vector<olreg::AdmissibilityRound>& rounds) {
    double w = 1e300;
    for (const auto& r : rounds) w = std::min(w, r.worst_slack);
    return w;
  };
  olreg::AdmissibilityConfig fin;
  fin.relaxation = "finite";
  fin.histories = 50;
  fin.grid_points = 41;
  fin.seed = 31;
  const double finite_slack = worst(olreg::admissibility_rounds(fin));
  olreg::AdmissibilityConfig vaw = fin;
  vaw.relaxation = "vaw";
  const double vaw_slack = worst(olreg::admissibility_rounds(vaw));

  // Telescoping ledger on played games.
  LedgerCheck fl, vl;
  auto cls = std::make_shared<const FunctionClass>(olreg::random_class(5, 4, 77));
  const std::size_t n = 30;
  for (std::uint64_t s = 0; s < 50; ++s) {
    olreg::FiniteClassRelaxation rel(cls, 1.0);
    olreg::FiniteClassForecaster fc(cls, 1.0);
    const auto& f = cls->values(s % cls->size());
    olreg::StochasticEnvironment env({f.begin(), f.end()}, 0.3, 1.0);
    const auto tr = olreg::run_game<Covariate>(fc, env, {n, 1.0, 0.0, s});
    tally_ledger(fl, rel, tr, olreg::regret(tr, *cls));

    olreg::VawRelaxation vrel(3, 1.0, 1.0, n);
    olreg::VawForecaster vfc(3, 1.0, 1.0);
    Vector w(3);
    std::mt19937_64 rng(s);
    for (Eigen::Index i = 0; i < 3; ++i) w[i] = 2.0 * olreg::draw_unit(rng) - 1.0;
    w /= std::max(1.0, w.norm());
    olreg::LinearEnvironment venv(w, 0.3, 1.0);
    const auto vtr = olreg::run_game<Vector>(vfc, venv, {n, 1.0, 0.0, s});
    tally_ledger(vl, vrel, vtr, olreg::forecaster_loss(vtr) - olreg::ridge_lattice_best_loss(vtr, 1.0));
  }

  olreg::AdmissibilityConfig doubled = fin;
  doubled.temperature_scale = 2.0;
  const double doubled_slack = worst(olreg::admissibility_rounds(doubled));
  const double secs = seconds_since(t0);
  const bool ok = finite_slack >= -1e-9 && vaw_slack >= -1e-9 && fl.short_ledgers == 0 &&
                  vl.short_ledgers == 0 && secs < 20.0;
  report(3, ok,
         "worst slack finite " + fmt(finite_slack) + ", vaw " + fmt(vaw_slack) +
             "; ledgers below regret: finite " + std::to_string(fl.short_ledgers) + "/" +
             std::to_string(fl.games) + ", vaw " + std::to_string(vl.short_ledgers) + "/" +
             std::to_string(vl.games) + "; played rounds with negative slack: finite " +
             std::to_string(fl.negative_slack_rounds) + ", vaw " +
             std::to_string(vl.negative_slack_rounds) + ", " + fmt(secs) + " s");
  note(3, "finite relaxation at doubled temperature: worst slack " + fmt(doubled_slack));
}

void lower_bound() {
  const auto t0 = Clock::now();
  olreg::LowerBoundConfig c;
  c.env = "shatter";
  c.forecaster = "finite";
  c.beta = 0.5;
  c.depth = 10;
  c.bound_B = 4.0;
  c.episodes = 2000;
  c.seed = 5;
  const auto s = olreg::lower_bound_experiment(c);
  const double secs = seconds_since(t0);
  const double target = static_cast<double>(s.n) * c.beta;
  report(4, s.mean_regret >= target - 4.0 * s.stderr_ && secs < 60.0,
         "mean regret " + fmt(s.mean_regret) + " (stderr " + fmt(s.stderr_) + ") vs n*beta " +
             fmt(target) + ", " + fmt(secs) + " s");
}

void offset_rademacher() {
  std::size_t agree = 0;
  const int n = 10;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(olreg::mix_seed(trial, 500));
    const std::size_t domain = 4;
    const auto cls = olreg::random_class(2 + trial % 5, domain, olreg::mix_seed(trial, 501));
    const std::size_t nodes = (std::size_t{1} << n) - 1;
    std::vector<Covariate> xl(nodes);
    std::vector<double> ml(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      xl[i] = static_cast<Covariate>(rng() % domain);
      ml[i] = 2.0 * olreg::draw_unit(rng) - 1.0;
    }
    const olreg::LabeledTree<Covariate> x(n, xl);
    const olreg::LabeledTree<double> mu(n, ml);
    const auto ex = olreg::offset_rademacher_exact(cls, x, mu, 1.0);
    const auto mc = olreg::offset_rademacher(cls, x, mu, 1.0, 2000, trial);
    if (std::abs(mc.value - ex.value) <= 4.0 * mc.stderr_) ++agree;
  }
  const FunctionClass single(3, {{0.3, -0.7, 0.1}});
  const auto x = olreg::LabeledTree<Covariate>::constant_levels(std::vector<Covariate>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
  std::vector<double> ml(x.labels().size());
  for (std::size_t i = 0; i < ml.size(); ++i) ml[i] = single(0, x[i]);
  const olreg::LabeledTree<double> mu(n, ml);
  const double ex0 = olreg::offset_rademacher_exact(single, x, mu, 1.0).value;
  const double mc0 = olreg::offset_rademacher(single, x, mu, 1.0, 500, 3).value;
  report(5, agree >= 95 && ex0 == 0.0 && mc0 == 0.0,
         std::to_string(agree) + "/100 within 4 stderr; singleton exact " + fmt(ex0) +
             ", sampled " + fmt(mc0));
}

void chaining_arithmetic() {
  const auto h = olreg::EntropyFunction::power(4.0);
  bool ok = true;
  std::string detail;
  for (double nd : {1e3, 1e4, 1e5}) {
    const auto n = static_cast<std::size_t>(nd);
    const double rho[] = {std::pow(nd, -0.25)};
    const double got = olreg::dudley_offset_bound(h, 1.0, n, 1.0, rho).total;
    const double want = (4.0 + 24.0 / 2.0) * std::pow(nd, 0.75);
    const double ratio = got / want;
    if (std::abs(ratio - 1.0) > 0.05) ok = false;
    detail += "n=" + fmt(nd) + " ratio " + fmt(ratio) + "; ";
  }
  double worst_rel = 0.0;
  const std::vector<olreg::EntropyFunction> hs{olreg::EntropyFunction::power(1.0),
                                               olreg::EntropyFunction::power(2.0),
                                               olreg::EntropyFunction::power(4.0),
                                               olreg::EntropyFunction::param_log(3.0)};
  for (const auto& e : hs) {
    for (double rho : {1e-3, 1e-2, 0.1}) {
      const double a = olreg::entropy_sqrt_integral(e, rho, 1.0, olreg::Integration::Analytic);
      const double q = olreg::entropy_sqrt_integral(e, rho, 1.0, olreg::Integration::Quadrature);
      const double aw = olreg::entropy_weighted_integral(e, rho, 1.0, olreg::Integration::Analytic);
      const double qw = olreg::entropy_weighted_integral(e, rho, 1.0, olreg::Integration::Quadrature);
      worst_rel = std::max({worst_rel, std::abs(a - q) / std::abs(a), std::abs(aw - qw) / std::abs(aw)});
    }
  }
  report(6, ok && worst_rel <= 1e-6,
         detail + "analytic vs quadrature worst relative gap " + fmt(worst_rel));
}

void cover_fat_chain() {
  std::mt19937_64 rng(777);
  std::size_t violations = 0, inexact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int depth = 1 + static_cast<int>(rng() % 4);
    const std::size_t size = 1 + rng() % 6;
    const std::size_t domain = 1 + rng() % 4;
    // Values on a coarse lattice so that ties and exact shattering both occur.
    std::vector<std::vector<double>> tables(size, std::vector<double>(domain));
    for (auto& t : tables)
      for (auto& v : t) v = -1.0 + 0.25 * static_cast<double>(rng() % 9);
    const FunctionClass cls(domain, tables);
    std::vector<Covariate> xl((std::size_t{1} << depth) - 1);
    for (auto& x : xl) x = static_cast<Covariate>(rng() % domain);
    const olreg::LabeledTree<Covariate> x(depth, xl);
    const double beta = 0.1 + 0.9 * olreg::draw_unit(rng);
    const auto rep = olreg::cover_fat_relation_check(cls, x, beta);
    if (!rep.passed) ++violations;
    if (!rep.n2.exact || !rep.ninf.exact) ++inexact;
  }
  report(7, violations == 0 && inexact == 0,
         "1000 instances, " + std::to_string(violations) + " violations, " + std::to_string(inexact) +
             " not exact");
}

void phase_transition() {
  std::vector<double> ns;
  for (int k = 10; k <= 20; ++k) ns.push_back(std::ldexp(1.0, k));
  auto slope = [&](double p) {
    std::vector<double> v;
    for (double n : ns)
      v.push_back(olreg::theorem1_rate(olreg::RateSpec::nonparametric(p, static_cast<std::size_t>(n))));
    return olreg::loglog_slope(ns, v);
  };
  const double s4 = slope(4.0), s1 = slope(1.0);
  report(8, std::abs(s4 + 0.25) <= 0.01 && std::abs(s1 + 2.0 / 3.0) <= 0.01,
         "slope p=4 " + fmt(s4) + ", p=1 " + fmt(s1) +
             " (formula level only; not minimax values of infinite classes)");
}

std::string capture(const std::string& args) {
  const std::string cmd = std::string(OLREG_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return "<popen failed>";
  char buf[4096];
  for (std::size_t got; (got = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, got);
  const int status = pclose(p);
  out += "\nexit " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
  return out;
}

void determinism() {
  const std::string s = std::string(OLREG_SAMPLES) + "/";
  const std::vector<std::string> commands{
      "--seed 11 run --class " + s + "class4.json --env iid --n 10,50 --reps 5",
      "--seed 11 run --class " + s + "class4.json --env block --n 20 --reps 5",
      "--seed 11 run --forecaster vaw --n 50 --reps 5",
      "--seed 11 run --class " + s + "signs2.json --tree " + s +
          "tree_depth2.json --env shatter --beta 1.5 --n 2 --reps 5",
      "--seed 11 bound --regime power:p=4 --n 100,1000",
      "--seed 11 bound --regime paramlog:d=2 --n 100,1000 --with-constants",
      "--seed 11 complexity --class " + s + "class4.json --depth 3",
      "--seed 11 lowerbound --depth 4 --episodes 200",
      "--seed 11 lowerbound --env block --depth 3 --episodes 100",
      "--seed 11 admissibility --relaxation finite --histories 5 --n 5",
      "--seed 11 admissibility --relaxation vaw --histories 5 --n 5",
  };
  std::size_t differing = 0;
  for (const auto& c : commands)
    if (capture(c) != capture(c)) ++differing;
  report(9, differing == 0,
         std::to_string(commands.size()) + " commands, " + std::to_string(differing) + " differ");
}

}  // namespace

int main() {
  const std::vector<void (*)()> criteria{finite_experts_bound, vaw_bound,   admissibility,
                                         lower_bound,          offset_rademacher, chaining_arithmetic,
                                         cover_fat_chain,      phase_transition,  determinism};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
    }
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
