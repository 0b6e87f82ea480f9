#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "olreg/forecasters.hpp"
#include "olreg/protocol.hpp"

namespace {

using olreg::Covariate;
using olreg::FunctionClass;
using olreg::Round;
using olreg::Transcript;

constexpr double kTol = 1e-9;

Transcript<Covariate> make_transcript(std::vector<Round<Covariate>> rounds, double B = 1.0) {
  Transcript<Covariate> tr;
  tr.bound_B = B;
  tr.horizon_n = rounds.size();
  tr.rounds = std::move(rounds);
  return tr;
}

// Straight-line recomputation of the regret sums, no shared helpers.
double oracle_regret(const Transcript<Covariate>& tr, const FunctionClass& cls, double alpha) {
  double learner = 0.0;
  for (const auto& r : tr.rounds) learner += (r.y_hat - r.y) * (r.y_hat - r.y);
  double best = 1e300;
  for (std::size_t f = 0; f < cls.size(); ++f) {
    double s = 0.0;
    for (const auto& r : tr.rounds) s += std::pow(cls.values(f)[r.x] - r.y, 2);
    best = std::min(best, s);
  }
  return (1.0 - alpha) * learner - best;
}

Transcript<Covariate> random_transcript(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> x(0, m - 1);
  std::vector<Round<Covariate>> rounds;
  for (std::size_t t = 0; t < n; ++t) rounds.push_back({x(rng), u(rng), u(rng)});
  return make_transcript(std::move(rounds));
}

FunctionClass random_class(std::mt19937_64& rng, std::size_t k, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FunctionClass cls(m);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> t(m);
    for (auto& v : t) v = u(rng);
    cls.add("f" + std::to_string(i), t);
  }
  return cls;
}

class ConstantForecaster final : public olreg::Forecaster<Covariate> {
 public:
  explicit ConstantForecaster(double v, double B = 1.0) : v_(v), B_(B) {}
  double predict(const Covariate&) const override { return v_; }
  void observe(const Covariate&, double) override {}
  double bound() const override { return B_; }
  std::string name() const override { return "constant"; }

 private:
  double v_, B_;
};

class ScriptedEnvironment final : public olreg::Environment<Covariate> {
 public:
  ScriptedEnvironment(std::vector<Covariate> xs, std::vector<double> ys, double B = 1.0)
      : xs_(std::move(xs)), ys_(std::move(ys)), B_(B) {}
  void reset(std::uint64_t) override { t_ = 0; }
  Covariate next_x(std::span<const Round<Covariate>>) override { return xs_[t_]; }
  double next_y(std::span<const Round<Covariate>>, const Covariate&, double) override {
    return ys_[t_++];
  }
  double bound() const override { return B_; }

 private:
  std::vector<Covariate> xs_;
  std::vector<double> ys_;
  double B_;
  std::size_t t_ = 0;
};

// Responds with the negated expert value at each covariate.
class FlipEnvironment final : public olreg::Environment<Covariate> {
 public:
  explicit FlipEnvironment(std::vector<double> f) : f_(std::move(f)) {}
  void reset(std::uint64_t seed) override { rng_.seed(seed); }
  Covariate next_x(std::span<const Round<Covariate>>) override { return rng_() % f_.size(); }
  double next_y(std::span<const Round<Covariate>>, const Covariate& x, double) override {
    return -f_[x];
  }
  double bound() const override { return 1.0; }

 private:
  std::vector<double> f_;
  std::mt19937_64 rng_;
};

TEST(RunGame, EmptyGameGivesEmptyTranscript) {
  ConstantForecaster fc(0.0);
  ScriptedEnvironment env({}, {});
  const auto tr = olreg::run_game<Covariate>(fc, env, {0, 1.0, 0.0, 1});
  EXPECT_TRUE(tr.rounds.empty());
  EXPECT_TRUE(tr.complete());
}

TEST(RunGame, ZeroForecasterAgainstZeroResponses) {
  ConstantForecaster fc(0.0);
  ScriptedEnvironment env({0, 1, 2}, {0.0, 0.0, 0.0});
  const auto tr = olreg::run_game<Covariate>(fc, env, {3, 1.0, 0.0, 7});
  ASSERT_EQ(tr.rounds.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(tr.rounds[t].x, t);
    EXPECT_EQ(tr.rounds[t].y_hat, 0.0);
    EXPECT_EQ(tr.rounds[t].y, 0.0);
  }
}

TEST(RunGame, SingleExpertAgainstSignFlippedResponsesHasZeroRegret) {
  auto cls = std::make_shared<const FunctionClass>(
      FunctionClass(3, {{0.5, -0.25, 1.0}}));
  olreg::FiniteClassForecaster fc(cls, 1.0);
  FlipEnvironment env({0.5, -0.25, 1.0});
  const auto tr = olreg::run_game<Covariate>(fc, env, {12, 1.0, 0.0, 3});
  for (const auto& r : tr.rounds) EXPECT_NEAR(r.y_hat, cls->values(0)[r.x], 1e-12);
  EXPECT_NEAR(olreg::regret(tr, *cls), 0.0, kTol);
}

TEST(RunGame, RejectsResponsesOutsideTheBound) {
  ConstantForecaster fc(0.0);
  ScriptedEnvironment env({0}, {1.5});
  EXPECT_THROW(olreg::run_game<Covariate>(fc, env, {1, 1.0, 0.0, 0}), olreg::RangeError);
}

TEST(RunGame, RejectsPredictionsOutsideTheBound) {
  ConstantForecaster fc(2.0, 1.0);
  ScriptedEnvironment env({0}, {0.0});
  EXPECT_THROW(olreg::run_game<Covariate>(fc, env, {1, 1.0, 0.0, 0}), olreg::RangeError);
}

TEST(RunGame, RejectsDisagreeingBounds) {
  ConstantForecaster fc(0.0, 2.0);
  ScriptedEnvironment env({0}, {0.0}, 1.0);
  EXPECT_THROW(olreg::run_game<Covariate>(fc, env, {1, 1.0, 0.0, 0}), std::invalid_argument);
}

TEST(GameConfig, Validates) {
  EXPECT_THROW((olreg::GameConfig{1, 0.0, 0.0, 0}.validate()), olreg::RangeError);
  EXPECT_THROW((olreg::GameConfig{1, 1.0, 1.0, 0}.validate()), olreg::RangeError);
  EXPECT_THROW((olreg::GameConfig{1, 1.0, -0.1, 0}.validate()), olreg::RangeError);
  EXPECT_NO_THROW((olreg::GameConfig{1, 1.0, 0.99, 0}.validate()));
}

TEST(RunGame, DeterministicGivenSeed) {
  auto cls = std::make_shared<const FunctionClass>(FunctionClass(3, {{0.1, 0.2, 0.3}, {-0.5, 0.0, 0.5}}));
  auto play = [&] {
    olreg::FiniteClassForecaster fc(cls, 1.0);
    FlipEnvironment env({0.3, -0.6, 0.9});
    return olreg::run_game<Covariate>(fc, env, {20, 1.0, 0.0, 99});
  };
  const auto a = play(), b = play();
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  for (std::size_t t = 0; t < a.rounds.size(); ++t) {
    EXPECT_EQ(a.rounds[t].x, b.rounds[t].x);
    EXPECT_EQ(a.rounds[t].y_hat, b.rounds[t].y_hat);
    EXPECT_EQ(a.rounds[t].y, b.rounds[t].y);
  }
}

TEST(Regret, PerfectPlayIsZero) {
  FunctionClass cls(2, {{0.3, -0.7}, {1.0, 1.0}});
  const auto tr = make_transcript({{0, 0.3, 0.3}, {1, -0.7, -0.7}, {0, 0.3, 0.3}});
  EXPECT_NEAR(olreg::regret(tr, cls), 0.0, kTol);
  EXPECT_NEAR(olreg::alpha_regret(tr, cls, 0.5), 0.0, kTol);
}

TEST(Regret, OneRoundDirectEvaluation) {
  FunctionClass cls(1, {{1.0}});
  const auto tr = make_transcript({{0, 0.0, 1.0}});
  EXPECT_NEAR(olreg::regret(tr, cls), 1.0, kTol);
  EXPECT_NEAR(olreg::alpha_regret(tr, cls, 0.5), 0.5, kTol);
}

TEST(Regret, MatchesBruteForceOnRandomTranscripts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = random_class(rng, 4, 5);
    const auto tr = random_transcript(rng, 10, 5);
    EXPECT_NEAR(olreg::regret(tr, cls), oracle_regret(tr, cls, 0.0), kTol);
    EXPECT_NEAR(olreg::alpha_regret(tr, cls, 0.3), oracle_regret(tr, cls, 0.3), kTol);
  }
}

TEST(Regret, EmptyClassIsAnError) {
  FunctionClass cls(2);
  const auto tr = make_transcript({{0, 0.0, 1.0}});
  EXPECT_THROW(olreg::regret(tr, cls), std::invalid_argument);
  EXPECT_THROW(olreg::cumulative_best_loss(tr, cls), std::invalid_argument);
}

TEST(Regret, CovariateOutsideDomainIsRejected) {
  FunctionClass cls(2, {{0.0, 0.0}});
  const auto tr = make_transcript({{2, 0.0, 1.0}});
  EXPECT_THROW(olreg::regret(tr, cls), olreg::RangeError);
}

TEST(AlphaRegret, AlphaOutsideRangeIsRejected) {
  FunctionClass cls(1, {{0.0}});
  const auto tr = make_transcript({{0, 0.0, 1.0}});
  EXPECT_THROW(olreg::alpha_regret(tr, cls, 1.0), olreg::RangeError);
  EXPECT_THROW(olreg::alpha_regret(tr, cls, -0.01), olreg::RangeError);
}

TEST(RegretProperties, AlphaZeroEqualsRegretExactly) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cls = random_class(rng, 3, 4);
    const auto tr = random_transcript(rng, 15, 4);
    EXPECT_EQ(olreg::alpha_regret(tr, cls, 0.0), olreg::regret(tr, cls));
  }
}

TEST(RegretProperties, InvariantUnderMemberPermutation) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = random_class(rng, 6, 4);
    const auto tr = random_transcript(rng, 12, 4);
    std::vector<std::size_t> perm(cls.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_NEAR(olreg::regret(tr, cls.permuted(perm)), olreg::regret(tr, cls), 1e-12);
  }
}

TEST(RegretProperties, AddingAMemberNeverLowersRegret) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = random_class(rng, 3, 4);
    const auto extra = random_class(rng, 1, 4);
    auto bigger = cls;
    bigger.add("g", {extra.values(0).begin(), extra.values(0).end()});
    const auto tr = random_transcript(rng, 12, 4);
    EXPECT_GE(olreg::regret(tr, bigger), olreg::regret(tr, cls) - 1e-12);
  }
}

TEST(OptimisticConversion, DirectEvaluations) {
  EXPECT_NEAR(olreg::optimistic_conversion(1, 0, 4), 20.0, kTol);
  EXPECT_NEAR(olreg::optimistic_conversion(0, 0, 123.0), 0.0, kTol);
  EXPECT_NEAR(olreg::optimistic_conversion(2, 3, 8), 52.0, kTol);
  EXPECT_THROW(olreg::optimistic_conversion(-1, 0, 0), olreg::RangeError);
  EXPECT_THROW(olreg::optimistic_conversion(0, -1, 0), olreg::RangeError);
  EXPECT_THROW(olreg::optimistic_conversion(0, 0, -1), olreg::RangeError);
}

TEST(CumulativeBestLoss, Evaluations) {
  FunctionClass zero(1, {{0.0}});
  const auto tr = make_transcript({{0, 0.0, 1.0}, {0, 0.0, -1.0}});
  EXPECT_NEAR(olreg::cumulative_best_loss(tr, zero), 2.0, kTol);

  FunctionClass interp(2, {{0.0, 0.0}, {0.4, -0.2}});
  const auto tr2 = make_transcript({{0, 0.0, 0.4}, {1, 0.0, -0.2}});
  EXPECT_NEAR(olreg::cumulative_best_loss(tr2, interp), 0.0, kTol);
  EXPECT_EQ(olreg::best_member(tr2, interp), 1u);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cls = random_class(rng, 5, 3);
    const auto tr3 = random_transcript(rng, 9, 3);
    EXPECT_NEAR(olreg::cumulative_best_loss(tr3, cls),
                olreg::forecaster_loss(tr3) - oracle_regret(tr3, cls, 0.0), kTol);
  }
}

TEST(BestMember, TiesGoToLowestIndex) {
  FunctionClass cls(1, {{0.5}, {-0.5}, {0.5}});
  const auto tr = make_transcript({{0, 0.0, 0.0}});
  EXPECT_EQ(olreg::best_member(tr, cls), 0u);
}

TEST(TranscriptCsv, HeaderAndRows) {
  FunctionClass cls(2, {{0.0, 0.0}, {1.0, -1.0}});
  const auto tr = make_transcript({{0, 0.5, 1.0}, {1, -0.25, -1.0}});
  const auto csv = olreg::transcript_csv(tr, cls);
  EXPECT_EQ(csv,
            "t,x,y_hat,y,loss_forecaster,loss_best_cumulative\n"
            "1,0,0.5,1,0.25,0\n"
            "2,1,-0.25,-1,0.5625,0\n");
}

TEST(TranscriptCsv, TwelveSignificantDigits) {
  FunctionClass cls(1, {{0.0}});
  const auto tr = make_transcript({{0, 1.0 / 3.0, 0.0}});
  const auto csv = olreg::transcript_csv(tr, cls);
  EXPECT_NE(csv.find("0.333333333333,0,0.111111111111,0"), std::string::npos);
}

}  // namespace
