#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>

#include "mfmdp/errors.hpp"
#include "mfmdp/simulator.hpp"
#include "mfmdp/solver.hpp"
#include "oracles.hpp"

using namespace mfmdp;

namespace {

MeanFieldModel twoPoint(const char* name) {
    return MeanFieldModel::fromJson(builtinExampleJson(name));
}

RunConfig smallCfg() {
    RunConfig cfg;
    cfg.N = 50;
    cfg.replications = 4;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("the discount tail rule lands on the documented horizon") {
    MeanFieldModel m = twoPoint("ex4_1");
    // beta = 1/2, bound 1: first T with 2 * 0.5^T < 1e-4 is 15
    CHECK(horizonForTail(m, 1e-3) == 15);
    CHECK(tailBound(m, 15) == doctest::Approx(std::pow(0.5, 15) / 0.5));
    CHECK(tailBound(m, 14) >= 1e-4);
    CHECK(horizonForTail(m, 1e-1) == 8);
}

TEST_CASE("constant play on the sign-flip model: exact gain, zero noise, CRN prefixes") {
    MeanFieldModel m = twoPoint("ex4_1");
    SimPolicy pol = SimPolicy::fromFeedback(constantPolicy(m, 1));  // always play +1
    RunConfig cfg = smallCfg();
    cfg.keep_trajectories = true;
    cfg.keep_law_path = true;
    NAgentResult r = simulateNAgent(m, pol, cfg);
    CHECK(r.T == 15);
    // delta_1 is stationary under a = +1; every step pays -1/2
    const double exact = -(1.0 - std::pow(0.5, r.T));
    for (double g : r.rep_gains) CHECK(g == exact);
    CHECK(r.mean_gain == exact);
    CHECK(r.ci95 == 0.0);
    for (double w : r.rep_wdist) CHECK(w == 0.0);  // all agents identical
    REQUIRE(static_cast<int>(r.trajectories.size()) == cfg.N);
    for (const auto& tr : r.trajectories) {
        REQUIRE(static_cast<int>(tr.states.size()) == r.T);
        REQUIRE(static_cast<int>(tr.actions.size()) == r.T);
        REQUIRE(static_cast<int>(tr.rewards.size()) == r.T);
        for (int t = 0; t < r.T; ++t) {
            CHECK(tr.states[t] == 1);
            CHECK(tr.actions[t] == 1);
            CHECK(tr.rewards[t] == -0.5);
        }
    }
    REQUIRE(static_cast<int>(r.empirical_joint_path.size()) == r.T);
    CHECK((r.empirical_joint_path[3] - r.exact_joint_path[3]).cwiseAbs().maxCoeff() == 0.0);

    // a bigger system contains the smaller one (common random numbers)
    RunConfig big = cfg;
    big.N = 120;
    NAgentResult rb = simulateNAgent(m, pol, big);
    for (size_t i = 0; i < r.rep_gains.size(); ++i) CHECK(rb.rep_gains[i] == r.rep_gains[i]);

    // determinism across runs and across thread counts
    NAgentResult again = simulateNAgent(m, pol, cfg);
    CHECK(again.mean_gain == r.mean_gain);
    RunConfig threaded = cfg;
    threaded.threads = 2;
    NAgentResult rt = simulateNAgent(m, pol, threaded);
    for (size_t i = 0; i < r.rep_gains.size(); ++i) CHECK(rt.rep_gains[i] == r.rep_gains[i]);
    for (size_t i = 0; i < r.rep_wdist.size(); ++i) CHECK(rt.rep_wdist[i] == r.rep_wdist[i]);
}

TEST_CASE("limit simulation of the solved two-point policy is exact") {
    MeanFieldModel m = twoPoint("ex4_3");
    SolveOptions opt;
    opt.tol = 1e-6;
    SolveResult sol = solve(m, opt);
    SimPolicy pol = SimPolicy::fromFeedback(sol.policy);
    RunConfig cfg;
    cfg.tol = 1e-3;
    cfg.keep_law_path = true;
    MkvResult mkv = simulateMkv(m, pol, cfg);
    CHECK(mkv.exact);
    CHECK(mkv.T == 15);
    CHECK(mkv.gain == doctest::Approx(-0.5).epsilon(1e-9));  // -1/2 then zero forever
    REQUIRE(static_cast<int>(mkv.law_path.size()) == mkv.T);
    CHECK(mkv.law_path[0].weights()(1) == doctest::Approx(1.0));           // delta_1
    CHECK(mkv.law_path[1].weights()(0) == doctest::Approx(0.5));           // fair coin
    CHECK(mkv.law_path[2].weights()(0) == doctest::Approx(0.5));
}

TEST_CASE("the N-agent empirical joint law tracks the limit law") {
    MeanFieldModel m = twoPoint("ex4_3");
    SolveOptions opt;
    opt.tol = 1e-6;
    SimPolicy pol = SimPolicy::fromFeedback(solve(m, opt).policy);
    RunConfig cfg;
    cfg.N = 100000;
    cfg.replications = 1;
    cfg.seed = 3;
    cfg.keep_law_path = true;
    NAgentResult r = simulateNAgent(m, pol, cfg);
    for (int t = 0; t < 3; ++t) {
        double tv = 0.5 * (r.empirical_joint_path[t] - r.exact_joint_path[t]).cwiseAbs().sum();
        CHECK(tv < 0.01);
    }
    // and the gain is near the limit value
    CHECK(std::abs(r.mean_gain - (-0.5)) < 0.02);
}

TEST_CASE("randomized feedback needs the initial randomizer") {
    MeanFieldModel trivial = twoPoint("ex4_1");
    RandomizedFeedbackPolicy randomized = constantPolicy(trivial, 0);
    for (auto& K : randomized.kernels) K.setConstant(0.5);
    CHECK_THROWS_AS(simulateNAgent(trivial, SimPolicy::fromFeedback(randomized), smallCfg()),
                    ModelError);
    CHECK_THROWS_AS(simulateMkv(trivial, SimPolicy::fromFeedback(randomized), smallCfg()),
                    ModelError);
    // the same policy is fine where the initial information is rich
    MeanFieldModel rich = twoPoint("ex4_3");
    CHECK_NOTHROW(simulateMkv(rich, SimPolicy::fromFeedback(randomized), smallCfg()));
}

TEST_CASE("script validation: copy kinds, labels, and config limits") {
    MeanFieldModel m = twoPoint("ex4_2");
    OpenLoopScript s = builtinScript(m, "ex4_2_optimal");
    REQUIRE(s.steps.size() >= 2);
    CHECK(s.steps[0].kind == ScriptStep::Kind::Const);
    CHECK(s.steps[1].kind == ScriptStep::Kind::CopyNoise);
    CHECK_THROWS_AS(builtinScript(m, "waltz"), UsageError);

    OpenLoopScript copy_first;
    copy_first.steps = {ScriptStep{ScriptStep::Kind::CopyNoise, 0}};
    CHECK_THROWS_AS(simulateMkv(m, SimPolicy::fromScript(copy_first), smallCfg()), UsageError);

    OpenLoopScript bad_action;
    bad_action.steps = {ScriptStep{ScriptStep::Kind::Const, 9}};
    CHECK_THROWS_AS(simulateMkv(m, SimPolicy::fromScript(bad_action), smallCfg()), UsageError);

    // noise labels that are not action labels cannot be copied
    MeanFieldModel table = MeanFieldModel::fromJson(oracles::randomTableModelJson(2, 2, 2, 2, 1, 0.5));
    OpenLoopScript copy_later;
    copy_later.steps = {ScriptStep{ScriptStep::Kind::Const, 0},
                        ScriptStep{ScriptStep::Kind::CopyNoise, 0}};
    CHECK_THROWS_AS(simulateMkv(table, SimPolicy::fromScript(copy_later), smallCfg()), UsageError);

    SimPolicy ok = SimPolicy::fromFeedback(constantPolicy(m, 0));
    RunConfig bad = smallCfg();
    bad.N = 0;
    CHECK_THROWS_AS(simulateNAgent(m, ok, bad), UsageError);
    bad = smallCfg();
    bad.replications = 0;
    CHECK_THROWS_AS(simulateNAgent(m, ok, bad), UsageError);
    bad = smallCfg();
    bad.tol = 0.0;
    CHECK_THROWS_AS(simulateNAgent(m, ok, bad), UsageError);
}

TEST_CASE("log-log fits recover exact power laws and skip nonpositive points") {
    std::vector<double> xs = {10, 100, 1000, 10000, 0.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(x > 0 ? 3.5 * std::pow(x, -0.62) : 0.0);
    FitResult fit = fitLogLog(xs, ys);
    CHECK(fit.slope == doctest::Approx(-0.62).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.5)).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fitLogLog({5.0}, {1.0}).slope == 0.0);  // underdetermined: flat default
}

TEST_CASE("sampling rate of the empirical measure matches the binomial law") {
    auto X = FiniteMetricSpace::discrete({"h", "t"});
    DiscreteMeasure coin = DiscreteMeasure::uniform(X);
    RateReport rep = empiricalMeasureRate(coin, {64, 256}, 200, 11);
    REQUIRE(rep.points.size() == 2);
    for (size_t i = 0; i < rep.points.size(); ++i) {
        // W(empirical, coin) = |S/N - 1/2| with S binomial
        double expect = oracles::binomialMad(rep.points[i].N, 0.5);
        CHECK(std::abs(rep.points[i].mean_w - expect) <= 0.2 * expect);
    }
    CHECK(rep.fit.slope < -0.3);
    CHECK(rep.fit.slope > -0.7);

    DiscreteMeasure point = DiscreteMeasure::dirac(X, 0);
    RateReport flat = empiricalMeasureRate(point, {8, 32}, 40, 1);
    for (const auto& p : flat.points) CHECK(p.mean_w == 0.0);
    CHECK(flat.fit.slope == 0.0);  // all-zero distances: degenerate fit
    CHECK(flat.fit.r2 == 1.0);

    CHECK_THROWS_AS(empiricalMeasureRate(coin, {64, 32}, 40, 1), UsageError);
    CHECK_THROWS_AS(empiricalMeasureRate(coin, {64, 256}, 10, 1), UsageError);
    CHECK_THROWS_AS(empiricalMeasureRate(coin, {}, 40, 1), UsageError);
}

TEST_CASE("propagation-of-chaos gaps shrink as the system grows") {
    MeanFieldModel m = twoPoint("ex4_3");
    SolveOptions opt;
    opt.tol = 1e-6;
    SimPolicy pol = SimPolicy::fromFeedback(solve(m, opt).policy);
    RunConfig cfg;
    cfg.replications = 100;
    cfg.seed = 20;
    cfg.tol = 1e-3;
    ChaosReport rep = chaosExperiment(m, pol, {100, 1000, 10000}, cfg);
    CHECK(rep.T == 15);
    CHECK(rep.v_pi == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(rep.v_pi_exact);
    CHECK(rep.tail_bound == doctest::Approx(tailBound(m, rep.T)));
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.points[0].gap > rep.points[1].gap);
    CHECK(rep.points[1].gap > rep.points[2].gap);
    CHECK(rep.points[2].gap < 0.05);
    CHECK(rep.gap_fit.slope < -0.3);
    for (const auto& p : rep.points) {
        CHECK(p.gap == std::abs(p.mean_gain - rep.v_pi));
        CHECK(p.mean_wdist > 0.0);
        CHECK(static_cast<int>(p.rep_gains.size()) == cfg.replications);
    }
    CHECK_THROWS_AS(chaosExperiment(m, pol, {}, cfg), UsageError);
}

}  // TEST_SUITE
