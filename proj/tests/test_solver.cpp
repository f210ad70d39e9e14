#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "mfmdp/errors.hpp"
#include "mfmdp/rng.hpp"
#include "mfmdp/solver.hpp"
#include "mfmdp/transport.hpp"
#include "oracles.hpp"

using namespace mfmdp;

namespace {

Eigen::VectorXd randomSimplex(const RngStream& rng, uint64_t base, int n) {
    Eigen::VectorXd w(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        w(i) = 1e-3 + rng.uniform(base + static_cast<uint64_t>(i));
        s += w(i);
    }
    return w / s;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("simplex grid geometry: node count, covering radius, normalization") {
    auto X3 = FiniteMetricSpace::discrete({"a", "b", "c"});
    auto g = SimplexGrid::build(X3, 6);
    CHECK(g->count() == simplexLatticeSize(3, 6));
    CHECK(g->eta() == doctest::Approx(1.0 * 3 / 12.0));  // diam * |X| / (2n)
    for (long i = 0; i < g->count(); ++i)
        CHECK(g->nodes().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

    auto line = FiniteMetricSpace::embedded({"-2", "0", "3"}, Eigen::Vector3d(-2, 0, 3));
    auto ge = SimplexGrid::build(line, 7);
    CHECK(ge->eta() == doctest::Approx(5.0 * 3 / 14.0));

    CHECK_THROWS_AS(SimplexGrid::build(FiniteMetricSpace::discrete(
                        {"1", "2", "3", "4", "5", "6", "7", "8"}), 40, 1000),
                    ResourceError);
}

TEST_CASE("projection covers every measure within eta and honors the tie rule") {
    RngStream rng(31, 0);
    auto X3 = FiniteMetricSpace::discrete({"a", "b", "c"});
    auto line = FiniteMetricSpace::embedded({"-2", "0", "3"}, Eigen::Vector3d(-2, 0, 3));
    for (auto& sp : {X3, line}) {
        auto g = SimplexGrid::build(sp, 6);
        for (int t = 0; t < 40; ++t) {
            DiscreteMeasure mu(sp, randomSimplex(rng, 1000ULL * t, 3));
            long j = g->projectIndex(mu);
            CHECK(wassersteinCost(mu, g->node(j)) <= g->eta() + 1e-12);
            CHECK(g->projectIndex(mu.weights()) == j);
        }
    }

    // small grids scan exhaustively: equidistant measures go to the lowest index
    auto X2 = FiniteMetricSpace::discrete({"a", "b"});
    auto g2 = SimplexGrid::build(X2, 4);
    Eigen::VectorXd mid(2);
    mid << 0.875, 0.125;  // halfway between nodes (1,0) and (3/4,1/4)
    CHECK(g2->projectIndex(mid) == 0);
    for (long i = 0; i < g2->count(); ++i)
        CHECK(g2->projectIndex(Eigen::VectorXd(g2->nodes().row(i))) == i);
}

TEST_CASE("closed-form projection is still a nearest node on large grids") {
    // 8 states at resolution 12: C(19,7) = 50388 nodes, beyond exhaustive scan
    std::vector<std::string> labels;
    Eigen::VectorXd embed(8);
    for (int i = 0; i < 8; ++i) {
        labels.push_back(std::to_string(i));
        embed(i) = 0.3 * i * i - 1.0;  // uneven spacing
    }
    auto disc = FiniteMetricSpace::discrete(labels);
    auto emb = FiniteMetricSpace::embedded(labels, embed);
    RngStream rng(77, 1);
    for (auto& sp : {disc, emb}) {
        auto g = SimplexGrid::build(sp, 12);
        REQUIRE(g->count() == 50388);
        for (int t = 0; t < 20; ++t) {
            DiscreteMeasure mu(sp, randomSimplex(rng, 4000ULL * t, 8));
            double got = wassersteinCost(mu, g->node(g->projectIndex(mu)));
            double best = std::numeric_limits<double>::infinity();
            for (long i = 0; i < g->count(); ++i)
                best = std::min(best, wassersteinCost(mu, g->node(i)));
            CHECK(got <= best + 1e-9);
            CHECK(got <= g->eta() + 1e-12);
        }
    }
}

TEST_CASE("Bellman tables agree with direct lifted-step evaluation") {
    MeanFieldModel m = MeanFieldModel::fromJson(oracles::randomTableModelJson(3, 3, 2, 2, 2, 0.7));
    auto grid = SimplexGrid::build(m.stateSpace(), 5);
    auto ks = std::make_shared<KernelSearchSpace>(m.stateSpace(), m.actionSpace(), 3, false);
    BellmanTables tables(m, grid, ks, 2);
    CHECK(tables.nodeCount() == grid->count());
    CHECK(tables.kernelCount() == ks->count());
    for (long i = 0; i < grid->count(); ++i)
        for (unsigned long long k = 0; k < ks->count(); ++k) {
            LiftedStep st = liftStep(m, grid->node(i), ks->kernel(k));
            CHECK(tables.rewardAt(i, k) == doctest::Approx(st.reward).epsilon(1e-12));
            for (int e0 = 0; e0 < 2; ++e0)
                CHECK(tables.successorAt(i, k, e0) == grid->projectIndex(st.next[e0]));
        }
}

TEST_CASE("the lifted Bellman operator contracts, is monotone, and shifts constants") {
    MeanFieldModel m = MeanFieldModel::fromJson(oracles::randomTableModelJson(4, 3, 2, 2, 2, 0.7));
    auto grid = SimplexGrid::build(m.stateSpace(), 5);
    auto ks = std::make_shared<KernelSearchSpace>(m.stateSpace(), m.actionSpace(), 3, false);
    BellmanTables tables(m, grid, ks);
    RngStream rng(5, 5);
    const long n = grid->count();
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd W1(n), W2(n);
        for (long i = 0; i < n; ++i) {
            W1(i) = 4.0 * rng.uniform(200ULL * t + i) - 2.0;
            W2(i) = 4.0 * rng.uniform(200ULL * t + 100 + i) - 2.0;
        }
        Eigen::VectorXd T1 = tables.apply(W1), T2 = tables.apply(W2);
        CHECK((T1 - T2).cwiseAbs().maxCoeff() <=
              0.7 * (W1 - W2).cwiseAbs().maxCoeff() + 1e-12);
        Eigen::VectorXd hi = W1.cwiseMax(W2);
        Eigen::VectorXd Thi = tables.apply(hi);
        CHECK((Thi - T1).minCoeff() >= -1e-12);
        CHECK((Thi - T2).minCoeff() >= -1e-12);
        Eigen::VectorXd Tsh = tables.apply(W1 + Eigen::VectorXd::Constant(n, 0.3));
        CHECK((Tsh - T1 - Eigen::VectorXd::Constant(n, 0.7 * 0.3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    // greedy picks reproduce the operator
    std::vector<unsigned long long> pick;
    Eigen::VectorXd V = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd TV = tables.apply(V, &pick);
    CHECK((tables.applyPolicy(pick, V) - TV).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("value iteration: geometric residual decay and the stopping rule") {
    MeanFieldModel m = MeanFieldModel::fromJson(oracles::randomTableModelJson(6, 3, 2, 2, 2, 0.7));
    auto grid = SimplexGrid::build(m.stateSpace(), 5);
    auto ks = std::make_shared<KernelSearchSpace>(m.stateSpace(), m.actionSpace(), 3, false);
    BellmanTables tables(m, grid, ks);
    const double tol = 1e-8;
    IterationTrace tr = valueIteration(tables, tol);
    CHECK(tr.iterations == static_cast<int>(tr.residual_history.size()));
    for (size_t i = 0; i + 1 < tr.residual_history.size(); ++i)
        CHECK(tr.residual_history[i + 1] <= 0.7 * tr.residual_history[i] + 1e-14);
    const double stop = tol * std::min(1.0, (1 - 0.7) / 0.7);
    CHECK(tr.residual <= stop);
    CHECK((tables.apply(tr.values) - tr.values).cwiseAbs().maxCoeff() <= stop + 1e-15);
    // fixed-point error: ||V - V*|| <= residual * beta / (1-beta) <= tol
    Eigen::VectorXd sharper = valueIteration(tables, 1e-12).values;
    CHECK((tr.values - sharper).cwiseAbs().maxCoeff() <= tol + 1e-9);

    CHECK_THROWS_AS(valueIteration(tables, 1e-12, 2), InvariantError);
    IterationTrace pi = policyIteration(tables, tol);
    CHECK((pi.values - sharper).cwiseAbs().maxCoeff() <= tol + 1e-9);
}

TEST_CASE("two-point sign-flip model, feedback only: Diracs are trapped at -1") {
    MeanFieldModel m = MeanFieldModel::fromJson(builtinExampleJson("ex4_1"));
    SolveOptions opt;
    opt.feedback_only = true;
    opt.tol = 1e-6;
    SolveResult r = solve(m, opt);
    CHECK(r.kernels->count() == 4ULL);  // deterministic feedback on 2 states
    CHECK(std::abs(r.value(DiscreteMeasure::dirac(m.stateSpace(), 1)) - (-1.0)) <= 1e-6);
    CHECK(std::abs(r.value(DiscreteMeasure::dirac(m.stateSpace(), 0)) - (-1.0)) <= 1e-6);
    // the fair coin is a reward-free fixed point, reachable from itself
    CHECK(std::abs(r.value(DiscreteMeasure::uniform(m.stateSpace()))) < 1e-12);
    CHECK(r.policy.deterministic());
}

TEST_CASE("two-point model with a randomizer: scrambling to the coin is optimal") {
    MeanFieldModel m = MeanFieldModel::fromJson(builtinExampleJson("ex4_3"));
    SolveOptions opt;
    opt.tol = 1e-6;
    SolveResult r = solve(m, opt);
    DiscreteMeasure d1 = DiscreteMeasure::dirac(m.stateSpace(), 1);
    CHECK(r.value(d1) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(std::abs(r.value(DiscreteMeasure::uniform(m.stateSpace()))) < 1e-12);

    long node = r.policy.nodeOf(d1);
    const Eigen::MatrixXd& K = r.policy.kernelAt(node);
    CHECK(K(1, 0) == doctest::Approx(0.5));  // fair randomization where the mass sits
    CHECK(K(1, 1) == doctest::Approx(0.5));
    CHECK(K(0, 0) == doctest::Approx(1.0));  // zero-mass row: tie kept the lowest option
    CHECK_FALSE(r.policy.deterministic());
    // quantile sampling convention on the fair row
    CHECK(r.policy.sampleAction(node, 1, 0.0) == 0);
    CHECK(r.policy.sampleAction(node, 1, 0.5) == 0);
    CHECK(r.policy.sampleAction(node, 1, 0.500001) == 1);
    CHECK(r.policy.sampleAction(node, 1, 0.999999) == 1);

    // value and policy methods land within the cross-solver tolerance
    SolveOptions fancy = opt;
    fancy.method = "policy";
    SolveResult rp = solve(m, fancy);
    CHECK((rp.value.values - r.value.values).cwiseAbs().maxCoeff() <= 2 * opt.tol);

    // report algebra
    const SolveReport& rep = r.report;
    CHECK(rep.error_bound == doctest::Approx(rep.grid_error + rep.residual_error));
    CHECK(rep.grid_error ==
          doctest::Approx(rep.k_star * std::pow(rep.eta, rep.gamma) / (1 - 0.5)));
    CHECK(rep.residual_error == doctest::Approx(rep.residual * 0.5 / (1 - 0.5)));
    CHECK(rep.policy_epsilon ==
          doctest::Approx(rep.residual + rep.k_star * std::pow(rep.eta, rep.gamma)));
    CHECK(rep.policy_gain_bound == doctest::Approx(rep.policy_epsilon / (1 - 0.5)));
    CHECK(rep.eta == doctest::Approx(1.0 * 2 / (2.0 * opt.n_eta)));  // discrete diameter 1
    CHECK(rep.residual <= rep.tolerance);
}

TEST_CASE("constant rewards solve to c/(1-beta) on every node") {
    nlohmann::json doc = oracles::randomTableModelJson(8, 3, 2, 2, 2, 0.6);
    for (auto& row : doc["reward"]["values"])
        for (auto& v : row) v = 0.3;
    MeanFieldModel m = MeanFieldModel::fromJson(doc);
    SolveOptions opt;
    opt.n_eta = 4;
    opt.n_actions_grid = 2;
    opt.tol = 1e-10;
    SolveResult r = solve(m, opt);
    for (long i = 0; i < r.grid->count(); ++i)
        CHECK(r.value.at(i) == doctest::Approx(0.3 / (1 - 0.6)).epsilon(1e-9));
}

TEST_CASE("one-step lookahead over the kernel space reproduces the fixed point") {
    MeanFieldModel m = MeanFieldModel::fromJson(builtinExampleJson("ex4_3"));
    SolveOptions opt;
    opt.tol = 1e-6;
    SolveResult r = solve(m, opt);
    for (long i = 0; i < r.grid->count(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (unsigned long long k = 0; k < r.kernels->count(); ++k)
            best = std::max(best, qValue(m, *r.grid, r.value.values, r.grid->node(i),
                                         r.kernels->kernel(k)));
        CHECK(std::abs(best - r.value.at(i)) <= opt.tol + 1e-12);
    }
}

TEST_CASE("solver artifacts round-trip bitwise and guard their model") {
    MeanFieldModel m = MeanFieldModel::fromJson(builtinExampleJson("ex4_3"));
    SolveOptions opt;
    opt.tol = 1e-6;
    SolveResult r = solve(m, opt);
    const std::string path = "/tmp/mfmdp_test_artifact.json";
    saveArtifact(path, m, r, opt);
    LoadedArtifact back = loadArtifact(path, m);
    CHECK((back.value.values - r.value.values).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.policy.kernels.size() == r.policy.kernels.size());
    for (size_t i = 0; i < back.policy.kernels.size(); ++i)
        CHECK((back.policy.kernels[i] - r.policy.kernels[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.policy.epsilon == r.policy.epsilon);
    CHECK(back.policy.gain_bound == r.policy.gain_bound);
    CHECK(back.options.n_eta == opt.n_eta);
    CHECK(back.report.residual == r.report.residual);

    MeanFieldModel other = MeanFieldModel::fromJson(builtinExampleJson("ex4_1"));
    CHECK_THROWS_AS(loadArtifact(path, other), ModelError);

    const std::string bogus = "/tmp/mfmdp_test_bogus.json";
    {
        std::FILE* f = std::fopen(bogus.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("{\"format\": \"mystery\"}\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(loadArtifact(bogus, m), ModelError);
    CHECK_THROWS_AS(loadArtifact("/nonexistent/artifact.json", m), UsageError);
}

TEST_CASE("solve rejects unusable options") {
    MeanFieldModel m = MeanFieldModel::fromJson(builtinExampleJson("ex4_1"));
    SolveOptions opt;
    opt.tol = 0.0;
    CHECK_THROWS_AS(solve(m, opt), UsageError);
    opt.tol = 1e-6;
    opt.method = "banana";
    CHECK_THROWS_AS(solve(m, opt), UsageError);
    opt.method = "value";
    opt.n_eta = 0;
    CHECK_THROWS_AS(solve(m, opt), UsageError);
}

TEST_CASE("infinite-horizon values match a deep finite-horizon exhaustive search") {
    MeanFieldModel m = MeanFieldModel::fromJson(oracles::randomTableModelJson(21, 2, 2, 2, 2, 0.5));
    SolveOptions opt;
    opt.n_eta = 6;
    opt.n_actions_grid = 4;
    opt.tol = 1e-6;
    SolveResult r = solve(m, opt);
    oracles::BruteForceGridSearch brute(m, *r.grid, *r.kernels, 8);
    const double horizon_gap = std::pow(0.5, 8) * m.rewardBound() / (1 - 0.5);
    for (long i = 0; i < r.grid->count(); ++i)
        CHECK(std::abs(r.value.at(i) - brute.value(0, i)) <= horizon_gap + opt.tol);
}

}  // TEST_SUITE
