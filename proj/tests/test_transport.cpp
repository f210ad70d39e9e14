#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mfmdp/rng.hpp"
#include "mfmdp/spaces.hpp"
#include "mfmdp/transport.hpp"
#include "oracles.hpp"

using namespace mfmdp;

namespace {

SpacePtr line5() {
    Eigen::VectorXd e(5);
    e << -2.0, -0.5, 0.0, 1.0, 3.0;
    return FiniteMetricSpace::embedded({"p0", "p1", "p2", "p3", "p4"}, e);
}

SpacePtr crooked4() {
    // a valid metric that is neither discrete nor an embedding metric
    Eigen::MatrixXd d(4, 4);
    d << 0, 1, 2, 2,  //
        1, 0, 1, 2,   //
        2, 1, 0, 1,   //
        2, 2, 1, 0;
    return std::make_shared<const FiniteMetricSpace>(
        std::vector<std::string>{"a", "b", "c", "d"}, d);
}

DiscreteMeasure randomMeasure(const SpacePtr& sp, RngStream& s, uint64_t& ctr) {
    Eigen::VectorXd w(sp->size());
    double tot = 0.0;
    for (int i = 0; i < sp->size(); ++i) tot += (w(i) = 0.01 + s.uniform(ctr++));
    return DiscreteMeasure(sp, w / tot);
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("plan is feasible and certified optimal") {
    auto sp = crooked4();
    RngStream s(11, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto mu = randomMeasure(sp, s, ctr);
        auto nu = randomMeasure(sp, s, ctr);
        TransportPlan tp = wasserstein(mu, nu);
        CHECK(tp.cost >= -1e-12);
        CHECK((tp.plan.array() >= -1e-12).all());
        CHECK((tp.plan.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((tp.plan.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff() < 1e-9);
        // dual feasibility + strong duality certificate
        for (int i = 0; i < sp->size(); ++i)
            for (int j = 0; j < sp->size(); ++j)
                CHECK(tp.dual_u(i) + tp.dual_v(j) <= sp->dist(i, j) + 1e-9);
        double dual_obj = mu.weights().dot(tp.dual_u) + nu.weights().dot(tp.dual_v);
        CHECK(std::abs(dual_obj - tp.cost) < 1e-9);
        // plan cost equals reported cost
        double plan_cost = 0.0;
        for (int i = 0; i < sp->size(); ++i)
            for (int j = 0; j < sp->size(); ++j) plan_cost += tp.plan(i, j) * sp->dist(i, j);
        CHECK(std::abs(plan_cost - tp.cost) < 1e-9);
    }
}

TEST_CASE("distance axioms on random triples") {
    auto sp = crooked4();
    RngStream s(12, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto a = randomMeasure(sp, s, ctr);
        auto b = randomMeasure(sp, s, ctr);
        auto c = randomMeasure(sp, s, ctr);
        double ab = wassersteinCost(a, b), ba = wassersteinCost(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
        CHECK(wassersteinCost(a, a) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ab <= wassersteinCost(a, c) + wassersteinCost(c, b) + 1e-9);
    }
}

TEST_CASE("discrete metric reduces to half the L1 distance") {
    auto sp = FiniteMetricSpace::discrete({"a", "b", "c"});
    RngStream s(13, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto mu = randomMeasure(sp, s, ctr);
        auto nu = randomMeasure(sp, s, ctr);
        double expect = 0.5 * (mu.weights() - nu.weights()).lpNorm<1>();
        CHECK(wassersteinCost(mu, nu) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(wasserstein(mu, nu).cost == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("embedded metric: CDF integration agrees with the LP and the oracle") {
    auto sp = line5();
    RngStream s(14, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto mu = randomMeasure(sp, s, ctr);
        auto nu = randomMeasure(sp, s, ctr);
        double fast = wassersteinCost(mu, nu);
        CHECK(fast == doctest::Approx(wasserstein1d(mu, nu)).epsilon(1e-12));
        CHECK(fast == doctest::Approx(oracles::transport1d(mu, nu)).epsilon(1e-12));
        CHECK(fast == doctest::Approx(wasserstein(mu, nu).cost).epsilon(1e-9));
    }
}

TEST_CASE("Kantorovich-Rubinstein bound for random Lipschitz functions") {
    auto sp = crooked4();
    RngStream s(15, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    auto mu = randomMeasure(sp, s, ctr);
    auto nu = randomMeasure(sp, s, ctr);
    double w = wassersteinCost(mu, nu);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd raw(sp->size());
        for (int i = 0; i < sp->size(); ++i) raw(i) = 4.0 * s.uniform(ctr++) - 2.0;
        // McShane regularization makes phi exactly 1-Lipschitz
        Eigen::VectorXd phi(sp->size());
        for (int i = 0; i < sp->size(); ++i) {
            double v = raw(i);
            for (int j = 0; j < sp->size(); ++j) v = std::min(v, raw(j) + sp->dist(i, j));
            phi(i) = v;
        }
        double gap = std::abs(phi.dot(mu.weights()) - phi.dot(nu.weights()));
        CHECK(gap <= w + 1e-9);
    }
}

TEST_CASE("zeta is the identity coupling on the support") {
    auto sp = line5();
    DiscreteMeasure mu(sp, (Eigen::VectorXd(5) << 0.3, 0.0, 0.25, 0.45, 0.0).finished());
    for (int x = 0; x < 5; ++x) {
        if (mu.w(x) == 0.0) continue;
        for (double u : {0.0, 0.17, 0.5, 0.99, 1.0}) CHECK(couplingZeta(mu, mu, x, u) == x);
    }
}

TEST_CASE("coupled law: marginals, analytic oracle, Monte Carlo, optimal cost") {
    auto sp = line5();
    RngStream s(16, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 25; ++trial) {
        auto mu = randomMeasure(sp, s, ctr);
        auto nu = randomMeasure(sp, s, ctr);
        Eigen::MatrixXd law = exactCoupledLawMatrix(mu, nu);
        CHECK((law.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((law.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((law - oracles::zetaLawByIntegration(mu, nu)).cwiseAbs().maxCoeff() < 1e-12);
        // the inverse-CDF coupling is W-optimal under the embedding metric
        double expected_dist = 0.0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) expected_dist += law(i, j) * sp->dist(i, j);
        CHECK(expected_dist == doctest::Approx(wassersteinCost(mu, nu)).epsilon(1e-9));
    }
    auto mu = randomMeasure(sp, s, ctr);
    auto nu = randomMeasure(sp, s, ctr);
    Eigen::MatrixXd mc = oracles::zetaLawByMc(mu, nu, 1'000'000, 99);
    double tv = 0.5 * (mc - exactCoupledLawMatrix(mu, nu)).cwiseAbs().sum();
    CHECK(tv < 0.005);
}

TEST_CASE("coupled law as a product-space measure") {
    auto sp = line5();
    DiscreteMeasure mu(sp, (Eigen::VectorXd(5) << 0.2, 0.2, 0.2, 0.2, 0.2).finished());
    DiscreteMeasure nu(sp, (Eigen::VectorXd(5) << 0.0, 0.5, 0.5, 0.0, 0.0).finished());
    auto [ps, joint] = exactCoupledLaw(mu, nu);
    Eigen::MatrixXd law = exactCoupledLawMatrix(mu, nu);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(joint.w(ps.index(i, j)) == doctest::Approx(law(i, j)));
}

TEST_CASE("coupling projection fixes the state marginal and only that") {
    auto xs = line5();
    auto as = FiniteMetricSpace::discrete({"l", "r", "m"});
    ProductSpace ps(xs, as);
    RngStream s(17, streamId(StreamPurpose::Generic, 0, 0));
    uint64_t ctr = 0;
    for (int trial = 0; trial < 25; ++trial) {
        auto mu = randomMeasure(xs, s, ctr);
        auto a = randomMeasure(ps.joint(), s, ctr);
        DiscreteMeasure projected = couplingProjection(mu, a, ps);
        CHECK((marginalLeft(projected, ps).weights() - mu.weights()).cwiseAbs().maxCoeff() <
              1e-12);
        // idempotent: re-projecting changes nothing
        DiscreteMeasure again = couplingProjection(mu, projected, ps);
        CHECK((again.weights() - projected.weights()).cwiseAbs().maxCoeff() < 1e-12);
    }
    // matching marginal: the joint law passes through unchanged
    auto mu = randomMeasure(xs, s, ctr);
    auto a = randomMeasure(ps.joint(), s, ctr);
    DiscreteMeasure aligned = couplingProjection(mu, a, ps);
    DiscreteMeasure same = couplingProjection(marginalLeft(aligned, ps), aligned, ps);
    CHECK((same.weights() - aligned.weights()).cwiseAbs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
