#ifndef MFMDP_TRANSPORT_HPP
#define MFMDP_TRANSPORT_HPP

#include <Eigen/Dense>
#include <memory>

#include "mfmdp/spaces.hpp"

namespace mfmdp {

// Optimal plan plus an LP optimality certificate: dual_u/dual_v are feasible
// potentials (dual_u(i) + dual_v(j) <= dist(i,j)) whose objective
// sum(mu*dual_u) + sum(nu*dual_v) equals `cost` by complementary slackness.
struct TransportPlan {
    Eigen::MatrixXd plan;
    double cost = 0.0;
    Eigen::VectorXd dual_u, dual_v;
};

// Exact solution of the transportation LP between two measures on the same
// space, cost = the space metric. Successive-shortest-path min-cost flow on the
// dense bipartite graph with Dijkstra over reduced costs.
TransportPlan wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Distance only, through the cheapest exact route: closed form when the metric
// is discrete (W = half the L1 weight distance), sorted-CDF integration when the
// metric is induced by the embedding, full LP otherwise.
double wassersteinCost(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Exact integral of |F_mu^{-1}(u) - F_nu^{-1}(u)| over u in [0,1] by merging the
// CDF breakpoints. Requires the metric to equal |embed(x)-embed(y)|.
double wasserstein1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// The measurable inverse-CDF coupling evaluated pointwise: the point
// F_{mu'}^{-1}(F_mu(x) - u * mu({x})) in embedding order. u in [0,1]; both ends
// are valid (u = 1 resolves boundary ties upward so the identity coupling holds
// on the support for every u).
int couplingZeta(const DiscreteMeasure& mu, const DiscreteMeasure& mu_prime, int x, double u);

// Joint law of (xi, zeta(mu, mu_prime, xi, U)) with xi ~ mu and U uniform,
// computed exactly as interval overlaps of the two CDF partitions of [0,1].
// Entry (i,j) in source-index x target-index order; marginals are mu, mu_prime.
Eigen::MatrixXd exactCoupledLawMatrix(const DiscreteMeasure& mu, const DiscreteMeasure& mu_prime);

// Same joint law packaged as a measure on the product space X x X.
std::pair<ProductSpace, DiscreteMeasure> exactCoupledLaw(const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& mu_prime);

// Forces the state marginal of a joint (state, action) law to `mu` by coupling
// the current marginal to mu through zeta and dragging the action along:
// law of (zeta(pr1 a, mu, xi', U), alpha) with (xi', alpha) ~ a. First marginal
// of the result is exactly mu; a is returned unchanged when pr1 a = mu.
DiscreteMeasure couplingProjection(const DiscreteMeasure& mu, const DiscreteMeasure& a,
                                   const ProductSpace& ps);

}  // namespace mfmdp

#endif
