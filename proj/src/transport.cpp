#include "mfmdp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mfmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void checkSameSpace(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.space() != nu.space()) throw ModelError("transport: measures on different spaces");
}

}  // namespace

TransportPlan wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    checkSameSpace(mu, nu);
    const FiniteMetricSpace& sp = *mu.space();
    const int n = sp.size();

    // support compression
    std::vector<int> src, dst;
    for (int i = 0; i < n; ++i)
        if (mu.w(i) > 0.0) src.push_back(i);
    for (int j = 0; j < n; ++j)
        if (nu.w(j) > 0.0) dst.push_back(j);
    const int ns = static_cast<int>(src.size()), nd = static_cast<int>(dst.size());

    // node layout: 0 = source, 1..ns = left, ns+1..ns+nd = right, ns+nd+1 = sink
    const int S = 0, T = ns + nd + 1, V = ns + nd + 2;
    std::vector<double> supply(ns), demand(nd);
    for (int i = 0; i < ns; ++i) supply[i] = mu.w(src[i]);
    for (int j = 0; j < nd; ++j) demand[j] = nu.w(dst[j]);

    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(ns, nd);
    std::vector<double> used_supply(ns, 0.0), used_demand(nd, 0.0);
    std::vector<double> pi(V, 0.0);  // potentials; all costs >= 0 so 0 is valid

    auto cost = [&](int i, int j) { return sp.dist(src[i], dst[j]); };

    double remaining = 1.0;
    // each augmentation saturates a supply or a demand node
    for (int round = 0; round < ns + nd + 2 && remaining > 1e-15; ++round) {
        std::vector<double> d(V, kInf);
        std::vector<int> prev(V, -1);
        std::vector<char> done(V, 0);
        d[S] = 0.0;
        for (int iter = 0; iter < V; ++iter) {
            int u = -1;
            double best = kInf;
            for (int v = 0; v < V; ++v)
                if (!done[v] && d[v] < best) {
                    best = d[v];
                    u = v;
                }
            if (u < 0) break;
            done[u] = 1;
            if (u == S) {
                for (int i = 0; i < ns; ++i)
                    if (supply[i] - used_supply[i] > 1e-15) {
                        double rc = 0.0 + pi[S] - pi[1 + i];
                        if (rc < 0) rc = 0;  // float guard
                        if (d[S] + rc < d[1 + i]) {
                            d[1 + i] = d[S] + rc;
                            prev[1 + i] = S;
                        }
                    }
            } else if (u >= 1 && u <= ns) {
                const int i = u - 1;
                for (int j = 0; j < nd; ++j) {
                    double rc = cost(i, j) + pi[u] - pi[1 + ns + j];
                    invariant(rc > -1e-9, "transport: negative reduced cost");
                    if (rc < 0) rc = 0;
                    if (d[u] + rc < d[1 + ns + j]) {
                        d[1 + ns + j] = d[u] + rc;
                        prev[1 + ns + j] = u;
                    }
                }
            } else if (u >= 1 + ns && u < T) {
                const int j = u - 1 - ns;
                if (demand[j] - used_demand[j] > 1e-15) {
                    double rc = 0.0 + pi[u] - pi[T];
                    if (rc < 0) rc = 0;
                    if (d[u] + rc < d[T]) {
                        d[T] = d[u] + rc;
                        prev[T] = u;
                    }
                }
                for (int i = 0; i < ns; ++i)
                    if (flow(i, j) > 1e-18) {
                        double rc = -cost(i, j) + pi[u] - pi[1 + i];
                        invariant(rc > -1e-9, "transport: negative reduced cost (reverse)");
                        if (rc < 0) rc = 0;
                        if (d[u] + rc < d[1 + i]) {
                            d[1 + i] = d[u] + rc;
                            prev[1 + i] = u;
                        }
                    }
            }
        }
        invariant(d[T] < kInf, "transport: sink unreachable with mass left to route");

        for (int v = 0; v < V; ++v) pi[v] += std::min(d[v], d[T]);

        // bottleneck along the path
        double push = remaining;
        for (int v = T; v != S; v = prev[v]) {
            const int u = prev[v];
            if (u == S) {
                push = std::min(push, supply[v - 1] - used_supply[v - 1]);
            } else if (v == T) {
                push = std::min(push, demand[u - 1 - ns] - used_demand[u - 1 - ns]);
            } else if (u >= 1 && u <= ns) {
                // forward arc, unbounded
            } else {
                push = std::min(push, flow(v - 1, u - 1 - ns));  // reverse arc
            }
        }
        for (int v = T; v != S; v = prev[v]) {
            const int u = prev[v];
            if (u == S) {
                used_supply[v - 1] += push;
            } else if (v == T) {
                used_demand[u - 1 - ns] += push;
            } else if (u >= 1 && u <= ns) {
                flow(u - 1, v - 1 - ns) += push;
            } else {
                flow(v - 1, u - 1 - ns) -= push;
            }
        }
        remaining -= push;
    }
    invariant(remaining <= 1e-12, "transport: failed to route all mass");

    TransportPlan out;
    out.plan = Eigen::MatrixXd::Zero(n, n);
    out.cost = 0.0;
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nd; ++j)
            if (flow(i, j) > 0.0) {
                out.plan(src[i], dst[j]) = flow(i, j);
                out.cost += flow(i, j) * cost(i, j);
            }

    // duals: u_i = -pi(left i), v_j = pi(right j). Feasible because forward
    // residual arcs keep cost(i,j) + pi_i - pi_j >= 0; tight on the support.
    out.dual_u = Eigen::VectorXd::Zero(n);
    out.dual_v = Eigen::VectorXd::Zero(n);
    std::vector<double> ui(ns), vj(nd);
    for (int i = 0; i < ns; ++i) ui[i] = -pi[1 + i];
    for (int j = 0; j < nd; ++j) vj[j] = pi[1 + ns + j];
    for (int j = 0; j < nd; ++j) out.dual_v(dst[j]) = vj[j];
    for (int i = 0; i < ns; ++i) out.dual_u(src[i]) = ui[i];
    // off-support rows get the largest feasible value (keeps the full vectors feasible)
    for (int i = 0; i < n; ++i)
        if (mu.w(i) == 0.0) {
            double best = kInf;
            for (int j = 0; j < nd; ++j) best = std::min(best, sp.dist(i, dst[j]) - vj[j]);
            out.dual_u(i) = (nd > 0) ? best : 0.0;
        }
    for (int j = 0; j < n; ++j)
        if (nu.w(j) == 0.0) {
            double best = kInf;
            for (int i = 0; i < ns; ++i) best = std::min(best, sp.dist(src[i], j) - ui[i]);
            out.dual_v(j) = (ns > 0) ? best : 0.0;
        }

    const double dual_obj = mu.weights().dot(out.dual_u) + nu.weights().dot(out.dual_v);
    invariant(std::abs(dual_obj - out.cost) <= 1e-9,
              "transport: LP duality gap exceeds certificate tolerance");
    return out;
}

double wassersteinCost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    checkSameSpace(mu, nu);
    const FiniteMetricSpace& sp = *mu.space();
    if (sp.isDiscreteMetric()) return 0.5 * (mu.weights() - nu.weights()).lpNorm<1>();
    if (sp.hasEmbed() && sp.isEmbeddingMetric()) return wasserstein1d(mu, nu);
    return wasserstein(mu, nu).cost;
}

double wasserstein1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    checkSameSpace(mu, nu);
    const FiniteMetricSpace& sp = *mu.space();
    if (!sp.hasEmbed()) throw ModelError("wasserstein1d: space lacks an embedding");
    if (!sp.isEmbeddingMetric())
        throw ModelError("wasserstein1d: metric is not induced by the embedding");
    const auto& order = sp.embedOrder();
    double total = 0.0, cum = 0.0;
    for (size_t k = 0; k + 1 < order.size(); ++k) {
        cum += mu.w(order[k]) - nu.w(order[k]);
        total += std::abs(cum) * (sp.embed(order[k + 1]) - sp.embed(order[k]));
    }
    return total;
}

int couplingZeta(const DiscreteMeasure& mu, const DiscreteMeasure& mu_prime, int x, double u) {
    checkSameSpace(mu, mu_prime);
    const FiniteMetricSpace& sp = *mu.space();
    if (!sp.hasEmbed()) throw ModelError("couplingZeta: space lacks an embedding");
    if (x < 0 || x >= sp.size()) throw ModelError("couplingZeta: x not a space point");
    if (!(u >= 0.0 && u <= 1.0)) throw ModelError("couplingZeta: u outside [0,1]");
    const auto& order = sp.embedOrder();

    // accumulate the CDF strictly below x; subtracting u*mu({x}) from the CDF
    // at x instead would cancel and could undershoot the partial sum below
    double cdf_below_x = 0.0;
    for (int k : order) {
        if (k == x) break;
        cdf_below_x += mu.w(k);
    }
    const double v = u >= 1.0 ? cdf_below_x : cdf_below_x + (1.0 - u) * mu.w(x);

    // generalized inverse of mu_prime's CDF in embedding order, smallest point
    // with cumulative >= v; at u == 1 the target interval boundary belongs to
    // the next point up, which keeps zeta(mu,mu,x,1) = x on the support
    double cum = 0.0;
    int fallback = order.back();
    for (int k : order)
        if (mu_prime.w(k) > 0.0) fallback = k;  // last support point, for v at the very top
    for (int k : order) {
        cum += mu_prime.w(k);
        if (mu_prime.w(k) <= 0.0) continue;
        if (u < 1.0 ? (cum >= v) : (cum > v)) return k;
    }
    return fallback;
}

Eigen::MatrixXd exactCoupledLawMatrix(const DiscreteMeasure& mu, const DiscreteMeasure& mu_prime) {
    checkSameSpace(mu, mu_prime);
    const FiniteMetricSpace& sp = *mu.space();
    if (!sp.hasEmbed()) throw ModelError("exactCoupledLaw: space lacks an embedding");
    const auto& order = sp.embedOrder();
    const int n = sp.size();

    // CDF intervals in embedding order; the pair (xi, zeta) equals (x, y)
    // exactly on the overlap of the two intervals of [0,1]
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    double lo_mu = 0.0;
    for (int i : order) {
        const double hi_mu = lo_mu + mu.w(i);
        double lo_nu = 0.0;
        for (int j : order) {
            const double hi_nu = lo_nu + mu_prime.w(j);
            const double overlap = std::min(hi_mu, hi_nu) - std::max(lo_mu, lo_nu);
            if (overlap > 0.0) out(i, j) = overlap;
            lo_nu = hi_nu;
        }
        lo_mu = hi_mu;
    }
    return out;
}

std::pair<ProductSpace, DiscreteMeasure> exactCoupledLaw(const DiscreteMeasure& mu,
                                                         const DiscreteMeasure& mu_prime) {
    Eigen::MatrixXd m = exactCoupledLawMatrix(mu, mu_prime);
    ProductSpace xx(mu.space(), mu.space());
    const int n = mu.size();
    Eigen::VectorXd w(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(xx.index(i, j)) = m(i, j);
    DiscreteMeasure law(xx.joint(), std::move(w));
    return {std::move(xx), std::move(law)};
}

DiscreteMeasure couplingProjection(const DiscreteMeasure& mu, const DiscreteMeasure& a,
                                   const ProductSpace& ps) {
    if (a.space() != ps.joint()) throw ModelError("couplingProjection: a not on the product space");
    if (mu.space() != ps.left()) throw ModelError("couplingProjection: mu not on the state space");
    DiscreteMeasure rho = marginalLeft(a, ps);
    Eigen::MatrixXd K = exactCoupledLawMatrix(rho, mu);  // law of (xi', zeta)
    const int nx = ps.leftSize(), na = ps.rightSize();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(ps.size());
    for (int x = 0; x < nx; ++x) {
        if (rho.w(x) <= 0.0) continue;
        for (int y = 0; y < nx; ++y) {
            const double move = K(x, y) / rho.w(x);  // P(zeta = y | xi' = x)
            if (move <= 0.0) continue;
            for (int al = 0; al < na; ++al) w(ps.index(y, al)) += a.w(ps.index(x, al)) * move;
        }
    }
    return DiscreteMeasure(ps.joint(), std::move(w));
}

}  // namespace mfmdp
