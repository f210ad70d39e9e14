#include "mfmdp/lifted.hpp"

#include <cmath>
#include <functional>

#include "mfmdp/errors.hpp"

namespace mfmdp {

namespace {

Eigen::VectorXd jointLaw(const MeanFieldModel& m, const DiscreteMeasure& mu,
                         const ProbabilityKernel& ahat) {
    const int nx = m.stateSpace()->size(), na = m.actionSpace()->size();
    invariant(mu.size() == nx && ahat.matrix().rows() == nx && ahat.matrix().cols() == na,
              "lift: kernel/measure shapes do not match the model");
    Eigen::VectorXd nu(nx * na);
    for (int x = 0; x < nx; ++x) nu.segment(x * na, na) = mu.w(x) * ahat.matrix().row(x);
    return nu;
}

}  // namespace

DiscreteMeasure liftTransitionHat(const MeanFieldModel& m, const DiscreteMeasure& mu,
                                  const ProbabilityKernel& ahat, int e0) {
    Eigen::VectorXd nu = jointLaw(m, mu, ahat);
    NuContext ctx = m.prepareNu(nu);
    const int nx = m.stateSpace()->size(), na = m.actionSpace()->size(),
              ne = m.idioSpace()->size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nx);
    for (int x = 0; x < nx; ++x) {
        if (mu.w(x) == 0.0) continue;
        for (int a = 0; a < na; ++a) {
            double w = nu(x * na + a);
            if (w == 0.0) continue;
            for (int e = 0; e < ne; ++e) {
                double le = m.idioLaw().w(e);
                if (le == 0.0) continue;
                out(m.transition(x, a, e, e0, ctx)) += w * le;
            }
        }
    }
    return DiscreteMeasure(m.stateSpace(), std::move(out));
}

double liftRewardHat(const MeanFieldModel& m, const DiscreteMeasure& mu,
                     const ProbabilityKernel& ahat) {
    Eigen::VectorXd nu = jointLaw(m, mu, ahat);
    NuContext ctx = m.prepareNu(nu);
    const int nx = m.stateSpace()->size(), na = m.actionSpace()->size();
    double s = 0.0;
    for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a) {
            double w = nu(x * na + a);
            if (w != 0.0) s += w * m.reward(x, a, ctx);
        }
    return s;
}

LiftedStep liftStep(const MeanFieldModel& m, const DiscreteMeasure& mu,
                    const ProbabilityKernel& ahat) {
    Eigen::VectorXd nu = jointLaw(m, mu, ahat);
    NuContext ctx = m.prepareNu(nu);
    const int nx = m.stateSpace()->size(), na = m.actionSpace()->size(),
              ne = m.idioSpace()->size(), ne0 = m.commonSpace()->size();
    LiftedStep step;
    std::vector<Eigen::VectorXd> nexts(ne0, Eigen::VectorXd::Zero(nx));
    for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a) {
            double w = nu(x * na + a);
            if (w == 0.0) continue;
            step.reward += w * m.reward(x, a, ctx);
            for (int e = 0; e < ne; ++e) {
                double we = w * m.idioLaw().w(e);
                if (we == 0.0) continue;
                for (int e0 = 0; e0 < ne0; ++e0)
                    nexts[e0](m.transition(x, a, e, e0, ctx)) += we;
            }
        }
    step.next.reserve(ne0);
    for (auto& v : nexts) step.next.emplace_back(m.stateSpace(), std::move(v));
    return step;
}

// simplex lattice --------------------------------------------------------------

long simplexLatticeSize(int parts, int n) {
    invariant(parts >= 1 && n >= 1, "simplex lattice needs parts >= 1 and n >= 1");
    double c = 1.0;
    long exact = 1;
    for (int i = 1; i < parts; ++i) {
        c *= static_cast<double>(n + i) / i;
        if (c > 1e12) return -1;  // far beyond every cap; keeps the exact product overflow-free
        exact = exact * (n + i) / i;  // binomial recurrence, stays integral
    }
    return exact;
}

Eigen::MatrixXd simplexLattice(int parts, int n, long max_rows) {
    long size = simplexLatticeSize(parts, n);
    if (size < 0 || size > max_rows)
        throw ResourceError("simplex lattice with " + std::to_string(parts) + " parts at step 1/" +
                            std::to_string(n) + " exceeds the size cap " +
                            std::to_string(max_rows));
    Eigen::MatrixXd rows(size, parts);
    std::vector<int> cur(parts, 0);
    long r = 0;
    // first coordinate descending, recursively
    std::function<void(int, int)> emit = [&](int slot, int remaining) {
        if (slot == parts - 1) {
            cur[slot] = remaining;
            for (int i = 0; i < parts; ++i) rows(r, i) = static_cast<double>(cur[i]) / n;
            ++r;
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[slot] = v;
            emit(slot + 1, remaining - v);
        }
    };
    emit(0, n);
    invariant(r == size, "simplex lattice enumeration miscounted");
    return rows;
}

long simplexLatticeRank(const std::vector<int>& c) {
    const int parts = static_cast<int>(c.size());
    int n = 0;
    for (int v : c) {
        invariant(v >= 0, "composition entries must be non-negative");
        n += v;
    }
    auto compositionsOf = [](int total, int k) {
        long s = total == 0 ? 1 : simplexLatticeSize(k, total);
        invariant(s >= 0, "composition rank overflow");
        return s;
    };
    // count compositions that precede c: at each slot, larger leading values come first
    long rank = 0;
    int remaining = n;
    for (int slot = 0; slot + 1 < parts; ++slot) {
        for (int v = remaining; v > c[slot]; --v)
            rank += compositionsOf(remaining - v, parts - slot - 1);
        remaining -= c[slot];
    }
    return rank;
}

// kernel search space -----------------------------------------------------------

KernelSearchSpace::KernelSearchSpace(SpacePtr states, SpacePtr actions, int n_actions_grid,
                                     bool feedback_only, unsigned long long max_kernels)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      feedback_only_(feedback_only),
      n_grid_(n_actions_grid) {
    const int na = actions_->size();
    if (feedback_only_) {
        options_ = Eigen::MatrixXd::Identity(na, na);
    } else {
        invariant(n_actions_grid >= 1, "action grid resolution must be >= 1");
        options_ = simplexLattice(na, n_actions_grid, 2'000'000);
    }
    const unsigned long long nopt = options_.rows();
    count_ = 1;
    for (int x = 0; x < states_->size(); ++x) {
        if (count_ > max_kernels / nopt)
            throw ResourceError(
                "kernel search space " + std::to_string(options_.rows()) + "^" +
                std::to_string(states_->size()) + " exceeds the cap " + std::to_string(max_kernels) +
                "; reduce --n-actions-grid, use --feedback-only, or shrink the state space");
        count_ *= nopt;
    }
}

std::vector<int> KernelSearchSpace::digits(unsigned long long idx) const {
    invariant(idx < count_, "kernel index out of range");
    const unsigned long long nopt = options_.rows();
    std::vector<int> d(states_->size());
    for (int x = 0; x < states_->size(); ++x) {
        d[x] = static_cast<int>(idx % nopt);
        idx /= nopt;
    }
    return d;
}

ProbabilityKernel KernelSearchSpace::kernel(unsigned long long idx) const {
    std::vector<int> d = digits(idx);
    Eigen::MatrixXd rows(states_->size(), actions_->size());
    for (int x = 0; x < states_->size(); ++x) rows.row(x) = options_.row(d[x]);
    return ProbabilityKernel(states_, actions_, std::move(rows));
}

}  // namespace mfmdp
