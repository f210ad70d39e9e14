#ifndef MFMDP_LIFTED_HPP
#define MFMDP_LIFTED_HPP

#include <memory>
#include <vector>

#include "mfmdp/model.hpp"
#include "mfmdp/spaces.hpp"

namespace mfmdp {

// One-step update of the conditional state law under a relaxed control:
//   out(x') = sum_{x,a,e} mu(x) ahat(x)(a) lambda(e) 1{F(x, a, mu.ahat, e, e0) = x'}
DiscreteMeasure liftTransitionHat(const MeanFieldModel& m, const DiscreteMeasure& mu,
                                  const ProbabilityKernel& ahat, int e0);

// Expected reward under the joint law mu.ahat: sum_{x,a} mu(x) ahat(x)(a) f(x, a, mu.ahat)
double liftRewardHat(const MeanFieldModel& m, const DiscreteMeasure& mu,
                     const ProbabilityKernel& ahat);

// Reward and every common-noise successor in one pass (shares the law features).
struct LiftedStep {
    double reward = 0.0;
    std::vector<DiscreteMeasure> next;  // indexed by common-noise outcome
};
LiftedStep liftStep(const MeanFieldModel& m, const DiscreteMeasure& mu,
                    const ProbabilityKernel& ahat);

// The finite search space of relaxed controls: each state's action law ranges
// over the simplex lattice on P(A) with step 1/n_actions_grid (or over Dirac
// rows only, for the deterministic-feedback restriction). A kernel is addressed
// by an index whose base-|options| digits pick one row per state, state 0
// cycling fastest; argmaxes resolve ties toward the smallest index.
class KernelSearchSpace {
  public:
    KernelSearchSpace(SpacePtr states, SpacePtr actions, int n_actions_grid, bool feedback_only,
                      unsigned long long max_kernels = 2'000'000ULL);

    unsigned long long count() const { return count_; }
    int optionCount() const { return static_cast<int>(options_.rows()); }
    const Eigen::MatrixXd& options() const { return options_; }
    std::vector<int> digits(unsigned long long idx) const;  // option per state
    ProbabilityKernel kernel(unsigned long long idx) const;
    bool feedbackOnly() const { return feedback_only_; }
    int resolution() const { return n_grid_; }

  private:
    SpacePtr states_, actions_;
    Eigen::MatrixXd options_;  // optionCount x |A|
    unsigned long long count_ = 0;
    bool feedback_only_ = false;
    int n_grid_ = 0;
};

// All weight vectors with entries in {0, 1/n, ..., 1} summing to 1, i.e. the
// compositions of n into `parts` parts scaled by 1/n, in the enumeration order
// used throughout (first coordinate descending).
Eigen::MatrixXd simplexLattice(int parts, int n, long max_rows);
long simplexLatticeSize(int parts, int n);             // C(n+parts-1, parts-1), -1 on overflow
long simplexLatticeRank(const std::vector<int>& c);    // index of a composition

}  // namespace mfmdp

#endif
