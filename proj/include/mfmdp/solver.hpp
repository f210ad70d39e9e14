#ifndef MFMDP_SOLVER_HPP
#define MFMDP_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "mfmdp/lifted.hpp"
#include "mfmdp/model.hpp"

namespace mfmdp {

// The simplex lattice over the state space: all measures with weights in
// {0, 1/n, ..., 1}, the solver's finite state space. Projection maps any
// measure to a nearest node in Wasserstein distance (ties to the lowest node
// index; grids above the exhaustive-search threshold use exact closed-form
// nearest-node rules for the discrete and embedding metrics, whose tie choice
// is deterministic but not index-based).
class SimplexGrid {
  public:
    static std::shared_ptr<const SimplexGrid> build(SpacePtr space, int resolution,
                                                    long max_nodes = 2'000'000);

    const SpacePtr& space() const { return space_; }
    int resolution() const { return n_; }
    long count() const { return nodes_.rows(); }
    // covering radius bound diam(X)*|X|/(2n): every measure is this close to a node
    double eta() const { return eta_; }
    const Eigen::MatrixXd& nodes() const { return nodes_; }
    DiscreteMeasure node(long i) const { return DiscreteMeasure(space_, nodes_.row(i)); }
    long projectIndex(const DiscreteMeasure& mu) const;
    long projectIndex(const Eigen::VectorXd& weights) const;

  private:
    SimplexGrid() = default;
    SpacePtr space_;
    int n_ = 0;
    double eta_ = 0.0;
    Eigen::MatrixXd nodes_;
    bool exhaustive_ = true;
};

// Precomputed one-step data over (node, kernel): expected reward and the
// successor node per common-noise outcome. Turns Bellman sweeps into pure
// table lookups; shared read-only by solver and tests.
class BellmanTables {
  public:
    BellmanTables(const MeanFieldModel& model, std::shared_ptr<const SimplexGrid> grid,
                  std::shared_ptr<const KernelSearchSpace> kernels, int threads = 1);

    long nodeCount() const { return n_nodes_; }
    unsigned long long kernelCount() const { return n_kernels_; }
    double beta() const { return beta_; }
    const SimplexGrid& grid() const { return *grid_; }
    const KernelSearchSpace& kernels() const { return *kernels_; }

    double rewardAt(long node, unsigned long long k) const {
        return R_[static_cast<size_t>(node) * n_kernels_ + k];
    }
    long successorAt(long node, unsigned long long k, int e0) const {
        return S_[(static_cast<size_t>(node) * n_kernels_ + k) * ne0_ + e0];
    }

    // TV: per node, max over kernels of reward + beta * E_{e0} V(successor);
    // ties resolve to the smallest kernel index (first strict maximizer)
    Eigen::VectorXd apply(const Eigen::VectorXd& V,
                          std::vector<unsigned long long>* argmax = nullptr) const;
    // T^pi V for a fixed kernel choice per node
    Eigen::VectorXd applyPolicy(const std::vector<unsigned long long>& pick,
                                const Eigen::VectorXd& V) const;

  private:
    std::shared_ptr<const SimplexGrid> grid_;
    std::shared_ptr<const KernelSearchSpace> kernels_;
    Eigen::VectorXd lambda0_;
    double beta_ = 0.0;
    long n_nodes_ = 0;
    unsigned long long n_kernels_ = 0;
    int ne0_ = 0;
    std::vector<double> R_;
    std::vector<int32_t> S_;
};

struct ValueFunction {
    std::shared_ptr<const SimplexGrid> grid;
    Eigen::VectorXd values;
    double at(long node) const { return values(node); }
    double operator()(const DiscreteMeasure& mu) const { return values(grid->projectIndex(mu)); }
};

class RandomizedFeedbackPolicy {
  public:
    std::shared_ptr<const SimplexGrid> grid;
    SpacePtr states, actions;
    std::vector<Eigen::MatrixXd> kernels;  // per node: |X| x |A| action laws
    double epsilon = 0.0;                  // declared one-step suboptimality
    double gain_bound = 0.0;               // epsilon / (1 - beta)

    long nodeOf(const DiscreteMeasure& mu) const { return grid->projectIndex(mu); }
    const Eigen::MatrixXd& kernelAt(long node) const { return kernels[static_cast<size_t>(node)]; }
    // quantile sample from the (node, state) action law; same generalized-inverse
    // convention as DiscreteMeasure::sampleIndex
    int sampleAction(long node, int x, double u) const;
    bool deterministic() const;  // every row is a point mass
};

struct SolveOptions {
    int n_eta = 10;
    int n_actions_grid = 10;
    bool feedback_only = false;
    std::string method = "value";  // "value" | "policy"
    double tol = 1e-6;
    int max_iterations = 10000;
    long max_nodes = 2'000'000;
    unsigned long long max_kernels = 2'000'000ULL;
    int threads = 1;
    int lipschitz_samples = 200;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;      // final sup-norm step, <= tol on success
    double tolerance = 0.0;
    double eta = 0.0;
    double gamma = 1.0;
    double k_star = 0.0;        // value Holder constant over [eta, diam]
    double grid_error = 0.0;    // k_star * eta^gamma / (1-beta)
    double residual_error = 0.0;  // residual * beta / (1-beta)
    double error_bound = 0.0;     // grid_error + residual_error
    double policy_epsilon = 0.0;  // residual + k_star * eta^gamma
    double policy_gain_bound = 0.0;  // policy_epsilon / (1-beta)
    double wall_seconds = 0.0;
    std::vector<double> residual_history;
    LipschitzEstimate lipschitz;
};

struct SolveResult {
    std::shared_ptr<const SimplexGrid> grid;
    std::shared_ptr<const KernelSearchSpace> kernels;
    ValueFunction value;
    RandomizedFeedbackPolicy policy;
    SolveReport report;
};

struct IterationTrace {
    Eigen::VectorXd values;
    std::vector<unsigned long long> argmax;
    std::vector<double> residual_history;
    int iterations = 0;
    double residual = 0.0;
};

// V_{n+1} = T V_n from V_0 = 0 until the sup-norm step is at most
// tol * min(1, (1-beta)/beta), which bounds the fixed-point error by tol.
IterationTrace valueIteration(const BellmanTables& tables, double tol, int max_iterations = 10000);
// Howard iteration: greedy improvement + iterative policy evaluation (to tol/10),
// finished by value-iteration sweeps until the stopping rule above holds.
IterationTrace policyIteration(const BellmanTables& tables, double tol, int max_iterations = 10000);

SolveResult solve(const MeanFieldModel& model, const SolveOptions& opt);

// One-step lookahead value of a kernel at an off-table measure; evaluates the
// lifted step directly (independent of BellmanTables).
double qValue(const MeanFieldModel& model, const SimplexGrid& grid, const Eigen::VectorXd& values,
              const DiscreteMeasure& mu, const ProbabilityKernel& ahat);

// solver artifact persistence ---------------------------------------------------

struct LoadedArtifact {
    SolveOptions options;
    ValueFunction value;
    RandomizedFeedbackPolicy policy;
    SolveReport report;
};

void saveArtifact(const std::string& path, const MeanFieldModel& model, const SolveResult& result,
                  const SolveOptions& opt);
LoadedArtifact loadArtifact(const std::string& path, const MeanFieldModel& model);

}  // namespace mfmdp

#endif
