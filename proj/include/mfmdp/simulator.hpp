#ifndef MFMDP_SIMULATOR_HPP
#define MFMDP_SIMULATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "mfmdp/model.hpp"
#include "mfmdp/solver.hpp"

namespace mfmdp {

// Open-loop action scripts for the restricted-information reproductions: the
// action at step t is either a fixed point of A or a copy of the agent's most
// recent idiosyncratic noise draw (matched to A by label). Steps beyond the
// explicit list use `tail`.
struct ScriptStep {
    enum class Kind { Const, CopyNoise };
    Kind kind = Kind::Const;
    int action = 0;
};

struct OpenLoopScript {
    std::vector<ScriptStep> steps;
    ScriptStep tail;
    const ScriptStep& at(int t) const {
        return t < static_cast<int>(steps.size()) ? steps[static_cast<size_t>(t)] : tail;
    }
};

// A policy the simulator can drive: a (possibly randomized) measure-feedback
// policy from the solver, or an open-loop script.
struct SimPolicy {
    enum class Kind { Feedback, Script };
    Kind kind = Kind::Feedback;
    RandomizedFeedbackPolicy feedback;
    OpenLoopScript script;

    static SimPolicy fromFeedback(RandomizedFeedbackPolicy p);
    static SimPolicy fromScript(OpenLoopScript s);
};

// Feedback policy that plays one fixed action everywhere (resolution-1 grid).
RandomizedFeedbackPolicy constantPolicy(const MeanFieldModel& model, int action);
// Built-in scripts by name; "<model name>_optimal" variants for the shipped
// restricted-information examples. Labels are resolved against the model.
OpenLoopScript builtinScript(const MeanFieldModel& model, const std::string& name);

struct RunConfig {
    int N = 1000;
    int T = 0;  // 0: derive from the discount tail rule at `tol`
    int replications = 30;
    uint64_t seed = 1;
    double tol = 1e-3;
    int threads = 1;
    bool keep_trajectories = false;  // store replication-0 trajectories
    bool keep_law_path = false;      // store replication-0 per-step laws
};

// smallest T with beta^T * |f|_bound / (1-beta) < tol/10
int horizonForTail(const MeanFieldModel& model, double tol);
double tailBound(const MeanFieldModel& model, int T);

struct AgentTrajectory {
    std::vector<int> states;       // X indices, length T
    std::vector<int> actions;      // A indices, length T
    std::vector<double> rewards;   // length T
};

struct NAgentResult {
    int T = 0;
    double tail_bound = 0.0;
    double mean_gain = 0.0;
    double ci95 = 0.0;  // 1.96 * sd / sqrt(R)
    std::vector<double> rep_gains;
    std::vector<double> rep_wdist;  // discounted-normalized W(empirical joint, exact joint)
    std::vector<AgentTrajectory> trajectories;          // replication 0, when requested
    std::vector<Eigen::VectorXd> empirical_joint_path;  // replication 0, when requested
    std::vector<Eigen::VectorXd> exact_joint_path;      // replication 0, when requested
};

// The interacting N-agent system. Every agent additionally carries its shadow
// state in the exact-law dynamics: actions are drawn at the shadow state from
// the policy (the open-loop transfer of the limiting control), while the
// physical states evolve under the empirical (state, action) law.
NAgentResult simulateNAgent(const MeanFieldModel& model, const SimPolicy& policy,
                            const RunConfig& cfg);

struct MkvResult {
    int T = 0;
    double tail_bound = 0.0;
    double gain = 0.0;
    bool exact = true;  // common-noise expectation enumerated exactly
    std::vector<DiscreteMeasure> law_path;  // state laws along the first path
};

// Exact conditional-law propagation; the expectation over the common noise is
// enumerated exactly when |E0|^T is small, Monte Carlo over paths otherwise.
MkvResult simulateMkv(const MeanFieldModel& model, const SimPolicy& policy, const RunConfig& cfg);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};
FitResult fitLogLog(const std::vector<double>& xs, const std::vector<double>& ys);

struct RatePoint {
    long N = 0;
    double mean_w = 0.0;
    double ci95 = 0.0;
    std::vector<double> samples;
};
struct RateReport {
    std::vector<RatePoint> points;
    FitResult fit;
};
// W(empirical measure of N i.i.d. draws, nu), R replications per N
RateReport empiricalMeasureRate(const DiscreteMeasure& nu, const std::vector<long>& Ns, int R,
                                uint64_t seed);

struct ChaosPoint {
    long N = 0;
    double mean_gain = 0.0;
    double ci95 = 0.0;
    double gap = 0.0;        // |mean_gain - v_pi|
    double mean_wdist = 0.0;
    std::vector<double> rep_gains;
    std::vector<double> rep_wdist;
};
struct ChaosReport {
    int T = 0;
    double tail_bound = 0.0;
    double v_pi = 0.0;
    bool v_pi_exact = true;
    std::vector<ChaosPoint> points;
    FitResult gap_fit;
};
// Common random numbers: agent streams depend only on (replication, agent), so
// smaller systems are prefixes of larger ones.
ChaosReport chaosExperiment(const MeanFieldModel& model, const SimPolicy& policy,
                            const std::vector<long>& Ns, const RunConfig& cfg);

}  // namespace mfmdp

#endif
