#pragma once
// Exhaustive search over scripted open-loop policies: deterministic step
// sequences whose entries are either a constant action or a copy of the
// agent's latest idiosyncratic draw. Values are computed exactly by
// propagating the joint law of (state, latest draw); sequences that induce
// the same joint law are merged, so the search is dynamic programming over
// the reachable laws rather than a literal walk of all |options|^T scripts.

#include <Eigen/Dense>

#include "mfmdp/model.hpp"
#include "mfmdp/simulator.hpp"

namespace mfmdp {

struct OpenLoopSearchResult {
    double value = 0.0;     // truncated discounted value of the best script
    OpenLoopScript script;  // one optimal script (ties: constant actions first)
    int T = 0;
    double tail_bound = 0.0;
    long nodes = 0;  // distinct (time, law) nodes expanded
};

// Best script from `mu0`, horizon-truncated at T steps. Requires a
// deterministic common noise. `max_nodes` caps the node count.
OpenLoopSearchResult openLoopSearch(const MeanFieldModel& model, const DiscreteMeasure& mu0,
                                    int T, long max_nodes = 2'000'000);

// One-step decomposition check of the searched value: compares it against
// max_a { one-step reward at mu0 under the constant action a
//         + beta * value searched afresh from the successor law }.
// The restarted search forgets the noise draw already seen, so a nonzero
// residual flags settings where the value fails this naive decomposition.
struct OpenLoopBellmanDiagnostic {
    double value = 0.0;         // searched value from the initial law
    double best_restart = 0.0;  // best one-step + restarted continuation
    double residual = 0.0;      // |value - best_restart|
    int best_action = 0;
    int T = 0;
    double tail_bound = 0.0;
};

OpenLoopBellmanDiagnostic openLoopBellmanResidual(const MeanFieldModel& model, int T,
                                                  long max_nodes = 2'000'000);

}  // namespace mfmdp
