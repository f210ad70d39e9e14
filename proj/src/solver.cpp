#include "mfmdp/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "mfmdp/errors.hpp"
#include "mfmdp/transport.hpp"

namespace mfmdp {

using nlohmann::json;

// SimplexGrid -------------------------------------------------------------------

std::shared_ptr<const SimplexGrid> SimplexGrid::build(SpacePtr space, int resolution,
                                                      long max_nodes) {
    invariant(resolution >= 1, "grid resolution must be >= 1");
    auto g = std::shared_ptr<SimplexGrid>(new SimplexGrid());
    g->space_ = std::move(space);
    g->n_ = resolution;
    long size = simplexLatticeSize(g->space_->size(), resolution);
    if (size < 0 || size > max_nodes)
        throw ResourceError("simplex grid needs " +
                            (size < 0 ? std::string("more than 1e12") : std::to_string(size)) +
                            " nodes, over the cap " + std::to_string(max_nodes) +
                            "; reduce --n-eta");
    g->nodes_ = simplexLattice(g->space_->size(), resolution, max_nodes);
    g->eta_ = g->space_->diameter() * g->space_->size() / (2.0 * resolution);
    g->exhaustive_ = g->nodes_.rows() <= 5000;
    return g;
}

long SimplexGrid::projectIndex(const DiscreteMeasure& mu) const {
    return projectIndex(mu.weights());
}

long SimplexGrid::projectIndex(const Eigen::VectorXd& w) const {
    const int nx = space_->size();
    invariant(w.size() == nx, "projection: weight vector has the wrong dimension");

    auto cdfDistanceSweep = [&]() {
        // exact 1-D W against every node via cumulative differences in embed order
        const auto& ord = space_->embedOrder();
        Eigen::VectorXd cw(nx);
        double c = 0.0;
        for (int k = 0; k < nx; ++k) cw(k) = (c += w(ord[k]));
        long best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (long i = 0; i < nodes_.rows(); ++i) {
            double d = 0.0, cn = 0.0;
            for (int k = 0; k + 1 < nx; ++k) {
                cn += nodes_(i, ord[k]);
                d += std::abs(cn - cw(k)) *
                     (space_->embed(ord[k + 1]) - space_->embed(ord[k]));
            }
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };

    if (exhaustive_) {
        if (space_->isDiscreteMetric()) {
            long best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (long i = 0; i < nodes_.rows(); ++i) {
                double d = 0.5 * (nodes_.row(i).transpose() - w).cwiseAbs().sum();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            return best;
        }
        if (space_->isEmbeddingMetric()) return cdfDistanceSweep();
        DiscreteMeasure target(space_, w);
        long best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (long i = 0; i < nodes_.rows(); ++i) {
            double d = wasserstein(node(i), target).cost;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    // large grids: closed-form nearest node (exact minimizers; tie choice
    // deterministic but not the lowest-index rule of the exhaustive path)
    std::vector<int> counts(nx, 0);
    if (space_->isEmbeddingMetric()) {
        // round the CDF in embed order: minimizes the 1-D transport integral
        const auto& ord = space_->embedOrder();
        double c = 0.0;
        long prev = 0;
        for (int k = 0; k < nx; ++k) {
            c += w(ord[k]);
            long r = k + 1 == nx ? n_ : static_cast<long>(std::floor(c * n_ + 0.5));
            counts[ord[k]] = static_cast<int>(r - prev);
            prev = r;
        }
    } else if (space_->isDiscreteMetric()) {
        // largest-remainder rounding: minimizes total variation
        long have = 0;
        std::vector<std::pair<double, int>> frac(nx);
        for (int i = 0; i < nx; ++i) {
            double s = w(i) * n_;
            counts[i] = static_cast<int>(std::floor(s));
            have += counts[i];
            frac[i] = {-(s - counts[i]), i};
        }
        std::sort(frac.begin(), frac.end());
        for (long r = 0; r < n_ - have; ++r) counts[frac[static_cast<size_t>(r)].second]++;
    } else {
        DiscreteMeasure target(space_, w);
        long best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (long i = 0; i < nodes_.rows(); ++i) {
            double d = wasserstein(node(i), target).cost;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }
    long idx = simplexLatticeRank(counts);
    invariant(idx >= 0 && idx < nodes_.rows(), "projection produced an out-of-range node");
    return idx;
}

// BellmanTables -----------------------------------------------------------------

BellmanTables::BellmanTables(const MeanFieldModel& model, std::shared_ptr<const SimplexGrid> grid,
                             std::shared_ptr<const KernelSearchSpace> kernels, int threads)
    : grid_(std::move(grid)), kernels_(std::move(kernels)) {
    beta_ = model.beta();
    lambda0_ = model.commonLaw().weights();
    n_nodes_ = grid_->count();
    n_kernels_ = kernels_->count();
    ne0_ = model.commonSpace()->size();
    const size_t cells = static_cast<size_t>(n_nodes_) * n_kernels_;
    if (cells == 0 || cells > 50'000'000ULL / static_cast<unsigned>(ne0_))
        throw ResourceError("Bellman tables need " + std::to_string(cells) + " x " +
                            std::to_string(ne0_) +
                            " entries; reduce --n-eta or --n-actions-grid");
    R_.resize(cells);
    S_.resize(cells * ne0_);

    auto work = [&](long lo, long hi) {
        for (long node = lo; node < hi; ++node) {
            DiscreteMeasure mu = grid_->node(node);
            for (unsigned long long k = 0; k < n_kernels_; ++k) {
                LiftedStep st = liftStep(model, mu, kernels_->kernel(k));
                const size_t cell = static_cast<size_t>(node) * n_kernels_ + k;
                R_[cell] = st.reward;
                for (int e0 = 0; e0 < ne0_; ++e0)
                    S_[cell * ne0_ + e0] =
                        lambda0_(e0) == 0.0
                            ? static_cast<int32_t>(node)
                            : static_cast<int32_t>(grid_->projectIndex(st.next[e0].weights()));
            }
        }
    };

    const int nt = std::max(1, static_cast<int>(std::min<long>(threads, n_nodes_)));
    if (nt == 1) {
        work(0, n_nodes_);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (int t = 0; t < nt; ++t) {
        long lo = n_nodes_ * t / nt, hi = n_nodes_ * (t + 1) / nt;
        pool.emplace_back([&, t, lo, hi] {
            try {
                work(lo, hi);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

Eigen::VectorXd BellmanTables::apply(const Eigen::VectorXd& V,
                                     std::vector<unsigned long long>* argmax) const {
    invariant(V.size() == n_nodes_, "value vector size mismatch");
    Eigen::VectorXd out(n_nodes_);
    if (argmax) argmax->assign(static_cast<size_t>(n_nodes_), 0);
    for (long node = 0; node < n_nodes_; ++node) {
        const size_t base = static_cast<size_t>(node) * n_kernels_;
        double best = -std::numeric_limits<double>::infinity();
        unsigned long long best_k = 0;
        for (unsigned long long k = 0; k < n_kernels_; ++k) {
            double cont = 0.0;
            const int32_t* s = &S_[(base + k) * ne0_];
            for (int e0 = 0; e0 < ne0_; ++e0)
                if (lambda0_(e0) != 0.0) cont += lambda0_(e0) * V(s[e0]);
            double q = R_[base + k] + beta_ * cont;
            if (q > best) {
                best = q;
                best_k = k;
            }
        }
        out(node) = best;
        if (argmax) (*argmax)[static_cast<size_t>(node)] = best_k;
    }
    return out;
}

Eigen::VectorXd BellmanTables::applyPolicy(const std::vector<unsigned long long>& pick,
                                           const Eigen::VectorXd& V) const {
    invariant(V.size() == n_nodes_ && pick.size() == static_cast<size_t>(n_nodes_),
              "value/policy vector size mismatch");
    Eigen::VectorXd out(n_nodes_);
    for (long node = 0; node < n_nodes_; ++node) {
        const unsigned long long k = pick[static_cast<size_t>(node)];
        invariant(k < n_kernels_, "policy references an unknown kernel");
        const size_t cell = static_cast<size_t>(node) * n_kernels_ + k;
        double cont = 0.0;
        const int32_t* s = &S_[cell * ne0_];
        for (int e0 = 0; e0 < ne0_; ++e0)
            if (lambda0_(e0) != 0.0) cont += lambda0_(e0) * V(s[e0]);
        out(node) = R_[cell] + beta_ * cont;
    }
    return out;
}

// iteration ---------------------------------------------------------------------

namespace {

double stopThreshold(double tol, double beta) {
    return beta <= 0.0 ? tol : tol * std::min(1.0, (1.0 - beta) / beta);
}

}  // namespace

IterationTrace valueIteration(const BellmanTables& tables, double tol, int max_iterations) {
    invariant(tol > 0.0, "tolerance must be positive");
    const double thresh = stopThreshold(tol, tables.beta());
    IterationTrace tr;
    Eigen::VectorXd V = Eigen::VectorXd::Zero(tables.nodeCount());
    for (int it = 1; it <= max_iterations; ++it) {
        std::vector<unsigned long long> arg;
        Eigen::VectorXd W = tables.apply(V, &arg);
        double r = (W - V).lpNorm<Eigen::Infinity>();
        tr.residual_history.push_back(r);
        V = std::move(W);
        tr.iterations = it;
        tr.residual = r;
        if (r <= thresh) {
            tr.values = std::move(V);
            tr.argmax = std::move(arg);
            return tr;
        }
    }
    throw InvariantError("value iteration did not reach tolerance within " +
                         std::to_string(max_iterations) +
                         " sweeps; the contraction invariant must have been violated");
}

IterationTrace policyIteration(const BellmanTables& tables, double tol, int max_iterations) {
    invariant(tol > 0.0, "tolerance must be positive");
    const double thresh = stopThreshold(tol, tables.beta());
    const double eval_thresh = stopThreshold(tol / 10.0, tables.beta());
    IterationTrace tr;
    const long n = tables.nodeCount();
    Eigen::VectorXd V = Eigen::VectorXd::Zero(n);
    std::vector<unsigned long long> pick(static_cast<size_t>(n), 0);
    int sweeps = 0;

    auto evaluate = [&](const std::vector<unsigned long long>& p) {
        for (int it = 0; it < max_iterations; ++it) {
            Eigen::VectorXd W = tables.applyPolicy(p, V);
            double r = (W - V).lpNorm<Eigen::Infinity>();
            V = std::move(W);
            ++sweeps;
            if (r <= eval_thresh) return;
        }
        throw InvariantError("policy evaluation did not converge; contraction violated");
    };

    evaluate(pick);
    for (int outer = 0; outer < max_iterations; ++outer) {
        std::vector<unsigned long long> greedy;
        tables.apply(V, &greedy);
        ++sweeps;
        if (greedy == pick) break;
        Eigen::VectorXd before = V;
        pick = std::move(greedy);
        evaluate(pick);
        // approximate evaluations can each be off by tol/10
        invariant((V - before).minCoeff() >= -(0.2 * tol + 1e-12),
                  "policy iteration lost node-wise monotonicity");
        tr.residual_history.push_back((V - before).lpNorm<Eigen::Infinity>());
    }

    // finish with plain sweeps so the standard stopping rule holds
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<unsigned long long> arg;
        Eigen::VectorXd W = tables.apply(V, &arg);
        double r = (W - V).lpNorm<Eigen::Infinity>();
        tr.residual_history.push_back(r);
        V = std::move(W);
        ++sweeps;
        if (r <= thresh) {
            tr.values = std::move(V);
            tr.argmax = std::move(arg);
            tr.iterations = sweeps;
            tr.residual = r;
            return tr;
        }
    }
    throw InvariantError("policy iteration did not reach tolerance; contraction violated");
}

// solve -------------------------------------------------------------------------

int RandomizedFeedbackPolicy::sampleAction(long node, int x, double u) const {
    const Eigen::MatrixXd& rows = kernelAt(node);
    // same generalized-inverse convention as DiscreteMeasure::sampleIndex
    if (actions->hasEmbed()) {
        const auto& order = actions->embedOrder();
        double cum = 0.0;
        for (int k : order) {
            cum += rows(x, k);
            if (cum >= u && rows(x, k) > 0.0) return k;
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if (rows(x, *it) > 0.0) return *it;
        return order.back();
    }
    double cum = 0.0;
    int last_support = 0;
    for (int a = 0; a < rows.cols(); ++a) {
        if (rows(x, a) > 0.0) last_support = a;
        cum += rows(x, a);
        if (cum >= u && rows(x, a) > 0.0) return a;
    }
    return last_support;
}

bool RandomizedFeedbackPolicy::deterministic() const {
    for (const auto& rows : kernels)
        for (long x = 0; x < rows.rows(); ++x)
            if (rows.row(x).maxCoeff() < 1.0 - 1e-12) return false;
    return true;
}

SolveResult solve(const MeanFieldModel& model, const SolveOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(opt.tol > 0.0)) throw UsageError("--tol must be positive");
    if (opt.method != "value" && opt.method != "policy")
        throw UsageError("--method must be \"value\" or \"policy\"");
    if (opt.n_eta < 1) throw UsageError("--n-eta must be >= 1");
    if (opt.n_actions_grid < 1) throw UsageError("--n-actions-grid must be >= 1");

    SolveResult res;
    res.grid = SimplexGrid::build(model.stateSpace(), opt.n_eta, opt.max_nodes);
    res.kernels = std::make_shared<KernelSearchSpace>(model.stateSpace(), model.actionSpace(),
                                                      opt.n_actions_grid, opt.feedback_only,
                                                      opt.max_kernels);
    BellmanTables tables(model, res.grid, res.kernels, opt.threads);
    IterationTrace tr = opt.method == "policy"
                            ? policyIteration(tables, opt.tol, opt.max_iterations)
                            : valueIteration(tables, opt.tol, opt.max_iterations);

    // greedy kernels with respect to the final values
    std::vector<unsigned long long> greedy;
    tables.apply(tr.values, &greedy);

    LipschitzEstimate lip = estimateLipschitz(model, opt.lipschitz_samples);
    const double eta = res.grid->eta();
    const double k_star =
        holderConstant(lip, model.beta(), model.stateSpace()->diameter(), eta);
    const double beta = model.beta();

    SolveReport& rep = res.report;
    rep.iterations = tr.iterations;
    rep.residual = tr.residual;
    rep.tolerance = opt.tol;
    rep.eta = eta;
    rep.gamma = lip.gamma;
    rep.k_star = k_star;
    rep.grid_error = k_star * std::pow(eta, lip.gamma) / (1.0 - beta);
    rep.residual_error = tr.residual * beta / (1.0 - beta);
    rep.error_bound = rep.grid_error + rep.residual_error;
    rep.policy_epsilon = tr.residual + k_star * std::pow(eta, lip.gamma);
    rep.policy_gain_bound = rep.policy_epsilon / (1.0 - beta);
    rep.residual_history = tr.residual_history;
    rep.lipschitz = lip;

    res.value = ValueFunction{res.grid, tr.values};
    RandomizedFeedbackPolicy& pol = res.policy;
    pol.grid = res.grid;
    pol.states = model.stateSpace();
    pol.actions = model.actionSpace();
    pol.kernels.reserve(static_cast<size_t>(res.grid->count()));
    for (long node = 0; node < res.grid->count(); ++node)
        pol.kernels.push_back(res.kernels->kernel(greedy[static_cast<size_t>(node)]).matrix());
    pol.epsilon = rep.policy_epsilon;
    pol.gain_bound = rep.policy_gain_bound;

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

double qValue(const MeanFieldModel& model, const SimplexGrid& grid, const Eigen::VectorXd& values,
              const DiscreteMeasure& mu, const ProbabilityKernel& ahat) {
    LiftedStep st = liftStep(model, mu, ahat);
    double cont = 0.0;
    for (int e0 = 0; e0 < model.commonSpace()->size(); ++e0) {
        double w = model.commonLaw().w(e0);
        if (w != 0.0) cont += w * values(grid.projectIndex(st.next[static_cast<size_t>(e0)]));
    }
    return st.reward + model.beta() * cont;
}

// artifacts ---------------------------------------------------------------------

void saveArtifact(const std::string& path, const MeanFieldModel& model, const SolveResult& result,
                  const SolveOptions& opt) {
    json doc;
    doc["format"] = "mfmdp-solver-artifact-v1";
    doc["model"] = model.spec();
    doc["model_hash"] = hashHex(modelHash(model));
    doc["options"] = {{"n_eta", opt.n_eta},
                      {"n_actions_grid", opt.n_actions_grid},
                      {"feedback_only", opt.feedback_only},
                      {"method", opt.method},
                      {"tol", opt.tol}};
    doc["grid"] = {{"resolution", result.grid->resolution()},
                   {"eta", result.grid->eta()},
                   {"nodes", result.grid->count()}};
    doc["values"] = std::vector<double>(result.value.values.data(),
                                        result.value.values.data() + result.value.values.size());
    json kernels = json::array();
    for (const auto& rows : result.policy.kernels) {
        json node_rows = json::array();
        for (long x = 0; x < rows.rows(); ++x) {
            json row = json::array();
            for (long a = 0; a < rows.cols(); ++a) row.push_back(rows(x, a));
            node_rows.push_back(std::move(row));
        }
        kernels.push_back(std::move(node_rows));
    }
    doc["policy"] = {{"epsilon", result.policy.epsilon},
                     {"gain_bound", result.policy.gain_bound},
                     {"kernels", std::move(kernels)}};
    const SolveReport& rep = result.report;
    doc["report"] = {{"iterations", rep.iterations},
                     {"residual", rep.residual},
                     {"tolerance", rep.tolerance},
                     {"eta", rep.eta},
                     {"gamma", rep.gamma},
                     {"k_star", rep.k_star},
                     {"grid_error", rep.grid_error},
                     {"residual_error", rep.residual_error},
                     {"error_bound", rep.error_bound},
                     {"policy_epsilon", rep.policy_epsilon},
                     {"policy_gain_bound", rep.policy_gain_bound},
                     {"lipschitz", {{"K_F", rep.lipschitz.K_F}, {"K_f", rep.lipschitz.K_f}}}};
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write artifact file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw UsageError("failed while writing artifact file: " + path);
}

LoadedArtifact loadArtifact(const std::string& path, const MeanFieldModel& model) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open artifact file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ModelError(path + ": " + e.what());
    }
    try {
        if (doc.value("format", std::string()) != "mfmdp-solver-artifact-v1")
            throw ModelError(path + ": not a solver artifact");
        if (doc.at("model_hash").get<std::string>() != hashHex(modelHash(model)))
            throw ModelError(path + ": artifact was produced for a different model");

        LoadedArtifact art;
        const json& jo = doc.at("options");
        art.options.n_eta = jo.at("n_eta").get<int>();
        art.options.n_actions_grid = jo.at("n_actions_grid").get<int>();
        art.options.feedback_only = jo.at("feedback_only").get<bool>();
        art.options.method = jo.at("method").get<std::string>();
        art.options.tol = jo.at("tol").get<double>();

        auto grid = SimplexGrid::build(model.stateSpace(), doc.at("grid").at("resolution").get<int>());
        const std::vector<double> vals = doc.at("values").get<std::vector<double>>();
        if (static_cast<long>(vals.size()) != grid->count())
            throw ModelError(path + ": value table does not match the grid");
        Eigen::VectorXd values(vals.size());
        for (size_t i = 0; i < vals.size(); ++i) values(static_cast<long>(i)) = vals[i];

        const json& jp = doc.at("policy");
        const json& jk = jp.at("kernels");
        if (static_cast<long>(jk.size()) != grid->count())
            throw ModelError(path + ": policy table does not match the grid");
        const int nx = model.stateSpace()->size(), na = model.actionSpace()->size();
        RandomizedFeedbackPolicy pol;
        pol.grid = grid;
        pol.states = model.stateSpace();
        pol.actions = model.actionSpace();
        pol.kernels.reserve(jk.size());
        for (const auto& node_rows : jk) {
            if (static_cast<int>(node_rows.size()) != nx)
                throw ModelError(path + ": kernel row count mismatch");
            Eigen::MatrixXd rows(nx, na);
            for (int x = 0; x < nx; ++x) {
                const auto r = node_rows[x].get<std::vector<double>>();
                if (static_cast<int>(r.size()) != na)
                    throw ModelError(path + ": kernel column count mismatch");
                for (int a = 0; a < na; ++a) rows(x, a) = r[static_cast<size_t>(a)];
            }
            // validates that every row is a probability vector
            ProbabilityKernel k(model.stateSpace(), model.actionSpace(), std::move(rows));
            pol.kernels.push_back(k.matrix());
        }
        pol.epsilon = jp.at("epsilon").get<double>();
        pol.gain_bound = jp.at("gain_bound").get<double>();

        const json& jr = doc.at("report");
        SolveReport rep;
        rep.iterations = jr.at("iterations").get<int>();
        rep.residual = jr.at("residual").get<double>();
        rep.tolerance = jr.at("tolerance").get<double>();
        rep.eta = jr.at("eta").get<double>();
        rep.gamma = jr.at("gamma").get<double>();
        rep.k_star = jr.at("k_star").get<double>();
        rep.grid_error = jr.at("grid_error").get<double>();
        rep.residual_error = jr.at("residual_error").get<double>();
        rep.error_bound = jr.at("error_bound").get<double>();
        rep.policy_epsilon = jr.at("policy_epsilon").get<double>();
        rep.policy_gain_bound = jr.at("policy_gain_bound").get<double>();
        rep.lipschitz.K_F = jr.at("lipschitz").at("K_F").get<double>();
        rep.lipschitz.K_f = jr.at("lipschitz").at("K_f").get<double>();
        rep.lipschitz.gamma = rep.gamma;

        art.value = ValueFunction{grid, std::move(values)};
        art.policy = std::move(pol);
        art.report = std::move(rep);
        return art;
    } catch (const json::exception& e) {
        throw ModelError(path + ": malformed artifact: " + e.what());
    }
}

}  // namespace mfmdp
