#include "mfmdp/openloop.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfmdp/errors.hpp"

namespace mfmdp {

namespace {

struct Node {
    double v;
    int choice;  // 0..na-1: constant action; na: copy the latest draw
};

class ScriptSearch {
public:
    ScriptSearch(const MeanFieldModel& model, int T, long max_nodes)
        : m_(model),
          T_(T),
          max_nodes_(max_nodes),
          nx_(model.stateSpace()->size()),
          na_(model.actionSpace()->size()),
          ne_(model.idioSpace()->size()) {
        if (model.commonSpace()->size() != 1)
            throw ModelError(
                "the open-loop script search needs a deterministic common noise "
                "(a single-point common-noise space)");
        if (T < 0) throw UsageError("--horizon must be >= 0");
        copy_ok_ = true;
        e2a_.resize(static_cast<size_t>(ne_));
        for (int e = 0; e < ne_; ++e) {
            int a = model.actionSpace()->indexOf(model.idioSpace()->label(e));
            if (a < 0) copy_ok_ = false;
            e2a_[static_cast<size_t>(e)] = a;
        }
        memo_.resize(static_cast<size_t>(std::max(T, 1)));
    }

    double run(const DiscreteMeasure& mu0) {
        Eigen::MatrixXd M(nx_, ne_);
        for (int x = 0; x < nx_; ++x)
            for (int e = 0; e < ne_; ++e) M(x, e) = mu0.w(x) * m_.idioLaw().w(e);
        start_ = M;
        return value(0, M);
    }

    OpenLoopScript rebuild() const {
        OpenLoopScript s;
        Eigen::MatrixXd M = start_;
        for (int t = 0; t < T_; ++t) {
            const Node& n = memo_[static_cast<size_t>(t)].at(key(M));
            s.steps.push_back(n.choice == na_
                                  ? ScriptStep{ScriptStep::Kind::CopyNoise, 0}
                                  : ScriptStep{ScriptStep::Kind::Const, n.choice});
            if (t + 1 < T_) M = successor(M, n.choice);
        }
        s.tail = s.steps.empty() ? ScriptStep{ScriptStep::Kind::Const, 0} : s.steps.back();
        return s;
    }

    long nodes() const { return nodes_; }

private:
    static std::string key(const Eigen::MatrixXd& M) {
        return {reinterpret_cast<const char*>(M.data()),
                static_cast<size_t>(M.size()) * sizeof(double)};
    }

    int actionOf(int choice, int e) const {
        return choice == na_ ? e2a_[static_cast<size_t>(e)] : choice;
    }

    Eigen::VectorXd jointOf(const Eigen::MatrixXd& M, int choice) const {
        Eigen::VectorXd nu = Eigen::VectorXd::Zero(nx_ * na_);
        for (int x = 0; x < nx_; ++x)
            for (int e = 0; e < ne_; ++e) nu(x * na_ + actionOf(choice, e)) += M(x, e);
        return nu;
    }

    Eigen::MatrixXd successor(const Eigen::MatrixXd& M, int choice) const {
        NuContext ctx = m_.prepareNu(joint_buf_ = jointOf(M, choice));
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(nx_, ne_);
        for (int x = 0; x < nx_; ++x)
            for (int e = 0; e < ne_; ++e) {
                if (M(x, e) == 0.0) continue;
                const int a = actionOf(choice, e);
                for (int ep = 0; ep < ne_; ++ep) {
                    double w = m_.idioLaw().w(ep);
                    if (w != 0.0) next(m_.transition(x, a, ep, 0, ctx), ep) += M(x, e) * w;
                }
            }
        return next;
    }

    double value(int t, const Eigen::MatrixXd& M) {
        if (t >= T_) return 0.0;
        auto& table = memo_[static_cast<size_t>(t)];
        std::string k = key(M);
        if (auto it = table.find(k); it != table.end()) return it->second.v;
        if (++nodes_ > max_nodes_)
            throw ResourceError("open-loop script search exceeds " +
                                std::to_string(max_nodes_) +
                                " nodes; reduce --horizon or the model size");
        double best = -std::numeric_limits<double>::infinity();
        int best_choice = 0;
        const int nopt = na_ + ((copy_ok_ && t >= 1) ? 1 : 0);
        for (int c = 0; c < nopt; ++c) {
            Eigen::VectorXd nu = jointOf(M, c);
            NuContext ctx = m_.prepareNu(nu);
            double cand = 0.0;
            for (int x = 0; x < nx_; ++x)
                for (int a = 0; a < na_; ++a)
                    if (nu(x * na_ + a) != 0.0) cand += nu(x * na_ + a) * m_.reward(x, a, ctx);
            if (t + 1 < T_) cand += m_.beta() * value(t + 1, successor(M, c));
            if (cand > best) {
                best = cand;
                best_choice = c;
            }
        }
        table.emplace(std::move(k), Node{best, best_choice});
        return best;
    }

    const MeanFieldModel& m_;
    int T_;
    long max_nodes_;
    int nx_, na_, ne_;
    bool copy_ok_ = false;
    std::vector<int> e2a_;
    std::vector<std::unordered_map<std::string, Node>> memo_;
    Eigen::MatrixXd start_;
    mutable Eigen::VectorXd joint_buf_;
    long nodes_ = 0;
};

}  // namespace

OpenLoopSearchResult openLoopSearch(const MeanFieldModel& model, const DiscreteMeasure& mu0,
                                    int T, long max_nodes) {
    ScriptSearch search(model, T, max_nodes);
    OpenLoopSearchResult res;
    res.value = search.run(mu0);
    res.script = search.rebuild();
    res.T = T;
    res.tail_bound = tailBound(model, T);
    res.nodes = search.nodes();
    return res;
}

OpenLoopBellmanDiagnostic openLoopBellmanResidual(const MeanFieldModel& model, int T,
                                                  long max_nodes) {
    if (T < 1) throw UsageError("--horizon must be >= 1");
    const DiscreteMeasure& mu0 = model.initial().mu0;
    OpenLoopBellmanDiagnostic diag;
    diag.T = T;
    diag.tail_bound = tailBound(model, T);
    diag.value = openLoopSearch(model, mu0, T, max_nodes).value;

    const int nx = model.stateSpace()->size(), na = model.actionSpace()->size(),
              ne = model.idioSpace()->size();
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < na; ++a) {
        Eigen::VectorXd nu = Eigen::VectorXd::Zero(nx * na);
        for (int x = 0; x < nx; ++x) nu(x * na + a) = mu0.w(x);
        NuContext ctx = model.prepareNu(nu);
        double fhat = 0.0;
        for (int x = 0; x < nx; ++x)
            if (mu0.w(x) != 0.0) fhat += mu0.w(x) * model.reward(x, a, ctx);
        Eigen::VectorXd succ = Eigen::VectorXd::Zero(nx);
        for (int x = 0; x < nx; ++x) {
            if (mu0.w(x) == 0.0) continue;
            for (int e = 0; e < ne; ++e) {
                double w = model.idioLaw().w(e);
                if (w != 0.0) succ(model.transition(x, a, e, 0, ctx)) += mu0.w(x) * w;
            }
        }
        double restart =
            openLoopSearch(model, DiscreteMeasure(model.stateSpace(), succ), T - 1, max_nodes)
                .value;
        double cand = fhat + model.beta() * restart;
        if (cand > best) {
            best = cand;
            best_a = a;
        }
    }
    diag.best_restart = best;
    diag.best_action = best_a;
    diag.residual = std::abs(diag.value - best);
    return diag;
}

}  // namespace mfmdp
