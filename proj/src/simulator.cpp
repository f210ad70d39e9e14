#include "mfmdp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mfmdp/errors.hpp"
#include "mfmdp/lifted.hpp"
#include "mfmdp/rng.hpp"
#include "mfmdp/transport.hpp"

namespace mfmdp {

SimPolicy SimPolicy::fromFeedback(RandomizedFeedbackPolicy p) {
    SimPolicy sp;
    sp.kind = Kind::Feedback;
    sp.feedback = std::move(p);
    return sp;
}

SimPolicy SimPolicy::fromScript(OpenLoopScript s) {
    SimPolicy sp;
    sp.kind = Kind::Script;
    sp.script = std::move(s);
    return sp;
}

RandomizedFeedbackPolicy constantPolicy(const MeanFieldModel& model, int action) {
    invariant(action >= 0 && action < model.actionSpace()->size(), "constant policy: bad action");
    RandomizedFeedbackPolicy pol;
    pol.grid = SimplexGrid::build(model.stateSpace(), 1);
    pol.states = model.stateSpace();
    pol.actions = model.actionSpace();
    Eigen::MatrixXd rows =
        Eigen::MatrixXd::Zero(model.stateSpace()->size(), model.actionSpace()->size());
    rows.col(action).setOnes();
    pol.kernels.assign(static_cast<size_t>(pol.grid->count()), rows);
    return pol;
}

OpenLoopScript builtinScript(const MeanFieldModel& model, const std::string& name) {
    if (name == "ex4_2_optimal") {
        int one = model.actionSpace()->indexOf("1");
        if (one < 0) throw UsageError("script ex4_2_optimal needs an action labeled \"1\"");
        OpenLoopScript s;
        s.steps = {ScriptStep{ScriptStep::Kind::Const, one},
                   ScriptStep{ScriptStep::Kind::CopyNoise, 0}};
        s.tail = ScriptStep{ScriptStep::Kind::Const, one};
        return s;
    }
    throw UsageError("unknown built-in script \"" + name + "\"");
}

int horizonForTail(const MeanFieldModel& model, double tol) {
    if (!(tol > 0.0)) throw UsageError("tolerance for the horizon rule must be positive");
    const double beta = model.beta(), bound = model.rewardBound();
    if (beta == 0.0 || bound == 0.0) return 1;
    const double target = tol / 10.0 * (1.0 - beta) / bound;
    int T = 1;
    double tail = beta;
    while (tail >= target) {
        tail *= beta;
        if (++T > 1000000) throw ResourceError("horizon rule needs more than 1e6 steps");
    }
    return T;
}

double tailBound(const MeanFieldModel& model, int T) {
    return std::pow(model.beta(), T) * model.rewardBound() / (1.0 - model.beta());
}

namespace {

// exact conditional-law path along one common-noise path, plus its discounted gain
struct LawPath {
    std::vector<Eigen::VectorXd> nu;  // joint (state, action) law, per step
    std::vector<Eigen::VectorXd> mu;  // state law, per step
    std::vector<long> node;           // policy grid node per step (feedback policies)
    double gain = 0.0;
};

std::vector<int> noiseActionMap(const MeanFieldModel& model) {
    std::vector<int> map(static_cast<size_t>(model.idioSpace()->size()));
    for (int e = 0; e < model.idioSpace()->size(); ++e) {
        int a = model.actionSpace()->indexOf(model.idioSpace()->label(e));
        if (a < 0)
            throw UsageError("script copies the noise into the action, but noise point \"" +
                             model.idioSpace()->label(e) + "\" is not an action label");
        map[static_cast<size_t>(e)] = a;
    }
    return map;
}

void validateScript(const MeanFieldModel& model, const OpenLoopScript& script) {
    if (script.at(0).kind == ScriptStep::Kind::CopyNoise)
        throw UsageError("open-loop scripts cannot copy the noise at step 0 (nothing drawn yet)");
    auto checkAction = [&](const ScriptStep& s) {
        if (s.kind == ScriptStep::Kind::Const &&
            (s.action < 0 || s.action >= model.actionSpace()->size()))
            throw UsageError("open-loop script references an unknown action");
    };
    for (const auto& s : script.steps) checkAction(s);
    checkAction(script.tail);
    bool copies = script.tail.kind == ScriptStep::Kind::CopyNoise;
    for (const auto& s : script.steps) copies = copies || s.kind == ScriptStep::Kind::CopyNoise;
    if (copies) noiseActionMap(model);  // throws when labels do not line up
}

LawPath feedbackLawPath(const MeanFieldModel& model, const RandomizedFeedbackPolicy& pol,
                        const std::vector<int>& e0path, int T) {
    LawPath lp;
    lp.nu.reserve(static_cast<size_t>(T));
    lp.mu.reserve(static_cast<size_t>(T));
    lp.node.reserve(static_cast<size_t>(T));
    const int na = model.actionSpace()->size();
    DiscreteMeasure mu = model.initial().mu0;
    double bp = 1.0;
    for (int t = 0; t < T; ++t) {
        long node = pol.nodeOf(mu);
        ProbabilityKernel k(model.stateSpace(), model.actionSpace(), pol.kernelAt(node));
        LiftedStep st = liftStep(model, mu, k);
        Eigen::VectorXd nu(mu.size() * na);
        for (int x = 0; x < mu.size(); ++x)
            nu.segment(x * na, na) = mu.w(x) * pol.kernelAt(node).row(x);
        lp.nu.push_back(std::move(nu));
        lp.mu.push_back(mu.weights());
        lp.node.push_back(node);
        lp.gain += bp * st.reward;
        bp *= model.beta();
        if (t + 1 < T) mu = st.next[static_cast<size_t>(e0path[static_cast<size_t>(t)])];
    }
    return lp;
}

LawPath scriptLawPath(const MeanFieldModel& model, const OpenLoopScript& script,
                      const std::vector<int>& e0path, int T) {
    LawPath lp;
    const int nx = model.stateSpace()->size(), na = model.actionSpace()->size(),
              ne = model.idioSpace()->size();
    bool copies = script.tail.kind == ScriptStep::Kind::CopyNoise;
    for (const auto& s : script.steps) copies = copies || s.kind == ScriptStep::Kind::CopyNoise;
    const std::vector<int> e2a = copies ? noiseActionMap(model) : std::vector<int>();

    // law over (state, latest idiosyncratic draw); the step-0 noise coordinate is
    // a dummy (scripts cannot read it at t = 0)
    Eigen::MatrixXd M(nx, ne);
    for (int x = 0; x < nx; ++x)
        for (int e = 0; e < ne; ++e) M(x, e) = model.initial().mu0.w(x) * model.idioLaw().w(e);

    double bp = 1.0;
    for (int t = 0; t < T; ++t) {
        const ScriptStep& step = script.at(t);
        auto actionOf = [&](int e) {
            return step.kind == ScriptStep::Kind::Const ? step.action : e2a[static_cast<size_t>(e)];
        };
        Eigen::VectorXd nu = Eigen::VectorXd::Zero(nx * na);
        for (int x = 0; x < nx; ++x)
            for (int e = 0; e < ne; ++e) nu(x * na + actionOf(e)) += M(x, e);
        NuContext ctx = model.prepareNu(nu);
        double fhat = 0.0;
        for (int x = 0; x < nx; ++x)
            for (int a = 0; a < na; ++a)
                if (nu(x * na + a) != 0.0) fhat += nu(x * na + a) * model.reward(x, a, ctx);
        lp.gain += bp * fhat;
        bp *= model.beta();
        lp.mu.emplace_back(M.rowwise().sum());
        if (t + 1 < T) {
            const int e0 = e0path[static_cast<size_t>(t)];
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(nx, ne);
            for (int x = 0; x < nx; ++x)
                for (int e = 0; e < ne; ++e) {
                    if (M(x, e) == 0.0) continue;
                    const int a = actionOf(e);
                    for (int ep = 0; ep < ne; ++ep) {
                        double w = model.idioLaw().w(ep);
                        if (w == 0.0) continue;
                        next(model.transition(x, a, ep, e0, ctx), ep) += M(x, e) * w;
                    }
                }
            M = std::move(next);
        }
        lp.nu.push_back(std::move(nu));
    }
    return lp;
}

LawPath lawPath(const MeanFieldModel& model, const SimPolicy& policy,
                const std::vector<int>& e0path, int T) {
    return policy.kind == SimPolicy::Kind::Feedback
               ? feedbackLawPath(model, policy.feedback, e0path, T)
               : scriptLawPath(model, policy.script, e0path, T);
}

void validatePolicy(const MeanFieldModel& model, const SimPolicy& policy) {
    if (policy.kind == SimPolicy::Kind::Feedback) {
        invariant(!policy.feedback.kernels.empty(), "feedback policy has no kernels");
        if (!policy.feedback.deterministic() &&
            model.initial().info == InitialCondition::InfoMode::Trivial)
            throw ModelError(
                "randomized feedback policies need rich initial information; this model's "
                "initial information is trivial");
    } else {
        validateScript(model, policy.script);
    }
}

void validateConfig(const RunConfig& cfg) {
    if (cfg.N < 1) throw UsageError("--agents must be >= 1");
    if (cfg.replications < 1) throw UsageError("--replications must be >= 1");
    if (cfg.T < 0) throw UsageError("--horizon must be >= 0");
    if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
}

double ci95(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return 1.96 * std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                            static_cast<double>(xs.size()));
}

}  // namespace

NAgentResult simulateNAgent(const MeanFieldModel& model, const SimPolicy& policy,
                            const RunConfig& cfg) {
    validateConfig(cfg);
    validatePolicy(model, policy);
    const int T = cfg.T > 0 ? cfg.T : horizonForTail(model, cfg.tol);
    const int N = cfg.N, R = cfg.replications;
    const int nx = model.stateSpace()->size(), na = model.actionSpace()->size(),
              ne = model.idioSpace()->size();
    const bool script = policy.kind == SimPolicy::Kind::Script;
    const std::vector<int> e2a = [&] {
        if (!script) return std::vector<int>();
        bool copies = policy.script.tail.kind == ScriptStep::Kind::CopyNoise;
        for (const auto& s : policy.script.steps)
            copies = copies || s.kind == ScriptStep::Kind::CopyNoise;
        return copies ? noiseActionMap(model) : std::vector<int>();
    }();
    const SpacePtr joint = model.productXA().joint();

    NAgentResult res;
    res.T = T;
    res.tail_bound = tailBound(model, T);
    res.rep_gains.assign(static_cast<size_t>(R), 0.0);
    res.rep_wdist.assign(static_cast<size_t>(R), 0.0);

    auto runRep = [&](int r) {
        RngStream common(cfg.seed, streamId(StreamPurpose::CommonNoise, r, 0));
        std::vector<int> e0path(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t)
            e0path[static_cast<size_t>(t)] =
                model.commonLaw().sampleIndex(common.uniform(static_cast<uint64_t>(t)));
        LawPath lp = lawPath(model, policy, e0path, T);

        std::vector<RngStream> init_s, idio_s, pol_s;
        init_s.reserve(static_cast<size_t>(N));
        idio_s.reserve(static_cast<size_t>(N));
        pol_s.reserve(static_cast<size_t>(N));
        for (int i = 0; i < N; ++i) {
            init_s.emplace_back(cfg.seed, streamId(StreamPurpose::InitialState, r, i));
            idio_s.emplace_back(cfg.seed, streamId(StreamPurpose::IdioNoise, r, i));
            pol_s.emplace_back(cfg.seed, streamId(StreamPurpose::PolicyRandomizer, r, i));
        }
        std::vector<int> phys(static_cast<size_t>(N)), shadow(static_cast<size_t>(N)),
            last_e(static_cast<size_t>(N), -1), act(static_cast<size_t>(N));
        for (int i = 0; i < N; ++i) {
            phys[static_cast<size_t>(i)] = model.initial().mu0.sampleIndex(
                init_s[static_cast<size_t>(i)].uniform(0));
            shadow[static_cast<size_t>(i)] = phys[static_cast<size_t>(i)];
        }

        const bool record = r == 0 && (cfg.keep_trajectories || cfg.keep_law_path);
        std::vector<AgentTrajectory> trajs;
        if (r == 0 && cfg.keep_trajectories) {
            trajs.resize(static_cast<size_t>(N));
            for (auto& tr : trajs) {
                tr.states.reserve(static_cast<size_t>(T));
                tr.actions.reserve(static_cast<size_t>(T));
                tr.rewards.reserve(static_cast<size_t>(T));
            }
        }

        double gain = 0.0, wsum = 0.0, bp = 1.0;
        for (int t = 0; t < T; ++t) {
            // actions
            if (!script) {
                const long node = lp.node[static_cast<size_t>(t)];
                for (int i = 0; i < N; ++i)
                    act[static_cast<size_t>(i)] = policy.feedback.sampleAction(
                        node, shadow[static_cast<size_t>(i)],
                        pol_s[static_cast<size_t>(i)].uniform(static_cast<uint64_t>(t)));
            } else {
                const ScriptStep& step = policy.script.at(t);
                for (int i = 0; i < N; ++i)
                    act[static_cast<size_t>(i)] =
                        step.kind == ScriptStep::Kind::Const
                            ? step.action
                            : e2a[static_cast<size_t>(last_e[static_cast<size_t>(i)])];
            }
            // empirical joint law
            Eigen::VectorXd nu_hat = Eigen::VectorXd::Zero(nx * na);
            for (int i = 0; i < N; ++i)
                nu_hat(phys[static_cast<size_t>(i)] * na + act[static_cast<size_t>(i)]) += 1.0;
            nu_hat /= static_cast<double>(N);
            NuContext ctx_hat = model.prepareNu(nu_hat);

            Eigen::MatrixXd f_xa(nx, na);
            for (int x = 0; x < nx; ++x)
                for (int a = 0; a < na; ++a) f_xa(x, a) = model.reward(x, a, ctx_hat);
            double step_reward = 0.0;
            for (int i = 0; i < N; ++i)
                step_reward += f_xa(phys[static_cast<size_t>(i)], act[static_cast<size_t>(i)]);
            step_reward /= static_cast<double>(N);
            gain += bp * step_reward;

            wsum += bp * wassersteinCost(DiscreteMeasure(joint, nu_hat),
                                         DiscreteMeasure(joint, lp.nu[static_cast<size_t>(t)]));

            if (record && cfg.keep_trajectories)
                for (int i = 0; i < N; ++i) {
                    auto& tr = trajs[static_cast<size_t>(i)];
                    tr.states.push_back(phys[static_cast<size_t>(i)]);
                    tr.actions.push_back(act[static_cast<size_t>(i)]);
                    tr.rewards.push_back(f_xa(phys[static_cast<size_t>(i)],
                                              act[static_cast<size_t>(i)]));
                }
            if (r == 0 && cfg.keep_law_path) {
                res.empirical_joint_path.push_back(nu_hat);
                res.exact_joint_path.push_back(lp.nu[static_cast<size_t>(t)]);
            }

            if (t + 1 < T) {
                const int e0 = e0path[static_cast<size_t>(t)];
                NuContext ctx_exact = model.prepareNu(lp.nu[static_cast<size_t>(t)]);
                std::vector<int> tt_hat(static_cast<size_t>(nx * na * ne)),
                    tt_exact(static_cast<size_t>(nx * na * ne));
                for (int x = 0; x < nx; ++x)
                    for (int a = 0; a < na; ++a)
                        for (int e = 0; e < ne; ++e) {
                            tt_hat[static_cast<size_t>((x * na + a) * ne + e)] =
                                model.transition(x, a, e, e0, ctx_hat);
                            tt_exact[static_cast<size_t>((x * na + a) * ne + e)] =
                                model.transition(x, a, e, e0, ctx_exact);
                        }
                for (int i = 0; i < N; ++i) {
                    const int e = model.idioLaw().sampleIndex(
                        idio_s[static_cast<size_t>(i)].uniform(static_cast<uint64_t>(t)));
                    const int a = act[static_cast<size_t>(i)];
                    phys[static_cast<size_t>(i)] = tt_hat[static_cast<size_t>(
                        (phys[static_cast<size_t>(i)] * na + a) * ne + e)];
                    shadow[static_cast<size_t>(i)] = tt_exact[static_cast<size_t>(
                        (shadow[static_cast<size_t>(i)] * na + a) * ne + e)];
                    last_e[static_cast<size_t>(i)] = e;
                }
            }
            bp *= model.beta();
        }
        res.rep_gains[static_cast<size_t>(r)] = gain;
        const double beta = model.beta();
        const double norm = beta == 1.0 ? T : (1.0 - std::pow(beta, T)) / (1.0 - beta);
        res.rep_wdist[static_cast<size_t>(r)] = norm > 0 ? wsum / norm : 0.0;
        if (r == 0 && cfg.keep_trajectories) res.trajectories = std::move(trajs);
    };

    const int nt = std::max(1, std::min(cfg.threads, R));
    if (nt == 1) {
        for (int r = 0; r < R; ++r) runRep(r);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(static_cast<size_t>(nt));
        for (int w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int r = w; r < R; r += nt) runRep(r);
                } catch (...) {
                    errs[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    double mean = 0.0;
    for (double g : res.rep_gains) mean += g;
    mean /= static_cast<double>(R);
    res.mean_gain = mean;
    res.ci95 = ci95(res.rep_gains, mean);
    return res;
}

MkvResult simulateMkv(const MeanFieldModel& model, const SimPolicy& policy,
                      const RunConfig& cfg) {
    validateConfig(cfg);
    validatePolicy(model, policy);
    const int T = cfg.T > 0 ? cfg.T : horizonForTail(model, cfg.tol);
    const int ne0 = model.commonSpace()->size();
    MkvResult res;
    res.T = T;
    res.tail_bound = tailBound(model, T);

    const int steps = std::max(0, T - 1);
    double npaths = std::pow(static_cast<double>(ne0), steps);
    if (npaths <= 4096.0) {
        res.exact = true;
        double gain = 0.0;
        unsigned long total = static_cast<unsigned long>(npaths);
        bool first = true;
        for (unsigned long p = 0; p < total; ++p) {
            std::vector<int> e0path(static_cast<size_t>(T), 0);
            unsigned long q = p;
            double weight = 1.0;
            for (int t = 0; t < steps; ++t) {
                e0path[static_cast<size_t>(t)] = static_cast<int>(q % ne0);
                q /= static_cast<unsigned>(ne0);
                weight *= model.commonLaw().w(e0path[static_cast<size_t>(t)]);
            }
            if (weight == 0.0) continue;
            LawPath lp = lawPath(model, policy, e0path, T);
            gain += weight * lp.gain;
            if (first) {
                for (const auto& m : lp.mu)
                    res.law_path.emplace_back(model.stateSpace(), m);
                first = false;
            }
        }
        res.gain = gain;
    } else {
        res.exact = false;
        double gain = 0.0;
        for (int r = 0; r < cfg.replications; ++r) {
            RngStream common(cfg.seed, streamId(StreamPurpose::CommonNoise, r, 0));
            std::vector<int> e0path(static_cast<size_t>(T));
            for (int t = 0; t < T; ++t)
                e0path[static_cast<size_t>(t)] =
                    model.commonLaw().sampleIndex(common.uniform(static_cast<uint64_t>(t)));
            LawPath lp = lawPath(model, policy, e0path, T);
            gain += lp.gain;
            if (r == 0)
                for (const auto& m : lp.mu)
                    res.law_path.emplace_back(model.stateSpace(), m);
        }
        res.gain = gain / cfg.replications;
    }
    return res;
}

FitResult fitLogLog(const std::vector<double>& xs, const std::vector<double>& ys) {
    invariant(xs.size() == ys.size(), "fit: length mismatch");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < xs.size(); ++i)
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    FitResult fit;
    const size_t n = lx.size();
    if (n < 2) return fit;  // degenerate: slope 0, r2 1
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += e * e;
    }
    fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

RateReport empiricalMeasureRate(const DiscreteMeasure& nu, const std::vector<long>& Ns, int R,
                                uint64_t seed) {
    if (Ns.empty()) throw UsageError("need at least one N");
    for (size_t i = 1; i < Ns.size(); ++i)
        if (Ns[i] <= Ns[i - 1]) throw UsageError("N values must be strictly increasing");
    if (Ns.front() < 1) throw UsageError("N values must be >= 1");
    if (R < 30) throw UsageError("the rate experiment needs at least 30 replications");

    RateReport report;
    const int n = nu.size();
    for (size_t ni = 0; ni < Ns.size(); ++ni) {
        RatePoint pt;
        pt.N = Ns[ni];
        for (int r = 0; r < R; ++r) {
            RngStream s(seed, streamId(StreamPurpose::Generic, r, static_cast<int>(ni)));
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
            for (long k = 0; k < pt.N; ++k)
                counts(nu.sampleIndex(s.uniform(static_cast<uint64_t>(k)))) += 1.0;
            counts /= static_cast<double>(pt.N);
            pt.samples.push_back(wassersteinCost(DiscreteMeasure(nu.space(), counts), nu));
        }
        for (double w : pt.samples) pt.mean_w += w;
        pt.mean_w /= R;
        pt.ci95 = ci95(pt.samples, pt.mean_w);
        report.points.push_back(std::move(pt));
    }
    std::vector<double> xs, ys;
    for (const auto& pt : report.points) {
        xs.push_back(static_cast<double>(pt.N));
        ys.push_back(pt.mean_w);
    }
    report.fit = fitLogLog(xs, ys);
    return report;
}

ChaosReport chaosExperiment(const MeanFieldModel& model, const SimPolicy& policy,
                            const std::vector<long>& Ns, const RunConfig& cfg) {
    if (Ns.empty()) throw UsageError("need at least one N");
    for (size_t i = 1; i < Ns.size(); ++i)
        if (Ns[i] <= Ns[i - 1]) throw UsageError("N values must be strictly increasing");
    validateConfig(cfg);

    ChaosReport report;
    RunConfig base = cfg;
    base.T = cfg.T > 0 ? cfg.T : horizonForTail(model, cfg.tol);
    report.T = base.T;
    report.tail_bound = tailBound(model, base.T);

    MkvResult mkv = simulateMkv(model, policy, base);
    report.v_pi = mkv.gain;
    report.v_pi_exact = mkv.exact;

    for (long N : Ns) {
        RunConfig c = base;
        c.N = static_cast<int>(N);
        NAgentResult r = simulateNAgent(model, policy, c);
        ChaosPoint pt;
        pt.N = N;
        pt.mean_gain = r.mean_gain;
        pt.ci95 = r.ci95;
        pt.gap = std::abs(r.mean_gain - report.v_pi);
        for (double w : r.rep_wdist) pt.mean_wdist += w;
        pt.mean_wdist /= static_cast<double>(r.rep_wdist.size());
        pt.rep_gains = std::move(r.rep_gains);
        pt.rep_wdist = std::move(r.rep_wdist);
        report.points.push_back(std::move(pt));
    }
    std::vector<double> xs, ys;
    for (const auto& pt : report.points) {
        xs.push_back(static_cast<double>(pt.N));
        ys.push_back(pt.gap);
    }
    report.gap_fit = fitLogLog(xs, ys);
    return report;
}

}  // namespace mfmdp
