// mfmdp: solve mean-field MDPs on the probability simplex and validate the
// resulting policies against finite-agent Monte Carlo.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "mfmdp/errors.hpp"
#include "mfmdp/model.hpp"
#include "mfmdp/openloop.hpp"
#include "mfmdp/simulator.hpp"
#include "mfmdp/solver.hpp"

using nlohmann::json;
using namespace mfmdp;

namespace {

constexpr const char* kToolVersion = "1.0.0";

int defaultThreads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

MeanFieldModel loadModel(const std::string& ref, int grid_per_unit) {
    for (const auto& name : builtinExampleNames())
        if (name == ref) return MeanFieldModel::fromJson(builtinExampleJson(name, grid_per_unit));
    return MeanFieldModel::fromFile(ref);
}

std::vector<long> parseAgentList(const std::string& s) {
    std::vector<long> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (tok.empty()) throw UsageError("--agents: empty entry in list \"" + s + "\"");
        try {
            size_t used = 0;
            long v = std::stol(tok, &used);
            if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("--agents: \"" + tok + "\" is not a positive integer");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

SimPolicy resolvePolicy(const MeanFieldModel& model, const std::string& ref) {
    if (ref.rfind("const:", 0) == 0) {
        std::string label = ref.substr(6);
        int a = model.actionSpace()->indexOf(label);
        if (a < 0) throw UsageError("const policy: \"" + label + "\" is not an action label");
        return SimPolicy::fromFeedback(constantPolicy(model, a));
    }
    if (std::filesystem::exists(ref))
        return SimPolicy::fromFeedback(loadArtifact(ref, model).policy);
    if (ref.size() >= 5 && ref.compare(ref.size() - 5, 5, ".json") == 0)
        throw UsageError("policy artifact \"" + ref + "\" does not exist");
    return SimPolicy::fromScript(builtinScript(model, ref));
}

void writeText(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot open \"" + path + "\" for writing");
    out << text;
    if (!out) throw UsageError("failed while writing \"" + path + "\"");
}

void writeJson(const std::string& path, const json& doc) { writeText(path, doc.dump(2) + "\n"); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void writeManifest(const std::string& out_prefix, const std::string& command,
                   const std::string& model_ref, const MeanFieldModel& model, json knobs) {
    json doc{{"format", "mfmdp-manifest-v1"},
             {"tool_version", kToolVersion},
             {"command", command},
             {"model", json{{"ref", model_ref}, {"hash", hashHex(modelHash(model))}}},
             {"knobs", std::move(knobs)}};
    writeJson(out_prefix + ".manifest.json", doc);
}

std::string describeStep(const MeanFieldModel& model, const ScriptStep& s) {
    return s.kind == ScriptStep::Kind::CopyNoise ? "copy-noise"
                                                 : model.actionSpace()->label(s.action);
}

// shared flag bundle
struct Common {
    std::string model_ref;
    std::string policy_ref;
    std::string out;
    double tol = 1e-3;
    int horizon = 0;
    int agents = 1000;
    std::string agents_list;
    int replications = 30;
    uint64_t seed = 1;
    int threads = defaultThreads();
    int grid_per_unit = 11;
};

void addModelFlag(CLI::App* cmd, Common& c) {
    cmd->add_option("--model", c.model_ref, "built-in example name or model JSON path")
        ->required()
        ->envname("MFMDP_MODEL");
}

int cmdSolve(const Common& c, const SolveOptions& opt_in) {
    MeanFieldModel model = loadModel(c.model_ref, c.grid_per_unit);
    SolveOptions opt = opt_in;
    opt.threads = c.threads;
    SolveResult res = solve(model, opt);

    std::string out = c.out.empty() ? "artifact.json" : c.out;
    saveArtifact(out, model, res, opt);
    writeManifest(out, "solve", c.model_ref, model,
                  json{{"n_eta", opt.n_eta},
                       {"n_actions_grid", opt.n_actions_grid},
                       {"feedback_only", opt.feedback_only},
                       {"method", opt.method},
                       {"tol", opt.tol}});

    const SolveReport& r = res.report;
    long node0 = res.grid->projectIndex(model.initial().mu0);
    std::printf("model = %s (hash %s)\n", model.name().c_str(),
                hashHex(modelHash(model)).c_str());
    std::printf("grid nodes = %ld, eta = %s, kernels = %llu\n", res.grid->count(),
                fmt(r.eta).c_str(), res.kernels->count());
    std::printf("iterations = %d, residual = %s\n", r.iterations, fmt(r.residual).c_str());
    std::printf("V(initial law) = %s\n", fmt(res.value.at(node0)).c_str());
    std::printf("error bound = %s (grid %s + residual %s)\n", fmt(r.error_bound).c_str(),
                fmt(r.grid_error).c_str(), fmt(r.residual_error).c_str());
    std::printf("policy epsilon = %s, gain bound = %s\n", fmt(r.policy_epsilon).c_str(),
                fmt(r.policy_gain_bound).c_str());
    std::printf("artifact = %s\n", out.c_str());
    return 0;
}

int cmdSimulate(const Common& c) {
    MeanFieldModel model = loadModel(c.model_ref, c.grid_per_unit);
    SimPolicy policy = resolvePolicy(model, c.policy_ref);
    RunConfig cfg;
    cfg.N = c.agents;
    cfg.T = c.horizon;
    cfg.replications = c.replications;
    cfg.seed = c.seed;
    cfg.tol = c.tol;
    cfg.threads = c.threads;

    MkvResult mkv = simulateMkv(model, policy, cfg);
    cfg.T = mkv.T;  // same truncation for both systems
    NAgentResult sim = simulateNAgent(model, policy, cfg);

    std::string csv = "N,replication,gain,gap,w_distance\n";
    for (int r = 0; r < cfg.replications; ++r) {
        csv += std::to_string(cfg.N) + "," + std::to_string(r) + "," +
               fmt(sim.rep_gains[static_cast<size_t>(r)]) + "," +
               fmt(std::abs(sim.rep_gains[static_cast<size_t>(r)] - mkv.gain)) + "," +
               fmt(sim.rep_wdist[static_cast<size_t>(r)]) + "\n";
    }
    double mean_w = 0.0;
    for (double w : sim.rep_wdist) mean_w += w;
    mean_w /= static_cast<double>(sim.rep_wdist.size());

    json summary{{"format", "mfmdp-simulate-summary-v1"},
                 {"model_hash", hashHex(modelHash(model))},
                 {"policy", c.policy_ref},
                 {"N", cfg.N},
                 {"T", sim.T},
                 {"replications", cfg.replications},
                 {"seed", cfg.seed},
                 {"tail_bound", sim.tail_bound},
                 {"mean_gain", sim.mean_gain},
                 {"ci95", sim.ci95},
                 {"limit_gain", mkv.gain},
                 {"limit_exact", mkv.exact},
                 {"gap", std::abs(sim.mean_gain - mkv.gain)},
                 {"mean_w_distance", mean_w}};

    if (!c.out.empty()) {
        writeText(c.out + ".csv", csv);
        writeJson(c.out + ".json", summary);
        writeManifest(c.out, "simulate", c.model_ref, model,
                      json{{"policy", c.policy_ref},
                           {"agents", cfg.N},
                           {"horizon", c.horizon},
                           {"replications", cfg.replications},
                           {"seed", cfg.seed},
                           {"tol", cfg.tol}});
    }
    std::printf("T = %d (tail bound %s)\n", sim.T, fmt(sim.tail_bound).c_str());
    std::printf("mean gain = %s +- %s (N = %d, R = %d)\n", fmt(sim.mean_gain).c_str(),
                fmt(sim.ci95).c_str(), cfg.N, cfg.replications);
    std::printf("limit gain = %s (%s)\n", fmt(mkv.gain).c_str(),
                mkv.exact ? "exact law propagation" : "Monte Carlo over common-noise paths");
    std::printf("gap = %s\n", fmt(std::abs(sim.mean_gain - mkv.gain)).c_str());
    return 0;
}

int cmdConverge(const Common& c) {
    MeanFieldModel model = loadModel(c.model_ref, c.grid_per_unit);
    SimPolicy policy = resolvePolicy(model, c.policy_ref);
    std::vector<long> Ns = parseAgentList(c.agents_list);
    RunConfig cfg;
    cfg.T = c.horizon;
    cfg.replications = c.replications;
    cfg.seed = c.seed;
    cfg.tol = c.tol;
    cfg.threads = c.threads;

    ChaosReport report = chaosExperiment(model, policy, Ns, cfg);

    std::string csv = "N,replication,gain,gap,w_distance\n";
    for (const auto& pt : report.points)
        for (size_t r = 0; r < pt.rep_gains.size(); ++r)
            csv += std::to_string(pt.N) + "," + std::to_string(r) + "," + fmt(pt.rep_gains[r]) +
                   "," + fmt(std::abs(pt.rep_gains[r] - report.v_pi)) + "," +
                   fmt(pt.rep_wdist[r]) + "\n";

    json points = json::array();
    for (const auto& pt : report.points)
        points.push_back(json{{"N", pt.N},
                              {"mean_gain", pt.mean_gain},
                              {"ci95", pt.ci95},
                              {"gap", pt.gap},
                              {"mean_w_distance", pt.mean_wdist}});
    json summary{{"format", "mfmdp-converge-summary-v1"},
                 {"model_hash", hashHex(modelHash(model))},
                 {"policy", c.policy_ref},
                 {"T", report.T},
                 {"replications", cfg.replications},
                 {"seed", cfg.seed},
                 {"tail_bound", report.tail_bound},
                 {"limit_gain", report.v_pi},
                 {"limit_exact", report.v_pi_exact},
                 {"points", points},
                 {"gap_fit", json{{"slope", report.gap_fit.slope},
                                  {"intercept", report.gap_fit.intercept},
                                  {"r2", report.gap_fit.r2}}}};

    if (!c.out.empty()) {
        writeText(c.out + ".csv", csv);
        writeJson(c.out + ".json", summary);
        writeManifest(c.out, "converge", c.model_ref, model,
                      json{{"policy", c.policy_ref},
                           {"agents", c.agents_list},
                           {"horizon", c.horizon},
                           {"replications", cfg.replications},
                           {"seed", cfg.seed},
                           {"tol", cfg.tol}});
    }
    std::printf("T = %d (tail bound %s), limit gain = %s\n", report.T,
                fmt(report.tail_bound).c_str(), fmt(report.v_pi).c_str());
    for (const auto& pt : report.points)
        std::printf("N = %-8ld mean gain = %-12s gap = %-12s mean W = %s\n", pt.N,
                    fmt(pt.mean_gain).c_str(), fmt(pt.gap).c_str(), fmt(pt.mean_wdist).c_str());
    std::printf("gap slope = %s (r2 = %s)\n", fmt(report.gap_fit.slope).c_str(),
                fmt(report.gap_fit.r2).c_str());
    return 0;
}

int cmdEvaluate(const Common& c) {
    MeanFieldModel model = loadModel(c.model_ref, c.grid_per_unit);
    const int T = c.horizon > 0 ? c.horizon : horizonForTail(model, c.tol);

    if (!c.policy_ref.empty()) {
        SimPolicy policy = resolvePolicy(model, c.policy_ref);
        RunConfig cfg;
        cfg.T = T;
        cfg.replications = c.replications;
        cfg.seed = c.seed;
        cfg.tol = c.tol;
        MkvResult mkv = simulateMkv(model, policy, cfg);
        std::printf("policy = %s\n", c.policy_ref.c_str());
        std::printf("T = %d (tail bound %s)\n", mkv.T, fmt(mkv.tail_bound).c_str());
        std::printf("value = %s (%s)\n", fmt(mkv.gain).c_str(),
                    mkv.exact ? "exact law propagation"
                              : "Monte Carlo over common-noise paths");
        if (!c.out.empty()) {
            json summary{{"format", "mfmdp-evaluate-summary-v1"},
                         {"model_hash", hashHex(modelHash(model))},
                         {"policy", c.policy_ref},
                         {"T", mkv.T},
                         {"tail_bound", mkv.tail_bound},
                         {"value", mkv.gain},
                         {"exact", mkv.exact}};
            writeJson(c.out + ".json", summary);
            writeManifest(c.out, "evaluate", c.model_ref, model,
                          json{{"policy", c.policy_ref},
                               {"horizon", c.horizon},
                               {"replications", c.replications},
                               {"seed", c.seed},
                               {"tol", c.tol}});
        }
        return 0;
    }

    // no policy: search scripted open-loop controls and report the one-step
    // decomposition residual of the searched value
    OpenLoopSearchResult best = openLoopSearch(model, model.initial().mu0, T);
    OpenLoopBellmanDiagnostic diag = openLoopBellmanResidual(model, T);
    std::printf("T = %d (tail bound %s)\n", best.T, fmt(best.tail_bound).c_str());
    std::printf("open-loop value = %s (searched %ld law nodes)\n", fmt(best.value).c_str(),
                best.nodes);
    std::string steps;
    for (const auto& s : best.script.steps)
        steps += (steps.empty() ? "" : ", ") + describeStep(model, s);
    std::printf("best script = [%s], tail = %s\n", steps.c_str(),
                describeStep(model, best.script.tail).c_str());
    std::printf("one-step decomposition: best restart value = %s (action %s)\n",
                fmt(diag.best_restart).c_str(),
                model.actionSpace()->label(diag.best_action).c_str());
    std::printf("bellman residual = %s%s\n", fmt(diag.residual).c_str(),
                diag.residual > 1e-9 ? "  (value fails the one-step decomposition)" : "");
    if (!c.out.empty()) {
        json script = json::array();
        for (const auto& s : best.script.steps) script.push_back(describeStep(model, s));
        json summary{{"format", "mfmdp-evaluate-summary-v1"},
                     {"model_hash", hashHex(modelHash(model))},
                     {"policy", "open-loop-search"},
                     {"T", best.T},
                     {"tail_bound", best.tail_bound},
                     {"value", best.value},
                     {"script", script},
                     {"script_tail", describeStep(model, best.script.tail)},
                     {"search_nodes", best.nodes},
                     {"best_restart", diag.best_restart},
                     {"bellman_residual", diag.residual}};
        writeJson(c.out + ".json", summary);
        writeManifest(c.out, "evaluate", c.model_ref, model,
                      json{{"policy", "open-loop-search"},
                           {"horizon", c.horizon},
                           {"tol", c.tol}});
    }
    return 0;
}

int cmdExamplesList() {
    for (const auto& name : builtinExampleNames()) {
        json doc = builtinExampleJson(name);
        std::printf("%-8s %s\n", name.c_str(), doc.value("description", "").c_str());
    }
    return 0;
}

int cmdExamplesExport(const std::string& dir, int grid_per_unit) {
    std::filesystem::create_directories(dir);
    for (const auto& name : builtinExampleNames()) {
        std::string path = dir + "/" + name + ".json";
        writeJson(path, builtinExampleJson(name, grid_per_unit));
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field MDP solver and finite-agent simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common c;
    SolveOptions sopt;

    CLI::App* solve_cmd = app.add_subcommand("solve", "compute the value function and a policy");
    addModelFlag(solve_cmd, c);
    solve_cmd->add_option("--n-eta", sopt.n_eta, "simplex grid resolution")
        ->envname("MFMDP_N_ETA");
    solve_cmd->add_option("--n-actions-grid", sopt.n_actions_grid, "action-law grid resolution")
        ->envname("MFMDP_N_ACTIONS_GRID");
    solve_cmd->add_option("--tol", sopt.tol, "fixed-point tolerance")->envname("MFMDP_TOL");
    solve_cmd->add_option("--method", sopt.method, "value | policy")->envname("MFMDP_METHOD");
    solve_cmd->add_flag("--feedback-only", sopt.feedback_only,
                        "restrict to deterministic feedback kernels");
    solve_cmd->add_option("--threads", c.threads, "worker threads")->envname("MFMDP_THREADS");
    solve_cmd->add_option("--out", c.out, "artifact path (default artifact.json)")
        ->envname("MFMDP_OUT");
    solve_cmd->add_option("--grid-per-unit", c.grid_per_unit,
                          "interval discretization for built-in examples");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "run the interacting N-agent system");
    addModelFlag(sim_cmd, c);
    sim_cmd->add_option("--policy", c.policy_ref,
                        "solver artifact path, const:<action>, or built-in script name")
        ->required();
    sim_cmd->add_option("--agents", c.agents, "agent count N")->envname("MFMDP_AGENTS");
    sim_cmd->add_option("--horizon", c.horizon, "truncation T (0: tail rule)")
        ->envname("MFMDP_HORIZON");
    sim_cmd->add_option("--replications", c.replications, "independent replications")
        ->envname("MFMDP_REPLICATIONS");
    sim_cmd->add_option("--seed", c.seed, "master seed")->envname("MFMDP_SEED");
    sim_cmd->add_option("--tol", c.tol, "tail-rule tolerance")->envname("MFMDP_TOL");
    sim_cmd->add_option("--threads", c.threads, "worker threads")->envname("MFMDP_THREADS");
    sim_cmd->add_option("--out", c.out, "output prefix (.csv, .json, .manifest.json)")
        ->envname("MFMDP_OUT");

    CLI::App* conv_cmd =
        app.add_subcommand("converge", "gap |V^N - V| and W distance across agent counts");
    addModelFlag(conv_cmd, c);
    conv_cmd->add_option("--policy", c.policy_ref,
                         "solver artifact path, const:<action>, or built-in script name")
        ->required();
    conv_cmd->add_option("--agents", c.agents_list, "comma-separated agent counts, increasing")
        ->required()
        ->envname("MFMDP_AGENTS");
    conv_cmd->add_option("--horizon", c.horizon, "truncation T (0: tail rule)")
        ->envname("MFMDP_HORIZON");
    conv_cmd->add_option("--replications", c.replications, "independent replications")
        ->envname("MFMDP_REPLICATIONS");
    conv_cmd->add_option("--seed", c.seed, "master seed")->envname("MFMDP_SEED");
    conv_cmd->add_option("--tol", c.tol, "tail-rule tolerance")->envname("MFMDP_TOL");
    conv_cmd->add_option("--threads", c.threads, "worker threads")->envname("MFMDP_THREADS");
    conv_cmd->add_option("--out", c.out, "output prefix (.csv, .json, .manifest.json)")
        ->envname("MFMDP_OUT");

    CLI::App* eval_cmd = app.add_subcommand(
        "evaluate", "exact policy value by law propagation; searches open-loop scripts "
                    "and reports the decomposition residual when no policy is given");
    addModelFlag(eval_cmd, c);
    eval_cmd->add_option("--policy", c.policy_ref,
                         "solver artifact path, const:<action>, or built-in script name");
    eval_cmd->add_option("--horizon", c.horizon, "truncation T (0: tail rule)")
        ->envname("MFMDP_HORIZON");
    eval_cmd->add_option("--replications", c.replications,
                         "common-noise paths when exact enumeration is too large")
        ->envname("MFMDP_REPLICATIONS");
    eval_cmd->add_option("--seed", c.seed, "master seed")->envname("MFMDP_SEED");
    eval_cmd->add_option("--tol", c.tol, "tail-rule tolerance")->envname("MFMDP_TOL");
    eval_cmd->add_option("--out", c.out, "output prefix (.json, .manifest.json)")
        ->envname("MFMDP_OUT");

    CLI::App* ex_cmd = app.add_subcommand("examples", "built-in example models");
    ex_cmd->require_subcommand(1);
    CLI::App* ex_list = ex_cmd->add_subcommand("list", "list example names");
    CLI::App* ex_export = ex_cmd->add_subcommand("export", "write example model files");
    std::string export_dir = "models";
    ex_export->add_option("--dir", export_dir, "target directory");
    ex_export->add_option("--grid-per-unit", c.grid_per_unit,
                          "interval discretization (points per unit length)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) return cmdSolve(c, sopt);
        if (sim_cmd->parsed()) return cmdSimulate(c);
        if (conv_cmd->parsed()) return cmdConverge(c);
        if (eval_cmd->parsed()) return cmdEvaluate(c);
        if (ex_list->parsed()) return cmdExamplesList();
        if (ex_export->parsed()) return cmdExamplesExport(export_dir, c.grid_per_unit);
        throw UsageError("no subcommand selected");
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ModelError& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 3;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource limit: %s\n", e.what());
        return 4;
    } catch (const InvariantError& e) {
        std::fprintf(stderr, "invariant failure: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 5;
    }
}
