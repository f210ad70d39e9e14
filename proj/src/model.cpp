#include "mfmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "mfmdp/errors.hpp"
#include "mfmdp/rng.hpp"

namespace mfmdp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ModelError(msg); }

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail(where + ": missing \"" + key + "\"");
    return *it;
}

std::vector<std::string> parseLabels(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where + ": \"labels\" must be a non-empty array");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_string()) fail(where + ": labels must be strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Eigen::VectorXd parseNumbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where + ": expected an array of numbers");
    Eigen::VectorXd out(j.size());
    int i = 0;
    for (const auto& v : j) {
        if (!v.is_number()) fail(where + ": expected an array of numbers");
        out(i++) = v.get<double>();
    }
    return out;
}

SpacePtr parseSpace(const json& j, const std::string& where) {
    auto labels = parseLabels(need(j, "labels", where), where);
    std::optional<Eigen::VectorXd> embed;
    if (j.contains("embed")) {
        embed = parseNumbers(j["embed"], where + ".embed");
        if (embed->size() != static_cast<Eigen::Index>(labels.size()))
            fail(where + ": embed length differs from labels");
    }
    json metric = j.value("metric", json(embed ? "embedding" : "discrete"));
    try {
        if (metric.is_string() && metric == "discrete")
            return FiniteMetricSpace::discrete(std::move(labels), std::move(embed));
        if (metric.is_string() && metric == "embedding") {
            if (!embed) fail(where + ": metric \"embedding\" requires \"embed\"");
            return FiniteMetricSpace::embedded(std::move(labels), std::move(*embed));
        }
        if (metric.is_object() && metric.contains("table")) {
            const json& rows = metric["table"];
            const int n = static_cast<int>(labels.size());
            if (!rows.is_array() || static_cast<int>(rows.size()) != n)
                fail(where + ": metric table must be " + std::to_string(n) + " rows");
            Eigen::MatrixXd d(n, n);
            for (int r = 0; r < n; ++r) d.row(r) = parseNumbers(rows[r], where + ".metric").transpose();
            return std::make_shared<const FiniteMetricSpace>(std::move(labels), std::move(d),
                                                             std::move(embed));
        }
    } catch (const InvariantError& e) {
        fail(where + ": " + e.what());
    }
    fail(where + ": metric must be \"discrete\", \"embedding\", or {\"table\": [...]}");
}

DiscreteMeasure parseMeasure(const json& j, const SpacePtr& space, const std::string& where) {
    Eigen::VectorXd w = parseNumbers(j, where);
    if (w.size() != space->size())
        fail(where + ": expected " + std::to_string(space->size()) + " weights");
    try {
        return DiscreteMeasure(space, std::move(w));
    } catch (const std::exception& e) {
        fail(where + ": " + e.what());
    }
}

struct AxesSpec {
    bool on_x = false, on_a = false, on_e = false, on_e0 = false;
};

AxesSpec parseAxes(const json& j, bool allow_noise, const std::string& where) {
    if (!j.is_array()) fail(where + ": \"axes\" must be an array");
    AxesSpec ax;
    int last = -1;
    for (const auto& v : j) {
        std::string s = v.is_string() ? v.get<std::string>() : "";
        int ord = s == "x" ? 0 : s == "a" ? 1 : s == "e" ? 2 : s == "e0" ? 3 : -1;
        if (ord < 0 || (!allow_noise && ord >= 2))
            fail(where + ": unknown axis \"" + s + "\"");
        if (ord <= last) fail(where + ": axes must be in (x,a,e,e0) order without repeats");
        last = ord;
        (ord == 0 ? ax.on_x : ord == 1 ? ax.on_a : ord == 2 ? ax.on_e : ax.on_e0) = true;
    }
    return ax;
}

void flattenNested(const json& node, size_t depth, const std::vector<int>& dims,
                   std::vector<double>& out, const std::function<double(const json&)>& leaf,
                   const std::string& where) {
    if (depth == dims.size()) {
        out.push_back(leaf(node));
        return;
    }
    if (!node.is_array() || static_cast<int>(node.size()) != dims[depth])
        fail(where + ": expected an array of length " + std::to_string(dims[depth]) +
             " at nesting depth " + std::to_string(depth));
    for (const auto& child : node) flattenNested(child, depth + 1, dims, out, leaf, where);
}

std::string formatValue(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

double MeanFieldModel::Table::at(int x, int a, int e, int e0) const {
    long idx = 0;
    int k = 0;
    auto step = [&](bool on, int v) {
        if (on) idx = idx * dims[k++] + v;
    };
    step(on_x, x);
    step(on_a, a);
    step(on_e, e);
    step(on_e0, e0);
    return flat[static_cast<size_t>(idx)];
}

MeanFieldModel MeanFieldModel::fromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail(path + ": " + e.what());
    }
    try {
        return fromJson(doc);
    } catch (const ModelError& e) {
        fail(path + ": " + e.what());
    }
}

MeanFieldModel MeanFieldModel::fromJson(const json& doc) {
    try {
        return fromJsonChecked(doc);
    } catch (const json::exception& e) {
        fail(std::string("malformed model document: ") + e.what());
    }
}

MeanFieldModel MeanFieldModel::fromJsonChecked(const json& doc) {
    if (!doc.is_object()) fail("model document must be a JSON object");
    MeanFieldModel m;
    m.name_ = doc.value("name", std::string("model"));
    m.X_ = parseSpace(need(doc, "state_space", "model"), "state_space");
    m.A_ = parseSpace(need(doc, "action_space", "model"), "action_space");
    m.XA_ = std::make_shared<const ProductSpace>(m.X_, m.A_);

    const json& noise = need(doc, "noise", "model");
    {
        const json& idio = need(noise, "idiosyncratic", "noise");
        m.E_ = parseSpace(idio, "noise.idiosyncratic");
        m.lambda_opt_ = parseMeasure(need(idio, "weights", "noise.idiosyncratic"), m.E_,
                                     "noise.idiosyncratic.weights");
        const json& common = need(noise, "common", "noise");
        m.E0_ = parseSpace(common, "noise.common");
        m.lambda0_opt_ =
            parseMeasure(need(common, "weights", "noise.common"), m.E0_, "noise.common.weights");
    }

    const json& disc = need(doc, "discount", "model");
    if (!disc.is_number()) fail("discount must be a number");
    m.beta_ = disc.get<double>();
    if (!(m.beta_ >= 0.0 && m.beta_ < 1.0)) fail("discount must lie in [0, 1)");

    if (doc.contains("references")) {
        const json& refs = doc["references"];
        if (refs.contains("state"))
            m.ref_state_ = parseMeasure(refs["state"], m.X_, "references.state");
        if (refs.contains("action"))
            m.ref_action_ = parseMeasure(refs["action"], m.A_, "references.action");
        if (refs.contains("joint"))
            m.ref_joint_ = parseMeasure(refs["joint"], m.XA_->joint(), "references.joint");
    }

    const json& tr = need(doc, "transition", "model");
    std::string tr_type = need(tr, "type", "transition").get<std::string>();
    if (tr_type == "table") {
        AxesSpec ax = parseAxes(need(tr, "axes", "transition"), true, "transition");
        Table t;
        t.on_x = ax.on_x;
        t.on_a = ax.on_a;
        t.on_e = ax.on_e;
        t.on_e0 = ax.on_e0;
        if (ax.on_x) t.dims.push_back(m.X_->size());
        if (ax.on_a) t.dims.push_back(m.A_->size());
        if (ax.on_e) t.dims.push_back(m.E_->size());
        if (ax.on_e0) t.dims.push_back(m.E0_->size());
        auto leaf = [&](const json& v) -> double {
            if (!v.is_string()) fail("transition.map: entries must be state labels");
            int idx = m.X_->indexOf(v.get<std::string>());
            if (idx < 0) fail("transition.map: unknown state label \"" + v.get<std::string>() + "\"");
            return idx;
        };
        flattenNested(need(tr, "map", "transition"), 0, t.dims, t.flat, leaf, "transition.map");
        m.F_table_ = std::move(t);
    } else if (tr_type == "expr") {
        try {
            m.F_expr_ = Expr::parse(need(tr, "value", "transition").get<std::string>());
        } catch (const ModelError& e) {
            fail(std::string("transition.value: ") + e.what());
        }
        m.F_project_ = tr.value("project", false);
        if (!m.X_->hasEmbed()) fail("expression transitions require an embedded state space");
    } else {
        fail("transition.type must be \"table\" or \"expr\"");
    }

    const json& rw = need(doc, "reward", "model");
    std::string rw_type = need(rw, "type", "reward").get<std::string>();
    if (rw_type == "table") {
        AxesSpec ax = parseAxes(need(rw, "axes", "reward"), false, "reward");
        Table t;
        t.on_x = ax.on_x;
        t.on_a = ax.on_a;
        if (ax.on_x) t.dims.push_back(m.X_->size());
        if (ax.on_a) t.dims.push_back(m.A_->size());
        auto leaf = [&](const json& v) -> double {
            if (!v.is_number()) fail("reward.values: entries must be numbers");
            return v.get<double>();
        };
        flattenNested(need(rw, "values", "reward"), 0, t.dims, t.flat, leaf, "reward.values");
        double maxabs = 0;
        for (double v : t.flat) maxabs = std::max(maxabs, std::abs(v));
        m.f_bound_ = rw.value("bound", maxabs);
        m.f_table_ = std::move(t);
    } else if (rw_type == "expr") {
        try {
            m.f_expr_ = Expr::parse(need(rw, "value", "reward").get<std::string>());
        } catch (const ModelError& e) {
            fail(std::string("reward.value: ") + e.what());
        }
        if (m.f_expr_->usesVar("e") || m.f_expr_->usesVar("e0"))
            fail("reward expressions may not reference the noise variables");
        const json& b = need(rw, "bound", "reward");
        if (!b.is_number()) fail("reward.bound must be a number");
        m.f_bound_ = b.get<double>();
    } else {
        fail("reward.type must be \"table\" or \"expr\"");
    }
    if (!(m.f_bound_ >= 0.0) || !std::isfinite(m.f_bound_)) fail("reward bound must be finite and >= 0");

    {
        const json& init = need(doc, "initial", "model");
        InitialCondition ic{parseMeasure(need(init, "law", "initial"), m.X_, "initial.law"),
                            InitialCondition::InfoMode::Rich};
        std::string mode = need(init, "info_mode", "initial").get<std::string>();
        if (mode == "trivial")
            ic.info = InitialCondition::InfoMode::Trivial;
        else if (mode != "rich")
            fail("initial.info_mode must be \"trivial\" or \"rich\"");
        m.init_opt_ = std::move(ic);
    }

    m.feature_mask_ = (m.F_expr_ ? m.F_expr_->featureMask() : 0u) |
                      (m.f_expr_ ? m.f_expr_->featureMask() : 0u);

    // prerequisites for expression variables and measure features
    auto requireEmbed = [&](const SpacePtr& s, const char* which) {
        if (!s->hasEmbed()) fail(std::string("expressions use \"") + which +
                                 "\" but that space has no embedding");
    };
    for (const auto* ex : {m.F_expr_ ? &*m.F_expr_ : nullptr, m.f_expr_ ? &*m.f_expr_ : nullptr}) {
        if (!ex) continue;
        if (ex->usesVar("x")) requireEmbed(m.X_, "x");
        if (ex->usesVar("a")) requireEmbed(m.A_, "a");
        if (ex->usesVar("e")) requireEmbed(m.E_, "e");
        if (ex->usesVar("e0")) requireEmbed(m.E0_, "e0");
    }
    if (m.feature_mask_ & kFeatMeanState) requireEmbed(m.X_, "mean_state");
    if (m.feature_mask_ & kFeatMeanAction) requireEmbed(m.A_, "mean_action");
    if ((m.feature_mask_ & kFeatWrefState) && !m.ref_state_)
        fail("expressions use wref_state but references.state is missing");
    if ((m.feature_mask_ & kFeatWrefAction) && !m.ref_action_)
        fail("expressions use wref_action but references.action is missing");
    if ((m.feature_mask_ & kFeatWrefJoint) && !m.ref_joint_)
        fail("expressions use wref_joint but references.joint is missing");

    m.spec_ = doc;
    m.validate();
    return m;
}

bool MeanFieldModel::transitionUsesNu() const {
    return F_expr_ && F_expr_->featureMask() != 0;
}

bool MeanFieldModel::rewardUsesNu() const { return f_expr_ && f_expr_->featureMask() != 0; }

NuContext MeanFieldModel::prepareNu(const Eigen::VectorXd& nu_joint) const {
    NuContext ctx;
    ctx.nu = &nu_joint;
    if (feature_mask_ == 0) return ctx;
    const int nx = X_->size(), na = A_->size();
    invariant(nu_joint.size() == nx * na, "prepareNu: joint law has the wrong size");
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> M(nu_joint.data(), nx, na);
    Eigen::VectorXd mx, ma;
    if (feature_mask_ & (kFeatMeanState | kFeatWrefState)) mx = M.rowwise().sum();
    if (feature_mask_ & (kFeatMeanAction | kFeatWrefAction)) ma = M.colwise().sum();
    if (feature_mask_ & kFeatMeanState) ctx.vars.mean_state = mx.dot(X_->embedVector());
    if (feature_mask_ & kFeatMeanAction) ctx.vars.mean_action = ma.dot(A_->embedVector());
    if (feature_mask_ & kFeatWrefState)
        ctx.vars.wref_state = wassersteinCost(DiscreteMeasure(X_, std::move(mx)), *ref_state_);
    if (feature_mask_ & kFeatWrefAction)
        ctx.vars.wref_action = wassersteinCost(DiscreteMeasure(A_, std::move(ma)), *ref_action_);
    if (feature_mask_ & kFeatWrefJoint)
        ctx.vars.wref_joint =
            wassersteinCost(DiscreteMeasure(XA_->joint(), nu_joint), *ref_joint_);
    return ctx;
}

int MeanFieldModel::transition(int x, int a, int e, int e0, const NuContext& ctx) const {
    if (F_table_) return static_cast<int>(F_table_->at(x, a, e, e0));
    ExprVars v = ctx.vars;
    v.x = X_->embed(x);
    if (A_->hasEmbed()) v.a = A_->embed(a);
    if (E_->hasEmbed()) v.e = E_->embed(e);
    if (E0_->hasEmbed()) v.e0 = E0_->embed(e0);
    double r = F_expr_->eval(v);
    if (!std::isfinite(r)) fail("transition expression produced a non-finite value");
    int idx = projectState(*X_, r);
    if (!F_project_ && std::abs(X_->embed(idx) - r) > 1e-9)
        fail("transition expression left the state space (value " + formatValue(r) +
             "); set transition.project to snap to the grid");
    return idx;
}

double MeanFieldModel::reward(int x, int a, const NuContext& ctx) const {
    if (f_table_) return f_table_->at(x, a, 0, 0);
    ExprVars v = ctx.vars;
    if (X_->hasEmbed()) v.x = X_->embed(x);
    if (A_->hasEmbed()) v.a = A_->embed(a);
    return f_expr_->eval(v);
}

void MeanFieldModel::validate() {
    const int nxa = XA_->size();
    const bool nu_dep = transitionUsesNu() || rewardUsesNu();
    std::vector<Eigen::VectorXd> nus;
    nus.push_back(Eigen::VectorXd::Constant(nxa, 1.0 / nxa));
    if (nu_dep) {
        for (int i = 0; i < nxa; ++i) nus.push_back(Eigen::VectorXd::Unit(nxa, i));
        if (nxa <= 64) {
            for (int i = 0; i < nxa; ++i)
                for (int j = i + 1; j < nxa; ++j) {
                    Eigen::VectorXd v = Eigen::VectorXd::Zero(nxa);
                    v(i) = v(j) = 0.5;
                    nus.push_back(std::move(v));
                }
        }
    }
    bool first = true;
    for (const auto& nu : nus) {
        NuContext ctx = prepareNu(nu);
        if (rewardUsesNu() || first) {
            for (int x = 0; x < X_->size(); ++x)
                for (int a = 0; a < A_->size(); ++a) {
                    double v = reward(x, a, ctx);
                    if (!std::isfinite(v)) fail("reward is non-finite at some (x, a, law)");
                    if (std::abs(v) > f_bound_ + 1e-9)
                        fail("reward " + formatValue(v) + " at x=" + X_->label(x) + ", a=" +
                             A_->label(a) + " exceeds the declared bound " + formatValue(f_bound_));
                }
        }
        if (transitionUsesNu() || first) {
            for (int x = 0; x < X_->size(); ++x)
                for (int a = 0; a < A_->size(); ++a)
                    for (int e = 0; e < E_->size(); ++e)
                        for (int e0 = 0; e0 < E0_->size(); ++e0) {
                            int t = transition(x, a, e, e0, ctx);
                            if (t < 0 || t >= X_->size())
                                fail("transition target out of range");  // tables only
                        }
        }
        first = false;
        if (!nu_dep) break;
    }
}

int projectState(const FiniteMetricSpace& space, double x_real) {
    if (!space.hasEmbed()) throw ModelError("state projection requires an embedded state space");
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i : space.embedOrder()) {
        double d = std::abs(space.embed(i) - x_real);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

LipschitzEstimate estimateLipschitz(const MeanFieldModel& m, int samples, uint64_t seed) {
    const FiniteMetricSpace& X = *m.stateSpace();
    const FiniteMetricSpace& A = *m.actionSpace();
    const DiscreteMeasure& lam = m.idioLaw();
    const int nx = X.size(), na = A.size(), ne = m.idioSpace()->size(),
              ne0 = m.commonSpace()->size(), nxa = nx * na;

    double best_F = 0.0, best_f = 0.0;
    bool any = false;

    auto expDist = [&](int x1, int a1, const NuContext& c1, int x2, int a2, const NuContext& c2,
                       int e0) {
        double s = 0.0;
        for (int e = 0; e < ne; ++e)
            s += lam.w(e) * X.dist(m.transition(x1, a1, e, e0, c1), m.transition(x2, a2, e, e0, c2));
        return s;
    };

    // sweep all (x,a) pairs at a fixed law
    Eigen::VectorXd uni = Eigen::VectorXd::Constant(nxa, 1.0 / nxa);
    NuContext ctx_u = m.prepareNu(uni);
    for (int p = 0; p < nxa; ++p) {
        auto [xp, ap] = m.productXA().split(p);
        for (int q = 0; q < p; ++q) {
            auto [xq, aq] = m.productXA().split(q);
            double denom = X.dist(xp, xq) + A.dist(ap, aq);
            if (denom < 1e-12) continue;
            any = true;
            for (int e0 = 0; e0 < ne0; ++e0)
                best_F = std::max(best_F, expDist(xp, ap, ctx_u, xq, aq, ctx_u, e0) / denom);
            best_f =
                std::max(best_f, std::abs(m.reward(xp, ap, ctx_u) - m.reward(xq, aq, ctx_u)) / denom);
        }
    }

    auto probeNuPair = [&](const Eigen::VectorXd& n1, const Eigen::VectorXd& n2) {
        double wd = wassersteinCost(DiscreteMeasure(m.productXA().joint(), n1),
                                    DiscreteMeasure(m.productXA().joint(), n2));
        if (wd < 1e-12) return;
        any = true;
        NuContext c1 = m.prepareNu(n1), c2 = m.prepareNu(n2);
        if (m.transitionUsesNu())
            for (int e0 = 0; e0 < ne0; ++e0)
                best_F = std::max(best_F, expDist(0, 0, c1, 0, 0, c2, e0) / wd);
        if (m.rewardUsesNu())
            best_f = std::max(best_f, std::abs(m.reward(0, 0, c1) - m.reward(0, 0, c2)) / wd);
    };

    if (m.transitionUsesNu() || m.rewardUsesNu()) {
        std::vector<Eigen::VectorXd> probes;
        probes.push_back(uni);
        if (nxa <= 64)
            for (int i = 0; i < nxa; ++i) probes.push_back(Eigen::VectorXd::Unit(nxa, i));
        for (size_t i = 0; i < probes.size(); ++i)
            for (size_t j = i + 1; j < probes.size(); ++j) probeNuPair(probes[i], probes[j]);

        RngStream rs(seed, streamId(StreamPurpose::Generic, 0, 0));
        uint64_t ctr = 0;
        auto u01 = [&] { return rs.uniform(ctr++); };
        auto dirichlet = [&] {
            Eigen::VectorXd g(nxa);
            for (int i = 0; i < nxa; ++i) g(i) = -std::log(1.0 - u01());
            return Eigen::VectorXd(g / g.sum());
        };
        for (int s = 0; s < samples; ++s) probeNuPair(dirichlet(), dirichlet());
    } else {
        samples = 0;  // nothing law-dependent to sample
    }

    if (!any) fail("cannot estimate Lipschitz constants: all probe pairs are degenerate");

    LipschitzEstimate est;
    est.K_F = best_F;
    est.K_f = best_f;
    double twoK = 2.0 * best_F;
    est.gamma = twoK <= 1.0 ? 1.0 : std::min(1.0, -std::log(m.beta()) / std::log(twoK));
    return est;
}

double holderConstant(const LipschitzEstimate& est, double beta, double diameter, double eta_min) {
    if (est.K_f <= 0.0 || diameter <= 0.0) return 0.0;
    const double lo = std::clamp(eta_min, diameter * 1e-9, diameter);
    const double twoK = 2.0 * est.K_F;
    auto modulus = [&](double mlen) {
        double s = 0.0, bt = 1.0, grow = mlen;
        for (int t = 0; t < 200000 && bt * diameter > 1e-16; ++t) {
            s += bt * std::min(grow, diameter);
            bt *= beta;
            grow *= twoK;
        }
        return 2.0 * est.K_f * s;
    };
    const int grid = 2048;
    double best = 0.0;
    for (int i = 0; i <= grid; ++i) {
        double mlen = lo * std::pow(diameter / lo, static_cast<double>(i) / grid);
        best = std::max(best, modulus(mlen) / std::pow(mlen, est.gamma));
    }
    return best;
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hashHex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

uint64_t modelHash(const MeanFieldModel& m) { return fnv1a64(m.spec().dump()); }

// built-in examples -----------------------------------------------------------

namespace {

struct Grid {
    std::vector<std::string> labels;
    std::vector<double> values;
};

Grid makeGrid(double lo, double hi, int n) {
    Grid g;
    for (int i = 0; i < n; ++i) {
        double v = (lo * (n - 1 - i) + hi * i) / (n - 1);
        g.values.push_back(v);
        g.labels.push_back(formatValue(v));
    }
    return g;
}

// mass that U([lo,hi]) puts on each point of a sorted grid under nearest-point
// projection (ties at cell midpoints have measure zero)
std::vector<double> quantizeUniform(const std::vector<double>& grid, double lo, double hi) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> w(grid.size(), 0.0);
    for (size_t i = 0; i < grid.size(); ++i) {
        double cell_lo = i == 0 ? -inf : 0.5 * (grid[i - 1] + grid[i]);
        double cell_hi = i + 1 == grid.size() ? inf : 0.5 * (grid[i] + grid[i + 1]);
        w[i] = std::max(0.0, (std::min(cell_hi, hi) - std::max(cell_lo, lo))) / (hi - lo);
    }
    return w;
}

json spaceJson(std::vector<std::string> labels, std::vector<double> embed, const char* metric) {
    json j;
    j["labels"] = std::move(labels);
    if (!embed.empty()) j["embed"] = std::move(embed);
    j["metric"] = metric;
    return j;
}

json twoPointModel(const std::string& name, const std::string& desc, const char* info) {
    json j;
    j["name"] = name;
    j["description"] = desc;
    j["state_space"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["action_space"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["noise"]["idiosyncratic"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["noise"]["idiosyncratic"]["weights"] = {0.5, 0.5};
    j["noise"]["common"] = spaceJson({"0"}, {}, "discrete");
    j["noise"]["common"]["weights"] = {1.0};
    j["references"]["state"] = {0.5, 0.5};
    j["transition"] = {{"type", "expr"}, {"value", "a*x"}, {"project", false}};
    j["reward"] = {{"type", "expr"}, {"value", "-wref_state"}, {"bound", 1.0}};
    j["discount"] = 0.5;
    j["initial"] = {{"law", {0.0, 1.0}}, {"info_mode", info}};
    return j;
}

json funnelModel(const std::string& name, const std::string& desc, int gpu) {
    Grid ramp = makeGrid(2.0, 3.0, gpu);
    std::vector<std::string> labels = {"-1", "1"};
    std::vector<double> embed = {-1, 1};
    labels.insert(labels.end(), ramp.labels.begin(), ramp.labels.end());
    embed.insert(embed.end(), ramp.values.begin(), ramp.values.end());

    std::vector<double> ref(labels.size(), 0.0);
    ref[0] = ref[1] = 0.5;
    std::vector<double> init = quantizeUniform(embed, 2.0, 3.0);

    json j;
    j["name"] = name;
    j["description"] = desc;
    j["state_space"] = spaceJson(labels, embed, "embedding");
    j["action_space"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["noise"]["idiosyncratic"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["noise"]["idiosyncratic"]["weights"] = {0.5, 0.5};
    j["noise"]["common"] = spaceJson({"0"}, {}, "discrete");
    j["noise"]["common"]["weights"] = {1.0};
    j["references"]["state"] = ref;
    j["transition"] = {{"type", "expr"},
                       {"value", "a*x*(1-sign(abs(x)-1.5))/2 + (1+sign(abs(x)-1.5))/2"},
                       {"project", false}};
    j["reward"] = {{"type", "expr"}, {"value", "-wref_state"}, {"bound", 4.0}};
    j["discount"] = 0.5;
    j["initial"] = {{"law", init}, {"info_mode", "rich"}};
    return j;
}

json intervalModel(const std::string& name, const std::string& desc, const char* info, int gpu) {
    Grid g = makeGrid(-1.0, 1.0, 2 * (gpu - 1) + 1);
    std::vector<double> ref = quantizeUniform(g.values, -1.0, 1.0);
    std::vector<double> init = quantizeUniform(g.values, 0.0, 1.0);

    json j;
    j["name"] = name;
    j["description"] = desc;
    j["state_space"] = spaceJson(g.labels, g.values, "embedding");
    j["action_space"] = spaceJson({"-1", "1"}, {-1, 1}, "discrete");
    j["noise"]["idiosyncratic"] = spaceJson(g.labels, g.values, "embedding");
    j["noise"]["idiosyncratic"]["weights"] = ref;
    j["noise"]["common"] = spaceJson({"0"}, {}, "discrete");
    j["noise"]["common"]["weights"] = {1.0};
    j["references"]["state"] = ref;
    j["transition"] = {{"type", "expr"}, {"value", "a*x"}, {"project", false}};
    j["reward"] = {{"type", "expr"}, {"value", "-wref_state"}, {"bound", 2.0}};
    j["discount"] = 0.5;
    j["initial"] = {{"law", init}, {"info_mode", info}};
    return j;
}

}  // namespace

std::vector<std::string> builtinExampleNames() {
    return {"ex4_1", "ex4_2", "ex4_3", "ex4_4", "ex4_5", "ex4_6", "ex4_7"};
}

json builtinExampleJson(const std::string& name, int grid_per_unit) {
    if (grid_per_unit < 2) throw UsageError("examples need at least 2 grid points per unit");
    const int gpu = grid_per_unit;
    if (name == "ex4_1")
        return twoPointModel(name, "two-point state, sign-flip actions, reward matches the state "
                                   "law to a fair coin; no initial randomizer",
                             "trivial");
    if (name == "ex4_2")
        return twoPointModel(name, "dynamics of ex4_1, shipped separately for open-loop "
                                   "evaluation experiments",
                             "trivial");
    if (name == "ex4_3")
        return twoPointModel(name, "dynamics of ex4_1 with an initial uniform randomizer "
                                   "available to policies",
                             "rich");
    if (name == "ex4_4")
        return funnelModel(name, "two sinks plus an interval ramp that funnels into +1; fair-coin "
                                 "matching reward",
                           gpu);
    if (name == "ex4_5")
        return funnelModel(name, "dynamics of ex4_4, shipped separately for open-loop comparisons",
                           gpu);
    if (name == "ex4_6")
        return intervalModel(name, "interval state, sign-flip actions, reward matches the state "
                                   "law to a uniform target",
                             "rich", gpu);
    if (name == "ex4_7")
        return intervalModel(name, "dynamics of ex4_6 without an initial randomizer", "trivial",
                             gpu);
    throw UsageError("unknown built-in example \"" + name + "\"");
}

}  // namespace mfmdp
