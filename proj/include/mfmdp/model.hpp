#ifndef MFMDP_MODEL_HPP
#define MFMDP_MODEL_HPP

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfmdp/expr.hpp"
#include "mfmdp/spaces.hpp"
#include "mfmdp/transport.hpp"

namespace mfmdp {

struct InitialCondition {
    enum class InfoMode { Trivial, Rich };
    DiscreteMeasure mu0;
    // Rich means the initial information carries a uniform randomizer that is
    // independent of the initial state, enabling randomized policies.
    InfoMode info = InfoMode::Rich;
};

struct LipschitzEstimate {
    double K_F = 0.0;
    double K_f = 0.0;
    double gamma = 1.0;  // min(1, |ln beta| / ln(2 K_F)), = 1 when 2 K_F <= 1
};

// Per-measure context handed to the transition/reward evaluators. Holds the
// joint (state, action) law and the expression features computed from it.
struct NuContext {
    const Eigen::VectorXd* nu = nullptr;  // weights on X x A, x-major
    ExprVars vars;
};

// A fully specified finite CMKV-MDP instance. Immutable after load; shared
// read-only across workers.
class MeanFieldModel {
  public:
    static MeanFieldModel fromJson(const nlohmann::json& doc);
    static MeanFieldModel fromFile(const std::string& path);

    const SpacePtr& stateSpace() const { return X_; }
    const SpacePtr& actionSpace() const { return A_; }
    const SpacePtr& idioSpace() const { return E_; }
    const SpacePtr& commonSpace() const { return E0_; }
    const ProductSpace& productXA() const { return *XA_; }
    const DiscreteMeasure& idioLaw() const { return *lambda_opt_; }
    const DiscreteMeasure& commonLaw() const { return *lambda0_opt_; }
    double beta() const { return beta_; }
    double rewardBound() const { return f_bound_; }
    const InitialCondition& initial() const { return *init_opt_; }
    const std::string& name() const { return name_; }

    // canonical config document; artifacts compare these for compatibility
    const nlohmann::json& spec() const { return spec_; }

    NuContext prepareNu(const Eigen::VectorXd& nu_joint) const;
    int transition(int x, int a, int e, int e0, const NuContext& ctx) const;
    double reward(int x, int a, const NuContext& ctx) const;

    bool transitionUsesNu() const;
    bool rewardUsesNu() const;

  private:
    MeanFieldModel() = default;
    static MeanFieldModel fromJsonChecked(const nlohmann::json& doc);
    void validate();  // closure + reward bound checks over a measure grid

    struct Table {
        bool on_x = false, on_a = false, on_e = false, on_e0 = false;
        std::vector<int> dims;      // extents in (x,a,e,e0) order, used axes only
        std::vector<double> flat;   // transition stores target indices, reward stores values
        double at(int x, int a, int e, int e0) const;
    };

    SpacePtr X_, A_, E_, E0_;
    std::shared_ptr<const ProductSpace> XA_;
    std::optional<DiscreteMeasure> lambda_opt_, lambda0_opt_;
    double beta_ = 0.0;
    double f_bound_ = 0.0;
    std::optional<InitialCondition> init_opt_;
    std::string name_;
    nlohmann::json spec_;

    std::optional<Table> F_table_;
    std::optional<Expr> F_expr_;
    bool F_project_ = false;
    std::optional<Table> f_table_;
    std::optional<Expr> f_expr_;

    std::optional<DiscreteMeasure> ref_state_, ref_action_, ref_joint_;
    uint32_t feature_mask_ = 0;
};

// Nearest point of the embedded space to a real value; ties go to the smaller
// embedding value.
int projectState(const FiniteMetricSpace& space, double x_real);

// Sampled lower bounds for the transition/reward Lipschitz constants. The
// expectation over the idiosyncratic noise is an exact finite sum; pairs with a
// degenerate denominator are skipped. Deterministic for a fixed seed.
LipschitzEstimate estimateLipschitz(const MeanFieldModel& model, int samples,
                                    uint64_t seed = 0x4c697073ULL);

// Worst-case growth constant K* for the value function's Holder modulus
//   |V(mu) - V(mu')| <= K* W(mu,mu')^gamma,
// instantiated from the iterated one-step bound
//   B(m) = 2 K_f sum_t beta^t min((2 K_F)^t m, Delta)
// as sup of B(m)/m^gamma over m in [eta_min, Delta] (numeric, log grid).
double holderConstant(const LipschitzEstimate& est, double beta, double diameter, double eta_min);

// 64-bit FNV-1a over a byte string; used for model/manifest fingerprints.
uint64_t fnv1a64(const std::string& bytes);
std::string hashHex(uint64_t h);
// fingerprint of the canonical model document
uint64_t modelHash(const MeanFieldModel& m);

// built-in examples -----------------------------------------------------------

std::vector<std::string> builtinExampleNames();
// grid_per_unit controls the discretization of continuous components
nlohmann::json builtinExampleJson(const std::string& name, int grid_per_unit = 11);

}  // namespace mfmdp

#endif
