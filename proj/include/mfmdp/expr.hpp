#ifndef MFMDP_EXPR_HPP
#define MFMDP_EXPR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mfmdp/errors.hpp"

namespace mfmdp {

// Variables available to config expressions. x/a/e/e0 are the embedding values
// of the current points; the rest are statistics of the joint (state, action)
// mean-field argument, computed once per measure:
//   mean_state, mean_action — embedding means of the marginals
//   wref_state, wref_action, wref_joint — Wasserstein distance of the state
//   marginal / action marginal / full joint to a reference measure from the config
struct ExprVars {
    double x = 0, a = 0, e = 0, e0 = 0;
    double mean_state = 0, mean_action = 0;
    double wref_state = 0, wref_action = 0, wref_joint = 0;
};

enum ExprFeature : uint32_t {
    kFeatMeanState = 1u << 0,
    kFeatMeanAction = 1u << 1,
    kFeatWrefState = 1u << 2,
    kFeatWrefAction = 1u << 3,
    kFeatWrefJoint = 1u << 4,
};

// Arithmetic over the variables above: + - * /, unary minus, parentheses,
// numeric literals, and abs(u), min(u,v), max(u,v), sign(u).
class Expr {
  public:
    static Expr parse(const std::string& src);

    double eval(const ExprVars& v) const;
    uint32_t featureMask() const { return features_; }
    bool usesVar(const std::string& name) const;
    const std::string& source() const { return src_; }

  private:
    struct Node {
        int op;            // opcode
        int lhs, rhs;      // child indices (-1 when unused)
        double value;      // literals
    };
    std::string src_;
    std::vector<Node> nodes_;
    int root_ = -1;
    uint32_t features_ = 0;
    uint32_t vars_ = 0;

    friend class ExprParser;
};

}  // namespace mfmdp

#endif
