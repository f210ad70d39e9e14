#include "mfmdp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace mfmdp {

namespace {

enum Op {
    kNum,
    kVarX,
    kVarA,
    kVarE,
    kVarE0,
    kVarMeanState,
    kVarMeanAction,
    kVarWrefState,
    kVarWrefAction,
    kVarWrefJoint,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kAbs,
    kMin,
    kMax,
    kSign,
};

}  // namespace

class ExprParser {
  public:
    ExprParser(const std::string& src, Expr& out) : src_(src), out_(out) {}

    void run() {
        out_.root_ = parseExpr();
        skipWs();
        if (pos_ != src_.size()) fail("trailing input");
    }

  private:
    const std::string& src_;
    Expr& out_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ModelError("expression error at position " + std::to_string(pos_) + ": " + what +
                         " in \"" + src_ + "\"");
    }
    void skipWs() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skipWs();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    int add(int op, int lhs = -1, int rhs = -1, double value = 0.0) {
        out_.nodes_.push_back({op, lhs, rhs, value});
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    int parseExpr() {
        int lhs = parseTerm();
        for (;;) {
            if (eat('+'))
                lhs = add(kAdd, lhs, parseTerm());
            else if (eat('-'))
                lhs = add(kSub, lhs, parseTerm());
            else
                return lhs;
        }
    }
    int parseTerm() {
        int lhs = parseFactor();
        for (;;) {
            if (eat('*'))
                lhs = add(kMul, lhs, parseFactor());
            else if (eat('/'))
                lhs = add(kDiv, lhs, parseFactor());
            else
                return lhs;
        }
    }
    int parseFactor() {
        skipWs();
        if (eat('-')) return add(kNeg, parseFactor());
        if (eat('+')) return parseFactor();
        if (eat('(')) {
            int e = parseExpr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(src_.c_str() + pos_, &end);
            pos_ = static_cast<size_t>(end - src_.c_str());
            return add(kNum, -1, -1, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (name == "abs" || name == "sign") {
                if (!eat('(')) fail("expected '(' after " + name);
                int u = parseExpr();
                if (!eat(')')) fail("expected ')'");
                return add(name == "abs" ? kAbs : kSign, u);
            }
            if (name == "min" || name == "max") {
                if (!eat('(')) fail("expected '(' after " + name);
                int u = parseExpr();
                if (!eat(',')) fail("expected ','");
                int v = parseExpr();
                if (!eat(')')) fail("expected ')'");
                return add(name == "min" ? kMin : kMax, u, v);
            }
            return variable(name);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    int variable(const std::string& name) {
        if (name == "x") return mark(add(kVarX), 0);
        if (name == "a") return mark(add(kVarA), 0);
        if (name == "e") return mark(add(kVarE), 0);
        if (name == "e0") return mark(add(kVarE0), 0);
        if (name == "mean_state") return mark(add(kVarMeanState), kFeatMeanState);
        if (name == "mean_action") return mark(add(kVarMeanAction), kFeatMeanAction);
        if (name == "wref_state") return mark(add(kVarWrefState), kFeatWrefState);
        if (name == "wref_action") return mark(add(kVarWrefAction), kFeatWrefAction);
        if (name == "wref_joint") return mark(add(kVarWrefJoint), kFeatWrefJoint);
        fail("unknown identifier '" + name + "'");
    }
    int mark(int node, uint32_t feature) {
        out_.features_ |= feature;
        out_.vars_ |= 1u << static_cast<uint32_t>(out_.nodes_[node].op);
        return node;
    }
};

Expr Expr::parse(const std::string& src) {
    Expr e;
    e.src_ = src;
    ExprParser(src, e).run();
    return e;
}

bool Expr::usesVar(const std::string& name) const {
    int op = -1;
    if (name == "x") op = kVarX;
    else if (name == "a") op = kVarA;
    else if (name == "e") op = kVarE;
    else if (name == "e0") op = kVarE0;
    if (op < 0) return false;
    return (vars_ & (1u << static_cast<uint32_t>(op))) != 0;
}

double Expr::eval(const ExprVars& v) const {
    // nodes are in post-order-compatible creation order: children precede parents
    thread_local std::vector<double> stack;
    stack.resize(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        const double l = n.lhs >= 0 ? stack[n.lhs] : 0.0;
        const double r = n.rhs >= 0 ? stack[n.rhs] : 0.0;
        double out = 0.0;
        switch (n.op) {
            case kNum: out = n.value; break;
            case kVarX: out = v.x; break;
            case kVarA: out = v.a; break;
            case kVarE: out = v.e; break;
            case kVarE0: out = v.e0; break;
            case kVarMeanState: out = v.mean_state; break;
            case kVarMeanAction: out = v.mean_action; break;
            case kVarWrefState: out = v.wref_state; break;
            case kVarWrefAction: out = v.wref_action; break;
            case kVarWrefJoint: out = v.wref_joint; break;
            case kAdd: out = l + r; break;
            case kSub: out = l - r; break;
            case kMul: out = l * r; break;
            case kDiv: out = l / r; break;
            case kNeg: out = -l; break;
            case kAbs: out = std::abs(l); break;
            case kMin: out = std::min(l, r); break;
            case kMax: out = std::max(l, r); break;
            case kSign: out = (l > 0) - (l < 0); break;
            default: throw InvariantError("expression: bad opcode");
        }
        stack[i] = out;
    }
    return stack[root_];
}

}  // namespace mfmdp
