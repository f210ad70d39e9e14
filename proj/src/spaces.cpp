#include "mfmdp/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfmdp {

namespace {
constexpr double kMassSlack = 1e-9;   // hard error beyond this
constexpr double kNegSlack = 1e-12;   // clamp tiny negative weights
}  // namespace

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, Eigen::MatrixXd dist,
                                     std::optional<Eigen::VectorXd> embed)
    : labels_(std::move(labels)), dist_(std::move(dist)), embed_(std::move(embed)) {
    const int n = static_cast<int>(labels_.size());
    if (n == 0) throw ModelError("metric space needs at least one point");
    if (dist_.rows() != n || dist_.cols() != n)
        throw ModelError("metric matrix shape does not match point count");
    for (int i = 0; i < n; ++i) {
        if (dist_(i, i) != 0.0) throw ModelError("metric diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            if (i != j && !(dist_(i, j) > 0.0))
                throw ModelError("metric must be positive off the diagonal: d(" + labels_[i] +
                                 "," + labels_[j] + ")");
            if (std::abs(dist_(i, j) - dist_(j, i)) > 1e-12)
                throw ModelError("metric must be symmetric");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (dist_(i, j) > dist_(i, k) + dist_(k, j) + 1e-12)
                    throw ModelError("triangle inequality violated at (" + labels_[i] + "," +
                                     labels_[j] + "," + labels_[k] + ")");
    diameter_ = dist_.maxCoeff();

    if (embed_) {
        if (embed_->size() != n) throw ModelError("embedding size does not match point count");
        embed_order_.resize(n);
        std::iota(embed_order_.begin(), embed_order_.end(), 0);
        std::sort(embed_order_.begin(), embed_order_.end(),
                  [&](int a, int b) { return (*embed_)(a) < (*embed_)(b); });
        for (int k = 0; k + 1 < n; ++k)
            if ((*embed_)(embed_order_[k]) == (*embed_)(embed_order_[k + 1]))
                throw ModelError("embedding must be injective");
        embedding_metric_ = true;
        for (int i = 0; i < n && embedding_metric_; ++i)
            for (int j = 0; j < n; ++j)
                if (std::abs(dist_(i, j) - std::abs((*embed_)(i) - (*embed_)(j))) > 1e-12) {
                    embedding_metric_ = false;
                    break;
                }
    }

    discrete_metric_ = true;
    for (int i = 0; i < n && discrete_metric_; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(dist_(i, j) - 1.0) > 1e-12) {
                discrete_metric_ = false;
                break;
            }
}

std::shared_ptr<const FiniteMetricSpace> FiniteMetricSpace::discrete(
    std::vector<std::string> labels, std::optional<Eigen::VectorXd> embed) {
    const int n = static_cast<int>(labels.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(n, n) - Eigen::MatrixXd::Identity(n, n);
    return std::make_shared<FiniteMetricSpace>(std::move(labels), std::move(d), std::move(embed));
}

std::shared_ptr<const FiniteMetricSpace> FiniteMetricSpace::embedded(
    std::vector<std::string> labels, Eigen::VectorXd embed) {
    const int n = static_cast<int>(labels.size());
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = std::abs(embed(i) - embed(j));
    return std::make_shared<FiniteMetricSpace>(std::move(labels), std::move(d), std::move(embed));
}

const std::vector<int>& FiniteMetricSpace::embedOrder() const {
    if (!embed_) throw ModelError("space lacks an embedding");
    return embed_order_;
}

int FiniteMetricSpace::indexOf(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (labels_[i] == label) return i;
    return -1;
}

ProductSpace::ProductSpace(SpacePtr left, SpacePtr right)
    : left_(std::move(left)), right_(std::move(right)) {
    const int n = left_->size(), m = right_->size();
    std::vector<std::string> labels;
    labels.reserve(static_cast<size_t>(n) * m);
    Eigen::MatrixXd d(n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            labels.push_back("(" + left_->label(i) + "|" + right_->label(j) + ")");
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < m; ++j2)
                    d(i * m + j, i2 * m + j2) = left_->dist(i, i2) + right_->dist(j, j2);
        }
    joint_ = std::make_shared<FiniteMetricSpace>(std::move(labels), std::move(d));
}

DiscreteMeasure::DiscreteMeasure(SpacePtr space, Eigen::VectorXd weights)
    : space_(std::move(space)), w_(std::move(weights)) {
    if (!space_) throw ModelError("measure needs a space");
    if (w_.size() != space_->size()) throw ModelError("weight count does not match space size");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        if (w_(i) < 0.0) {
            if (w_(i) < -kNegSlack) throw ModelError("negative weight in measure");
            w_(i) = 0.0;
        }
    }
    const double s = w_.sum();
    invariant(std::abs(s - 1.0) <= kMassSlack,
              "measure mass drifted beyond 1e-9 before renormalization");
    if (s != 1.0) w_ /= s;
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, int i) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(space->size());
    w(i) = 1.0;
    return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(SpacePtr space) {
    const int n = space->size();
    return DiscreteMeasure(std::move(space), Eigen::VectorXd::Constant(n, 1.0 / n));
}

int DiscreteMeasure::sampleIndex(double u) const {
    if (space_->hasEmbed()) {
        double cum = 0.0;
        const auto& order = space_->embedOrder();
        for (int k : order) {
            cum += w_(k);
            if (cum >= u && w_(k) > 0.0) return k;
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if (w_(*it) > 0.0) return *it;
        return order.back();
    }
    double cum = 0.0;
    int last_support = 0;
    for (int i = 0; i < size(); ++i) {
        if (w_(i) > 0.0) last_support = i;
        cum += w_(i);
        if (cum >= u && w_(i) > 0.0) return i;
    }
    return last_support;
}

ProbabilityKernel::ProbabilityKernel(SpacePtr from, SpacePtr to, Eigen::MatrixXd rows)
    : from_(std::move(from)), to_(std::move(to)), rows_(std::move(rows)) {
    if (rows_.rows() != from_->size() || rows_.cols() != to_->size())
        throw ModelError("kernel shape does not match spaces");
    for (int i = 0; i < rows_.rows(); ++i) {
        // row validation piggybacks on the measure constructor
        DiscreteMeasure row(to_, rows_.row(i));
        rows_.row(i) = row.weights();
    }
}

ProbabilityKernel ProbabilityKernel::deterministic(SpacePtr from, SpacePtr to,
                                                   const std::vector<int>& action_of_state) {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(from->size(), to->size());
    if (static_cast<int>(action_of_state.size()) != from->size())
        throw ModelError("deterministic kernel needs one action per state");
    for (int i = 0; i < from->size(); ++i) rows(i, action_of_state[i]) = 1.0;
    return ProbabilityKernel(std::move(from), std::move(to), std::move(rows));
}

DiscreteMeasure pushforward(const std::vector<int>& phi, const DiscreteMeasure& mu,
                            SpacePtr target) {
    if (static_cast<int>(phi.size()) != mu.size())
        throw ModelError("pushforward map must cover every source point");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(target->size());
    for (int i = 0; i < mu.size(); ++i) {
        const int y = phi[i];
        if (y < 0 || y >= target->size())
            throw ModelError("pushforward map leaves the target space");
        w(y) += mu.w(i);
    }
    return DiscreteMeasure(std::move(target), std::move(w));
}

DiscreteMeasure kernelProduct(const DiscreteMeasure& mu, const ProbabilityKernel& k,
                              const ProductSpace& ps) {
    if (mu.space() != ps.left() || k.from() != ps.left() || k.to() != ps.right())
        throw ModelError("kernel product: spaces do not line up");
    Eigen::VectorXd w(ps.size());
    for (int i = 0; i < ps.leftSize(); ++i)
        for (int j = 0; j < ps.rightSize(); ++j) w(ps.index(i, j)) = mu.w(i) * k.matrix()(i, j);
    return DiscreteMeasure(ps.joint(), std::move(w));
}

DiscreteMeasure marginalLeft(const DiscreteMeasure& nu, const ProductSpace& ps) {
    if (nu.space() != ps.joint()) throw ModelError("marginal: measure not on this product space");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(ps.leftSize());
    for (int k = 0; k < ps.size(); ++k) w(ps.split(k).first) += nu.w(k);
    return DiscreteMeasure(ps.left(), std::move(w));
}

DiscreteMeasure marginalRight(const DiscreteMeasure& nu, const ProductSpace& ps) {
    if (nu.space() != ps.joint()) throw ModelError("marginal: measure not on this product space");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(ps.rightSize());
    for (int k = 0; k < ps.size(); ++k) w(ps.split(k).second) += nu.w(k);
    return DiscreteMeasure(ps.right(), std::move(w));
}

std::pair<DiscreteMeasure, ProbabilityKernel> disintegrate(const DiscreteMeasure& nu,
                                                           const ProductSpace& ps) {
    DiscreteMeasure mu = marginalLeft(nu, ps);
    const int n = ps.leftSize(), m = ps.rightSize();
    Eigen::MatrixXd rows(n, m);
    for (int i = 0; i < n; ++i) {
        if (mu.w(i) > 0.0) {
            for (int j = 0; j < m; ++j) rows(i, j) = nu.w(ps.index(i, j)) / mu.w(i);
        } else {
            rows.row(i).setConstant(1.0 / m);
        }
    }
    return {std::move(mu), ProbabilityKernel(ps.left(), ps.right(), std::move(rows))};
}

}  // namespace mfmdp
