#ifndef MFMDP_SPACES_HPP
#define MFMDP_SPACES_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfmdp/errors.hpp"

namespace mfmdp {

// A finite set of labeled points with a metric table and an optional injective
// embedding into the reals (used by the 1-D couplings). Points are identified
// by index in the declared ordering; labels are for I/O only. Immutable.
class FiniteMetricSpace {
  public:
    FiniteMetricSpace(std::vector<std::string> labels, Eigen::MatrixXd dist,
                      std::optional<Eigen::VectorXd> embed = std::nullopt);

    // d(x,y) = 1_{x != y}
    static std::shared_ptr<const FiniteMetricSpace> discrete(
        std::vector<std::string> labels, std::optional<Eigen::VectorXd> embed = std::nullopt);
    // d(x,y) = |embed(x) - embed(y)|
    static std::shared_ptr<const FiniteMetricSpace> embedded(std::vector<std::string> labels,
                                                             Eigen::VectorXd embed);

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }
    double dist(int i, int j) const { return dist_(i, j); }
    const Eigen::MatrixXd& distMatrix() const { return dist_; }
    double diameter() const { return diameter_; }

    bool hasEmbed() const { return embed_.has_value(); }
    double embed(int i) const { return (*embed_)(i); }
    const Eigen::VectorXd& embedVector() const { return *embed_; }
    // point indices sorted by increasing embedding value
    const std::vector<int>& embedOrder() const;

    // true when dist(i,j) == |embed(i)-embed(j)| for all pairs (within 1e-12)
    bool isEmbeddingMetric() const { return embedding_metric_; }
    // true when dist(i,j) == 1_{i != j}
    bool isDiscreteMetric() const { return discrete_metric_; }

    int indexOf(const std::string& label) const;  // -1 when absent

  private:
    std::vector<std::string> labels_;
    Eigen::MatrixXd dist_;
    std::optional<Eigen::VectorXd> embed_;
    std::vector<int> embed_order_;
    double diameter_ = 0.0;
    bool embedding_metric_ = false;
    bool discrete_metric_ = false;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

// Product of two spaces with the sum metric d((x,a),(x',a')) = d(x,x') + d(a,a').
// `joint` is the flattened FiniteMetricSpace (index = left * |right| + right) so
// measures on the product are ordinary DiscreteMeasures on `joint`.
class ProductSpace {
  public:
    ProductSpace(SpacePtr left, SpacePtr right);

    const SpacePtr& left() const { return left_; }
    const SpacePtr& right() const { return right_; }
    const SpacePtr& joint() const { return joint_; }
    int leftSize() const { return left_->size(); }
    int rightSize() const { return right_->size(); }
    int size() const { return left_->size() * right_->size(); }
    int index(int i, int j) const { return i * right_->size() + j; }
    std::pair<int, int> split(int k) const { return {k / right_->size(), k % right_->size()}; }

  private:
    SpacePtr left_, right_, joint_;
};

// Probability weights over a FiniteMetricSpace. Construction validates: no
// negative weight (values in [-1e-12, 0) are clamped to 0), and the total mass
// must be within 1e-9 of 1 (hard error otherwise); any drift <= 1e-9 is
// renormalized away, so weights sum to 1 within 1e-12 after every operation.
class DiscreteMeasure {
  public:
    DiscreteMeasure(SpacePtr space, Eigen::VectorXd weights);

    static DiscreteMeasure dirac(SpacePtr space, int i);
    static DiscreteMeasure uniform(SpacePtr space);

    const SpacePtr& space() const { return space_; }
    const Eigen::VectorXd& weights() const { return w_; }
    double w(int i) const { return w_(i); }
    int size() const { return static_cast<int>(w_.size()); }

    // generalized inverse of the CDF in embedding order when the space is
    // embedded, index order otherwise: smallest point with cumulative >= u
    int sampleIndex(double u) const;

  private:
    SpacePtr space_;
    Eigen::VectorXd w_;
};

// One measure on `to` per point of `from`, stored as rows of a matrix.
class ProbabilityKernel {
  public:
    ProbabilityKernel(SpacePtr from, SpacePtr to, Eigen::MatrixXd rows);

    static ProbabilityKernel deterministic(SpacePtr from, SpacePtr to,
                                           const std::vector<int>& action_of_state);

    const SpacePtr& from() const { return from_; }
    const SpacePtr& to() const { return to_; }
    const Eigen::MatrixXd& matrix() const { return rows_; }
    DiscreteMeasure row(int i) const { return DiscreteMeasure(to_, rows_.row(i)); }

  private:
    SpacePtr from_, to_;
    Eigen::MatrixXd rows_;
};

// measure algebra ------------------------------------------------------------

// phi maps source point index -> target point index; mass is summed over preimages.
DiscreteMeasure pushforward(const std::vector<int>& phi, const DiscreteMeasure& mu,
                            SpacePtr target);

// (mu . k)(x,a) = mu(x) k(x)(a), a joint measure on the product space
DiscreteMeasure kernelProduct(const DiscreteMeasure& mu, const ProbabilityKernel& k,
                              const ProductSpace& ps);

DiscreteMeasure marginalLeft(const DiscreteMeasure& nu, const ProductSpace& ps);
DiscreteMeasure marginalRight(const DiscreteMeasure& nu, const ProductSpace& ps);

// Bayes decomposition nu = mu . k. Rows at zero-mass states default to uniform.
std::pair<DiscreteMeasure, ProbabilityKernel> disintegrate(const DiscreteMeasure& nu,
                                                           const ProductSpace& ps);

}  // namespace mfmdp

#endif
