#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>

#include "dlm/form_space.hpp"

namespace dlm {

enum class Direction { comprehension, production };
enum class Method { eol, fil };

std::string to_string(Direction d);
std::string to_string(Method m);
Direction parse_direction(const std::string& s);
Method parse_method(const std::string& s);

/// A dense in-dim x out-dim matrix W with the settings it was estimated with.
/// Comprehension mappings hold F (cues x dims), production mappings hold G
/// (dims x cues).
struct LinearMapping {
    Eigen::MatrixXd weights;
    Direction direction = Direction::comprehension;
    Method method = Method::eol;
    std::map<std::string, double> hyperparams;
    std::uint64_t seed = 0;

    Eigen::Index in_dim() const noexcept { return weights.rows(); }
    Eigen::Index out_dim() const noexcept { return weights.cols(); }
};

/// Minimises |XW - Y|^2 + lambda |W|^2. With lambda = 0 the minimum-norm
/// least-squares solution is returned, also for rank-deficient X.
LinearMapping solve_endstate(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y, double lambda = 0.0,
                             Direction direction = Direction::comprehension);
LinearMapping solve_endstate(const SparseRowMatrix& X, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                             double lambda = 0.0, Direction direction = Direction::comprehension);

struct FilOptions {
    double learning_rate = 0.001;
    int epochs = 1;
    std::uint64_t seed = 0;
};

/// Widrow-Hoff updates W += eta x^T (y - xW), starting from W = 0, over a
/// token stream in which row i appears freqs(i) times. The stream is
/// reshuffled (seeded) at the start of every epoch.
LinearMapping train_frequency_informed(const SparseRowMatrix& X,
                                       const Eigen::Ref<const Eigen::MatrixXd>& Y,
                                       const Eigen::Ref<const Eigen::VectorXd>& freqs,
                                       const FilOptions& opts = {},
                                       Direction direction = Direction::comprehension);
LinearMapping train_frequency_informed(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const Eigen::Ref<const Eigen::MatrixXd>& Y,
                                       const Eigen::Ref<const Eigen::VectorXd>& freqs,
                                       const FilOptions& opts = {},
                                       Direction direction = Direction::comprehension);

/// XW. For a binary row this is the sum of the weight rows of its active cues.
Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X);
Eigen::MatrixXd apply_mapping(const LinearMapping& m, const SparseRowMatrix& X);
/// Sum of the weight rows selected by each row's active cues.
Eigen::MatrixXd apply_mapping(const LinearMapping& m, const FormMatrix& X);

/// Sum of squared residuals |XW - Y|^2.
template <typename XType>
double sum_squared_error(const XType& X, const Eigen::Ref<const Eigen::MatrixXd>& W,
                         const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    return (X * W - Y).squaredNorm();
}

} // namespace dlm
