#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dlm/form_space.hpp"
#include "dlm/linear_mapping.hpp"

namespace dlm {

enum class DeepLoss { squared_error, binary_cross_entropy };

std::string to_string(DeepLoss l);
DeepLoss parse_deep_loss(const std::string& s);

struct DeepEpoch {
    int epoch = 0;
    double train_loss = 0;
    double validation_loss = 0; ///< NaN when early stopping is off
};

struct DeepTrainingRecord {
    int epochs_run = 0;
    int best_epoch = 0;
    std::uint64_t seed = 0;
    std::vector<DeepEpoch> history;
    /// Epochs at which the monitored loss (validation loss with early
    /// stopping, training loss without) reached a new minimum.
    std::vector<int> improvements;
};

/// One hidden RELU layer: out = act(relu(X W1 + b1) W2 + b2), where act is
/// the identity for squared error and the logistic sigmoid for binary
/// cross-entropy.
struct DeepMapping {
    Eigen::MatrixXd w1;
    Eigen::RowVectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::RowVectorXd b2;
    DeepLoss loss = DeepLoss::squared_error;
    Direction direction = Direction::comprehension;
    DeepTrainingRecord record;

    Eigen::Index in_dim() const noexcept { return w1.rows(); }
    Eigen::Index width() const noexcept { return w1.cols(); }
    Eigen::Index out_dim() const noexcept { return w2.cols(); }
};

struct DeepOptions {
    Eigen::Index width = 1000;
    DeepLoss loss = DeepLoss::squared_error;
    Eigen::Index batch_size = 64;
    int max_epochs = 200;
    int patience = 10;
    bool early_stopping = true;
    double validation_fraction = 0.1;
    double learning_rate = 1e-3; ///< Adam step size
    std::uint64_t seed = 0;
};

struct DeepGradients {
    double loss = 0;
    Eigen::MatrixXd w1;
    Eigen::RowVectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::RowVectorXd b2;
};

/// Mean loss over rows: 0.5 |out - y|^2 per row for squared error, summed
/// element-wise cross-entropy per row for the binary loss.
double deep_loss(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::MatrixXd>& Y);
DeepGradients deep_gradients(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y);

/// Randomly initialised network: weights uniform in +-1/sqrt(fan-in), zero biases.
DeepMapping init_deep(Eigen::Index in_dim, Eigen::Index width, Eigen::Index out_dim,
                      DeepLoss loss, std::uint64_t seed);

/// Mini-batch Adam training. With early stopping a seeded validation share
/// of the rows is held back and the best-validation parameters are returned.
DeepMapping train_deep(const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::MatrixXd>& Y, const DeepOptions& opts,
                       Direction direction = Direction::comprehension);
DeepMapping train_deep(const SparseRowMatrix& X, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                       const DeepOptions& opts, Direction direction = Direction::comprehension);

Eigen::MatrixXd apply_mapping(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X);
Eigen::MatrixXd apply_mapping(const DeepMapping& m, const SparseRowMatrix& X);

} // namespace dlm
