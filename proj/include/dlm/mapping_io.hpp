#pragma once

#include <filesystem>
#include <variant>

#include "dlm/deep_mapping.hpp"
#include "dlm/linear_mapping.hpp"

namespace dlm {

using Mapping = std::variant<LinearMapping, DeepMapping>;

// Container: `<name>.json` holds metadata and the layout of every array;
// `<name>.f64` next to it holds the arrays back to back as row-major
// little-endian IEEE-754 doubles.
void save_mapping(const std::filesystem::path& json_path, const LinearMapping& m);
void save_mapping(const std::filesystem::path& json_path, const DeepMapping& m);
Mapping load_mapping(const std::filesystem::path& json_path);

Eigen::MatrixXd apply_mapping(const Mapping& m, const SparseRowMatrix& X);
Eigen::MatrixXd apply_mapping(const Mapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X);
Eigen::Index mapping_in_dim(const Mapping& m);

} // namespace dlm
