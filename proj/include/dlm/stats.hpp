#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "dlm/error.hpp"

namespace dlm {

enum class Similarity { pearson, cosine };

/// Pearson correlation of two equal-length vectors. Returns NaN when either
/// vector has zero variance.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::MatrixBase<DerivedA>& a,
                                  const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size())
        throw ArgumentError("pearson: length mismatch");
    const auto n = a.size();
    if (n == 0)
        return std::numeric_limits<Scalar>::quiet_NaN();
    const Scalar ma = a.sum() / Scalar(n);
    const Scalar mb = b.sum() / Scalar(n);
    Scalar sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar da = a(i) - ma;
        const Scalar db = b(i) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= Scalar(0) || sbb <= Scalar(0))
        return std::numeric_limits<Scalar>::quiet_NaN();
    const Scalar r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, Scalar(-1), Scalar(1));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na <= Scalar(0) || nb <= Scalar(0))
        return std::numeric_limits<Scalar>::quiet_NaN();
    return std::clamp(Scalar(a.dot(b) / (na * nb)), Scalar(-1), Scalar(1));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar similarity(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b, Similarity metric)
{
    return metric == Similarity::pearson ? pearson(a, b) : cosine(a, b);
}

/// Rows centred (Pearson only) and scaled to unit norm so that dot products of
/// rows are correlations. Rows with zero variance become all-NaN.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
normalized_rows(const Eigen::MatrixBase<Derived>& m, Similarity metric)
{
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
    if (metric == Similarity::pearson && out.cols() > 0)
        out.colwise() -= out.rowwise().mean();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const Scalar norm = out.row(i).norm();
        if (norm > Scalar(0))
            out.row(i) /= norm;
        else
            out.row(i).setConstant(std::numeric_limits<Scalar>::quiet_NaN());
    }
    return out;
}

/// Pearson correlation of every row of `a` with every row of `b`.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
row_correlations(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                 Similarity metric = Similarity::pearson)
{
    if (a.cols() != b.cols())
        throw ArgumentError("row_correlations: column mismatch");
    auto na = normalized_rows(a, metric);
    auto nb = normalized_rows(b, metric);
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r = na * nb.transpose();
    return r.unaryExpr([](Scalar v) { return std::isnan(v) ? v : std::clamp(v, Scalar(-1), Scalar(1)); });
}

/// 1-based ranks, ties receive the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> xs)
{
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return xs[i] < xs[j]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]])
            ++j;
        const double avg = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation with tie-averaged ranks. Empty when either
/// series is constant.
inline std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
        throw ArgumentError("spearman: series lengths differ");
    if (xs.size() < 2)
        throw ArgumentError("spearman: need at least two observations");
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const Eigen::Map<const Eigen::VectorXd> vx(rx.data(), Eigen::Index(rx.size()));
    const Eigen::Map<const Eigen::VectorXd> vy(ry.data(), Eigen::Index(ry.size()));
    const double r = pearson(vx, vy);
    if (std::isnan(r))
        return std::nullopt;
    return r;
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" definition). `q` in [0,1].
inline double quantile(std::vector<double> xs, double q)
{
    if (xs.empty())
        throw ArgumentError("quantile of empty sample");
    if (q < 0.0 || q > 1.0)
        throw ArgumentError("quantile: q outside [0,1]");
    std::sort(xs.begin(), xs.end());
    const double h = q * double(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - double(lo)) * (xs[hi] - xs[lo]);
}

} // namespace dlm
