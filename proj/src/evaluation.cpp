#include "dlm/evaluation.hpp"

#include "dlm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dlm {

namespace {

// Scores closer than this to the target's score are recomputed with the exact
// (order-independent) routine before comparison.
constexpr double kNearTie = 1e-9;
// Recomputed scores this close count as tied (rounding of proportional rows).
constexpr double kTie = 1e-12;
constexpr Eigen::Index kBlockRows = 256;

double or_minus_inf(double v)
{
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

std::vector<Eigen::Index> lexicographic_positions(const std::vector<std::string>& labels)
{
    std::vector<Eigen::Index> order(labels.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return labels[std::size_t(a)] < labels[std::size_t(b)]; });
    std::vector<Eigen::Index> pos(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        pos[std::size_t(order[i])] = Eigen::Index(i);
    return pos;
}

/// `block(start, count)` returns count x n_cand scores for prediction rows
/// [start, start+count); `exact(i, j)` recomputes one score deterministically.
template <typename Block, typename Exact>
std::vector<TargetRank> rank_core(Eigen::Index n_pred, Eigen::Index n_cand,
                                  const std::vector<std::string>& labels,
                                  const std::vector<Eigen::Index>& targets, Block&& block, Exact&& exact)
{
    if (Eigen::Index(labels.size()) != n_cand)
        throw ArgumentError("ranking: one label per candidate required");
    if (Eigen::Index(targets.size()) != n_pred)
        throw ArgumentError("ranking: one target per prediction required");
    for (auto t : targets)
        if (t < 0 || t >= n_cand)
            throw ArgumentError("ranking: target outside candidate set");
    const auto lex = lexicographic_positions(labels);

    std::vector<TargetRank> out(static_cast<std::size_t>(n_pred));
    for (Eigen::Index start = 0; start < n_pred; start += kBlockRows) {
        const Eigen::Index count = std::min(kBlockRows, n_pred - start);
        const Eigen::MatrixXd scores = block(start, count);
#pragma omp parallel for schedule(static)
        for (Eigen::Index r = 0; r < count; ++r) {
            const Eigen::Index i = start + r;
            const Eigen::Index t = targets[std::size_t(i)];
            const double raw_t = exact(i, t);
            const double vt = or_minus_inf(raw_t);
            Eigen::Index better = 0;
            bool all_nan = true;
            for (Eigen::Index j = 0; j < n_cand; ++j) {
                double s = scores(r, j);
                if (!std::isnan(s))
                    all_nan = false;
                if (j == t)
                    continue;
                if (std::abs(s - vt) <= kNearTie)
                    s = exact(i, j);
                const double vj = or_minus_inf(s);
                const bool tied = vj == vt || std::abs(vj - vt) <= kTie;
                if (tied ? lex[std::size_t(j)] < lex[std::size_t(t)] : vj > vt)
                    ++better;
            }
            auto& tr = out[std::size_t(i)];
            tr.rank = better + 1;
            tr.r_target = raw_t;
            tr.degenerate = std::isnan(raw_t) || all_nan;
        }
    }
    return out;
}

double sequential_dot(const double* a, const double* b, Eigen::Index n)
{
    double s = 0;
    for (Eigen::Index k = 0; k < n; ++k)
        s += a[k] * b[k];
    return s;
}

void check_ks(std::vector<Eigen::Index>& ks, Eigen::Index candidate_count)
{
    if (ks.empty())
        throw ArgumentError("accuracy: no k values given");
    for (auto k : ks)
        if (k <= 0 || k > candidate_count)
            throw ArgumentError("accuracy: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(candidate_count) + "]");
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
}

} // namespace

double AccuracyReport::at(Eigen::Index k) const
{
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k)
            return type_accuracy[i];
    throw ArgumentError("accuracy@" + std::to_string(k) + " was not evaluated");
}

double AccuracyReport::tokens_at(Eigen::Index k) const
{
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k)
            return token_accuracy[i];
    throw ArgumentError("accuracy@" + std::to_string(k) + " was not evaluated");
}

std::vector<TargetRank> rank_targets(const Eigen::Ref<const Eigen::MatrixXd>& predictions,
                                     const Eigen::Ref<const Eigen::MatrixXd>& candidates,
                                     const std::vector<std::string>& labels,
                                     const std::vector<Eigen::Index>& targets, Similarity metric)
{
    if (predictions.cols() != candidates.cols())
        throw ArgumentError("ranking: predictions have " + std::to_string(predictions.cols()) +
                            " columns, candidates " + std::to_string(candidates.cols()));
    const RowMatrixXd np = normalized_rows(predictions, metric);
    const RowMatrixXd nc = normalized_rows(candidates, metric);
    const Eigen::Index d = nc.cols();
    auto block = [&](Eigen::Index start, Eigen::Index count) -> Eigen::MatrixXd {
        return np.middleRows(start, count) * nc.transpose();
    };
    auto exact = [&](Eigen::Index i, Eigen::Index j) {
        const double v = sequential_dot(np.row(i).data(), nc.row(j).data(), d);
        return std::isnan(v) ? v : std::clamp(v, -1.0, 1.0);
    };
    return rank_core(predictions.rows(), candidates.rows(), labels, targets, block, exact);
}

TargetRank rank_target(const Eigen::Ref<const Eigen::RowVectorXd>& predicted, const std::string& target,
                       const EmbeddingTable& candidates, Similarity metric)
{
    const auto t = candidates.index_of(target);
    if (!t)
        throw ArgumentError("rank_target: '" + target + "' is not a candidate");
    if (predicted.size() != candidates.dim())
        throw ArgumentError("rank_target: predicted vector has wrong length");
    const Eigen::MatrixXd p = predicted;
    return rank_targets(p, candidates.matrix(), candidates.words(), {*t}, metric).front();
}

AccuracyReport summarize(const std::vector<Eigen::Index>& ks_in, Eigen::Index candidate_count,
                         std::vector<WordRecord> records)
{
    auto ks = ks_in;
    check_ks(ks, candidate_count);
    AccuracyReport rep;
    rep.ks = ks;
    const auto nk = ks.size();
    std::vector<double> hit(nk, 0), tok(nk, 0);
    double total_tokens = 0;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> class_hits;
    for (const auto& w : records) {
        total_tokens += double(w.frequency);
        if (w.degenerate)
            ++rep.degenerate_predictions;
        auto& cls = rep.by_class[w.cls];
        auto& ch = class_hits[w.cls];
        if (ch.first.empty()) {
            ch.first.assign(nk, 0);
            ch.second.assign(nk, 0);
        }
        ++cls.words;
        cls.tokens += w.frequency;
        for (std::size_t k = 0; k < nk; ++k) {
            if (w.rank <= ks[k]) {
                hit[k] += 1;
                tok[k] += double(w.frequency);
                ch.first[k] += 1;
                ch.second[k] += double(w.frequency);
            }
        }
    }
    const double n = double(records.size());
    for (std::size_t k = 0; k < nk; ++k) {
        rep.type_accuracy.push_back(n > 0 ? hit[k] / n : 0.0);
        rep.token_accuracy.push_back(total_tokens > 0 ? tok[k] / total_tokens : 0.0);
    }
    for (auto& [name, cls] : rep.by_class) {
        const auto& ch = class_hits[name];
        for (std::size_t k = 0; k < nk; ++k) {
            cls.type_accuracy.push_back(ch.first[k] / double(cls.words));
            cls.token_accuracy.push_back(cls.tokens > 0 ? ch.second[k] / double(cls.tokens) : 0.0);
        }
    }
    rep.words = std::move(records);
    return rep;
}

AccuracyReport accuracy_report(const Eigen::Ref<const Eigen::MatrixXd>& predictions, const Dataset& gold,
                               const EmbeddingTable& candidates, std::vector<Eigen::Index> ks,
                               const EvalOptions& opts)
{
    if (predictions.rows() != gold.size())
        throw ArgumentError("accuracy_report: " + std::to_string(predictions.rows()) +
                            " predictions for " + std::to_string(gold.size()) + " gold words");
    check_ks(ks, candidates.size());
    std::vector<Eigen::Index> targets;
    targets.reserve(std::size_t(gold.size()));
    for (const auto& key : gold.keys) {
        const auto t = candidates.index_of(key);
        if (!t)
            throw ArgumentError("accuracy_report: gold word '" + key + "' missing from candidates");
        targets.push_back(*t);
    }
    const auto ranks = rank_targets(predictions, candidates.matrix(), candidates.words(), targets, opts.metric);
    std::vector<WordRecord> records;
    records.reserve(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const auto& e = gold.entries[i];
        records.push_back({gold.keys[i], opts.class_tag.empty() ? std::string() : e.tag(opts.class_tag),
                           e.frequency, ranks[i].rank, ranks[i].r_target, ranks[i].degenerate});
    }
    return summarize(ks, candidates.size(), std::move(records));
}

AccuracyReport production_accuracy(const Eigen::Ref<const Eigen::MatrixXd>& predictions,
                                   const FormMatrix& gold, std::vector<Eigen::Index> ks,
                                   const std::vector<std::int64_t>& frequencies,
                                   const std::vector<std::string>& classes, Similarity metric)
{
    if (predictions.cols() != gold.cols())
        throw ArgumentError("production_accuracy: predictions have " + std::to_string(predictions.cols()) +
                            " columns, form matrix " + std::to_string(gold.cols()));
    if (predictions.rows() != gold.rows())
        throw ArgumentError("production_accuracy: one prediction per gold row required");
    if (!frequencies.empty() && Eigen::Index(frequencies.size()) != gold.rows())
        throw ArgumentError("production_accuracy: frequencies must align with gold rows");
    if (!classes.empty() && Eigen::Index(classes.size()) != gold.rows())
        throw ArgumentError("production_accuracy: classes must align with gold rows");
    check_ks(ks, gold.rows());

    const RowMatrixXd np = normalized_rows(predictions, metric);
    const double n = double(gold.cols());
    // Similarity with a binary row of a active cues reduces to the sum of the
    // normalised prediction over those cues, divided by the row's spread.
    Eigen::VectorXd inv_spread(gold.rows());
    for (Eigen::Index j = 0; j < gold.rows(); ++j) {
        const double a = double(gold.active(j).size());
        const double spread = metric == Similarity::pearson ? std::sqrt(a * (1.0 - a / n)) : std::sqrt(a);
        inv_spread(j) = spread > 0 ? 1.0 / spread : std::numeric_limits<double>::quiet_NaN();
    }
    const SparseRowMatrix cand = gold.sparse();
    auto block = [&](Eigen::Index start, Eigen::Index count) -> Eigen::MatrixXd {
        Eigen::MatrixXd s = np.middleRows(start, count) * cand.transpose();
        return s * inv_spread.asDiagonal();
    };
    auto exact = [&](Eigen::Index i, Eigen::Index j) {
        double s = 0;
        for (const auto c : gold.active(j))
            s += np(i, c);
        const double v = s * inv_spread(j);
        return std::isnan(v) ? v : std::clamp(v, -1.0, 1.0);
    };
    std::vector<Eigen::Index> targets(std::size_t(gold.rows()));
    std::iota(targets.begin(), targets.end(), Eigen::Index{0});
    const auto ranks = rank_core(gold.rows(), gold.rows(), gold.words(), targets, block, exact);

    std::vector<WordRecord> records;
    for (std::size_t i = 0; i < ranks.size(); ++i)
        records.push_back({gold.words()[i], classes.empty() ? std::string() : classes[i],
                           frequencies.empty() ? 1 : frequencies[i], ranks[i].rank, ranks[i].r_target,
                           ranks[i].degenerate});
    return summarize(ks, gold.rows(), std::move(records));
}

} // namespace dlm
