#include "dlm/centroids.hpp"

#include "dlm/error.hpp"
#include "dlm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dlm {

std::string category_of(const WordEntry& e, const std::vector<std::string>& tag_keys)
{
    if (tag_keys.empty())
        throw ArgumentError("category: no tag keys given");
    std::string label;
    for (std::size_t k = 0; k < tag_keys.size(); ++k) {
        if (!e.has_tag(tag_keys[k]))
            throw ArgumentError("word '" + e.form + "' has no tag '" + tag_keys[k] + "'");
        if (k)
            label += '+';
        label += e.tag(tag_keys[k]);
    }
    return label;
}

std::vector<Centroid> compute_centroids(const Dataset& dataset, const std::vector<std::string>& tag_keys,
                                        CentroidWeighting weighting)
{
    if (dataset.empty())
        throw EmptyDatasetError("compute_centroids: empty dataset");
    std::map<std::string, std::pair<Eigen::VectorXd, double>> acc;
    std::map<std::string, Eigen::Index> counts;
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        const auto& e = dataset.entries[std::size_t(i)];
        const auto label = category_of(e, tag_keys);
        const double w = weighting == CentroidWeighting::type ? 1.0 : double(e.frequency);
        auto [it, fresh] = acc.try_emplace(label, Eigen::VectorXd::Zero(dataset.dim), 0.0);
        it->second.first += w * dataset.semantics.row(i).transpose();
        it->second.second += w;
        ++counts[label];
    }
    std::vector<Centroid> out;
    for (auto& [label, sum] : acc) {
        Centroid c;
        c.tag = label;
        c.members = counts[label];
        if (sum.second <= 0)
            throw ArgumentError("centroid '" + label + "' has zero total weight");
        c.vector = sum.first / sum.second;
        out.push_back(std::move(c));
    }
    return out;
}

Eigen::Index CueCentroidMatrix::tag_row(const std::string& tag) const
{
    const auto it = std::find(tags.begin(), tags.end(), tag);
    if (it == tags.end())
        throw ArgumentError("no centroid '" + tag + "'");
    return Eigen::Index(it - tags.begin());
}

Eigen::Index CueCentroidMatrix::undefined_count() const
{
    return r.unaryExpr([](double v) { return std::isnan(v) ? 1.0 : 0.0; }).sum();
}

CueCentroidMatrix cue_centroid_correlations(const LinearMapping& mapping, const CueIndex& cues,
                                            const std::vector<Centroid>& centroids, CueSide side)
{
    if (centroids.empty())
        throw ArgumentError("cue_centroid_correlations: no centroids");
    const Eigen::Index dim = centroids.front().vector.size();
    const Eigen::MatrixXd cue_vectors =
        side == CueSide::rows ? mapping.weights : Eigen::MatrixXd(mapping.weights.transpose());
    if (cue_vectors.rows() != cues.size())
        throw ArgumentError("cue_centroid_correlations: mapping has " + std::to_string(cue_vectors.rows()) +
                            " cue vectors, index has " + std::to_string(cues.size()) + " cues");
    if (cue_vectors.cols() != dim)
        throw ArgumentError("cue_centroid_correlations: cue vectors have dimension " +
                            std::to_string(cue_vectors.cols()) + ", centroids " + std::to_string(dim));
    Eigen::MatrixXd cm(Eigen::Index(centroids.size()), dim);
    CueCentroidMatrix out;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        cm.row(Eigen::Index(i)) = centroids[i].vector.transpose();
        out.tags.push_back(centroids[i].tag);
    }
    out.cues = cues.cues();
    out.r = row_correlations(cm, cue_vectors);
    return out;
}

std::vector<RankedCue> rank_cues(const CueCentroidMatrix& matrix, const std::string& tag,
                                 const std::function<bool(const std::string&)>& restrict)
{
    const auto row = matrix.tag_row(tag);
    std::vector<Eigen::Index> order;
    for (Eigen::Index j = 0; j < matrix.r.cols(); ++j)
        if (!std::isnan(matrix.r(row, j)))
            order.push_back(j);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        const double ra = matrix.r(row, a), rb = matrix.r(row, b);
        if (ra != rb)
            return ra > rb;
        return matrix.cues[std::size_t(a)] < matrix.cues[std::size_t(b)];
    });
    std::vector<RankedCue> out;
    Eigen::Index restricted = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& cue = matrix.cues[std::size_t(order[pos])];
        if (restrict && !restrict(cue))
            continue;
        ++restricted;
        out.push_back({cue, matrix.r(row, order[pos]), Eigen::Index(pos) + 1, restricted});
    }
    return out;
}

std::map<std::string, std::map<std::string, Eigen::Index>>
exponent_inventory(const Dataset& dataset, const std::vector<std::string>& tag_keys, CuePosition position,
                   int n, std::string_view boundary)
{
    std::map<std::string, std::map<std::string, Eigen::Index>> out;
    for (const auto& e : dataset.entries) {
        const auto grams = extract_ngrams(e.form, n, boundary);
        const auto& cue = position == CuePosition::final ? grams.back() : grams.front();
        ++out[category_of(e, tag_keys)][cue];
    }
    return out;
}

std::vector<ExponentSummary>
exponent_summary(const CueCentroidMatrix& matrix,
                 const std::map<std::string, std::map<std::string, Eigen::Index>>& inventory,
                 const std::function<bool(const std::string&)>& position_filter)
{
    std::vector<ExponentSummary> out;
    for (const auto& tag : matrix.tags) {
        const auto inv = inventory.find(tag);
        ExponentSummary s;
        s.tag = tag;
        if (inv == inventory.end()) {
            out.push_back(s);
            continue;
        }
        s.exponent_cues = Eigen::Index(inv->second.size());
        const auto ranked = rank_cues(matrix, tag);
        std::vector<double> own;
        Eigen::Index position_rank = 0;
        for (const auto& rc : ranked) {
            const bool positional = !position_filter || position_filter(rc.cue);
            if (positional)
                ++position_rank;
            if (!inv->second.count(rc.cue))
                continue;
            own.push_back(rc.r);
            if (s.best_global_rank == 0)
                s.best_global_rank = rc.global_rank;
            if (rc.global_rank <= 10)
                ++s.in_top10_global;
            if (positional && position_rank <= 10)
                ++s.in_top10_position;
        }
        if (!own.empty()) {
            s.max_r = own.front();
            const auto top = std::min<std::size_t>(5, own.size());
            s.mean_top5_r = std::accumulate(own.begin(), own.begin() + std::ptrdiff_t(top), 0.0) / double(top);
        } else {
            s.max_r = s.mean_top5_r = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(s);
    }
    return out;
}

std::vector<Transparency> word_transparency(const Dataset& dataset, const std::vector<Centroid>& centroids,
                                            const std::vector<std::string>& tag_keys)
{
    std::map<std::string, const Centroid*> by_tag;
    for (const auto& c : centroids)
        by_tag[c.tag] = &c;
    std::vector<Transparency> out;
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        const auto& e = dataset.entries[std::size_t(i)];
        const auto label = category_of(e, tag_keys);
        const auto it = by_tag.find(label);
        if (it == by_tag.end())
            throw ArgumentError("word_transparency: no centroid for category '" + label + "'");
        Transparency t;
        t.word = dataset.keys[std::size_t(i)];
        t.tag = label;
        t.degenerate = it->second->members == 1;
        t.r = t.degenerate ? 1.0 : pearson(dataset.semantics.row(i).transpose(), it->second->vector);
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace dlm
