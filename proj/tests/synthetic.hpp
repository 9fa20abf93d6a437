#pragma once
// Synthetic corpora shared by the unit tests and the acceptance binary.

#include "dlm/corpus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace synth {

inline Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index d, double sd = 1.0)
{
    std::normal_distribution<double> g(0.0, sd);
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i)
        v(i) = g(rng);
    return v;
}

struct Inflection {
    std::vector<dlm::WordEntry> lexicon;
    dlm::EmbeddingTable embeddings;
    std::vector<std::string> suffixes;
};

// lexemes x exponents inflected forms. Stems are CVCVC strings whose
// consonants never occur in a suffix, so "<suffix>#" is unique to its exponent and
// seam cues are shared by only a few lexemes. Suffixes come in pairs with a
// common first letter so that every seam cue recurs. Embeddings are lexeme +
// exponent + N(0, noise).
inline Inflection inflection(int lexemes = 50, int exponents = 10, Eigen::Index dim = 64, double noise = 0.05,
                             std::uint64_t seed = 7, int endings = 8)
{
    static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
    static const char* vowels[] = {"a", "e", "i", "o", "u"};
    static const char* suffixes[] = {"xay", "xoq", "wyq", "wec", "jyx", "joh", "qaw", "qic", "yjo", "yuh",
                                     "hwy", "hoc"};
    std::mt19937_64 rng(seed);
    Inflection out{{}, dlm::EmbeddingTable(dim), {}};
    std::vector<Eigen::VectorXd> exp_vec;
    for (int e = 0; e < exponents; ++e) {
        out.suffixes.push_back(suffixes[e]);
        exp_vec.push_back(gaussian(rng, dim));
    }
    std::vector<std::string> stems;
    for (int a = 0; stems.size() < std::size_t(lexemes); ++a) {
        const int o1 = a % 14, v1 = (a / 14) % 5, o2 = (a / 70) % 14;
        const int coda = (5 * a + a / 14) % endings;
        stems.push_back(std::string(onsets[o1]) + vowels[v1] + onsets[(o2 + 3 * o1) % 14] + vowels[coda % 5] +
                        onsets[coda]);
    }
    for (int l = 0; l < lexemes; ++l) {
        const Eigen::VectorXd lex = gaussian(rng, dim);
        for (int e = 0; e < exponents; ++e) {
            dlm::WordEntry w;
            w.form = stems[std::size_t(l)] + suffixes[e];
            w.lemma = stems[std::size_t(l)];
            w.frequency = 1 + (l * 7 + e * 3) % 11;
            w.tags["exponent"] = "e" + std::to_string(e);
            w.tags["lexeme"] = w.lemma;
            out.lexicon.push_back(w);
            out.embeddings.add(w.form, lex + exp_vec[std::size_t(e)] + gaussian(rng, dim, noise));
        }
    }
    return out;
}

struct Zipf {
    std::vector<dlm::WordEntry> lexicon;
    dlm::EmbeddingTable embeddings;
};

// `types` random letter strings with frequency round(top / rank) (at least
// 1) and unrelated Gaussian embeddings.
inline Zipf zipf(int types = 500, double top = 1000, Eigen::Index dim = 50, std::uint64_t seed = 11, int alphabet = 26)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> letter(0, alphabet - 1), len(5, 8);
    Zipf out{{}, dlm::EmbeddingTable(dim)};
    std::set<std::string> seen;
    while (int(out.lexicon.size()) < types) {
        std::string w;
        const int n = len(rng);
        for (int i = 0; i < n; ++i)
            w += char('a' + letter(rng));
        if (!seen.insert(w).second)
            continue;
        dlm::WordEntry e;
        e.form = e.lemma = w;
        const double rank = double(out.lexicon.size() + 1);
        e.frequency = std::max<std::int64_t>(1, std::int64_t(std::llround(top / rank)));
        out.lexicon.push_back(e);
        out.embeddings.add(w, gaussian(rng, dim));
    }
    return out;
}

// Unique random words over a reduced alphabet, sized so that the 4-gram
// inventory lands near the requested cue count.
inline std::vector<std::string> random_words(int count, int alphabet, int min_len, int max_len, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> letter(0, alphabet - 1), len(min_len, max_len);
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (int(out.size()) < count) {
        std::string w;
        const int n = len(rng);
        for (int i = 0; i < n; ++i)
            w += char('a' + letter(rng));
        if (seen.insert(w).second)
            out.push_back(w);
    }
    return out;
}

} // namespace synth
