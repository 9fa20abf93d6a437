#include <doctest.h>

#include "dlm/error.hpp"
#include "dlm/productivity.hpp"
#include "dlm/stats.hpp"

#include "support.hpp"

#include <algorithm>
#include <random>

using namespace dlm;

#ifndef DLM_DATA_DIR
#define DLM_DATA_DIR "data"
#endif

namespace {

WordEntry at(const std::string& form, int year, std::int64_t freq = 1, Role role = Role::input)
{
    WordEntry e;
    e.form = e.lemma = form;
    e.frequency = freq;
    e.period = year;
    e.role = role;
    return e;
}

WordEntry out_at(const std::string& form, int year, std::int64_t freq = 1)
{
    return at(form, year, freq, Role::output);
}

// Random stream over a small vocabulary: suffix words and distractors.
struct Stream {
    std::vector<WordEntry> input, output;
};

Stream random_stream(std::uint64_t seed, int years = 12)
{
    std::mt19937_64 rng(seed);
    const std::vector<std::string> stems{"frei", "klug", "ehr", "bau", "fest", "reich", "herz", "mut", "wahr"};
    std::uniform_int_distribution<std::size_t> pick(0, stems.size() - 1);
    std::uniform_int_distribution<int> count(0, 6), freq(1, 4), coin(0, 2);
    Stream s;
    for (int y = 1880; y < 1880 + years; ++y) {
        for (int i = count(rng); i > 0; --i)
            s.input.push_back(at(stems[pick(rng)] + (coin(rng) ? "tum" : "los"), y, freq(rng)));
        for (int i = count(rng) / 2; i > 0; --i)
            s.output.push_back(out_at(stems[pick(rng)] + (coin(rng) ? "tum" : "los"), y, freq(rng)));
    }
    return s;
}

} // namespace

TEST_CASE("pattern rules")
{
    const auto s = PatternRule::parse("nis");
    CHECK(s.name == "-nis");
    CHECK(PatternRule::parse("-nis").suffix == "nis");
    CHECK(s.matches(at("Ereignis", 1890)));
    CHECK_FALSE(s.matches(at("nis", 1890)));
    CHECK_FALSE(s.matches(at("Ereignisse", 1890)));

    auto stop = PatternRule::parse("tum");
    stop.stoplist = {"Stum"};
    CHECK_FALSE(stop.matches(at("Stum", 1)));

    const auto t = PatternRule::parse("suffix=los");
    CHECK(t.name == "los");
    auto e = at("x", 1);
    CHECK_FALSE(t.matches(e));
    e.tags["suffix"] = "los";
    CHECK(t.matches(e));
    CHECK_THROWS_AS(PatternRule::parse(""), ArgumentError);
    CHECK_THROWS_AS(PatternRule::parse("-"), ArgumentError);
    CHECK_THROWS_AS(PatternRule::parse("=x"), ArgumentError);
}

TEST_CASE("growth curve examples")
{
    const auto g = growth_curve({at("a", 1890), at("b", 1890), at("b", 1891), at("c", 1891)});
    REQUIRE(g.size() == 2);
    CHECK(g[0].year == 1890);
    CHECK(g[0].types == 2);
    CHECK(g[1].types == 3);
    CHECK(growth_curve({}).empty());
    WordEntry undated;
    undated.form = "x";
    CHECK_THROWS_AS(growth_curve({undated}), ArgumentError);
}

TEST_CASE("growth curve matches a set-union oracle and never decreases")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> year(1900, 1930), word(0, 60);
    std::vector<WordEntry> es;
    for (int i = 0; i < 200; ++i)
        es.push_back(at("w" + std::to_string(word(rng)), year(rng)));
    const auto g = growth_curve(es);
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::set<std::string> seen;
        for (const auto& e : es)
            if (*e.period <= g[i].year)
                seen.insert(e.form);
        CHECK(g[i].types == Eigen::Index(seen.size()));
        if (i)
            CHECK(g[i].types >= g[i - 1].types);
    }
    const auto filtered = growth_curve(es, [](const WordEntry& e) { return e.form.size() == 2; });
    CHECK(filtered.back().types <= 10);
}

TEST_CASE("new type detection")
{
    const auto n = detect_new_types({at("Reichtum", 1890)}, {out_at("Bajazzotum", 1897), out_at("Reichtum", 1897)});
    CHECK(n.at(1897) == std::vector<std::string>{"Bajazzotum"});

    // Read before it was written: not new.
    CHECK(detect_new_types({at("x", 1890)}, {out_at("x", 1895)}).at(1895).empty());
    // Read in the same year counts as read.
    CHECK(detect_new_types({at("x", 1895)}, {out_at("x", 1895)}).at(1895).empty());
    // Written twice: new only the first time.
    const auto twice = detect_new_types({}, {out_at("x", 1893), out_at("x", 1895)});
    CHECK(twice.at(1893) == std::vector<std::string>{"x"});
    CHECK(twice.at(1895).empty());
}

TEST_CASE("new types in a year do not depend on later data")
{
    const auto s = random_stream(11, 20);
    const auto full = detect_new_types(s.input, s.output);
    for (const int cut : {1885, 1890, 1895}) {
        std::vector<WordEntry> in, out;
        for (const auto& e : s.input)
            if (*e.period <= cut)
                in.push_back(e);
        for (const auto& e : s.output)
            if (*e.period <= cut)
                out.push_back(e);
        for (const auto& [y, fresh] : detect_new_types(in, out))
            CHECK(full.at(y) == fresh);
    }
}

TEST_CASE("pattern table matches a per-year recount")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = random_stream(seed);
        const std::vector<PatternRule> rules{PatternRule::parse("tum"), PatternRule::parse("los")};
        const auto rows = pattern_year_table(s.input, s.output, rules, EmbeddingTable{});

        std::set<int> out_years;
        for (const auto& e : s.output)
            out_years.insert(*e.period);
        CHECK(rows.size() == rules.size() * out_years.size());

        for (const auto& r : rows) {
            const auto& rule = r.pattern == "-tum" ? rules[0] : rules[1];
            std::map<std::string, std::int64_t> read;
            std::set<std::string> read_before, written_this, written_before;
            for (const auto& e : s.input) {
                if (!rule.matches(e))
                    continue;
                if (*e.period == r.year)
                    read[e.form] += e.frequency;
                if (*e.period <= r.year)
                    read_before.insert(e.form);
            }
            for (const auto& e : s.output) {
                if (!rule.matches(e))
                    continue;
                if (*e.period == r.year)
                    written_this.insert(e.form);
                if (*e.period < r.year)
                    written_before.insert(e.form);
            }
            std::int64_t tokens = 0;
            Eigen::Index hapaxes = 0, first_seen = 0;
            for (const auto& [w, f] : read) {
                tokens += f;
                hapaxes += f == 1;
                bool earlier = false;
                for (const auto& e : s.input)
                    earlier = earlier || (rule.matches(e) && e.form == w && *e.period < r.year);
                first_seen += !earlier;
            }
            Eigen::Index known = 0, fresh = 0;
            for (const auto& w : written_this) {
                if (read_before.count(w))
                    ++known;
                else if (!written_before.count(w))
                    ++fresh;
            }
            std::set<std::string> recycled;
            for (const auto& e : s.output)
                if (rule.matches(e) && *e.period <= r.year) {
                    bool was_read = false;
                    for (const auto& i : s.input)
                        was_read = was_read || (i.form == e.form && *i.period <= *e.period);
                    if (was_read)
                        recycled.insert(e.form);
                }

            CHECK(r.input_types == Eigen::Index(read.size()));
            CHECK(r.input_tokens == tokens);
            CHECK(r.input_hapaxes == hapaxes);
            CHECK(r.cumulative_input_types == Eigen::Index(read_before.size()));
            CHECK(r.new_input_types == first_seen);
            CHECK(r.output_types == Eigen::Index(written_this.size()));
            CHECK(r.known_output_types == known);
            CHECK(r.new_output_types == fresh);
            CHECK(r.cumulative_recycled == Eigen::Index(recycled.size()));
            CHECK(r.degenerate == (tokens == 0 || read_before.empty()));

            CHECK(r.p_narrow >= 0.0);
            CHECK(r.p_narrow <= 1.0);
            CHECK(r.p_neo >= 0.0);
            CHECK(r.p_neo <= 1.0);
            CHECK(r.recycle_rate >= 0.0);
            CHECK(r.recycle_rate <= 1.0);
            if (r.new_input_types == 0)
                CHECK(r.p_neo == 0.0);
        }
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].pattern == rows[i - 1].pattern) {
                CHECK(rows[i].year > rows[i - 1].year);
                CHECK(rows[i].cumulative_input_types >= rows[i - 1].cumulative_input_types);
                CHECK(rows[i].cumulative_recycled >= rows[i - 1].cumulative_recycled);
            }
    }
}

TEST_CASE("pattern table: empty input years are degenerate")
{
    const auto rows = pattern_year_table({at("Reichtum", 1895)}, {out_at("Irrtum", 1890), out_at("Reichtum", 1896)},
                                         {PatternRule::parse("tum")}, EmbeddingTable{});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].degenerate);
    CHECK(rows[0].p_narrow == 0.0);
    CHECK(rows[0].recycle_rate == 0.0);
    CHECK(rows[0].new_output_types == 1);
    CHECK(rows[1].year == 1896);
    CHECK(rows[1].degenerate);
    CHECK(rows[1].cumulative_recycled == 1);
    CHECK(rows[1].recycle_rate == 1.0);
}

TEST_CASE("centroid distance follows the running mean of new input types")
{
    EmbeddingTable t(2);
    t.add("atum", Eigen::Vector2d(0, 0));
    t.add("btum", Eigen::Vector2d(2, 0));
    t.add("ctum", Eigen::Vector2d(0, 3));
    const std::vector<WordEntry> in{at("atum", 1), at("btum", 1), at("ctum", 2), at("atum", 2), at("dtum", 2)};
    const std::vector<WordEntry> out{out_at("xtum", 1), out_at("ytum", 2), out_at("ztum", 3)};
    const auto rows = pattern_year_table(in, out, {PatternRule::parse("tum")}, t);
    REQUIRE(rows.size() == 3);
    // Year 1: centroid (1,0); distances 1 and 1.
    CHECK(rows[0].centroid_distance == doctest::Approx(1.0));
    // Year 2: centroid of a,b,c = (2/3, 1); ctum and atum are embedded.
    const Eigen::Vector2d c(2.0 / 3.0, 1.0);
    const double expect = ((Eigen::Vector2d(0, 3) - c).norm() + c.norm()) / 2.0;
    CHECK(rows[1].centroid_distance == doctest::Approx(expect));
    CHECK(std::isnan(rows[2].centroid_distance));

    PatternTableOptions o;
    o.distance = DistanceMetric::correlation;
    const auto corr = pattern_year_table(in, out, {PatternRule::parse("tum")}, t, o);
    CHECK(std::isnan(corr[0].centroid_distance)); // (0,0) has no variance
}

TEST_CASE("pattern totals from the fixture")
{
    const auto totals = load_pattern_totals(DLM_DATA_DIR "/mann/pattern_counts.tsv");
    REQUIRE(totals.size() == 7);
    const auto los = std::find_if(totals.begin(), totals.end(), [](const auto& t) { return t.pattern == "-los"; });
    REQUIRE(los != totals.end());
    CHECK(los->input_tokens == 22215);
    CHECK(los->p_narrow() == doctest::Approx(0.0937).epsilon(1e-3));
    CHECK_FALSE(los->recycle_rate());
    CHECK(totals[2].recycle_rate().value() == doctest::Approx(23.0 / 335.0));
}

TEST_CASE("pattern totals: malformed files")
{
    testing_support::TempDir tmp;
    testing_support::write_file(tmp / "a.tsv", "pattern\tinput_types\n");
    CHECK_THROWS_AS(load_pattern_totals(tmp / "a.tsv"), SchemaError);
    testing_support::write_file(tmp / "b.tsv",
                                "pattern\tinput_types\tinput_tokens\tinput_hapaxes\toutput_types\toutput_tokens\t"
                                "new_output_types\n-x\t1\tmany\t0\t0\t0\t0\n");
    CHECK_THROWS_AS(load_pattern_totals(tmp / "b.tsv"), ParseError);
    CHECK_THROWS_AS(load_pattern_totals(tmp / "missing.tsv"), IoError);
}

TEST_CASE("pooled totals agree with the last year of the table")
{
    const auto s = random_stream(4);
    const std::vector<PatternRule> rules{PatternRule::parse("tum")};
    const auto totals = pattern_totals(s.input, s.output, rules);
    const auto rows = pattern_year_table(s.input, s.output, rules, EmbeddingTable{});
    std::set<std::string> all_in;
    for (const auto& e : s.input)
        if (rules[0].matches(e))
            all_in.insert(e.form);
    CHECK(totals[0].input_types == Eigen::Index(all_in.size()));
    CHECK(totals[0].recycled.value() == rows.back().cumulative_recycled);
    Eigen::Index fresh = 0;
    for (const auto& r : rows)
        fresh += r.new_output_types;
    CHECK(totals[0].new_output_types == fresh);
}

namespace {

// Hand ranking without tie handling; inputs are distinct.
double naive_spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                r[i] += v[j] < v[i];
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = double(x.size());
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

} // namespace

TEST_CASE("spearman: extremes, constants and the fixture series")
{
    const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1}, flat{2, 2, 2, 2, 2};
    CHECK(spearman_test(a, a).rho.value() == doctest::Approx(1.0));
    CHECK(spearman_test(a, a).p_value == 0.0);
    CHECK(spearman_test(a, b).rho.value() == doctest::Approx(-1.0));
    CHECK_FALSE(spearman_test(a, flat).rho);
    CHECK_THROWS_AS(spearman_test(a, std::vector<double>{1, 2}), ArgumentError);

    std::vector<double> xs, ys;
    for (const auto& [l, v] : load_labeled_series(DLM_DATA_DIR "/mann/input_types.csv"))
        xs.push_back(v);
    for (const auto& [l, v] : load_labeled_series(DLM_DATA_DIR "/mann/new_output_types.csv"))
        ys.push_back(v);
    const auto r = spearman_test(xs, ys);
    CHECK(r.n == 7);
    CHECK(r.rho.value() == doctest::Approx(0.955).epsilon(1e-3));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 0.01);
}

TEST_CASE("spearman agrees with hand ranks and ignores monotone transforms")
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(3 + rep % 20), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = g(rng);
            y[i] = 0.5 * x[i] + g(rng);
        }
        const double rho = spearman_test(x, y).rho.value();
        CHECK(rho == doctest::Approx(naive_spearman(x, y)).epsilon(1e-12));
        std::vector<double> ex(x.size());
        std::transform(x.begin(), x.end(), ex.begin(), [](double v) { return std::exp(3 * v) + 7; });
        CHECK(spearman_test(ex, y).rho.value() == doctest::Approx(rho).epsilon(1e-12));
        const double p = spearman_test(x, y).p_value;
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("average ranks give ties the mean rank")
{
    const std::vector<double> v{3, 1, 3, 2};
    CHECK(average_ranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
}
