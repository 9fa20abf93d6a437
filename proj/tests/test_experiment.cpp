#include <doctest.h>

#include "dlm/error.hpp"
#include "dlm/experiment.hpp"

#include "support.hpp"
#include "synthetic.hpp"

#include <json.hpp>

#include <set>

using namespace dlm;
using testing_support::TempDir;

namespace {

// 12 lexemes x 4 exponents written to disk. Lexeme l is first attested in
// 1890 + l % 4; a few forms reappear later.
struct Fixture {
    TempDir dir;
    synth::Inflection gen = synth::inflection(12, 4, 16, 0.05, 3);

    Fixture()
    {
        std::string tsv = "form\tlemma\tfrequency\texponent\tyear\trole\n";
        for (std::size_t i = 0; i < gen.lexicon.size(); ++i) {
            const auto& e = gen.lexicon[i];
            const int year = 1890 + int(i / 4) % 4;
            tsv += e.form + "\t" + e.lemma + "\t" + std::to_string(e.frequency) + "\t" + e.tag("exponent") + "\t" +
                   std::to_string(year) + "\tinput\n";
            if (i % 5 == 0)
                tsv += e.form + "\t" + e.lemma + "\t1\t" + e.tag("exponent") + "\t1894\tinput\n";
        }
        testing_support::write_file(dir / "lex.tsv", tsv);
        write_embeddings(dir / "emb.txt", gen.embeddings);
    }

    ExperimentConfig config(const std::string& out, std::map<std::string, std::string> extra = {}) const
    {
        extra["lexicon"] = "lex.tsv";
        extra["embeddings"] = "emb.txt";
        extra["output_dir"] = out;
        extra["columns.tags"] = "exponent";
        return make_config(extra, dir.path());
    }
};

nlohmann::json manifest_json(const std::filesystem::path& dir)
{
    return nlohmann::json::parse(testing_support::read_file(dir / "manifest.json"));
}

} // namespace

TEST_CASE("sha256 and seeds")
{
    TempDir tmp;
    testing_support::write_file(tmp / "abc", "abc");
    CHECK(sha256_file(tmp / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    testing_support::write_file(tmp / "empty", "");
    CHECK(sha256_file(tmp / "empty") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_THROWS_AS(sha256_file(tmp / "none"), IoError);

    CHECK(derive_seed(1, "split") == derive_seed(1, "split"));
    CHECK(derive_seed(1, "split") != derive_seed(2, "split"));
    CHECK(derive_seed(1, "split") != derive_seed(1, "train"));
}

TEST_CASE("collapse_types")
{
    WordEntry a;
    a.form = "x";
    a.frequency = 2;
    a.period = 1895;
    a.tags["k"] = "first";
    auto b = a;
    b.frequency = 3;
    b.period = 1890;
    b.tags["k"] = "second";
    WordEntry c;
    c.form = "y";
    c.frequency = 1;
    const auto out = collapse_types({a, c, b});
    REQUIRE(out.size() == 2);
    CHECK(out[0].form == "x");
    CHECK(out[0].frequency == 5);
    CHECK(*out[0].period == 1890);
    CHECK(out[0].tag("k") == "first");
    CHECK(out[1].form == "y");
}

TEST_CASE("minimal endstate run writes the accuracy report and a complete manifest")
{
    Fixture f;
    const auto m = run_experiment(f.config("out"));
    const auto out = f.dir / "out";
    CHECK(m.complete);
    CHECK(m.lists("accuracy_eol_comprehension_train.csv"));
    CHECK(m.lists("accuracy_eol_comprehension_train_summary.csv"));
    CHECK(m.inputs.size() == 2);

    const auto t = read_csv(out / "accuracy_eol_comprehension_train.csv");
    CHECK(t.size() == 48);
    CHECK(t.columns[0] == "word");
    const auto s = read_csv(out / "accuracy_eol_comprehension_train_summary.csv");
    CHECK(format_cell(s.rows[0][4]) == "1"); // accuracy@1 on training data

    const auto j = manifest_json(out);
    CHECK(j["complete"] == true);
    for (const auto& file : j["files"]) {
        const auto p = out / file["path"].get<std::string>();
        REQUIRE(std::filesystem::exists(p));
        CHECK(sha256_file(p) == file["sha256"].get<std::string>());
        CHECK(std::filesystem::file_size(p) == file["bytes"].get<std::uintmax_t>());
    }
    // Every report on disk is listed.
    for (const auto& e : std::filesystem::recursive_directory_iterator(out))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            CHECK(m.lists(std::filesystem::relative(e.path(), out).generic_string()));
}

TEST_CASE("learning and centroid analysis produce cue-centroid reports, reproducibly")
{
    Fixture f;
    const std::map<std::string, std::string> extra{{"methods", "eol,fil"},
                                                   {"fil.epochs", "2"},
                                                   {"split", "random"},
                                                   {"split.fraction", "0.2"},
                                                   {"analyses", "centroids"},
                                                   {"centroids.tags", "exponent"},
                                                   {"seed", "9"}};
    const auto a = run_experiment(f.config("a", extra));
    const auto b = run_experiment(f.config("b", extra));
    CHECK(a.lists("cue_centroids_fil_comprehension.csv"));
    CHECK(a.lists("cue_centroids_eol_comprehension.csv"));
    CHECK(a.lists("transparency.csv"));
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].path == b.files[i].path);
        CHECK(a.files[i].sha256 == b.files[i].sha256);
    }

    const auto c = run_experiment(f.config("c", [&] {
        auto e = extra;
        e["seed"] = "10";
        return e;
    }()));
    const auto split_a = testing_support::read_file(f.dir / "a" / "split.csv");
    const auto split_c = testing_support::read_file(f.dir / "c" / "split.csv");
    CHECK(split_a != split_c);
}

TEST_CASE("a failing stage leaves an incomplete manifest")
{
    Fixture f;
    testing_support::write_file(f.dir / "parses.tsv", "word\tparts\nabc\ta\n");
    const auto cfg = f.config("bad", {{"analyses", "compounds"}, {"compounds.parses", "parses.tsv"}});
    try {
        run_experiment(cfg);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "compounds");
    }
    const auto j = manifest_json(f.dir / "bad");
    CHECK(j["complete"] == false);
    CHECK(j["failed_stage"] == "compounds");
    CHECK_FALSE(j["error"].is_null());
    bool has_accuracy = false;
    for (const auto& file : j["files"])
        has_accuracy = has_accuracy || file["path"] == "accuracy_eol_comprehension_train.csv";
    CHECK(has_accuracy);

    auto missing = f.config("gone");
    missing.lexicon = f.dir / "nope.tsv";
    CHECK_THROWS_AS(run_experiment(missing), StageError);
    CHECK(manifest_json(f.dir / "gone")["failed_stage"] == "ingest");
}

TEST_CASE("time slices grow the training set and hold out later words")
{
    Fixture f;
    Manifest m;
    const auto slices = run_time_slices(f.config("slices"), {1892, 1890, 1891}, &m);
    REQUIRE(slices.size() == 3);
    CHECK(slices[0].year == 1890);
    CHECK(m.complete);
    CHECK(m.lists("slices/sizes.csv"));
    for (std::size_t i = 0; i < slices.size(); ++i) {
        // Forms first seen in year <= y train; the rest are held out.
        Eigen::Index upto = 0;
        for (std::size_t w = 0; w < f.gen.lexicon.size(); ++w)
            upto += 1890 + int(w / 4) % 4 <= slices[i].year;
        CHECK(slices[i].train_words == upto);
        CHECK(slices[i].heldout_words == Eigen::Index(f.gen.lexicon.size()) - upto);
        if (i)
            CHECK(slices[i].train_words > slices[i - 1].train_words);
    }
    CHECK(m.lists("slices/1890/accuracy_eol_heldout.csv"));
}
