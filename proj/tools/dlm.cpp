// dlm: command-line front end for the lexicon mapping toolkit.

#include "dlm/centroids.hpp"
#include "dlm/compounds.hpp"
#include "dlm/config.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/experiment.hpp"
#include "dlm/form_space.hpp"
#include "dlm/mapping_io.hpp"
#include "dlm/productivity.hpp"
#include "dlm/report.hpp"
#include "dlm/text.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dlm;

namespace {

struct Common {
    std::string out_dir;
    std::string format = "csv";
    bool no_lowercase = false;

    fs::path dir() const
    {
        if (!out_dir.empty())
            return out_dir;
        if (const char* env = std::getenv("DLM_OUTPUT_DIR"); env && *env)
            return env;
        return ".";
    }
    ReportFormat fmt() const { return parse_report_format(format); }
    std::string ext() const { return fmt() == ReportFormat::csv ? ".csv" : ".json"; }
    void emit(const Table& t, const std::string& stem) const
    {
        const auto p = dir() / (stem + ext());
        emit_report(t, fmt(), p);
        std::cout << p.string() << '\n';
    }
};

void add_common(CLI::App* app, Common& c, bool lexicon = true)
{
    app->add_option("--out-dir", c.out_dir, "Output directory (default: $DLM_OUTPUT_DIR or .)");
    app->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    if (lexicon)
        app->add_flag("--no-lowercase", c.no_lowercase, "Keep lexicon case");
}

struct DataArgs {
    std::string lexicon;
    std::string embeddings;
    std::string join = "form";
};

void add_data(CLI::App* app, DataArgs& d, bool embeddings_required = true)
{
    app->add_option("--lexicon", d.lexicon, "TSV lexicon")->required()->check(CLI::ExistingFile);
    auto* e = app->add_option("--embeddings", d.embeddings, "word2vec text embeddings")->check(CLI::ExistingFile);
    if (embeddings_required)
        e->required();
    app->add_option("--join", d.join, "Embedding lookup key")->check(CLI::IsMember({"form", "lemma"}));
}

std::vector<WordEntry> read_lexicon(const DataArgs& d, const Common& c)
{
    LexiconSchema schema;
    schema.lowercase = !c.no_lowercase;
    return load_lexicon(d.lexicon, schema);
}

Dataset read_dataset(const DataArgs& d, const Common& c)
{
    std::vector<WordEntry> input;
    for (const auto& e : read_lexicon(d, c))
        if (e.role == Role::input)
            input.push_back(e);
    return assemble_dataset(collapse_types(input), load_embeddings(d.embeddings),
                            d.join == "lemma" ? JoinKey::lemma : JoinKey::form);
}

// word<TAB>v1<TAB>v2 ... (any whitespace between values)
std::pair<std::vector<std::string>, Eigen::MatrixXd> read_vectors(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::string> words;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string word;
        if (!(ss >> word))
            continue;
        std::vector<double> v;
        std::string tok;
        while (ss >> tok) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size())
                    throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(path.string(), lineno, "'" + tok + "' is not a number");
            }
        }
        if (!rows.empty() && v.size() != rows.front().size())
            throw ParseError(path.string(), lineno, "inconsistent vector length");
        words.push_back(word);
        rows.push_back(std::move(v));
    }
    Eigen::MatrixXd m(Eigen::Index(rows.size()), rows.empty() ? 0 : Eigen::Index(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return {words, m};
}

void write_vectors(const fs::path& path, const std::vector<std::string>& words, const Eigen::MatrixXd& m)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << words[std::size_t(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << '\t' << buf;
        }
        out << '\n';
    }
    std::cout << path.string() << '\n';
}

std::vector<std::string> read_words(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (!t.empty())
            out.emplace_back(t);
    }
    return out;
}

std::vector<double> series_values(const fs::path& path, std::vector<std::string>* labels)
{
    std::vector<double> v;
    for (const auto& [label, x] : load_labeled_series(path)) {
        if (labels)
            labels->push_back(label);
        v.push_back(x);
    }
    return v;
}

std::vector<PatternRule> rules(const std::vector<std::string>& specs)
{
    std::vector<PatternRule> out;
    for (const auto& s : specs)
        for (const auto& p : split_list(s))
            out.push_back(PatternRule::parse(p));
    if (out.empty())
        throw ArgumentError("at least one --pattern is required");
    return out;
}

int fail(const char* kind, const std::string& msg)
{
    std::cerr << "error: " << kind << ": " << msg << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discriminative lexicon mappings, evaluation and productivity analyses"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::function<void()> action;

    // ingest
    Common ingest_c;
    DataArgs ingest_d;
    auto* ingest = app.add_subcommand("ingest", "Join lexicon and embeddings; report kept and dropped words");
    add_data(ingest, ingest_d);
    add_common(ingest, ingest_c);
    ingest->callback([&] {
        action = [&] {
            const auto d = read_dataset(ingest_d, ingest_c);
            Table kept({"word", "key", "lemma", "frequency"});
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                const auto& e = d.entries[std::size_t(i)];
                kept.add({e.form, d.keys[std::size_t(i)], e.lemma, e.frequency});
            }
            Table dropped({"word", "reason"});
            for (const auto& w : d.dropped)
                dropped.add({w.word, w.reason});
            ingest_c.emit(kept, "dataset");
            ingest_c.emit(dropped, "dropped");
        };
    });

    // split
    Common split_c;
    DataArgs split_d;
    std::string split_mode = "threshold";
    std::int64_t split_threshold = 5;
    double split_fraction = 0.1;
    std::uint64_t split_seed = 1;
    int split_n = 4;
    std::vector<std::string> split_tags;
    auto* split_cmd = app.add_subcommand("split", "Cue-covered train/test split");
    add_data(split_cmd, split_d);
    add_common(split_cmd, split_c);
    split_cmd->add_option("--mode", split_mode, "threshold or random")->check(CLI::IsMember({"threshold", "random"}));
    split_cmd->add_option("--threshold", split_threshold, "Frequency at or below which words go to test");
    split_cmd->add_option("--fraction", split_fraction, "Test share in random mode")->check(CLI::Range(0.0, 1.0));
    split_cmd->add_option("--seed", split_seed, "Seed for random mode");
    split_cmd->add_option("--ngram", split_n, "Cue n-gram size")->check(CLI::PositiveNumber);
    split_cmd->add_option("--coverage-tags", split_tags, "Tag keys the test set must share with train")
        ->delimiter(',');
    split_cmd->callback([&] {
        action = [&] {
            const auto d = read_dataset(split_d, split_c);
            SplitPolicy p;
            p.mode = split_mode == "random" ? SplitPolicy::Mode::random : SplitPolicy::Mode::threshold;
            p.threshold = split_threshold;
            p.fraction = split_fraction;
            p.seed = split_seed;
            p.coverage_tags = split_tags;
            const auto s = coverage_split(d, p, split_n);
            Table t({"word", "set"});
            std::vector<std::string> set(std::size_t(d.size()), "train");
            for (auto r : s.test_rows)
                set[std::size_t(r)] = "test";
            for (Eigen::Index i = 0; i < d.size(); ++i)
                t.add({d.keys[std::size_t(i)], set[std::size_t(i)]});
            split_c.emit(t, "split");
        };
    });

    // train
    Common train_c;
    DataArgs train_d;
    std::string train_method = "eol", train_dir = "comprehension", train_split, train_name = "mapping";
    std::string deep_loss = "mse";
    int train_n = 4, fil_epochs = 1, deep_width = 1000, deep_epochs = 200, deep_patience = 10;
    double lambda = 0, lr = 0.001, deep_lr = 1e-3;
    std::uint64_t train_seed = 1;
    auto* train = app.add_subcommand("train", "Estimate a comprehension or production mapping");
    add_data(train, train_d);
    add_common(train, train_c);
    train->add_option("--method", train_method, "eol, fil or deep")->check(CLI::IsMember({"eol", "fil", "deep"}));
    train->add_option("--direction", train_dir, "comprehension or production")
        ->check(CLI::IsMember({"comprehension", "production"}));
    train->add_option("--ngram", train_n, "Cue n-gram size")->check(CLI::PositiveNumber);
    train->add_option("--split", train_split, "split.csv from the split command; only train words are used")
        ->check(CLI::ExistingFile);
    train->add_option("--lambda", lambda, "Ridge penalty (eol)")->check(CLI::NonNegativeNumber);
    train->add_option("--learning-rate", lr, "Delta rule rate (fil)");
    train->add_option("--epochs", fil_epochs, "Passes over the token stream (fil)");
    train->add_option("--width", deep_width, "Hidden units (deep)");
    train->add_option("--loss", deep_loss, "mse or bce (deep)")->check(CLI::IsMember({"mse", "bce"}));
    train->add_option("--max-epochs", deep_epochs, "Epoch limit (deep)");
    train->add_option("--patience", deep_patience, "Early stopping patience (deep)");
    train->add_option("--adam-rate", deep_lr, "Adam step size (deep)");
    train->add_option("--seed", train_seed, "Seed for fil shuffles and deep initialisation");
    train->add_option("--name", train_name, "Base name of the written mapping");
    train->callback([&] {
        action = [&] {
            auto d = read_dataset(train_d, train_c);
            const auto space = build_form_matrix(d, train_n);
            std::vector<Eigen::Index> rows;
            if (!train_split.empty()) {
                std::map<std::string, std::string> set;
                const auto t = read_csv(train_split);
                for (const auto& r : t.rows)
                    set[format_cell(r.at(0))] = format_cell(r.at(1));
                for (Eigen::Index i = 0; i < d.size(); ++i)
                    if (set[d.keys[std::size_t(i)]] != "test")
                        rows.push_back(i);
            } else {
                for (Eigen::Index i = 0; i < d.size(); ++i)
                    rows.push_back(i);
            }
            const auto td = d.subset(rows);
            const auto C = space.matrix.select_rows(rows);
            const auto dir = parse_direction(train_dir);
            const auto out = train_c.dir() / (train_name + ".json");
            fs::create_directories(train_c.dir());
            if (train_method == "eol") {
                const auto m = dir == Direction::comprehension ? solve_endstate(C.sparse(), td.semantics, lambda, dir)
                                                               : solve_endstate(td.semantics, C.dense(), lambda, dir);
                save_mapping(out, m);
            } else if (train_method == "fil") {
                FilOptions o{lr, fil_epochs, train_seed};
                const auto m = dir == Direction::comprehension
                                   ? train_frequency_informed(C.sparse(), td.semantics, td.frequencies(), o, dir)
                                   : train_frequency_informed(td.semantics, C.dense(), td.frequencies(), o, dir);
                save_mapping(out, m);
            } else {
                DeepOptions o;
                o.width = deep_width;
                o.loss = parse_deep_loss(deep_loss);
                o.max_epochs = deep_epochs;
                o.patience = deep_patience;
                o.learning_rate = deep_lr;
                o.seed = train_seed;
                const auto m = dir == Direction::comprehension ? train_deep(C.sparse(), td.semantics, o, dir)
                                                               : train_deep(td.semantics, C.dense(), o, dir);
                save_mapping(out, m);
            }
            const auto fs_path = train_c.dir() / (train_name + ".cues.txt");
            save_form_space(fs_path, space.index, space.matrix, FormSpaceFormat::text);
            std::cout << out.string() << '\n' << fs_path.string() << '\n';
        };
    });

    // predict
    Common pred_c;
    std::string pred_mapping, pred_space, pred_words, pred_emb, pred_name = "predictions";
    auto* predict = app.add_subcommand("predict", "Apply a saved mapping");
    add_common(predict, pred_c, false);
    predict->add_option("--mapping", pred_mapping, "Mapping JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("--form-space", pred_space, "Cue index written next to the mapping")
        ->check(CLI::ExistingFile);
    predict->add_option("--words", pred_words, "Words to comprehend, one per line")->check(CLI::ExistingFile);
    predict->add_option("--embeddings", pred_emb, "Vectors to produce from (production mappings)")
        ->check(CLI::ExistingFile);
    predict->add_option("--name", pred_name, "Base name of the written predictions");
    predict->callback([&] {
        action = [&] {
            const auto m = load_mapping(pred_mapping);
            const auto out = pred_c.dir() / (pred_name + ".tsv");
            if (!pred_words.empty()) {
                if (pred_space.empty())
                    throw ArgumentError("--words needs --form-space");
                const auto space = load_form_space(pred_space);
                const auto words = read_words(pred_words);
                std::vector<std::string> unknown;
                const auto C = encode_words(words, space.index, &unknown);
                if (!unknown.empty())
                    std::clog << "warning: " << unknown.size() << " cues unknown to the mapping ignored\n";
                write_vectors(out, words, apply_mapping(m, C.sparse()));
            } else if (!pred_emb.empty()) {
                const auto t = load_embeddings(pred_emb);
                write_vectors(out, t.words(), apply_mapping(m, Eigen::MatrixXd(t.matrix())));
            } else {
                throw ArgumentError("give --words (comprehension) or --embeddings (production)");
            }
        };
    });

    // eval
    Common eval_c;
    std::string eval_pred, eval_gold, eval_cands, eval_metric = "pearson", eval_ks = "1,10", eval_name = "accuracy";
    auto* eval = app.add_subcommand("eval", "Accuracy@k of predicted vectors");
    add_common(eval, eval_c, false);
    eval->add_option("--pred", eval_pred, "Predictions: word then vector per line")->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--gold", eval_gold, "Gold embeddings (word2vec text)")->required()->check(CLI::ExistingFile);
    eval->add_option("--candidates", eval_cands, "Candidate embeddings (default: gold)")->check(CLI::ExistingFile);
    eval->add_option("--k", eval_ks, "Comma list of k");
    eval->add_option("--metric", eval_metric, "pearson or cosine")->check(CLI::IsMember({"pearson", "cosine"}));
    eval->add_option("--name", eval_name, "Base name of the reports");
    eval->callback([&] {
        action = [&] {
            const auto [words, preds] = read_vectors(eval_pred);
            const auto gold = load_embeddings(eval_gold);
            const auto cands = eval_cands.empty() ? gold : load_embeddings(eval_cands);
            Dataset d;
            d.dim = gold.dim();
            d.semantics.resize(Eigen::Index(words.size()), gold.dim());
            for (std::size_t i = 0; i < words.size(); ++i) {
                if (!gold.contains(words[i]))
                    throw ArgumentError("predicted word '" + words[i] + "' has no gold vector");
                WordEntry e;
                e.form = e.lemma = words[i];
                e.frequency = 1;
                d.entries.push_back(e);
                d.keys.push_back(words[i]);
                d.semantics.row(Eigen::Index(i)) = gold.at(words[i]);
            }
            EvalOptions o;
            o.metric = eval_metric == "cosine" ? Similarity::cosine : Similarity::pearson;
            const auto rep = accuracy_report(preds, d, cands, parse_ks(eval_ks), o);
            eval_c.emit(accuracy_words_table(rep), eval_name);
            eval_c.emit(accuracy_summary_table(rep), eval_name + "_summary");
        };
    });

    // centroids
    Common cen_c;
    DataArgs cen_d;
    std::string cen_mapping, cen_space, cen_position = "final";
    std::vector<std::string> cen_tags;
    std::size_t cen_top = 10;
    auto* cen = app.add_subcommand("centroids", "Correlate category centroids with cue vectors of a mapping");
    add_data(cen, cen_d);
    add_common(cen, cen_c);
    cen->add_option("--mapping", cen_mapping, "Linear mapping JSON")->required()->check(CLI::ExistingFile);
    cen->add_option("--form-space", cen_space, "Cue index used by the mapping")->required()->check(CLI::ExistingFile);
    cen->add_option("--tags", cen_tags, "Tag keys defining categories")->required()->delimiter(',');
    cen->add_option("--position", cen_position, "final or initial exponent cues")
        ->check(CLI::IsMember({"final", "initial"}));
    cen->add_option("--top", cen_top, "Ranked cues listed per category");
    cen->callback([&] {
        action = [&] {
            const auto d = read_dataset(cen_d, cen_c);
            const auto m = load_mapping(cen_mapping);
            const auto* lin = std::get_if<LinearMapping>(&m);
            if (!lin)
                throw ArgumentError("centroid analysis needs a linear mapping");
            const auto space = load_form_space(cen_space);
            const auto centroids = compute_centroids(d, cen_tags);
            const auto side = lin->direction == Direction::comprehension ? CueSide::rows : CueSide::columns;
            const auto matrix = cue_centroid_correlations(*lin, space.index, centroids, side);
            const bool initial = cen_position == "initial";
            const auto inventory = exponent_inventory(d, cen_tags, initial ? CuePosition::initial : CuePosition::final,
                                                      space.index.n(), space.index.boundary());
            const auto filter = [&](const std::string& cue) {
                const auto id = space.index.id(cue);
                return id && (initial ? space.index.is_initial(*id) : space.index.is_final(*id));
            };
            cen_c.emit(cue_centroid_table(matrix), "cue_centroids");
            cen_c.emit(ranked_cues_table(matrix, cen_top), "top_cues");
            cen_c.emit(exponent_summary_table(exponent_summary(matrix, inventory, filter)), "exponents");
            cen_c.emit(transparency_table(word_transparency(d, centroids, cen_tags)), "transparency");
        };
    });

    // compounds
    auto* comp = app.add_subcommand("compounds", "Compound analyses");
    comp->require_subcommand(1);
    Common cb_c, cc_c, cp_c;
    std::string cb_parses, cb_mapping, cb_space, cb_emb, cc_parses, cc_emb, cp_parses, cp_emb, cp_interval = "percentile";
    double cc_lambda = 0;
    std::vector<std::string> cp_pivots;
    auto* cb = comp->add_subcommand("boundary", "Share of boundary cues closer to the compound than its parts");
    add_common(cb, cb_c, false);
    cb->add_option("--parses", cb_parses, "TSV compound, left, right")->required()->check(CLI::ExistingFile);
    cb->add_option("--mapping", cb_mapping, "Comprehension mapping JSON")->required()->check(CLI::ExistingFile);
    cb->add_option("--form-space", cb_space, "Cue index used by the mapping")->required()->check(CLI::ExistingFile);
    cb->add_option("--embeddings", cb_emb, "Embeddings")->required()->check(CLI::ExistingFile);
    cb->callback([&] {
        action = [&] {
            const auto m = load_mapping(cb_mapping);
            const auto* lin = std::get_if<LinearMapping>(&m);
            if (!lin || lin->direction != Direction::comprehension)
                throw ArgumentError("boundary analysis needs a linear comprehension mapping");
            const auto space = load_form_space(cb_space);
            const auto parses = load_parses(cb_parses, space.index.n(), space.index.boundary());
            cb_c.emit(boundary_table(boundary_cue_proportions(parses, *lin, space.index, load_embeddings(cb_emb))),
                      "boundary");
        };
    });
    auto* cc = comp->add_subcommand("caoss", "Fit [L R] M = C and compare with the additive baseline");
    add_common(cc, cc_c, false);
    cc->add_option("--parses", cc_parses, "TSV compound, left, right")->required()->check(CLI::ExistingFile);
    cc->add_option("--embeddings", cc_emb, "Embeddings")->required()->check(CLI::ExistingFile);
    cc->add_option("--lambda", cc_lambda, "Ridge penalty")->check(CLI::NonNegativeNumber);
    cc->callback([&] {
        action = [&] {
            const auto parses = load_parses(cc_parses);
            const auto t = load_embeddings(cc_emb);
            std::vector<const CompoundParse*> use;
            for (const auto& p : parses)
                if (t.contains(p.compound) && t.contains(p.left) && t.contains(p.right))
                    use.push_back(&p);
            if (use.empty())
                throw EmptyDatasetError("no compound has embeddings for itself and both constituents");
            const auto n = Eigen::Index(use.size());
            Eigen::MatrixXd L(n, t.dim()), R(n, t.dim()), C(n, t.dim());
            for (Eigen::Index i = 0; i < n; ++i) {
                L.row(i) = t.at(use[std::size_t(i)]->left);
                R.row(i) = t.at(use[std::size_t(i)]->right);
                C.row(i) = t.at(use[std::size_t(i)]->compound);
            }
            const auto fit = caoss_fit(L, R, C, cc_lambda);
            const Eigen::MatrixXd pc = caoss_predict(fit, L, R);
            const Eigen::MatrixXd pa = caoss_predict(fit, L, R, CaossMode::additive);
            Table tab({"compound", "r_caoss", "r_additive"});
            for (Eigen::Index i = 0; i < n; ++i)
                tab.add({use[std::size_t(i)]->compound, pearson(pc.row(i), C.row(i)), pearson(pa.row(i), C.row(i))});
            Table sum({"compounds", "sse_caoss", "sse_additive"});
            sum.add({std::int64_t(n), (pc - C).squaredNorm(), (pa - C).squaredNorm()});
            cc_c.emit(tab, "caoss");
            cc_c.emit(sum, "caoss_summary");
        };
    });
    auto* cp = comp->add_subcommand("pivots", "Islands of reliability and intruders");
    add_common(cp, cp_c, false);
    cp->add_option("--parses", cp_parses, "TSV compound, left, right, frequency")->required()
        ->check(CLI::ExistingFile);
    cp->add_option("--embeddings", cp_emb, "Embeddings")->required()->check(CLI::ExistingFile);
    cp->add_option("--pivot", cp_pivots, "position:pivot, e.g. left:air (repeatable)")->required();
    cp->add_option("--interval", cp_interval, "percentile or normal")
        ->check(CLI::IsMember({"percentile", "normal"}));
    cp->callback([&] {
        action = [&] {
            const auto parses = load_parses(cp_parses);
            const auto t = load_embeddings(cp_emb);
            std::vector<PivotIsland> islands;
            for (const auto& item : cp_pivots) {
                const auto colon = item.find(':');
                const auto where = colon == std::string::npos ? std::string() : item.substr(0, colon);
                if (where != "left" && where != "right")
                    throw ArgumentError("pivot '" + item + "' is not position:pivot");
                const auto pos = where == "left" ? PivotPosition::left : PivotPosition::right;
                const auto pivot = item.substr(colon + 1);
                islands.push_back(pivot_island(pivot, pos, parses, t, intruder_candidates(pivot, pos, parses),
                                               cp_interval == "normal" ? IntervalMethod::normal
                                                                       : IntervalMethod::percentile));
            }
            cp_c.emit(pivot_table(islands), "pivots");
        };
    });

    // productivity
    auto* prod = app.add_subcommand("productivity", "Diachronic productivity statistics");
    prod->require_subcommand(1);
    Common pg_c, pt_c;
    DataArgs pg_d, pt_d;
    std::vector<std::string> pg_patterns, pt_patterns;
    std::string pt_totals, pt_distance = "euclidean", ps_x, ps_y, ps_out;
    auto* pg = prod->add_subcommand("growth", "Vocabulary growth curves and new output types per pattern");
    add_data(pg, pg_d, false);
    add_common(pg, pg_c);
    pg->add_option("--pattern", pg_patterns, "Suffix (nis) or tag rule (key=value); repeatable")->required();
    pg->callback([&] {
        action = [&] {
            std::vector<WordEntry> in, out;
            for (const auto& e : read_lexicon(pg_d, pg_c))
                (e.role == Role::input ? in : out).push_back(e);
            std::map<std::string, std::vector<GrowthPoint>> gi, go;
            Table fresh({"pattern", "year", "word"});
            for (const auto& r : rules(pg_patterns)) {
                const auto match = [&](const WordEntry& e) { return r.matches(e); };
                gi[r.name] = growth_curve(in, match);
                go[r.name] = growth_curve(out, match);
                std::vector<WordEntry> ri, ro;
                std::copy_if(in.begin(), in.end(), std::back_inserter(ri), match);
                std::copy_if(out.begin(), out.end(), std::back_inserter(ro), match);
                for (const auto& [y, ws] : detect_new_types(ri, ro))
                    for (const auto& w : ws)
                        fresh.add({r.name, std::int64_t(y), w});
            }
            auto t = growth_table(gi, "input");
            for (auto& row : growth_table(go, "output").rows)
                t.rows.push_back(std::move(row));
            pg_c.emit(t, "growth");
            pg_c.emit(fresh, "new_types");
        };
    });
    auto* pt = prod->add_subcommand("table", "Per pattern and year predictor table, or pooled pattern totals");
    pt->add_option("--lexicon", pt_d.lexicon, "TSV lexicon with year and role columns")->check(CLI::ExistingFile);
    pt->add_option("--embeddings", pt_d.embeddings, "Embeddings for centroid distances")->check(CLI::ExistingFile);
    pt->add_option("--totals", pt_totals, "Pooled pattern count table (TSV) instead of a lexicon")
        ->check(CLI::ExistingFile);
    pt->add_option("--pattern", pt_patterns, "Suffix (nis) or tag rule (key=value); repeatable");
    pt->add_option("--distance", pt_distance, "euclidean or correlation")
        ->check(CLI::IsMember({"euclidean", "correlation"}));
    add_common(pt, pt_c);
    pt->callback([&] {
        action = [&] {
            if (!pt_totals.empty()) {
                pt_c.emit(pattern_totals_table(load_pattern_totals(pt_totals)), "pattern_totals");
                return;
            }
            if (pt_d.lexicon.empty())
                throw ArgumentError("give --lexicon or --totals");
            std::vector<WordEntry> in, out;
            for (const auto& e : read_lexicon(pt_d, pt_c))
                (e.role == Role::input ? in : out).push_back(e);
            const auto emb = pt_d.embeddings.empty() ? EmbeddingTable() : load_embeddings(pt_d.embeddings);
            const auto r = rules(pt_patterns);
            PatternTableOptions o;
            o.distance = pt_distance == "correlation" ? DistanceMetric::correlation : DistanceMetric::euclidean;
            pt_c.emit(pattern_year_csv_table(pattern_year_table(in, out, r, emb, o)), "pattern_year");
            pt_c.emit(pattern_totals_table(pattern_totals(in, out, r)), "pattern_totals");
        };
    });
    auto* ps = prod->add_subcommand("spearman", "Spearman correlation of two labelled series");
    ps->add_option("--x", ps_x, "CSV label,value")->required()->check(CLI::ExistingFile);
    ps->add_option("--y", ps_y, "CSV label,value")->required()->check(CLI::ExistingFile);
    ps->add_option("--out", ps_out, "Also write the result as a report to this path");
    ps->callback([&] {
        action = [&] {
            std::vector<std::string> lx, ly;
            const auto x = series_values(ps_x, &lx);
            auto y = series_values(ps_y, &ly);
            if (lx != ly) {
                // align y to x by label
                std::map<std::string, double> by;
                for (std::size_t i = 0; i < ly.size(); ++i)
                    by[ly[i]] = y[i];
                y.clear();
                for (const auto& l : lx) {
                    const auto it = by.find(l);
                    if (it == by.end())
                        throw ArgumentError("label '" + l + "' missing from " + ps_y);
                    y.push_back(it->second);
                }
                if (by.size() != lx.size())
                    throw ArgumentError("series have different label sets");
            }
            const auto r = spearman_test(x, y);
            if (!r.rho)
                throw ArgumentError("spearman: a series is constant, correlation undefined");
            std::cout << format_double(*r.rho) << '\n';
            std::clog << "n=" << r.n << " p=" << format_double(r.p_value) << '\n';
            if (!ps_out.empty()) {
                Table t({"n", "rho", "p_value"});
                t.add({std::int64_t(r.n), *r.rho, r.p_value});
                emit_report(t, fs::path(ps_out).extension() == ".json" ? ReportFormat::json : ReportFormat::csv,
                            ps_out);
            }
        };
    });

    // run / slices
    std::string run_config, slices_config;
    std::uint64_t run_seed = 0, slices_seed = 0;
    std::vector<int> slice_years;
    std::string run_out, slices_out;
    auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
    run->add_option("--config", run_config, "key = value config")->required()->check(CLI::ExistingFile);
    auto* run_seed_opt = run->add_option("--seed", run_seed, "Override the config seed");
    run->add_option("--out-dir", run_out, "Override the config output directory");
    run->callback([&] {
        action = [&] {
            auto cfg = load_config(run_config);
            if (*run_seed_opt)
                cfg.seed = run_seed;
            if (!run_out.empty())
                cfg.output_dir = run_out;
            else if (!cfg.raw.count("output_dir"))
                if (const char* env = std::getenv("DLM_OUTPUT_DIR"); env && *env)
                    cfg.output_dir = env;
            const auto m = run_experiment(cfg);
            for (const auto& f : m.files)
                std::cout << (cfg.output_dir / f.path).string() << '\n';
            std::cout << (cfg.output_dir / "manifest.json").string() << '\n';
        };
    });
    auto* slices = app.add_subcommand("slices", "Cumulative time-sliced training and held-out evaluation");
    slices->add_option("--config", slices_config, "key = value config")->required()->check(CLI::ExistingFile);
    slices->add_option("--years", slice_years, "Slice years (default: config 'slices')")->delimiter(',');
    auto* slices_seed_opt = slices->add_option("--seed", slices_seed, "Override the config seed");
    slices->add_option("--out-dir", slices_out, "Override the config output directory");
    slices->callback([&] {
        action = [&] {
            auto cfg = load_config(slices_config);
            if (*slices_seed_opt)
                cfg.seed = slices_seed;
            if (!slices_out.empty())
                cfg.output_dir = slices_out;
            const auto years = slice_years.empty() ? cfg.slices : slice_years;
            if (years.empty())
                throw ArgumentError("no slice years given");
            for (const auto& s : run_time_slices(cfg, years))
                std::cout << s.year << '\t' << s.train_words << '\t' << s.heldout_words
                          << (s.skipped ? "\tskipped" : "") << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (action)
            action();
    } catch (const StageError& e) {
        std::cerr << "error: stage: " << e.stage() << ": " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
