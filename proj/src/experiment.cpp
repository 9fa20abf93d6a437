#include "dlm/experiment.hpp"

#include "dlm/centroids.hpp"
#include "dlm/compounds.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/mapping_io.hpp"
#include "dlm/productivity.hpp"
#include "dlm/report.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>

namespace dlm {

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot hash '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256 unavailable");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), std::streamsize(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

std::uint64_t derive_seed(std::uint64_t root, const std::string& stage)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = root ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool Manifest::lists(const std::string& relative_path) const
{
    return std::any_of(files.begin(), files.end(), [&](const auto& f) { return f.path == relative_path; });
}

std::vector<WordEntry> collapse_types(const std::vector<WordEntry>& entries)
{
    std::vector<WordEntry> out;
    std::map<std::string, std::size_t> at;
    for (const auto& e : entries) {
        const auto [it, fresh] = at.try_emplace(e.form, out.size());
        if (fresh) {
            out.push_back(e);
            continue;
        }
        auto& kept = out[it->second];
        kept.frequency += e.frequency;
        if (e.period && (!kept.period || *e.period < *kept.period))
            kept.period = e.period;
    }
    return out;
}

namespace {

std::string timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<WordEntry> input_role(const std::vector<WordEntry>& entries)
{
    std::vector<WordEntry> out;
    for (const auto& e : entries)
        if (e.role == Role::input)
            out.push_back(e);
    return out;
}

std::vector<Eigen::Index> usable_ks(const std::vector<Eigen::Index>& ks, Eigen::Index candidates,
                                    const std::string& what)
{
    std::vector<Eigen::Index> out;
    for (auto k : ks) {
        if (k <= candidates)
            out.push_back(k);
        else
            std::clog << "warning: " << what << ": k=" << k << " exceeds " << candidates
                      << " candidates, skipped\n";
    }
    return out;
}

// Tracks outputs and writes the manifest.
class Runner {
public:
    explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg), started_(timestamp())
    {
        manifest_.seed = cfg.seed;
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        if (ec)
            throw IoError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());
    }

    template <typename F>
    void stage(const std::string& name, F&& body)
    {
        try {
            body();
        } catch (const std::exception& e) {
            manifest_.failed_stage = name;
            manifest_.error = e.what();
            write_manifest(false);
            throw StageError(name, e.what());
        }
    }

    std::string ext() const { return cfg_.format == ReportFormat::csv ? ".csv" : ".json"; }

    void emit(const Table& t, const std::string& stem)
    {
        const auto rel = stem + ext();
        emit_report(t, cfg_.format, cfg_.output_dir / rel);
        record(rel);
    }

    void record(const std::string& rel)
    {
        const auto p = cfg_.output_dir / rel;
        auto it = std::find_if(manifest_.files.begin(), manifest_.files.end(),
                               [&](const auto& f) { return f.path == rel; });
        ManifestFile f{rel, sha256_file(p), std::filesystem::file_size(p)};
        if (it == manifest_.files.end())
            manifest_.files.push_back(f);
        else
            *it = f;
    }

    void input(const std::filesystem::path& p)
    {
        if (p.empty())
            return;
        for (const auto& f : manifest_.inputs)
            if (f.path == p.string())
                return;
        manifest_.inputs.push_back({p.string(), sha256_file(p), std::filesystem::file_size(p)});
    }

    Manifest finish()
    {
        write_manifest(true);
        return manifest_;
    }

    Manifest& manifest() { return manifest_; }

private:
    void write_manifest(bool complete)
    {
        manifest_.complete = complete;
        auto files = manifest_.files;
        std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
        nlohmann::ordered_json j;
        j["format"] = "dlm-manifest";
        j["version"] = kVersion;
        j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                     std::to_string(EIGEN_MINOR_VERSION);
        j["seed"] = manifest_.seed;
        j["complete"] = complete;
        j["failed_stage"] = manifest_.failed_stage.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(manifest_.failed_stage);
        j["error"] = manifest_.error.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(manifest_.error);
        j["started"] = started_;
        j["finished"] = timestamp();
        j["config"] = cfg_.raw;
        auto list = [](const std::vector<ManifestFile>& v) {
            auto a = nlohmann::ordered_json::array();
            for (const auto& f : v)
                a.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
            return a;
        };
        j["inputs"] = list(manifest_.inputs);
        j["files"] = list(files);
        std::ofstream out(cfg_.output_dir / "manifest.json");
        out << j.dump(2) << '\n';
        if (!out)
            std::clog << "warning: could not write manifest in '" << cfg_.output_dir.string() << "'\n";
    }

    const ExperimentConfig& cfg_;
    Manifest manifest_;
    std::string started_;
};

struct Trained {
    std::string method;
    Direction direction;
    Mapping mapping;
    std::string stem() const { return method + "_" + to_string(direction); }
};

Trained train_one(const ExperimentConfig& cfg, const std::string& method, Direction dir, const FormMatrix& C,
                  const Dataset& train)
{
    const auto seed = derive_seed(cfg.seed, "train:" + method + ":" + to_string(dir));
    const auto Cs = C.sparse();
    Trained t{method, dir, LinearMapping{}};
    if (method == "eol") {
        t.mapping = dir == Direction::comprehension ? solve_endstate(Cs, train.semantics, cfg.eol_lambda, dir)
                                                    : solve_endstate(train.semantics, C.dense(), cfg.eol_lambda, dir);
    } else if (method == "fil") {
        auto opts = cfg.fil;
        opts.seed = seed;
        const auto f = train.frequencies();
        t.mapping = dir == Direction::comprehension
                        ? train_frequency_informed(Cs, train.semantics, f, opts, dir)
                        : train_frequency_informed(train.semantics, C.dense(), f, opts, dir);
    } else {
        auto opts = cfg.deep;
        opts.seed = seed;
        t.mapping = dir == Direction::comprehension ? train_deep(Cs, train.semantics, opts, dir)
                                                    : train_deep(train.semantics, C.dense(), opts, dir);
    }
    return t;
}

Eigen::MatrixXd predict(const Trained& t, const FormMatrix& C, const Dataset& d)
{
    if (t.direction == Direction::comprehension)
        return apply_mapping(t.mapping, C.sparse());
    return apply_mapping(t.mapping, Eigen::MatrixXd(d.semantics));
}

std::optional<AccuracyReport> evaluate(const ExperimentConfig& cfg, const Trained& t, const FormMatrix& C,
                                       const Dataset& d, const EmbeddingTable& candidates, const std::string& what)
{
    if (d.empty())
        return std::nullopt;
    const auto preds = predict(t, C, d);
    if (t.direction == Direction::comprehension) {
        const auto ks = usable_ks(cfg.ks, candidates.size(), what);
        if (ks.empty())
            return std::nullopt;
        return accuracy_report(preds, d, candidates, ks, {cfg.class_tag, cfg.metric});
    }
    const auto ks = usable_ks(cfg.ks, C.rows(), what);
    if (ks.empty())
        return std::nullopt;
    std::vector<std::int64_t> freqs;
    std::vector<std::string> classes;
    for (const auto& e : d.entries) {
        freqs.push_back(e.frequency);
        if (!cfg.class_tag.empty())
            classes.push_back(e.tag(cfg.class_tag));
    }
    return production_accuracy(preds, C, ks, freqs, classes, cfg.metric);
}

const LinearMapping* linear(const Trained& t)
{
    return std::get_if<LinearMapping>(&t.mapping);
}

struct Loaded {
    std::vector<WordEntry> lexicon;
    EmbeddingTable embeddings;
};

Loaded ingest(Runner& run, const ExperimentConfig& cfg)
{
    Loaded l;
    run.stage("ingest", [&] {
        validate(cfg);
        run.input(cfg.lexicon);
        run.input(cfg.embeddings);
        if (cfg.has_analysis("compounds"))
            run.input(cfg.compound_parses);
        l.lexicon = load_lexicon(cfg.lexicon, cfg.schema);
        l.embeddings = load_embeddings(cfg.embeddings, {cfg.lowercase_embeddings});
    });
    return l;
}

void run_slices(Runner& run, const ExperimentConfig& cfg, const Loaded& data, const std::vector<int>& years,
                std::vector<SliceSummary>& out)
{
    run.stage("slices", [&] {
        for (const auto& e : data.lexicon)
            if (!e.period)
                throw ArgumentError("time slices need a year for every entry ('" + e.form + "' has none)");
        const auto reading = input_role(data.lexicon);
        const auto first_seen = collapse_types(reading);
        Table summary({"year", "method", "set", "words", "k", "type_accuracy", "token_accuracy"});

        for (const int y : years) {
            SliceSummary s;
            s.year = y;
            std::vector<WordEntry> upto;
            for (const auto& e : reading)
                if (*e.period <= y)
                    upto.push_back(e);
            std::vector<WordEntry> later;
            for (const auto& e : first_seen) {
                if (*e.period <= y)
                    continue;
                if (cfg.patterns.empty()) {
                    later.push_back(e);
                    later.back().tags["pattern"] = "all";
                    continue;
                }
                for (const auto& rule : cfg.patterns)
                    if (rule.matches(e)) {
                        later.push_back(e);
                        later.back().tags["pattern"] = rule.name;
                        break;
                    }
            }
            if (upto.empty()) {
                std::clog << "warning: slice " << y << " has no training data, skipped\n";
                s.skipped = true;
                out.push_back(s);
                continue;
            }
            Dataset train;
            try {
                train = assemble_dataset(collapse_types(upto), data.embeddings, cfg.join);
            } catch (const EmptyDatasetError&) {
                std::clog << "warning: slice " << y << " has no words with embeddings, skipped\n";
                s.skipped = true;
                out.push_back(s);
                continue;
            }
            Dataset heldout;
            if (!later.empty()) {
                try {
                    heldout = assemble_dataset(later, data.embeddings, cfg.join);
                } catch (const EmptyDatasetError&) {
                }
            }
            s.train_words = train.size();
            s.heldout_words = heldout.size();

            const auto space = build_form_matrix(train, cfg.ngram, cfg.boundary);
            std::vector<std::string> heldout_forms;
            for (const auto& e : heldout.entries)
                heldout_forms.push_back(e.form);
            const auto heldout_C = encode_words(heldout_forms, space.index);

            EmbeddingTable candidates(train.dim);
            for (Eigen::Index i = 0; i < train.size(); ++i)
                candidates.add(train.keys[std::size_t(i)], train.semantics.row(i).transpose());
            for (Eigen::Index i = 0; i < heldout.size(); ++i)
                candidates.add(heldout.keys[std::size_t(i)], heldout.semantics.row(i).transpose());

            const std::string dir = "slices/" + std::to_string(y) + "/";
            auto slice_cfg = cfg;
            slice_cfg.seed = derive_seed(cfg.seed, "slice:" + std::to_string(y));
            slice_cfg.class_tag = "pattern";
            for (const auto& method : cfg.methods) {
                const auto t = train_one(slice_cfg, method, Direction::comprehension, space.matrix, train);
                const std::pair<const Dataset*, const FormMatrix*> sets[] = {{&train, &space.matrix},
                                                                             {&heldout, &heldout_C}};
                const char* names[] = {"train", "heldout"};
                for (int k = 0; k < 2; ++k) {
                    auto eval_cfg = slice_cfg;
                    if (k == 0)
                        eval_cfg.class_tag.clear();
                    const auto rep = evaluate(eval_cfg, t, *sets[k].second, *sets[k].first, candidates,
                                              "slice " + std::to_string(y) + " " + names[k]);
                    if (!rep)
                        continue;
                    const auto stem = dir + "accuracy_" + method + "_" + names[k];
                    run.emit(accuracy_words_table(*rep), stem);
                    run.emit(accuracy_summary_table(*rep), stem + "_summary");
                    for (std::size_t i = 0; i < rep->ks.size(); ++i)
                        summary.add({std::int64_t(y), method, std::string(names[k]),
                                     std::int64_t(rep->words.size()), std::int64_t(rep->ks[i]),
                                     rep->type_accuracy[i], rep->token_accuracy[i]});
                }
            }
            out.push_back(s);
        }
        Table sizes({"year", "train_words", "heldout_words", "skipped"});
        for (const auto& s : out)
            sizes.add({std::int64_t(s.year), std::int64_t(s.train_words), std::int64_t(s.heldout_words), s.skipped});
        run.emit(sizes, "slices/sizes");
        run.emit(summary, "slices/summary");
    });
}

} // namespace

Manifest run_experiment(const ExperimentConfig& cfg)
{
    Runner run(cfg);
    const auto data = ingest(run, cfg);

    Dataset dataset;
    run.stage("assemble", [&] {
        dataset = assemble_dataset(collapse_types(input_role(data.lexicon)), data.embeddings, cfg.join);
        Table dropped({"word", "reason"});
        for (const auto& d : dataset.dropped)
            dropped.add({d.word, d.reason});
        run.emit(dropped, "dropped");
    });

    FormSpace space;
    run.stage("form_space", [&] {
        space = build_form_matrix(dataset, cfg.ngram, cfg.boundary);
        save_form_space(cfg.output_dir / "form_space.txt", space.index, space.matrix, FormSpaceFormat::text);
        run.record("form_space.txt");
    });

    SplitResult split;
    run.stage("split", [&] {
        if (cfg.split == SplitMode::none) {
            for (Eigen::Index i = 0; i < dataset.size(); ++i)
                split.train_rows.push_back(i);
            split.test_empty = true;
        } else {
            SplitPolicy policy;
            policy.mode = cfg.split == SplitMode::threshold ? SplitPolicy::Mode::threshold : SplitPolicy::Mode::random;
            policy.threshold = cfg.split_threshold;
            policy.fraction = cfg.split_fraction;
            policy.seed = derive_seed(cfg.seed, "split");
            policy.coverage_tags = cfg.coverage_tags;
            split = coverage_split(dataset, policy, cfg.ngram, cfg.boundary);
        }
        Table t({"word", "set"});
        std::vector<std::string> set(std::size_t(dataset.size()));
        for (auto r : split.train_rows)
            set[std::size_t(r)] = "train";
        for (auto r : split.test_rows)
            set[std::size_t(r)] = "test";
        for (Eigen::Index i = 0; i < dataset.size(); ++i)
            t.add({dataset.keys[std::size_t(i)], set[std::size_t(i)]});
        run.emit(t, "split");
    });
    const auto train = split.train(dataset);
    const auto test = split.test(dataset);
    const auto train_C = space.matrix.select_rows(split.train_rows);
    const auto test_C = space.matrix.select_rows(split.test_rows);
    if (train.empty())
        run.stage("split", [] { throw EmptyDatasetError("training set is empty"); });

    std::vector<Trained> models;
    run.stage("train", [&] {
        for (const auto& method : cfg.methods)
            for (const auto dir : cfg.directions) {
                models.push_back(train_one(cfg, method, dir, train_C, train));
                const auto rel = "mappings/" + models.back().stem() + ".json";
                std::filesystem::create_directories(cfg.output_dir / "mappings");
                std::visit([&](const auto& m) { save_mapping(cfg.output_dir / rel, m); }, models.back().mapping);
                run.record(rel);
                run.record("mappings/" + models.back().stem() + ".f64");
            }
    });

    run.stage("evaluate", [&] {
        const auto candidates = cfg.candidates == CandidatePolicy::embeddings ? data.embeddings : dataset.as_table();
        for (const auto& t : models) {
            const std::pair<const Dataset*, const FormMatrix*> sets[] = {{&train, &train_C}, {&test, &test_C}};
            const char* names[] = {"train", "test"};
            for (int k = 0; k < 2; ++k) {
                const auto rep = evaluate(cfg, t, *sets[k].second, *sets[k].first, candidates,
                                          t.stem() + " " + names[k]);
                if (!rep)
                    continue;
                const auto stem = "accuracy_" + t.stem() + "_" + names[k];
                run.emit(accuracy_words_table(*rep), stem);
                run.emit(accuracy_summary_table(*rep), stem + "_summary");
            }
        }
    });

    if (cfg.has_analysis("centroids")) {
        run.stage("centroids", [&] {
            const auto centroids = compute_centroids(dataset, cfg.centroid_tags);
            run.emit(transparency_table(word_transparency(dataset, centroids, cfg.centroid_tags)), "transparency");
            const auto position = cfg.centroid_initial ? CuePosition::initial : CuePosition::final;
            const auto inventory = exponent_inventory(dataset, cfg.centroid_tags, position, cfg.ngram, cfg.boundary);
            const auto& index = space.index;
            const auto filter = [&](const std::string& cue) {
                const auto id = index.id(cue);
                return id && (cfg.centroid_initial ? index.is_initial(*id) : index.is_final(*id));
            };
            for (const auto& t : models) {
                const auto* m = linear(t);
                if (!m)
                    continue;
                const auto side = t.direction == Direction::comprehension ? CueSide::rows : CueSide::columns;
                const auto matrix = cue_centroid_correlations(*m, index, centroids, side);
                run.emit(cue_centroid_table(matrix), "cue_centroids_" + t.stem());
                run.emit(ranked_cues_table(matrix, 10), "top_cues_" + t.stem());
                run.emit(exponent_summary_table(exponent_summary(matrix, inventory, filter)), "exponents_" + t.stem());
            }
        });
    }

    if (cfg.has_analysis("compounds")) {
        run.stage("compounds", [&] {
            const auto parses = load_parses(cfg.compound_parses, cfg.compound_ngram, cfg.boundary,
                                            cfg.schema.lowercase);
            const auto cspace = build_form_matrix(dataset, cfg.compound_ngram, cfg.boundary);
            const auto F = solve_endstate(cspace.matrix.sparse(), dataset.semantics, cfg.eol_lambda);
            const auto table = dataset.as_table();
            run.emit(boundary_table(boundary_cue_proportions(parses, F, cspace.index, table)), "boundary");

            std::vector<const CompoundParse*> usable;
            for (const auto& p : parses)
                if (table.contains(p.compound) && table.contains(p.left) && table.contains(p.right))
                    usable.push_back(&p);
            Table caoss({"compounds", "sse_caoss", "sse_additive", "mean_r_caoss", "mean_r_additive"});
            if (!usable.empty()) {
                const auto m = Eigen::Index(usable.size());
                Eigen::MatrixXd L(m, table.dim()), R(m, table.dim()), Cm(m, table.dim());
                for (Eigen::Index i = 0; i < m; ++i) {
                    L.row(i) = table.at(usable[std::size_t(i)]->left);
                    R.row(i) = table.at(usable[std::size_t(i)]->right);
                    Cm.row(i) = table.at(usable[std::size_t(i)]->compound);
                }
                const auto fit = caoss_fit(L, R, Cm, cfg.eol_lambda);
                const Eigen::MatrixXd pc = caoss_predict(fit, L, R);
                const Eigen::MatrixXd pa = caoss_predict(fit, L, R, CaossMode::additive);
                double rc = 0, ra = 0;
                for (Eigen::Index i = 0; i < m; ++i) {
                    rc += pearson(pc.row(i), Cm.row(i));
                    ra += pearson(pa.row(i), Cm.row(i));
                }
                caoss.add({std::int64_t(m), (pc - Cm).squaredNorm(), (pa - Cm).squaredNorm(), rc / double(m),
                           ra / double(m)});
            }
            run.emit(caoss, "caoss");

            std::vector<PivotIsland> islands;
            for (const auto& item : cfg.pivots) {
                const auto colon = item.find(':');
                const auto pos = item.substr(0, colon) == "left" ? PivotPosition::left : PivotPosition::right;
                const auto pivot = item.substr(colon + 1);
                islands.push_back(pivot_island(pivot, pos, parses, table, intruder_candidates(pivot, pos, parses),
                                               cfg.pivot_interval));
            }
            run.emit(pivot_table(islands), "pivots");
        });
    }

    if (cfg.has_analysis("diachronic")) {
        run.stage("diachronic", [&] {
            std::vector<WordEntry> reading, writing;
            for (const auto& e : data.lexicon)
                (e.role == Role::input ? reading : writing).push_back(e);
            run.emit(pattern_year_csv_table(
                         pattern_year_table(reading, writing, cfg.patterns, data.embeddings, {cfg.distance})),
                     "pattern_year");
            run.emit(pattern_totals_table(pattern_totals(reading, writing, cfg.patterns)), "pattern_totals");
            std::map<std::string, std::vector<GrowthPoint>> in_curves, out_curves;
            Table fresh({"pattern", "year", "word"});
            for (const auto& rule : cfg.patterns) {
                const auto match = [&](const WordEntry& e) { return rule.matches(e); };
                in_curves[rule.name] = growth_curve(reading, match);
                out_curves[rule.name] = growth_curve(writing, match);
                std::vector<WordEntry> r, w;
                std::copy_if(reading.begin(), reading.end(), std::back_inserter(r), match);
                std::copy_if(writing.begin(), writing.end(), std::back_inserter(w), match);
                for (const auto& [y, words] : detect_new_types(r, w))
                    for (const auto& word : words)
                        fresh.add({rule.name, std::int64_t(y), word});
            }
            auto growth = growth_table(in_curves, "input");
            for (auto& row : growth_table(out_curves, "output").rows)
                growth.rows.push_back(std::move(row));
            run.emit(growth, "growth");
            run.emit(fresh, "new_types");
        });
    }

    if (!cfg.slices.empty()) {
        std::vector<SliceSummary> slices;
        run_slices(run, cfg, data, cfg.slices, slices);
    }
    return run.finish();
}

std::vector<SliceSummary> run_time_slices(const ExperimentConfig& cfg, const std::vector<int>& years,
                                          Manifest* manifest)
{
    Runner run(cfg);
    const auto data = ingest(run, cfg);
    auto sorted = years;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<SliceSummary> out;
    run_slices(run, cfg, data, sorted, out);
    const auto m = run.finish();
    if (manifest)
        *manifest = m;
    return out;
}

} // namespace dlm
