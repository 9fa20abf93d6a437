#include "dlm/config.hpp"

#include "dlm/error.hpp"
#include "dlm/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dlm {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T v{};
    const auto s = trim(value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ArgumentError("config key '" + key + "': '" + value + "' is not a valid number");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value)
{
    const auto v = to_lower(std::string(trim(value)));
    if (v == "true" || v == "yes" || v == "1" || v == "on")
        return true;
    if (v == "false" || v == "no" || v == "0" || v == "off")
        return false;
    throw ArgumentError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value)
{
    std::filesystem::path p(std::string(trim(value)));
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

} // namespace

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (const auto& part : split(s, ',')) {
        const auto t = trim(part);
        if (!t.empty())
            out.emplace_back(t);
    }
    return out;
}

std::vector<Eigen::Index> parse_ks(const std::string& s)
{
    std::vector<Eigen::Index> ks;
    for (const auto& part : split_list(s)) {
        const auto k = parse_number<long long>("k", part);
        if (k <= 0)
            throw ArgumentError("k must be positive, got " + part);
        ks.push_back(Eigen::Index(k));
    }
    if (ks.empty())
        throw ArgumentError("empty list of k values");
    return ks;
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(origin, lineno, "expected key = value");
        const auto key = std::string(trim(t.substr(0, eq)));
        if (key.empty())
            throw ParseError(origin, lineno, "empty key");
        kv[key] = std::string(trim(t.substr(eq + 1)));
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str(), path.string());
}

const std::vector<std::pair<std::string, std::string>>& documented_keys()
{
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"lexicon", "TSV lexicon with header (form, frequency, optional lemma/year/role/tags)"},
        {"embeddings", "word2vec text embeddings"},
        {"join", "form | lemma: key used to look words up in the embeddings"},
        {"lowercase", "lowercase lexicon forms (default true)"},
        {"lowercase_embeddings", "lowercase embedding words (default false)"},
        {"columns.form", "lexicon column holding the word form"},
        {"columns.frequency", "lexicon column holding token counts"},
        {"columns.lemma", "lexicon column holding the lemma"},
        {"columns.year", "lexicon column holding the year"},
        {"columns.role", "lexicon column holding input/output role"},
        {"columns.tags", "comma list of tag columns (default: all other columns)"},
        {"ngram", "cue n-gram size (default 4)"},
        {"boundary", "word boundary marker (default #)"},
        {"split", "none | threshold | random"},
        {"split.threshold", "threshold split: frequency <= value goes to test"},
        {"split.fraction", "random split: share of words held out"},
        {"split.coverage_tags", "tag keys whose values the test set must share with train"},
        {"methods", "comma list of eol, fil, deep"},
        {"directions", "comma list of comprehension, production"},
        {"eol.lambda", "ridge penalty for endstate learning"},
        {"fil.learning_rate", "delta rule learning rate"},
        {"fil.epochs", "passes over the token stream"},
        {"deep.width", "hidden units"},
        {"deep.loss", "mse | bce"},
        {"deep.batch_size", "minibatch size"},
        {"deep.max_epochs", "epoch limit"},
        {"deep.patience", "early stopping patience"},
        {"deep.early_stopping", "hold out a validation share and stop early"},
        {"deep.validation_fraction", "validation share"},
        {"deep.learning_rate", "Adam step size"},
        {"eval.ks", "comma list of k for accuracy@k"},
        {"eval.candidates", "dataset | embeddings: candidate set for comprehension"},
        {"eval.class_tag", "tag for per-class accuracy"},
        {"eval.metric", "pearson | cosine"},
        {"analyses", "comma list of centroids, compounds, diachronic"},
        {"centroids.tags", "comma list of tag keys defining categories"},
        {"centroids.position", "final | initial exponent cues"},
        {"compounds.parses", "TSV of compound, left, right (optional frequency)"},
        {"compounds.ngram", "n-gram size for boundary cue groups (default 3)"},
        {"compounds.pivots", "comma list of position:pivot, e.g. left:air"},
        {"compounds.interval", "percentile | normal"},
        {"diachronic.patterns", "comma list of suffixes or key=value tag rules"},
        {"diachronic.distance", "euclidean | correlation"},
        {"slices", "comma list of slice years for time-sliced training"},
        {"output_dir", "directory for reports and the manifest"},
        {"format", "csv | json"},
        {"seed", "root seed for every random stage"},
    };
    return keys;
}

bool ExperimentConfig::has_analysis(const std::string& name) const
{
    return std::find(analyses.begin(), analyses.end(), name) != analyses.end();
}

ExperimentConfig make_config(const std::map<std::string, std::string>& kv, const std::filesystem::path& base_dir)
{
    const auto& known = documented_keys();
    for (const auto& [k, v] : kv) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const auto& p) { return p.first == k; });
        if (!ok)
            throw ArgumentError("unknown config key '" + k + "'");
    }
    ExperimentConfig c;
    c.raw = kv;
    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto choose = [&](const std::string& k, std::initializer_list<const char*> options) -> std::string {
        const auto* v = get(k);
        if (!v)
            return {};
        for (const auto* o : options)
            if (*v == o)
                return *v;
        std::string list;
        for (const auto* o : options)
            list += std::string(list.empty() ? "" : ", ") + o;
        throw ArgumentError("config key '" + k + "': '" + *v + "' is not one of " + list);
    };

    if (const auto* v = get("lexicon"))
        c.lexicon = resolve(base_dir, *v);
    if (const auto* v = get("embeddings"))
        c.embeddings = resolve(base_dir, *v);
    if (choose("join", {"form", "lemma"}) == "lemma")
        c.join = JoinKey::lemma;
    if (const auto* v = get("lowercase"))
        c.schema.lowercase = parse_bool("lowercase", *v);
    if (const auto* v = get("lowercase_embeddings"))
        c.lowercase_embeddings = parse_bool("lowercase_embeddings", *v);
    if (const auto* v = get("columns.form"))
        c.schema.form_column = *v;
    if (const auto* v = get("columns.frequency"))
        c.schema.frequency_column = *v;
    if (const auto* v = get("columns.lemma"))
        c.schema.lemma_column = *v;
    if (const auto* v = get("columns.year"))
        c.schema.period_column = *v;
    if (const auto* v = get("columns.role"))
        c.schema.role_column = *v;
    if (const auto* v = get("columns.tags"))
        c.schema.tag_columns = split_list(*v);

    if (const auto* v = get("ngram"))
        c.ngram = parse_number<int>("ngram", *v);
    if (c.ngram < 1)
        throw ArgumentError("config key 'ngram' must be at least 1");
    if (const auto* v = get("boundary"))
        c.boundary = *v;

    const auto mode = choose("split", {"none", "threshold", "random"});
    c.split = mode == "threshold" ? SplitMode::threshold : mode == "random" ? SplitMode::random : SplitMode::none;
    if (const auto* v = get("split.threshold"))
        c.split_threshold = parse_number<std::int64_t>("split.threshold", *v);
    if (const auto* v = get("split.fraction"))
        c.split_fraction = parse_number<double>("split.fraction", *v);
    if (c.split_fraction < 0 || c.split_fraction > 1)
        throw ArgumentError("config key 'split.fraction' must lie in [0, 1]");
    if (const auto* v = get("split.coverage_tags"))
        c.coverage_tags = split_list(*v);

    if (const auto* v = get("methods")) {
        c.methods = split_list(*v);
        for (const auto& m : c.methods)
            if (m != "eol" && m != "fil" && m != "deep")
                throw ArgumentError("config key 'methods': unknown method '" + m + "'");
        if (c.methods.empty())
            throw ArgumentError("config key 'methods' is empty");
    }
    if (const auto* v = get("directions")) {
        c.directions.clear();
        for (const auto& d : split_list(*v))
            c.directions.push_back(parse_direction(d));
    }
    if (const auto* v = get("eol.lambda"))
        c.eol_lambda = parse_number<double>("eol.lambda", *v);
    if (const auto* v = get("fil.learning_rate"))
        c.fil.learning_rate = parse_number<double>("fil.learning_rate", *v);
    if (const auto* v = get("fil.epochs"))
        c.fil.epochs = parse_number<int>("fil.epochs", *v);
    if (const auto* v = get("deep.width"))
        c.deep.width = parse_number<long long>("deep.width", *v);
    if (const auto* v = get("deep.loss"))
        c.deep.loss = parse_deep_loss(*v);
    if (const auto* v = get("deep.batch_size"))
        c.deep.batch_size = parse_number<long long>("deep.batch_size", *v);
    if (const auto* v = get("deep.max_epochs"))
        c.deep.max_epochs = parse_number<int>("deep.max_epochs", *v);
    if (const auto* v = get("deep.patience"))
        c.deep.patience = parse_number<int>("deep.patience", *v);
    if (const auto* v = get("deep.early_stopping"))
        c.deep.early_stopping = parse_bool("deep.early_stopping", *v);
    if (const auto* v = get("deep.validation_fraction"))
        c.deep.validation_fraction = parse_number<double>("deep.validation_fraction", *v);
    if (const auto* v = get("deep.learning_rate"))
        c.deep.learning_rate = parse_number<double>("deep.learning_rate", *v);

    if (const auto* v = get("eval.ks"))
        c.ks = parse_ks(*v);
    if (choose("eval.candidates", {"dataset", "embeddings"}) == "embeddings")
        c.candidates = CandidatePolicy::embeddings;
    if (const auto* v = get("eval.class_tag"))
        c.class_tag = *v;
    if (choose("eval.metric", {"pearson", "cosine"}) == "cosine")
        c.metric = Similarity::cosine;

    if (const auto* v = get("analyses")) {
        c.analyses = split_list(*v);
        for (const auto& a : c.analyses)
            if (a != "centroids" && a != "compounds" && a != "diachronic")
                throw ArgumentError("config key 'analyses': unknown analysis '" + a + "'");
    }
    if (const auto* v = get("centroids.tags"))
        c.centroid_tags = split_list(*v);
    c.centroid_initial = choose("centroids.position", {"final", "initial"}) == "initial";
    if (const auto* v = get("compounds.parses"))
        c.compound_parses = resolve(base_dir, *v);
    if (const auto* v = get("compounds.ngram"))
        c.compound_ngram = parse_number<int>("compounds.ngram", *v);
    if (const auto* v = get("compounds.pivots"))
        c.pivots = split_list(*v);
    for (const auto& p : c.pivots) {
        const auto colon = p.find(':');
        const auto pos = p.substr(0, colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || (pos != "left" && pos != "right") || colon + 1 >= p.size())
            throw ArgumentError("config key 'compounds.pivots': '" + p + "' is not position:pivot");
    }
    if (choose("compounds.interval", {"percentile", "normal"}) == "normal")
        c.pivot_interval = IntervalMethod::normal;
    if (const auto* v = get("diachronic.patterns"))
        for (const auto& p : split_list(*v))
            c.patterns.push_back(PatternRule::parse(p));
    if (choose("diachronic.distance", {"euclidean", "correlation"}) == "correlation")
        c.distance = DistanceMetric::correlation;

    if (const auto* v = get("slices")) {
        for (const auto& y : split_list(*v))
            c.slices.push_back(parse_number<int>("slices", y));
        std::sort(c.slices.begin(), c.slices.end());
        c.slices.erase(std::unique(c.slices.begin(), c.slices.end()), c.slices.end());
    }
    if (const auto* v = get("output_dir"))
        c.output_dir = resolve(base_dir, *v);
    if (const auto* v = get("format"))
        c.format = parse_report_format(*v);
    if (const auto* v = get("seed"))
        c.seed = parse_number<std::uint64_t>("seed", *v);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    return make_config(read_key_values(path), path.parent_path());
}

void validate(const ExperimentConfig& cfg)
{
    auto need_file = [](const std::filesystem::path& p, const std::string& key) {
        if (p.empty())
            throw ArgumentError("config key '" + key + "' is required");
        if (!std::filesystem::is_regular_file(p))
            throw ArgumentError("config key '" + key + "': file '" + p.string() + "' does not exist");
    };
    need_file(cfg.lexicon, "lexicon");
    need_file(cfg.embeddings, "embeddings");
    if (cfg.has_analysis("centroids") && cfg.centroid_tags.empty())
        throw ArgumentError("analysis 'centroids' needs 'centroids.tags'");
    if (cfg.has_analysis("compounds"))
        need_file(cfg.compound_parses, "compounds.parses");
    if (cfg.has_analysis("diachronic") && cfg.patterns.empty())
        throw ArgumentError("analysis 'diachronic' needs 'diachronic.patterns'");
    if (cfg.directions.empty())
        throw ArgumentError("config key 'directions' is empty");
}

} // namespace dlm
