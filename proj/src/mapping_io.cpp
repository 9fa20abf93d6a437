#include "dlm/mapping_io.hpp"

#include "dlm/error.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>

namespace dlm {

namespace {

using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "mapping files are little-endian");

struct ArrayWriter {
    std::ofstream data;
    json layout = json::array();
    std::size_t offset = 0;

    template <typename Derived>
    void put(const std::string& name, const Eigen::MatrixBase<Derived>& a)
    {
        const RowMatrixXd rm = a;
        data.write(reinterpret_cast<const char*>(rm.data()), std::streamsize(rm.size() * sizeof(double)));
        layout.push_back({{"name", name}, {"rows", rm.rows()}, {"cols", rm.cols()}, {"offset", offset}});
        offset += std::size_t(rm.size());
    }
};

std::filesystem::path data_path(const std::filesystem::path& json_path)
{
    auto p = json_path;
    p.replace_extension(".f64");
    return p;
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

ArrayWriter open_writer(const std::filesystem::path& json_path)
{
    ArrayWriter w;
    w.data.open(data_path(json_path), std::ios::binary);
    if (!w.data)
        throw IoError("cannot write '" + data_path(json_path).string() + "'");
    return w;
}

Eigen::MatrixXd read_array(const std::vector<double>& values, const json& layout, const std::string& name)
{
    for (const auto& a : layout) {
        if (a.at("name") != name)
            continue;
        const auto rows = a.at("rows").get<Eigen::Index>();
        const auto cols = a.at("cols").get<Eigen::Index>();
        const auto off = a.at("offset").get<std::size_t>();
        if (off + std::size_t(rows * cols) > values.size())
            throw Error("mapping data file too short for array '" + name + "'");
        return Eigen::Map<const RowMatrixXd>(values.data() + off, rows, cols);
    }
    throw Error("mapping metadata lacks array '" + name + "'");
}

} // namespace

void save_mapping(const std::filesystem::path& json_path, const LinearMapping& m)
{
    auto w = open_writer(json_path);
    w.put("weights", m.weights);
    if (!w.data)
        throw IoError("write failed for mapping data");
    json j;
    j["format"] = "dlm-mapping";
    j["version"] = 1;
    j["kind"] = "linear";
    j["direction"] = to_string(m.direction);
    j["method"] = to_string(m.method);
    j["in_dim"] = m.in_dim();
    j["out_dim"] = m.out_dim();
    j["seed"] = m.seed;
    j["hyperparams"] = m.hyperparams;
    j["data"] = data_path(json_path).filename().string();
    j["arrays"] = w.layout;
    write_json(json_path, j);
}

void save_mapping(const std::filesystem::path& json_path, const DeepMapping& m)
{
    auto w = open_writer(json_path);
    w.put("w1", m.w1);
    w.put("b1", m.b1);
    w.put("w2", m.w2);
    w.put("b2", m.b2);
    if (!w.data)
        throw IoError("write failed for mapping data");
    json j;
    j["format"] = "dlm-mapping";
    j["version"] = 1;
    j["kind"] = "deep";
    j["direction"] = to_string(m.direction);
    j["loss"] = to_string(m.loss);
    j["in_dim"] = m.in_dim();
    j["width"] = m.width();
    j["out_dim"] = m.out_dim();
    j["seed"] = m.record.seed;
    j["epochs_run"] = m.record.epochs_run;
    j["best_epoch"] = m.record.best_epoch;
    j["data"] = data_path(json_path).filename().string();
    j["arrays"] = w.layout;
    write_json(json_path, j);
}

Mapping load_mapping(const std::filesystem::path& json_path)
{
    std::ifstream in(json_path);
    if (!in)
        throw IoError("cannot open mapping '" + json_path.string() + "'");
    const json j = json::parse(in);
    if (j.value("format", "") != "dlm-mapping")
        throw Error("'" + json_path.string() + "' is not a mapping file");

    const auto bin = json_path.parent_path() / j.at("data").get<std::string>();
    std::ifstream data(bin, std::ios::binary | std::ios::ate);
    if (!data)
        throw IoError("cannot open mapping data '" + bin.string() + "'");
    const auto bytes = std::size_t(data.tellg());
    std::vector<double> values(bytes / sizeof(double));
    data.seekg(0);
    data.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(double)));

    const auto& layout = j.at("arrays");
    if (j.at("kind") == "linear") {
        LinearMapping m;
        m.weights = read_array(values, layout, "weights");
        m.direction = parse_direction(j.at("direction"));
        m.method = parse_method(j.at("method"));
        m.seed = j.value("seed", std::uint64_t{0});
        m.hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
        return m;
    }
    DeepMapping m;
    m.w1 = read_array(values, layout, "w1");
    m.b1 = read_array(values, layout, "b1");
    m.w2 = read_array(values, layout, "w2");
    m.b2 = read_array(values, layout, "b2");
    m.direction = parse_direction(j.at("direction"));
    m.loss = parse_deep_loss(j.at("loss"));
    m.record.seed = j.value("seed", std::uint64_t{0});
    m.record.epochs_run = j.value("epochs_run", 0);
    m.record.best_epoch = j.value("best_epoch", 0);
    return m;
}

Eigen::MatrixXd apply_mapping(const Mapping& m, const SparseRowMatrix& X)
{
    return std::visit([&](const auto& mm) { return apply_mapping(mm, X); }, m);
}

Eigen::MatrixXd apply_mapping(const Mapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X)
{
    return std::visit([&](const auto& mm) { return apply_mapping(mm, X); }, m);
}

Eigen::Index mapping_in_dim(const Mapping& m)
{
    return std::visit([](const auto& mm) { return mm.in_dim(); }, m);
}

} // namespace dlm
