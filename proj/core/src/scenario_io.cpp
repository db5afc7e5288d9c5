#include "embounds/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace embounds {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
    throw ValidationError("field '" + field + "': " + why);
}

int get_count(const json& j, const std::string& field) {
    if (!j.contains(field)) field_error(field, "missing");
    const auto& v = j.at(field);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        field_error(field, "expected a non-negative integer");
    return v.get<int>();
}

double get_real(const json& j, const std::string& field) {
    if (!j.contains(field)) field_error(field, "missing");
    const auto& v = j.at(field);
    if (!v.is_number()) field_error(field, "expected a number");
    return v.get<double>();
}

cxd parse_complex(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
        field_error(field, "expected an [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

cxd get_complex(const json& j, const std::string& field) {
    if (!j.contains(field)) field_error(field, "missing");
    return parse_complex(j.at(field), field);
}

CMatrix get_matrix(const json& j, const std::string& field, int rows,
                   int cols) {
    if (!j.contains(field)) field_error(field, "missing");
    const auto& v = j.at(field);
    if (!v.is_array() || static_cast<int>(v.size()) != rows)
        field_error(field, "expected " + std::to_string(rows) + " rows");
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            field_error(field, "row " + std::to_string(i) + ": expected " +
                                   std::to_string(cols) + " entries");
        for (int k = 0; k < cols; ++k)
            m(i, k) = parse_complex(row[static_cast<std::size_t>(k)],
                                    field + "[" + std::to_string(i) + "][" +
                                        std::to_string(k) + "]");
    }
    return m;
}

json complex_to_json(cxd v) { return json::array({v.real(), v.imag()}); }

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(complex_to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json parse_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed JSON");
    if (!j.is_object()) throw ValidationError("expected a JSON object");
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

ScenarioModel scenario_from_json_text(const std::string& text) {
    const json j = parse_text(text);
    ScenarioModel m;
    m.n_t = get_count(j, "n_t");
    m.n_r = get_count(j, "n_r");
    m.n_s = get_count(j, "n_s");
    m.alpha = get_complex(j, "alpha");
    m.beta = get_complex(j, "beta");
    m.h0 = get_matrix(j, "h0", m.n_r, m.n_t);
    m.a = get_matrix(j, "a", m.n_r, m.n_s);
    m.gamma = get_matrix(j, "gamma", m.n_s, m.n_s);
    m.b = get_matrix(j, "b", m.n_s, m.n_t);
    if (j.contains("passive")) {
        if (!j.at("passive").is_boolean())
            field_error("passive", "expected a boolean");
        m.passive = j.at("passive").get<bool>();
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() &&
            !j.at("seed").is_number_integer())
            field_error("seed", "expected an integer");
        m.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("tag")) {
        if (!j.at("tag").is_string()) field_error("tag", "expected a string");
        m.tag = j.at("tag").get<std::string>();
    }
    m.validate();
    return m;
}

std::string scenario_to_json_text(const ScenarioModel& model) {
    json j;
    j["n_t"] = model.n_t;
    j["n_r"] = model.n_r;
    j["n_s"] = model.n_s;
    j["alpha"] = complex_to_json(model.alpha);
    j["beta"] = complex_to_json(model.beta);
    j["h0"] = matrix_to_json(model.h0);
    j["a"] = matrix_to_json(model.a);
    j["gamma"] = matrix_to_json(model.gamma);
    j["b"] = matrix_to_json(model.b);
    j["passive"] = model.passive;
    if (model.seed) j["seed"] = *model.seed;
    if (!model.tag.empty()) j["tag"] = model.tag;
    return j.dump(2);
}

ScenarioModel load_scenario(const std::string& path) {
    return scenario_from_json_text(read_file(path));
}

void save_scenario(const ScenarioModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << scenario_to_json_text(model) << "\n";
}

ScenarioSpec spec_from_json_text(const std::string& text) {
    const json j = parse_text(text);
    ScenarioSpec s;
    s.n_t = get_count(j, "n_t");
    s.n_r = get_count(j, "n_r");
    s.n_s = get_count(j, "n_s");
    s.coupling_strength = get_real(j, "coupling_strength");
    s.loss_factor = get_real(j, "loss_factor");
    s.alpha = get_complex(j, "alpha");
    s.beta = get_complex(j, "beta");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() &&
            !j.at("seed").is_number_integer())
            field_error("seed", "expected an integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("family")) {
        if (!j.at("family").is_string())
            field_error("family", "expected a string");
        s.family = scenario_family_from_string(j.at("family").get<std::string>());
    }
    s.validate();
    return s;
}

std::string spec_to_json_text(const ScenarioSpec& spec) {
    json j;
    j["n_t"] = spec.n_t;
    j["n_r"] = spec.n_r;
    j["n_s"] = spec.n_s;
    j["coupling_strength"] = spec.coupling_strength;
    j["loss_factor"] = spec.loss_factor;
    j["alpha"] = complex_to_json(spec.alpha);
    j["beta"] = complex_to_json(spec.beta);
    j["seed"] = spec.seed;
    j["family"] = to_string(spec.family);
    return j.dump(2);
}

ScenarioSpec load_spec(const std::string& path) {
    return spec_from_json_text(read_file(path));
}

std::string scenario_hash(const ScenarioModel& model) {
    // FNV-1a over the canonical serialization.
    const std::string text = scenario_to_json_text(model);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace embounds
