#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "reprocf/errors.hpp"
#include "reprocf/experiment.hpp"

namespace reprocf {

namespace {

// Minimal flat `key = value` document: strings, numbers, booleans and
// one-level arrays, with `#` comments. No tables, no nesting.
struct Scalar {
    enum class Kind { String, Number, Bool } kind;
    std::string text;
    double number = 0;
    bool flag = false;
};

using Value = std::variant<Scalar, std::vector<Scalar>>;

class LineParser {
public:
    LineParser(std::string line, std::string where)
        : line_(std::move(line)), where_(std::move(where)) {}

    std::pair<std::string, Value> parse() {
        skip_blanks();
        std::string key;
        while (pos_ < line_.size() &&
               (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
            key += line_[pos_++];
        if (key.empty()) fail("expected a key");
        skip_blanks();
        if (pos_ >= line_.size() || line_[pos_] != '=') fail("expected '=' after key");
        ++pos_;
        skip_blanks();
        Value value = parse_value();
        skip_blanks();
        if (pos_ < line_.size()) fail("trailing content after value");
        return {key, std::move(value)};
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(where_ + ": " + what);
    }

    void skip_blanks() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    }

    Value parse_value() {
        if (pos_ < line_.size() && line_[pos_] == '[') {
            ++pos_;
            std::vector<Scalar> items;
            skip_blanks();
            if (pos_ < line_.size() && line_[pos_] == ']') {
                ++pos_;
                return items;
            }
            for (;;) {
                skip_blanks();
                items.push_back(parse_scalar());
                skip_blanks();
                if (pos_ >= line_.size()) fail("unterminated array");
                if (line_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (line_[pos_] == ']') {
                    ++pos_;
                    return items;
                }
                fail("expected ',' or ']' in array");
            }
        }
        return parse_scalar();
    }

    Scalar parse_scalar() {
        if (pos_ >= line_.size()) fail("expected a value");
        if (line_[pos_] == '"') {
            ++pos_;
            Scalar s{Scalar::Kind::String, "", 0, false};
            while (pos_ < line_.size() && line_[pos_] != '"') s.text += line_[pos_++];
            if (pos_ >= line_.size()) fail("unterminated string");
            ++pos_;
            return s;
        }
        std::string token;
        while (pos_ < line_.size() && line_[pos_] != ',' && line_[pos_] != ']' &&
               line_[pos_] != ' ' && line_[pos_] != '\t')
            token += line_[pos_++];
        if (token == "true") return Scalar{Scalar::Kind::Bool, token, 0, true};
        if (token == "false") return Scalar{Scalar::Kind::Bool, token, 0, false};
        try {
            std::size_t used = 0;
            const double number = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            return Scalar{Scalar::Kind::Number, token, number, false};
        } catch (const std::exception&) {
            fail("bad value \"" + token + "\" (strings need quotes)");
        }
    }

    std::string line_;
    std::string where_;
    std::size_t pos_ = 0;
};

std::map<std::string, Value> parse_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::map<std::string, Value> doc;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // strip comments outside of strings
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.resize(i);
                break;
            }
        }
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto [key, value] =
            LineParser(line, path.string() + ":" + std::to_string(line_no)).parse();
        if (doc.count(key)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": duplicate key \"" + key + "\"");
        }
        doc.emplace(std::move(key), std::move(value));
    }
    return doc;
}

const Scalar& as_scalar(const Value& v, const std::string& key) {
    if (const auto* s = std::get_if<Scalar>(&v)) return *s;
    throw ValidationError("config key \"" + key + "\" must be a single value");
}

std::vector<Scalar> as_list(const Value& v, const std::string& key) {
    if (const auto* l = std::get_if<std::vector<Scalar>>(&v)) return *l;
    // a bare scalar is accepted as a one-element list
    return {as_scalar(v, key)};
}

double as_number(const Scalar& s, const std::string& key) {
    if (s.kind != Scalar::Kind::Number)
        throw ValidationError("config key \"" + key + "\" must be numeric");
    return s.number;
}

int as_int(const Scalar& s, const std::string& key) {
    const double v = as_number(s, key);
    const auto i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError("config key \"" + key + "\" must be an integer");
    return static_cast<int>(i);
}

bool as_bool(const Scalar& s, const std::string& key) {
    if (s.kind != Scalar::Kind::Bool)
        throw ValidationError("config key \"" + key + "\" must be true or false");
    return s.flag;
}

std::string as_string(const Scalar& s, const std::string& key) {
    if (s.kind != Scalar::Kind::String)
        throw ValidationError("config key \"" + key + "\" must be a quoted string");
    return s.text;
}

} // namespace

namespace {

ExperimentConfig build_config(const std::map<std::string, Value>& doc,
                              const std::filesystem::path& path, bool allow_hyper_keys) {
    static const char* known[] = {"datasets",    "methods",  "alphas",      "factors",
                                  "reg",         "iters",    "nonnegative", "bias_modes",
                                  "repetitions", "seed",     "workers",     "tolerance",
                                  "cold_start"};
    for (const auto& [key, value] : doc) {
        (void)value;
        bool ok = allow_hyper_keys && (key == "axis" || key == "values");
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError(path.string() + ": unknown config key \"" + key + "\"");
    }

    ExperimentConfig config;
    const auto find = [&](const char* key) -> const Value* {
        const auto it = doc.find(key);
        return it == doc.end() ? nullptr : &it->second;
    };

    const Value* datasets = find("datasets");
    if (!datasets) throw ValidationError(path.string() + ": missing \"datasets\"");
    for (const Scalar& s : as_list(*datasets, "datasets"))
        config.datasets.push_back(DatasetSource::parse(as_string(s, "datasets")));

    const Value* methods = find("methods");
    if (!methods) throw ValidationError(path.string() + ": missing \"methods\"");
    for (const Scalar& s : as_list(*methods, "methods")) {
        const std::string name = as_string(s, "methods");
        const auto method = parse_method(name);
        if (!method) throw ValidationError(path.string() + ": unknown method \"" + name + "\"");
        config.methods.push_back(*method);
    }

    if (const Value* alphas = find("alphas")) {
        for (const Scalar& s : as_list(*alphas, "alphas"))
            config.alphas.push_back(as_number(s, "alphas"));
    } else {
        for (int i = 1; i <= 9; ++i) config.alphas.push_back(i / 10.0);
    }
    for (const double a : config.alphas)
        if (!(a > 0.0 && a < 1.0))
            throw ValidationError(path.string() + ": alphas must lie in (0,1)");

    if (const Value* v = find("factors")) config.als.n_factors = as_int(as_scalar(*v, "factors"), "factors");
    if (const Value* v = find("reg")) config.als.regularization = as_number(as_scalar(*v, "reg"), "reg");
    if (const Value* v = find("iters")) config.als.max_iterations = as_int(as_scalar(*v, "iters"), "iters");
    if (const Value* v = find("nonnegative")) config.als.nonnegative = as_bool(as_scalar(*v, "nonnegative"), "nonnegative");

    if (const Value* v = find("bias_modes")) {
        config.bias_modes.clear();
        for (const Scalar& s : as_list(*v, "bias_modes")) {
            const std::string mode = as_string(s, "bias_modes");
            if (mode == "off") config.bias_modes.push_back(false);
            else if (mode == "on") config.bias_modes.push_back(true);
            else throw ValidationError(path.string() + ": bias mode must be \"on\" or \"off\"");
        }
    }

    if (const Value* v = find("repetitions")) config.repetitions = as_int(as_scalar(*v, "repetitions"), "repetitions");
    if (config.repetitions < 1) throw ValidationError(path.string() + ": repetitions must be >= 1");
    if (const Value* v = find("seed")) {
        const double seed = as_number(as_scalar(*v, "seed"), "seed");
        if (seed < 0) throw ValidationError(path.string() + ": seed must be >= 0");
        config.master_seed = static_cast<std::uint64_t>(seed);
    }
    if (const Value* v = find("workers")) config.workers = as_int(as_scalar(*v, "workers"), "workers");
    if (config.workers < 1) throw ValidationError(path.string() + ": workers must be >= 1");
    if (const Value* v = find("tolerance")) config.ratio_tolerance = as_number(as_scalar(*v, "tolerance"), "tolerance");
    if (config.ratio_tolerance <= 0) throw ValidationError(path.string() + ": tolerance must be > 0");
    if (const Value* v = find("cold_start")) config.cold_start = as_bool(as_scalar(*v, "cold_start"), "cold_start");

    return config;
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return build_config(parse_document(path), path, false);
}

HyperConfig load_hyper_config(const std::filesystem::path& path) {
    const auto doc = parse_document(path);
    HyperConfig hyper;
    hyper.base = build_config(doc, path, true);

    const auto axis_it = doc.find("axis");
    if (axis_it == doc.end()) throw ValidationError(path.string() + ": missing \"axis\"");
    const std::string axis = as_string(as_scalar(axis_it->second, "axis"), "axis");
    if (axis == "factors") hyper.axis = HyperAxis::Factors;
    else if (axis == "iterations") hyper.axis = HyperAxis::Iterations;
    else throw ValidationError(path.string() + ": axis must be \"factors\" or \"iterations\"");

    const auto values_it = doc.find("values");
    if (values_it == doc.end()) throw ValidationError(path.string() + ": missing \"values\"");
    for (const Scalar& s : as_list(values_it->second, "values"))
        hyper.values.push_back(as_int(s, "values"));
    if (hyper.values.empty()) throw ValidationError(path.string() + ": \"values\" is empty");
    return hyper;
}

} // namespace reprocf
