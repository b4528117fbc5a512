#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "diffcodec/cli.hpp"

namespace diffcodec::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in " + where);
}

double get_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ParseError("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError("'" + key + "' must be finite");
    return x;
}

double get_positive(const json& v, const std::string& key) {
    const double x = get_number(v, key);
    if (!(x > 0.0)) throw ParseError("'" + key + "' must be positive");
    return x;
}

std::uint64_t get_unsigned(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ParseError("'" + key + "' must be a nonnegative integer");
}

std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw ParseError("'" + key + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ParseError("'" + key + "' must be true or false");
    return v.get<bool>();
}

double get_p(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw ParseError("'p' must be a number >= 1 or \"inf\"");
    }
    const double p = get_number(v, "p");
    if (p < 1.0) throw ParseError("'p' must be a number >= 1 or \"inf\"");
    return p;
}

std::vector<double> get_grid(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) throw ParseError("'" + key + "' must be a nonempty array");
    std::vector<double> out;
    for (const auto& x : v) {
        const double N = get_positive(x, key);
        if (N != std::floor(N)) throw ParseError("'" + key + "' entries must be integers");
        out.push_back(N);
    }
    return out;
}

Thresholds parse_thresholds(const json& doc) {
    reject_unknown(doc,
                   {"rate_slack", "bits_lower", "bits_upper", "entropy_rel", "width_slack", "bernstein_rel",
                    "quadrature", "mz", "growth_rel", "product", "frame", "localization_spread"},
                   "thresholds");
    Thresholds t;
    const std::pair<const char*, double*> fields[] = {
        {"rate_slack", &t.rate_slack},   {"bits_lower", &t.bits_lower},       {"bits_upper", &t.bits_upper},
        {"entropy_rel", &t.entropy_rel}, {"width_slack", &t.width_slack},     {"bernstein_rel", &t.bernstein_rel},
        {"quadrature", &t.quadrature},   {"mz", &t.mz},                       {"growth_rel", &t.growth_rel},
        {"product", &t.product},         {"frame", &t.frame},                 {"localization_spread", &t.localization_spread},
    };
    for (const auto& [key, dst] : fields)
        if (doc.contains(key)) *dst = get_positive(doc.at(key), key);
    if (t.bernstein_rel >= 1.0) throw ParseError("'bernstein_rel' must be below 1");
    return t;
}

}  // namespace

double RunConfig::codec_S() const { return S ? *S : std::max(1.0, s) + 1.0; }

double RunConfig::max_N() const { return *std::max_element(N.begin(), N.end()); }

RunConfig parse_config(const json& doc) {
    reject_unknown(doc,
                   {"space", "lambda_cap", "graph_file", "cloud", "bandwidth", "K", "calibrate_lambda1", "metric", "knn",
                    "filter", "s", "S", "p", "N", "audit_N", "r", "seed", "output_dir", "family_s", "family_band",
                    "sup_error", "entropy_trials", "entropy_N", "bernstein_trials", "thresholds"},
                   "config");
    RunConfig c;
    if (doc.contains("space")) c.space = get_string(doc["space"], "space");
    if (c.space != "S1" && c.space != "T2" && c.space != "S2" && c.space != "graph")
        throw ParseError("'space' must be one of S1, T2, S2, graph");
    if (doc.contains("lambda_cap")) c.lambda_cap = get_positive(doc["lambda_cap"], "lambda_cap");
    if (doc.contains("graph_file")) c.graph_file = get_string(doc["graph_file"], "graph_file");
    if (doc.contains("cloud")) c.cloud = get_string(doc["cloud"], "cloud");
    if (doc.contains("bandwidth")) c.bandwidth = get_positive(doc["bandwidth"], "bandwidth");
    if (doc.contains("K")) c.K = get_unsigned(doc["K"], "K");
    if (doc.contains("calibrate_lambda1")) c.calibrate_lambda1 = get_positive(doc["calibrate_lambda1"], "calibrate_lambda1");
    if (doc.contains("metric")) c.metric = get_string(doc["metric"], "metric");
    if (c.metric != "euclidean" && c.metric != "knn") throw ParseError("'metric' must be euclidean or knn");
    if (doc.contains("knn")) c.knn = get_unsigned(doc["knn"], "knn");
    if (doc.contains("filter")) c.filter = get_string(doc["filter"], "filter");
    if (c.filter != "standard") throw ParseError("'filter' must be standard");
    if (doc.contains("s")) c.s = get_positive(doc["s"], "s");
    if (doc.contains("S")) {
        c.S = get_number(doc["S"], "S");
        if (!(*c.S > 1.0)) throw ParseError("'S' must exceed 1");
    }
    if (doc.contains("p")) c.p = get_p(doc["p"]);
    if (doc.contains("N")) c.N = get_grid(doc["N"], "N");
    if (doc.contains("audit_N")) c.audit_N = get_grid(doc["audit_N"], "audit_N");
    if (doc.contains("r")) c.r = get_positive(doc["r"], "r");
    if (doc.contains("seed")) c.seed = get_unsigned(doc["seed"], "seed");
    if (doc.contains("output_dir")) c.output_dir = get_string(doc["output_dir"], "output_dir");
    if (doc.contains("family_s")) c.family_s = get_positive(doc["family_s"], "family_s");
    if (doc.contains("family_band")) c.family_band = get_positive(doc["family_band"], "family_band");
    if (doc.contains("sup_error")) c.sup_error = get_bool(doc["sup_error"], "sup_error");
    if (doc.contains("entropy_trials")) c.entropy_trials = get_unsigned(doc["entropy_trials"], "entropy_trials");
    if (doc.contains("entropy_N")) c.entropy_N = get_positive(doc["entropy_N"], "entropy_N");
    if (doc.contains("bernstein_trials")) {
        const std::uint64_t t = get_unsigned(doc["bernstein_trials"], "bernstein_trials");
        if (t < 100 || t > 1000000) throw ParseError("'bernstein_trials' must lie in [100, 1e6]");
        c.bernstein_trials = static_cast<int>(t);
    }
    if (doc.contains("thresholds")) c.thresholds = parse_thresholds(doc["thresholds"]);
    if (c.entropy_trials < 1) throw ParseError("'entropy_trials' must be at least 1");

    if (c.space == "graph" && c.graph_file.empty() && (c.cloud.empty() || c.bandwidth <= 0.0 || c.K == 0))
        throw ParseError("graph space needs 'graph_file' or 'cloud', 'bandwidth' and 'K'");
    return c;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": malformed JSON", line,
                         column);
    }
}

RunConfig load_config(const std::string& path) { return parse_config(parse_json_text(read_text_file(path), path)); }

json to_json(const RunConfig& c) {
    json j{{"space", c.space},
           {"filter", c.filter},
           {"s", c.s},
           {"S", c.codec_S()},
           {"p", std::isinf(c.p) ? json("inf") : json(c.p)},
           {"N", c.N},
           {"audit_N", c.audit_N},
           {"r", c.r},
           {"seed", c.seed},
           {"sup_error", c.sup_error},
           {"entropy_trials", c.entropy_trials},
           {"entropy_N", c.entropy_N},
           {"bernstein_trials", c.bernstein_trials}};
    if (c.lambda_cap) j["lambda_cap"] = *c.lambda_cap;
    if (c.family_s) j["family_s"] = *c.family_s;
    if (c.family_band) j["family_band"] = *c.family_band;
    if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
    if (c.space == "graph") {
        if (!c.graph_file.empty()) j["graph_file"] = c.graph_file;
        if (!c.cloud.empty()) {
            j["cloud"] = c.cloud;
            j["bandwidth"] = c.bandwidth;
            j["K"] = c.K;
            j["metric"] = c.metric;
            j["knn"] = c.knn;
        }
        if (c.calibrate_lambda1) j["calibrate_lambda1"] = *c.calibrate_lambda1;
    }
    const Thresholds& t = c.thresholds;
    j["thresholds"] = {{"rate_slack", t.rate_slack},     {"bits_lower", t.bits_lower},
                       {"bits_upper", t.bits_upper},     {"entropy_rel", t.entropy_rel},
                       {"width_slack", t.width_slack},   {"bernstein_rel", t.bernstein_rel},
                       {"quadrature", t.quadrature},     {"mz", t.mz},
                       {"growth_rel", t.growth_rel},     {"product", t.product},
                       {"frame", t.frame},               {"localization_spread", t.localization_spread}};
    return j;
}

std::unique_ptr<Space> make_config_space(const RunConfig& c) {
    if (c.space != "graph") {
        const double N_all = std::max({c.max_N(), *std::max_element(c.audit_N.begin(), c.audit_N.end()), c.entropy_N});
        return make_space(c.space, c.lambda_cap ? *c.lambda_cap : std::max(128.0, 4.0 * N_all));
    }
    if (!c.graph_file.empty()) return std::make_unique<GraphSpace>(load_graph_space(c.graph_file));
    GraphOptions o;
    o.bandwidth = c.bandwidth;
    o.K = c.K;
    o.calibrate_lambda1 = c.calibrate_lambda1;
    o.metric = c.metric == "knn" ? GraphMetric::knn_graph : GraphMetric::euclidean;
    o.knn = c.knn;
    return std::make_unique<GraphSpace>(build_graph_space(ingest_csv(c.cloud), o));
}

Filter make_config_filter(const RunConfig&) { return standard_filter(); }

SpectralInput read_spectral_json(const std::string& path, const std::string& space_id) {
    const json doc = parse_json_text(read_text_file(path), path);
    reject_unknown(doc, {"space", "coeffs", "tail"}, path);
    if (doc.contains("space") && get_string(doc["space"], "space") != space_id)
        throw ParseError(path + ": input is for space " + doc["space"].get<std::string>() + ", config has " + space_id);
    if (!doc.contains("coeffs") || !doc["coeffs"].is_array()) throw ParseError(path + ": 'coeffs' must be an array");
    SpectralInput f;
    f.coeffs.resize(static_cast<Eigen::Index>(doc["coeffs"].size()));
    for (std::size_t i = 0; i < doc["coeffs"].size(); ++i)
        f.coeffs[static_cast<Eigen::Index>(i)] = get_number(doc["coeffs"][i], "coeffs");
    if (doc.contains("tail")) {
        reject_unknown(doc["tail"], {"scale", "q"}, path + " tail");
        f.tail = PowerTail{get_number(doc["tail"].at("scale"), "scale"), get_positive(doc["tail"].at("q"), "q")};
    }
    return f;
}

Eigen::VectorXd read_samples_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<double> vals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string cell = line.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != cell.size() || !std::isfinite(v))
            throw ParseError(path + ":" + std::to_string(lineno) + ":" + std::to_string(first + 1) + ": expected one real value",
                             lineno, first + 1);
        vals.push_back(v);
    }
    if (vals.empty()) throw ParseError(path + ": no samples");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace diffcodec::cli
