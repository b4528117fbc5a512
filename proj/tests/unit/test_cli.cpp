#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diffcodec/cli.hpp"
#include "diffcodec/parallel.hpp"
#include "doctest.h"

using namespace diffcodec;
using namespace diffcodec::cli;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "diffcodec_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string write_file(const std::string& name, const std::string& text) {
    const std::string p = temp_path(name);
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

// Every nonempty stdout line is a JSON document.
std::vector<json> json_lines(const std::string& text) {
    std::vector<json> docs;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) docs.push_back(json::parse(line));
    return docs;
}

std::string circle_csv(int M) {
    std::ostringstream s;
    s.precision(17);
    for (int i = 0; i < M; ++i) s << std::cos(2 * kPi * i / M) << "," << std::sin(2 * kPi * i / M) << "\n";
    return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig d = parse_config(json::object());
    CHECK(d.space == "S1");
    CHECK(d.codec_S() == 2.0);
    CHECK(d.N.size() == 5);
    CHECK(parse_config(json{{"s", 3.0}}).codec_S() == 4.0);
    CHECK(parse_config(json{{"s", 0.5}}).codec_S() == 2.0);
    CHECK(std::isinf(parse_config(json{{"p", "inf"}}).p));
    CHECK(parse_config(json{{"thresholds", {{"rate_slack", 0.5}}}}).thresholds.rate_slack == 0.5);

    CHECK_THROWS_WITH_AS(parse_config(json{{"bogus", 1}}), "unknown key 'bogus' in config", ParseError);
    CHECK_THROWS_AS(parse_config(json{{"thresholds", {{"nope", 1}}}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"s", "one"}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"s", -1}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"S", 1.0}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"p", 0.5}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"N", {4, 8.5}}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"seed", -3}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"space", "S3"}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"space", "graph"}}), ParseError);
    CHECK_THROWS_AS(parse_config(json{{"bernstein_trials", 50}}), ParseError);
    CHECK_THROWS_AS(parse_config(json::array()), ParseError);

    // The echoed config parses back to the same values.
    const RunConfig c = parse_config(json{{"space", "S2"}, {"s", 2.0}, {"N", {4, 8}}, {"seed", 9}});
    const RunConfig back = parse_config(to_json(c));
    CHECK(back.space == "S2");
    CHECK(back.N == c.N);
    CHECK(back.seed == 9);
    CHECK(back.codec_S() == 3.0);
}

TEST_CASE("malformed JSON reports line and column") {
    try {
        parse_json_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "doc");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 8);
        CHECK(std::string(e.what()).rfind("doc:3:8:", 0) == 0);
    }
    const std::string bad = write_file("bad.json", "{\"coeffs\": [1, 2,}");
    const Result r = invoke({"encode", "--input", bad, "--out", temp_path("bad.dfc")});
    CHECK(r.code == kParseError);
    CHECK(r.err.find(":1:") != std::string::npos);
    CHECK(r.out.empty());

    const std::string cfg = write_file("unknown.json", "{\"space\": \"S1\", \"speed\": 3}");
    CHECK(invoke({"--config", cfg, "sweep", "--dry-run"}).code == kParseError);
    CHECK(invoke({"frobnicate"}).code == kParseError);
    CHECK(invoke({}).code == kParseError);
}

TEST_CASE("encode and decode roundtrip") {
    const std::string f = write_file("f.json", "{\"space\": \"S1\", \"coeffs\": [0.5, 1, 0.25, 0, 0.1]}");
    const std::string stream = temp_path("f.dfc");
    const Result e = invoke({"encode", "--input", f, "--out", stream, "--N", "8"});
    REQUIRE(e.code == kOk);
    const json rep = json::parse(e.out);
    CHECK(rep.at("N") == 8.0);
    CHECK(rep.at("S") == 2.0);
    CHECK(rep.at("count") == 33);
    CHECK(rep.at("payload_bits").get<std::uint64_t>() == read_stream(stream).payload_bits);
    CHECK(e.err.find("encoded") != std::string::npos);

    const Result d = invoke({"decode", stream});
    REQUIRE(d.code == kOk);
    const json doc = json::parse(d.out);
    CircleSpace s(128);
    const NodeSetRegistry reg;
    const DiffusionPolynomial direct = decode(read_stream(stream), s, standard_filter(), reg);
    const auto coeffs = doc.at("coeffs").get<std::vector<double>>();
    REQUIRE(coeffs.size() == static_cast<std::size_t>(direct.coeffs.size()));
    for (std::size_t k = 0; k < coeffs.size(); ++k) CHECK(coeffs[k] == direct.coeffs[static_cast<Eigen::Index>(k)]);
    CHECK(std::abs(coeffs[1] - 1.0) < 1e-2);

    const std::string grid = temp_path("g.csv");
    const Result g = invoke({"decode", stream, "--format", "grid", "--grid", "4", "--out", grid});
    REQUIRE(g.code == kOk);
    CHECK(json::parse(g.out).at("nodes") == 17);
    std::istringstream lines(slurp(grid));
    std::string first;
    std::getline(lines, first);
    const double v0 = std::stod(first.substr(first.rfind(',') + 1));
    CHECK(v0 == doctest::Approx(direct.evaluate(NodeSet::from_points({{0.0, 0.0}}))[0]).epsilon(1e-15));

    // Identical inputs give byte-identical streams and reports.
    const std::string again = temp_path("f2.dfc");
    const Result e2 = invoke({"encode", "--input", f, "--out", again, "--N", "8"});
    CHECK(slurp(again) == slurp(stream));
    CHECK(e2.out == e.out);
}

TEST_CASE("zero input and sample input") {
    const std::string z = write_file("zero.json", "{\"coeffs\": [0, 0, 0]}");
    const std::string stream = temp_path("z.dfc");
    REQUIRE(invoke({"encode", "--input", z, "--out", stream, "--N", "4"}).code == kOk);
    const EncodedFunction enc = read_stream(stream);
    CHECK(enc.payload.size() == 17);
    for (auto v : enc.payload) CHECK(v == 0);

    // Samples of φ_1 = √2 cos θ at the 17 canonical nodes.
    CircleSpace s(64);
    const QuadratureMeasure q = make_quadrature(s, 4);
    std::ostringstream csv;
    csv.precision(17);
    for (const Point& x : q.nodes.points) csv << s.eval_basis(1, x) << "\n";
    const std::string samples = write_file("phi1.csv", csv.str());
    const std::string st = temp_path("phi1.dfc");
    REQUIRE(invoke({"encode", "--input", samples, "--out", st, "--N", "4"}).code == kOk);
    const json doc = json::parse(invoke({"decode", st}).out);
    CHECK(std::abs(doc.at("coeffs")[1].get<double>() - 1.0) <= 1.0 / 16.0 * 1.1);

    const std::string short_csv = write_file("short.csv", "1\n2\n");
    CHECK(invoke({"encode", "--input", short_csv, "--out", st, "--N", "4"}).code == kParseError);
    const std::string bad_csv = write_file("badv.csv", "1\nx\n");
    CHECK(invoke({"encode", "--input", bad_csv, "--out", st, "--N", "4"}).code == kParseError);
}

TEST_CASE("local mode from the command line") {
    const std::string f = write_file("one.json", "{\"coeffs\": [1]}");
    const std::string st = temp_path("local.dfc");
    const Result r = invoke({"encode", "--input", f, "--out", st, "--N", "8", "--mode", "local", "--center", "1.0",
                             "--radius", "1.0", "--cutoff-inner", "0.5"});
    REQUIRE(r.code == kOk);
    const EncodedFunction enc = read_stream(st);
    CHECK(enc.header.mode == CodecMode::local);
    CHECK(enc.header.count < 33);
    CHECK(invoke({"decode", st}).code == kOk);
    CHECK(invoke({"encode", "--input", f, "--out", st, "--mode", "local"}).code == kParseError);
    CHECK(invoke({"encode", "--input", f, "--out", st, "--mode", "sideways"}).code == kParseError);
}

TEST_CASE("stream failures map to exit codes") {
    const std::string f = write_file("g.json", "{\"coeffs\": [0.3, 0.2, 0.1]}");
    const std::string stream = temp_path("c.dfc");
    REQUIRE(invoke({"encode", "--input", f, "--out", stream, "--N", "8"}).code == kOk);
    const std::string bytes = slurp(stream);

    const std::string trunc = write_file("trunc.dfc", bytes.substr(0, bytes.size() / 2));
    CHECK(invoke({"decode", trunc}).code == kCorruptStream);
    std::string flipped = bytes;
    flipped[flipped.size() - 6] = static_cast<char>(flipped[flipped.size() - 6] ^ 0x01);
    const std::string crc = write_file("crc.dfc", flipped);
    const Result bad = invoke({"decode", crc});
    CHECK(bad.code == kCorruptStream);
    CHECK(bad.out.empty());
    CHECK(invoke({"decode", write_file("empty.dfc", "")}).code == kCorruptStream);
    CHECK(invoke({"decode", temp_path("does_not_exist.dfc")}).code == kIoError);
    CHECK(invoke({"encode", "--input", temp_path("nope.json"), "--out", stream}).code == kIoError);
    CHECK(invoke({"encode", "--input", f, "--out", temp_path("no_dir/x.dfc"), "--N", "8"}).code == kIoError);

    EncodedFunction enc = read_stream(stream);
    enc.header.node_set ^= 0x5a5a;
    const std::string orphan = temp_path("orphan.dfc");
    write_stream(orphan, enc);
    CHECK(invoke({"decode", orphan}).code == kUnknownNodeSet);
}

TEST_CASE("sweep thresholds and dry run") {
    const Result r = invoke({"sweep"});
    REQUIRE(r.code == kOk);
    const auto docs = json_lines(r.out);
    REQUIRE(docs.size() == 6);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(docs[i].contains("theoretical_bits"));
        CHECK(docs[i].at("residual").get<double>() <= 1.0);
    }
    const json& summary = docs.back();
    CHECK(summary.at("pass") == true);
    CHECK(summary.at("rate_slope_p2").get<double>() <= -0.7);

    const std::string rough = write_file("rough.json", "{\"s\": 5, \"family_s\": 1}");
    const Result v = invoke({"--config", rough, "sweep"});
    CHECK(v.code == kThresholdViolation);
    CHECK(json_lines(v.out).back().at("pass") == false);

    const Result plan = invoke({"sweep", "--dry-run"});
    CHECK(plan.code == kOk);
    CHECK(json::parse(plan.out).at("dry_run") == true);

    const std::string few = write_file("few.json", "{\"N\": [8, 16, 32]}");
    CHECK(invoke({"--config", few, "sweep"}).code == kParseError);
}

TEST_CASE("thread cap leaves the output unchanged") {
    const Result many = invoke({"sweep"});
    ::setenv("DIFFCODEC_THREADS", "1", 1);
    CHECK(thread_count() == 1);
    const Result one = invoke({"sweep"});
    ::unsetenv("DIFFCODEC_THREADS");
    CHECK(one.out == many.out);
}

TEST_CASE("audit verdicts") {
    const Result r = invoke({"audit"});
    REQUIRE(r.code == kOk);
    const json doc = json::parse(r.out);
    REQUIRE(doc.at("assumptions").size() == 4);
    for (const auto& a : doc.at("assumptions")) CHECK(a.at("verdict") == "pass");

    CircleSpace s(64);
    const QuadratureMeasure q = make_quadrature(s, 4);
    const std::string good = write_file("q.json", quadrature_to_json(q, 0.0).dump());
    CHECK(invoke({"audit", "--quadrature", good}).code == kOk);
    json broken = quadrature_to_json(q, 0.0);
    broken["weights"][0] = broken["weights"][0].get<double>() + 0.01;
    CHECK(invoke({"audit", "--quadrature", write_file("qw.json", broken.dump())}).code == kAuditFailure);
    CHECK(invoke({"audit", "--quadrature", write_file("qc.json", "{\"space_id\": ")}).code == kAuditFailure);
}

TEST_CASE("experiment commands") {
    const Result fc = invoke({"frame-check"});
    CHECK(fc.code == kOk);
    CHECK(json::parse(fc.out).at("records").size() == 10);

    const Result kd = invoke({"kernel-decay"});
    CHECK(kd.code == kOk);
    CHECK(json::parse(kd.out).at("buckets").size() == 5);

    const Result w = invoke({"widths"});
    CHECK(w.code == kOk);
    const json wd = json::parse(w.out);
    CHECK(wd.at("linear").at("points").size() == 5);
    CHECK(wd.at("linear").contains("theory_slope"));

    const std::string dir = temp_path("reports");
    std::filesystem::remove_all(dir);
    const std::string cfg = write_file("entropy.json", "{\"entropy_trials\": 1500, \"output_dir\": \"" + dir + "\"}");
    const Result e = invoke({"--config", cfg, "entropy"});
    CHECK((e.code == kOk || e.code == kThresholdViolation));
    const json ed = json::parse(e.out);
    CHECK(ed.at("points").size() == 5);
    CHECK(ed.at("theory_slope") == 1.0);
    CHECK(json::parse(slurp(dir + "/entropy.json")) == ed);
}

TEST_CASE("graph commands") {
    const std::string cloud = write_file("circle.csv", circle_csv(200));
    const double bw = 4.0 * std::sin(kPi / 200);
    json cfg{{"space", "graph"}, {"cloud", cloud}, {"bandwidth", bw}, {"K", 200}, {"calibrate_lambda1", 1.0}};
    const std::string c = write_file("graph.json", cfg.dump());
    const std::string dmgs = temp_path("circle.dmgs");
    const Result b = invoke({"--config", c, "build-graph", "--out", dmgs});
    REQUIRE(b.code == kOk);
    const json rep = json::parse(b.out);
    CHECK(rep.at("nodes") == 200);
    CHECK(rep.at("lambda1").get<double>() == doctest::Approx(1.0));
    CHECK(rep.at("alpha").get<double>() >= 0.8);
    CHECK(rep.at("alpha").get<double>() <= 1.2);

    const std::string saved = write_file("graph2.json", json{{"space", "graph"}, {"graph_file", dmgs}}.dump());
    const std::string f = write_file("gf.json", "{\"coeffs\": [1, 0.5, 0.5, 0.2]}");
    const std::string st = temp_path("graph.dfc");
    REQUIRE(invoke({"--config", saved, "encode", "--input", f, "--out", st}).code == kOk);
    const Result d = invoke({"--config", saved, "decode", st});
    REQUIRE(d.code == kOk);
    const auto coeffs = json::parse(d.out).at("coeffs").get<std::vector<double>>();
    CHECK(coeffs[1] == doctest::Approx(0.5).epsilon(1e-2));
    // Graph streams cannot be decoded without the graph.
    CHECK(invoke({"decode", st}).code == kParseError);

    const json a = json::parse(invoke({"--config", saved, "audit"}).out);
    CHECK(a.at("assumptions")[0].at("verdict") == "diagnostic");
    CHECK(a.at("pass") == true);

    // A truncated spectrum cannot certify a rule far above its cap.
    json small = cfg;
    small["K"] = 20;
    const std::string sc = write_file("graph_small.json", small.dump());
    CHECK(invoke({"--config", sc, "encode", "--input", f, "--out", st, "--N", "64"}).code == kCertificationFailure);
    CHECK(invoke({"build-graph", "--out", dmgs}).code == kParseError);
}
