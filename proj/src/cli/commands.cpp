#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "diffcodec/cli.hpp"
#include "diffcodec/complexity.hpp"
#include "diffcodec/frames.hpp"
#include "diffcodec/kernels.hpp"

namespace diffcodec::cli {

namespace {

using nlohmann::json;

void require_readable(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("write failed: " + path);
}

// The report goes to stdout and, when configured, to output_dir/name.json.
void emit(const RunConfig& c, const std::string& name, const json& report, std::ostream& out) {
    out << report.dump() << '\n';
    if (c.output_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec) throw IoError("cannot create " + c.output_dir);
    write_text((std::filesystem::path(c.output_dir) / (name + ".json")).string(), report.dump(2) + "\n");
}

json check(const std::string& name, double value, double threshold, bool pass) {
    return {{"check", name}, {"value", value}, {"threshold", threshold}, {"pass", pass}};
}

bool all_pass(const json& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const json& c) { return c.at("pass").get<bool>(); });
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double require_integer_N(double N) {
    if (!(N >= 1.0) || N != std::floor(N)) throw DomainError("N must be a positive integer");
    return N;
}

double slope_of_logs(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log2(x[i]));
            ly.push_back(std::log2(y[i]));
        }
    return lx.size() >= 2 ? fit_slope(lx, ly) : std::nan("");
}

json p_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

}  // namespace

int cmd_encode(const RunConfig& c, const EncodeOptions& o, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const Filter filter = make_config_filter(c);
    const double N = require_integer_N(o.N ? *o.N : c.N.front());
    const double S = c.codec_S();

    const QuadratureMeasure q = make_quadrature(*space, N);
    const double residual = certify_quadrature(*space, q, N);
    if (!(residual <= c.thresholds.quadrature))
        throw CertificationError("quadrature of order " + std::to_string(N) + " fails certification: residual " +
                                 std::to_string(residual));

    require_readable(o.input);
    FunctionInput input;
    if (ends_with(o.input, ".csv")) {
        const Eigen::VectorXd v = read_samples_csv(o.input);
        if (static_cast<std::size_t>(v.size()) != q.support())
            throw ParseError(o.input + ": expected " + std::to_string(q.support()) + " samples, found " +
                             std::to_string(v.size()));
        input = SampledInput{v, node_set_id(q)};
    } else {
        input = read_spectral_json(o.input, space->id());
    }

    EncodedFunction enc;
    if (o.mode == "global") {
        enc = encode(*space, filter, input, N, S, q, q);
    } else if (o.mode == "local") {
        if (!o.center || !o.radius) throw DomainError("local mode needs --center and --radius");
        if (o.cutoff_inner) {
            const CutoffFunction cut = make_cutoff(*space, *o.center, *o.cutoff_inner, *o.radius);
            enc = encode_local_cutoff(*space, filter, input, cut, N, S, q, q);
        } else {
            enc = encode(*space, filter, input, N, S, q, q, CodecMode::local, Ball{*o.center, *o.radius});
        }
    } else {
        throw DomainError("mode must be global or local");
    }
    try {
        write_stream(o.out, enc);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    err << "encoded " << enc.header.count << " nodes of " << space->id() << " at N = " << N << " into " << o.out
        << '\n';
    emit(c, "encode",
         {{"payload_bits", enc.payload_bits},
          {"count", enc.header.count},
          {"N", N},
          {"S", S},
          {"theoretical_bits", theoretical_bits(enc.payload)},
          {"residual", enc.residual},
          {"node_set", hex64(enc.header.node_set)},
          {"mode", o.mode}},
         out);
    return kOk;
}

int cmd_decode(const RunConfig& c, const DecodeOptions& o, std::ostream& out, std::ostream& err) {
    require_readable(o.stream);
    const EncodedFunction enc = read_stream(o.stream);
    const EncodedHeader& h = enc.header;

    std::unique_ptr<Space> space;
    if (h.space_id == "graph") {
        if (c.space != "graph") throw DomainError("graph streams need a graph space in the config");
        space = make_config_space(c);
    } else if (c.space == h.space_id && c.lambda_cap) {
        space = make_config_space(c);
    } else {
        space = make_space(h.space_id, std::max(128.0, 4.0 * h.N));
    }
    const Filter filter = make_config_filter(c);
    const NodeSetRegistry registry;
    const DiffusionPolynomial rec = decode(enc, *space, filter, registry);

    json summary{{"space", h.space_id}, {"N", h.N}, {"S", h.S}, {"band", rec.band}, {"count", rec.coeffs.size()}};
    if (o.format == "spectral") {
        json doc{{"space", h.space_id}, {"N", h.N}, {"S", h.S}, {"band", rec.band},
                 {"coeffs", std::vector<double>(rec.coeffs.data(), rec.coeffs.data() + rec.coeffs.size())}};
        if (o.out.empty()) {
            out << doc.dump() << '\n';
            return kOk;
        }
        write_text(o.out, doc.dump() + "\n");
    } else if (o.format == "grid") {
        if (o.out.empty()) throw DomainError("grid output needs --out");
        const double M = require_integer_N(o.grid ? *o.grid : static_cast<double>(h.N));
        const QuadratureMeasure g = make_quadrature(*space, M);
        const Eigen::VectorXd v = rec.evaluate(g.nodes);
        std::string text;
        char line[96];
        for (std::size_t i = 0; i < g.support(); ++i) {
            const Point& x = g.nodes.points[i];
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x.u, x.v, v[static_cast<Eigen::Index>(i)]);
            text += line;
        }
        write_text(o.out, text);
        summary["grid_N"] = M;
        summary["nodes"] = g.support();
    } else {
        throw DomainError("format must be spectral or grid");
    }
    summary["out"] = o.out;
    err << "decoded " << o.stream << " to " << o.out << '\n';
    emit(c, "decode", summary, out);
    return kOk;
}

int cmd_sweep(const RunConfig& c, const std::string& input, bool dry_run, std::ostream& out, std::ostream& err) {
    if (c.N.size() < 4) throw ParseError("sweep needs at least 4 N values");
    if (c.p != 2.0 && !std::isinf(c.p)) throw ParseError("sweep checks the rate at p = 2 or inf");
    const double S = c.codec_S();
    const double family_s = c.family_s.value_or(c.s);
    const double band = c.family_band.value_or(4.0 * c.max_N());
    if (dry_run) {
        json plan{{"command", "sweep"},
                  {"dry_run", true},
                  {"config", to_json(c)},
                  {"input", input.empty() ? json{{"family_s", family_s}, {"band", band}} : json(input)},
                  {"checks", {"residual", "rate", "bits"}}};
        emit(c, "sweep_plan", plan, out);
        return kOk;
    }

    const auto space = make_config_space(c);
    const Filter filter = make_config_filter(c);
    SpectralInput f;
    if (input.empty()) {
        f = power_family(*space, l2_family_exponent(*space, family_s), band);
    } else {
        require_readable(input);
        f = read_spectral_json(input, space->id());
    }
    const bool with_sup = c.sup_error || std::isinf(c.p);
    const QuadratureFamily family(*space);
    err << "sweeping " << c.N.size() << " values of N on " << space->id() << '\n';
    const std::vector<RateRecord> recs = rate_sweep(*space, filter, f, c.N, S, family, with_sup);

    json records = json::array();
    std::vector<double> Ns, e2, einf, tbits, pbits, inv_eps;
    double max_residual = 0.0;
    for (const RateRecord& r : recs) {
        out << to_json(r).dump() << '\n';
        records.push_back(to_json(r));
        Ns.push_back(r.N);
        e2.push_back(r.error_p2);
        einf.push_back(r.error_inf);
        tbits.push_back(static_cast<double>(r.theoretical_bits));
        pbits.push_back(static_cast<double>(r.payload_bits));
        inv_eps.push_back(r.error_p2 > 0.0 ? c.r / r.error_p2 : 0.0);
        max_residual = std::max(max_residual, r.residual);
    }
    const double rate2 = slope_of_logs(Ns, e2);
    const double rate_inf = with_sup ? slope_of_logs(Ns, einf) : std::nan("");
    const double bits = slope_of_logs(inv_eps, tbits);
    const double target = space->alpha() / c.s;
    const double rate = std::isinf(c.p) ? rate_inf : rate2;
    const Thresholds& t = c.thresholds;

    json checks = json::array();
    checks.push_back(check("residual", max_residual, 1.0, max_residual <= 1.0));
    checks.push_back(check("rate", rate, -c.s + t.rate_slack, rate <= -c.s + t.rate_slack));
    checks.push_back(check("bits_slope_low", bits, target - t.bits_lower, bits >= target - t.bits_lower));
    checks.push_back(check("bits_slope_high", bits, target + t.bits_upper, bits <= target + t.bits_upper));
    const bool pass = all_pass(checks);

    json summary{{"summary", true},
                 {"space", space->id()},
                 {"alpha", space->alpha()},
                 {"s", c.s},
                 {"S", S},
                 {"p", p_json(c.p)},
                 {"rate_slope_p2", rate2},
                 {"bits_slope", bits},
                 {"payload_bits_slope", slope_of_logs(inv_eps, pbits)},
                 {"checks", checks},
                 {"pass", pass}};
    if (with_sup) summary["rate_slope_inf"] = rate_inf;
    out << summary.dump() << '\n';
    if (!c.output_dir.empty()) {
        std::ostringstream sink;
        emit(c, "sweep", {{"records", records}, {"summary", summary}}, sink);
    }
    if (!pass) err << "sweep: threshold violated\n";
    return pass ? kOk : kThresholdViolation;
}

namespace {

json assumption(const std::string& id, const std::string& name, const std::string& verdict, bool hard, json records) {
    return {{"assumption", id}, {"name", name}, {"verdict", verdict}, {"hard", hard}, {"records", std::move(records)}};
}

json audit_heat(const Space& space, bool graph, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> diag;
    std::vector<std::pair<Point, Point>> pairs;
    for (int i = 0; i < 8; ++i) diag.push_back(space.random_point(rng));
    while (pairs.size() < 40) {
        const Point x = space.random_point(rng), y = space.random_point(rng);
        if (space.distance(x, y) > 0.0) pairs.push_back({x, y});
    }
    std::vector<double> ts;
    for (int j = 1; j <= 6; ++j) ts.push_back(std::ldexp(1.0, -j));
    json recs = json::array();
    bool pass = true;
    try {
        const HeatDiagnostics d = heat_diagnostics(space, ts, diag, pairs, HeatThresholds{});
        for (const auto& r : d.records) {
            recs.push_back(to_json(r));
            pass = pass && r.pass;
        }
        recs.push_back({{"check", "gaussian_fit"}, {"c_fit", d.c_fit}, {"diag_lo", d.diag_lo}, {"diag_hi", d.diag_hi}});
    } catch (const std::exception& e) {
        recs.push_back({{"check", "heat_kernel"}, {"error", e.what()}});
        pass = false;
    }
    if (graph) return assumption("I", "volume and heat kernel bounds", "diagnostic", false, recs);
    return assumption("I", "volume and heat kernel bounds", pass ? "pass" : "fail", true, recs);
}

json audit_product(const Space& space, const RunConfig& c, const GraphSpace* graph) {
    const double N0 = *std::min_element(c.audit_N.begin(), c.audit_N.end());
    const double a = space.product_constant();
    std::mt19937_64 rng(c.seed + 1);
    std::normal_distribution<double> G;
    json recs = json::array();
    double worst = 0.0;
    if (graph) {
        const auto n = static_cast<Eigen::Index>(std::min(graph->count_upto(std::min(N0, graph->lambda_cap())), graph->dimension()));
        const Eigen::MatrixXd& Phi = graph->eigenvectors();
        const double M = static_cast<double>(graph->nodes());
        for (int t = 0; t < 5; ++t) {
            Eigen::VectorXd cf(n), cg(n);
            for (auto& v : cf) v = G(rng);
            for (auto& v : cg) v = G(rng);
            const Eigen::VectorXd fg = (Phi.leftCols(n) * cf).cwiseProduct(Phi.leftCols(n) * cg);
            const Eigen::VectorXd coef = Phi.transpose() * fg / M;
            const double total = fg.squaredNorm() / M;
            worst = std::max(worst, std::sqrt(std::max(0.0, total - coef.squaredNorm()) / total));
        }
        recs.push_back({{"check", "energy_outside_stored_spectrum"}, {"N", N0}, {"statistic", worst}, {"by_construction", true}});
        return assumption("II", "product closure", "pass", true, recs);
    }
    const std::size_t n = space.count_upto(N0);
    const std::size_t inside = space.count_upto(a * N0);
    const QuadratureMeasure q = reference_quadrature(space, 2.0 * a * N0);
    const std::size_t all = space.count_upto(2.0 * a * N0);
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd cf(static_cast<Eigen::Index>(n)), cg(static_cast<Eigen::Index>(n));
        for (auto& v : cf) v = G(rng);
        for (auto& v : cg) v = G(rng);
        const Eigen::VectorXd fg = space.synthesize(cf, q.nodes).cwiseProduct(space.synthesize(cg, q.nodes));
        const Eigen::VectorXd coef = space.project(fg.cwiseProduct(q.weights), q.nodes, all);
        const double outside = coef.tail(static_cast<Eigen::Index>(all - inside)).norm();
        worst = std::max(worst, outside / coef.norm());
    }
    const bool pass = worst <= c.thresholds.product;
    recs.push_back({{"check", "relative_energy_above_aN"}, {"N", N0}, {"a", a}, {"statistic", worst},
                    {"threshold", c.thresholds.product}, {"pass", pass}});
    return assumption("II", "product closure", pass ? "pass" : "fail", true, recs);
}

json audit_quadrature(const Space& space, const RunConfig& c, bool graph) {
    json recs = json::array();
    bool pass = true;
    const Thresholds& t = c.thresholds;
    std::vector<double> Ns = c.audit_N;
    if (graph) Ns = {space.lambda_cap()};
    std::vector<double> growth_N, growth_C;
    for (double N : Ns) {
        const QuadratureMeasure q = make_quadrature(space, N);
        const double res = certify_quadrature(space, q, N);
        const MzConstants mz = certify_mz(space, q, N, 2.0, 100, c.seed);
        const double mz_dev = std::max(std::abs(mz.lower - 1.0), std::abs(mz.upper - 1.0));
        const bool ok = res <= t.quadrature && mz_dev <= t.mz;
        pass = pass && ok;
        recs.push_back({{"check", "certificate"}, {"N", N}, {"residual", res}, {"mz_lower", mz.lower},
                        {"mz_upper", mz.upper}, {"nodes", q.support()}, {"pass", ok}});
        if (N >= 4.0) {
            growth_N.push_back(N);
            growth_C.push_back(static_cast<double>(q.support()) / std::pow(N, space.alpha()));
        }
    }
    if (!graph && !growth_C.empty()) {
        std::vector<double> sorted = growth_C;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        double dev = 0.0;
        for (double C : growth_C) dev = std::max(dev, std::abs(C / median - 1.0));
        const bool ok = dev <= t.growth_rel;
        pass = pass && ok;
        recs.push_back({{"check", "node_growth"}, {"median_constant", median}, {"statistic", dev},
                        {"threshold", t.growth_rel}, {"pass", ok}});
    }
    return assumption("III", "Marcinkiewicz-Zygmund quadrature", pass ? "pass" : "fail", true, recs);
}

json audit_quadrature_file(const Space& space, const RunConfig& c, const std::string& path) {
    const std::string text = read_text_file(path);
    json rec{{"check", "quadrature_file"}, {"file", path}};
    bool pass = false;
    try {
        const QuadratureMeasure q = quadrature_from_json(parse_json_text(text, path));
        if (q.space_id != space.id()) throw ParseError("quadrature file is for space " + q.space_id);
        const double res = certify_quadrature(space, q, q.certified_order);
        rec["N"] = q.certified_order;
        rec["residual"] = res;
        pass = res <= c.thresholds.quadrature;
    } catch (const std::exception& e) {
        rec["error"] = e.what();
    }
    rec["pass"] = pass;
    return assumption("III", "supplied quadrature", pass ? "pass" : "fail", true, json::array({rec}));
}

json audit_cutoff(const Space& space, const RunConfig& c) {
    std::mt19937_64 rng(c.seed + 2);
    const Point center = space.random_point(rng);
    const double R = std::min(space.diameter(), 0.999 * kPi);
    const CutoffFunction cut = make_cutoff(space, center, R / 4.0, R / 2.0);
    bool plateau = cut.profile(0.0) == 1.0 && cut.profile(R / 4.0) == 1.0;
    bool support = cut.profile(R / 2.0) == 0.0 && cut.profile(R) == 0.0;
    const double mid = std::abs(cut.profile(3.0 * R / 8.0) - std::exp(-22.0 / 9.0));
    bool monotone = true;
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = cut.profile(R * i / 1000.0);
        monotone = monotone && v <= prev && v >= 0.0 && v <= 1.0;
        prev = v;
    }
    const double N0 = *std::min_element(c.audit_N.begin(), c.audit_N.end());
    const QuadratureMeasure q = make_quadrature(space, N0);
    for (const Point& x : q.nodes.points) {
        const double rho = space.distance(center, x);
        if (rho <= cut.r_inner) plateau = plateau && cut(x) == 1.0;
        if (rho >= cut.r_outer) support = support && cut(x) == 0.0;
    }
    const bool pass = plateau && support && monotone && mid <= 1e-12;
    json recs = json::array({{{"check", "plateau"}, {"pass", plateau}},
                             {{"check", "support"}, {"pass", support}},
                             {{"check", "monotone"}, {"pass", monotone}},
                             {{"check", "midpoint"}, {"statistic", mid}, {"threshold", 1e-12}, {"pass", mid <= 1e-12}}});
    return assumption("IV", "smooth cut-off", pass ? "pass" : "fail", true, recs);
}

}  // namespace

int cmd_audit(const RunConfig& c, const std::string& quadrature_file, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const auto* graph = dynamic_cast<const GraphSpace*>(space.get());
    json verdicts = json::array();
    verdicts.push_back(audit_heat(*space, graph != nullptr, c.seed));
    verdicts.push_back(audit_product(*space, c, graph));
    verdicts.push_back(audit_quadrature(*space, c, graph != nullptr));
    if (!quadrature_file.empty()) verdicts.push_back(audit_quadrature_file(*space, c, quadrature_file));
    verdicts.push_back(audit_cutoff(*space, c));
    bool pass = true;
    for (const auto& v : verdicts) {
        const bool failed = v.at("hard").get<bool>() && v.at("verdict") == "fail";
        if (failed) err << "audit: assumption " << v.at("assumption").get<std::string>() << " failed\n";
        pass = pass && !failed;
    }
    emit(c, "audit", {{"space", space->id()}, {"assumptions", verdicts}, {"pass", pass}}, out);
    return pass ? kOk : kAuditFailure;
}

int cmd_frame_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const Filter filter = make_config_filter(c);
    const QuadratureFamily family(*space);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> G;
    json records = json::array();
    for (double N : c.N) {
        const int e = std::ilogb(N);
        if (N < 2.0 || std::ldexp(1.0, e) != N) {
            err << "frame-check: skipping N = " << N << " (not a power of two >= 2)\n";
            continue;
        }
        const int n = e - 1;
        const auto count = static_cast<Eigen::Index>(space->count_upto(N / 2.0));
        double synth_err = 0.0, energy_err = 0.0;
        for (int t = 0; t < 10; ++t) {
            SpectralInput f;
            f.coeffs.resize(count);
            for (auto& v : f.coeffs) v = G(rng);
            f.coeffs /= f.coeffs.norm();
            const FrameCoefficients fc = analyze(*space, filter, f, n, family);
            const DiffusionPolynomial rec = synthesize(*space, filter, fc, family);
            const DiffusionPolynomial sig = sigma(*space, filter, N, f);
            const Eigen::Index len = std::max(rec.coeffs.size(), sig.coeffs.size());
            Eigen::VectorXd a = Eigen::VectorXd::Zero(len), b = Eigen::VectorXd::Zero(len);
            a.head(rec.coeffs.size()) = rec.coeffs;
            b.head(sig.coeffs.size()) = sig.coeffs;
            synth_err = std::max(synth_err, (a - b).cwiseAbs().maxCoeff());
            energy_err = std::max(energy_err, std::abs(frame_energy(fc) - 1.0));
        }
        const double tol = c.thresholds.frame;
        records.push_back(check("synthesis_equals_sigma", synth_err, tol, synth_err <= tol));
        records.back()["N"] = N;
        records.push_back(check("tight_energy", energy_err, tol, energy_err <= tol));
        records.back()["N"] = N;
    }
    const bool pass = all_pass(records);
    emit(c, "frame_check", {{"space", space->id()}, {"records", records}, {"pass", pass}}, out);
    return pass ? kOk : kThresholdViolation;
}

int cmd_kernel_decay(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const Filter filter = make_config_filter(c);
    std::mt19937_64 rng(c.seed);
    std::vector<std::pair<Point, Point>> pairs;
    while (pairs.size() < 24) {
        const Point x = space->random_point(rng), y = space->random_point(rng);
        if (space->distance(x, y) > 0.0) pairs.push_back({x, y});
    }
    const double S = space->alpha() + 2.0;
    const LocalizationReport rep = localization_audit(*space, filter, 2, S, pairs, c.N);
    json buckets = json::array();
    for (const auto& b : rep.buckets) buckets.push_back(to_json(b));
    const bool pass = rep.spread <= c.thresholds.localization_spread;
    if (!pass) err << "kernel-decay: bucket spread " << rep.spread << " exceeds the threshold\n";
    emit(c, "kernel_decay",
         {{"space", space->id()},
          {"S", S},
          {"buckets", buckets},
          {"max_statistic", rep.max_statistic},
          {"spread", rep.spread},
          {"threshold", c.thresholds.localization_spread},
          {"pass", pass}},
         out);
    return pass ? kOk : kThresholdViolation;
}

int cmd_entropy(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const EllipsoidModel model(*space, c.s, c.r, c.entropy_N);
    err << "entropy: sampling " << c.entropy_trials << " points of the dimension-" << model.dim() << " body\n";
    const BodySamples body = sample_body(model, c.entropy_trials, c.seed);
    json points = json::array();
    std::vector<double> x, y;
    for (int j = 1; j <= 5; ++j) {
        const double eps = c.r * std::ldexp(1.0, -j);
        const CoveringEstimate e = covering_estimate(model, eps, body);
        points.push_back({{"eps_or_n", eps},
                          {"value", e.midpoint()},
                          {"lower_log2", e.lower_log2},
                          {"upper_log2", e.upper_log2},
                          {"packing", e.packing},
                          {"net", e.net}});
        x.push_back(std::log2(c.r / eps));
        y.push_back(std::log2(e.midpoint()));
    }
    const double slope = fit_slope(x, y);
    const double theory = space->alpha() / c.s;
    const double dev = std::abs(slope - theory) / theory;
    const bool pass = dev <= c.thresholds.entropy_rel;
    emit(c, "entropy",
         {{"space", space->id()},
          {"dim", model.dim()},
          {"samples", body.points.size()},
          {"volume_log2", body.volume_log2},
          {"points", points},
          {"fit_slope", slope},
          {"theory_slope", theory},
          {"checks", json::array({check("slope_relative_deviation", dev, c.thresholds.entropy_rel, pass)})},
          {"pass", pass}},
         out);
    return pass ? kOk : kThresholdViolation;
}

int cmd_widths(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto space = make_config_space(c);
    const Filter filter = make_config_filter(c);
    const WidthCurve curve = linear_width_upper(*space, filter, c.s, c.r, c.p, c.N);
    json bern = json::array();
    double lo = INFINITY, hi = 0.0;
    for (double N : c.N) {
        const double b = bernstein_width_lower(*space, filter, c.s, c.r, c.p, N, c.bernstein_trials, c.seed);
        bern.push_back({{"N", N}, {"value", b}});
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    const Thresholds& t = c.thresholds;
    const double spread_limit = (1.0 + t.bernstein_rel) / (1.0 - t.bernstein_rel);
    json checks = json::array();
    checks.push_back(check("linear_slope", curve.fit_slope, curve.theory_slope + t.width_slack,
                           curve.fit_slope <= curve.theory_slope + t.width_slack));
    checks.push_back(check("bernstein_spread", hi / lo, spread_limit, hi / lo <= spread_limit));
    const bool pass = all_pass(checks);
    if (!pass) err << "widths: threshold violated\n";
    emit(c, "widths",
         {{"space", space->id()},
          {"p", p_json(c.p)},
          {"linear", to_json(curve)},
          {"bernstein", {{"points", bern}, {"spread", hi / lo}}},
          {"checks", checks},
          {"pass", pass}},
         out);
    return pass ? kOk : kThresholdViolation;
}

int cmd_build_graph(const RunConfig& c, const std::string& path, std::ostream& out, std::ostream& err) {
    if (c.cloud.empty() || !(c.bandwidth > 0.0) || c.K == 0)
        throw ParseError("build-graph needs 'cloud', 'bandwidth' and 'K'");
    require_readable(c.cloud);
    RunConfig g = c;
    g.space = "graph";
    g.graph_file.clear();
    const auto space = make_config_space(g);
    const auto& gs = dynamic_cast<const GraphSpace&>(*space);
    try {
        save_graph_space(gs, path);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    if (gs.disconnected()) err << "build-graph: the graph is disconnected\n";
    emit(c, "build_graph",
         {{"nodes", gs.nodes()},
          {"K", gs.dimension()},
          {"alpha", gs.alpha()},
          {"alpha_estimated", gs.alpha_estimated()},
          {"disconnected", gs.disconnected()},
          {"lambda1", gs.dimension() > 1 ? gs.lambda(1) : 0.0},
          {"lambda_max", gs.lambda(gs.dimension() - 1)},
          {"diameter", gs.diameter()},
          {"out", path}},
         out);
    return kOk;
}

namespace {

Point parse_point(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(text), 0.0};
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ParseError("--center must be u or u,v");
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diffusion-space function codec and experiments", "diffcodec"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration");

    EncodeOptions enc;
    std::string center_text;
    auto* encode_cmd = app.add_subcommand("encode", "Encode spectral JSON or sample CSV into a DFC1 stream");
    encode_cmd->add_option("--input", enc.input, "spectral .json or samples .csv")->required();
    encode_cmd->add_option("--out", enc.out, "stream path")->required();
    encode_cmd->add_option("--N", enc.N, "band (defaults to the first config N)");
    encode_cmd->add_option("--mode", enc.mode, "global or local");
    encode_cmd->add_option("--center", center_text, "ball center u[,v]");
    encode_cmd->add_option("--radius", enc.radius, "ball radius");
    encode_cmd->add_option("--cutoff-inner", enc.cutoff_inner, "inner cut-off radius");

    DecodeOptions dec;
    auto* decode_cmd = app.add_subcommand("decode", "Decode a DFC1 stream");
    decode_cmd->add_option("stream", dec.stream, "stream path")->required();
    decode_cmd->add_option("--out", dec.out, "output path");
    decode_cmd->add_option("--format", dec.format, "spectral or grid");
    decode_cmd->add_option("--grid", dec.grid, "order of the output grid");

    std::string sweep_input;
    bool dry_run = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Rate and bit-budget sweep over the config N list");
    sweep_cmd->add_option("--input", sweep_input, "spectral .json (defaults to the synthetic family)");
    sweep_cmd->add_flag("--dry-run", dry_run, "print the plan only");

    std::string quad_file;
    auto* audit_cmd = app.add_subcommand("audit", "Assumption audit");
    audit_cmd->add_option("--quadrature", quad_file, "quadrature JSON to certify");

    auto* frame_cmd = app.add_subcommand("frame-check", "Frame reproduction and tightness");
    auto* kernel_cmd = app.add_subcommand("kernel-decay", "Kernel localization buckets");
    auto* entropy_cmd = app.add_subcommand("entropy", "Covering-number slope of the Sobolev body");
    auto* widths_cmd = app.add_subcommand("widths", "Linear and Bernstein width estimates");

    std::string graph_out;
    auto* graph_cmd = app.add_subcommand("build-graph", "Build a graph space from the config cloud");
    graph_cmd->add_option("--out", graph_out, "DMGS path")->required();
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kParseError;
    }

    try {
        const RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (encode_cmd->parsed()) {
            if (!center_text.empty()) enc.center = parse_point(center_text);
            return cmd_encode(cfg, enc, out, err);
        }
        if (decode_cmd->parsed()) return cmd_decode(cfg, dec, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, sweep_input, dry_run, out, err);
        if (audit_cmd->parsed()) return cmd_audit(cfg, quad_file, out, err);
        if (frame_cmd->parsed()) return cmd_frame_check(cfg, out, err);
        if (kernel_cmd->parsed()) return cmd_kernel_decay(cfg, out, err);
        if (entropy_cmd->parsed()) return cmd_entropy(cfg, out, err);
        if (widths_cmd->parsed()) return cmd_widths(cfg, out, err);
        if (graph_cmd->parsed()) return cmd_build_graph(cfg, graph_out, out, err);
        return kParseError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const CertificationError& e) {
        err << "certification failure: " << e.what() << '\n';
        return kCertificationFailure;
    } catch (const SpectrumExhausted& e) {
        err << "certification failure: " << e.what() << '\n';
        return kCertificationFailure;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const CorruptStream& e) {
        err << "corrupt stream: " << e.what() << '\n';
        return kCorruptStream;
    } catch (const UnknownNodeSet& e) {
        err << "unknown node set: " << e.what() << '\n';
        return kUnknownNodeSet;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
}

}  // namespace diffcodec::cli
