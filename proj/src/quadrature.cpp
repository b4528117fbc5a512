#include "diffcodec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <random>

namespace diffcodec {

namespace {

constexpr double kMaxNodes = 5e7;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    fnv_bytes(h, b, 8);
}

void fnv_f64(std::uint64_t& h, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    fnv_u64(h, bits);
}

}  // namespace

QuadratureMeasure reference_quadrature(const Space& space, double D) {
    QuadratureRule rule = space.quadrature_rule(D);
    QuadratureMeasure q;
    q.space_id = space.id();
    q.nodes = std::move(rule.nodes);
    q.weights = std::move(rule.weights);
    q.certified_order = D / space.product_constant();
    return q;
}

QuadratureMeasure make_quadrature(const Space& space, double N) {
    if (!(N >= 0.0) || !std::isfinite(N)) throw DomainError("quadrature order must be finite and >= 0");
    const double D = space.product_constant() * N;
    if (std::pow(2.0 * D + 1.0, space.alpha()) > kMaxNodes)
        throw CertificationError("quadrature of order " + std::to_string(N) + " is unreachable at desk scale");
    QuadratureMeasure q = reference_quadrature(space, D);
    q.certified_order = N;
    return q;
}

const QuadratureMeasure& QuadratureFamily::at(double N) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = cache_[N];
    if (!slot) slot = std::make_unique<QuadratureMeasure>(make_quadrature(*space_, N));
    return *slot;
}

double certify_quadrature(const Space& space, const QuadratureMeasure& q, double N) {
    const std::size_t count = space.count_upto(space.product_constant() * N);
    Eigen::VectorXd moments = space.project(q.weights, q.nodes, count);
    moments[0] -= 1.0;
    return moments.cwiseAbs().maxCoeff();
}

double lp_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& weights, double p) {
    if (values.size() != weights.size()) throw DomainError("lp_norm: size mismatch");
    if (std::isinf(p)) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < values.size(); ++i)
            if (weights[i] != 0.0) m = std::max(m, std::abs(values[i]));
        return m;
    }
    if (!(p >= 1.0)) throw DomainError("lp_norm requires p >= 1");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) acc += std::abs(weights[i]) * std::pow(std::abs(values[i]), p);
    return std::pow(acc, 1.0 / p);
}

MzConstants certify_mz(const Space& space, const QuadratureMeasure& q, double N, double p, int trials,
                       std::uint64_t seed) {
    if (trials < 100) throw DomainError("certify_mz requires at least 100 trials");
    if (!(p == 1.0 || p == 2.0 || std::isinf(p))) throw DomainError("certify_mz supports p in {1, 2, inf}");
    const double band = space.product_constant() * N;
    const std::size_t count = space.count_upto(band);
    std::optional<QuadratureMeasure> fine;
    if (p != 2.0) fine = reference_quadrature(space, 4.0 * band);
    const Eigen::VectorXd absw = q.abs_weights();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G(0.0, 1.0);
    MzConstants out{std::numeric_limits<double>::infinity(), 0.0};
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(count));
        for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = G(rng);
        if (c.norm() == 0.0) {
            --t;
            continue;
        }
        const double discrete = lp_norm(space.synthesize(c, q.nodes), absw, p);
        double continuous = p == 2.0 ? c.norm() : lp_norm(space.synthesize(c, fine->nodes), fine->weights, p);
        // The sup over the fine rule only samples the true sup; the rule's
        // own nodes are samples too.
        if (std::isinf(p)) continuous = std::max(continuous, discrete);
        const double ratio = discrete / continuous;
        out.lower = std::min(out.lower, ratio);
        out.upper = std::max(out.upper, ratio);
    }
    return out;
}

std::uint64_t node_set_id(const QuadratureMeasure& q) {
    std::uint64_t h = 1469598103934665603ULL;
    fnv_bytes(h, q.space_id.data(), q.space_id.size());
    fnv_u64(h, static_cast<std::uint64_t>(q.nodes.size()));
    for (const Point& x : q.nodes.points) {
        fnv_f64(h, x.u);
        fnv_f64(h, x.v);
    }
    for (Eigen::Index i = 0; i < q.weights.size(); ++i) fnv_f64(h, q.weights[i]);
    return h;
}

nlohmann::json quadrature_to_json(const QuadratureMeasure& q, double residual) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Point& x : q.nodes.points) nodes.push_back({x.u, x.v});
    std::vector<double> w(q.weights.data(), q.weights.data() + q.weights.size());
    nlohmann::json mz = nlohmann::json::object();
    for (const auto& [k, v] : q.mz) mz[k] = {{"lower", v.lower}, {"upper", v.upper}};
    nlohmann::json doc = {{"space_id", q.space_id},
                          {"N", q.certified_order},
                          {"nodes", nodes},
                          {"weights", w},
                          {"certificates", {{"residual", residual}, {"mz", mz}}}};
    if (q.nodes.grid) doc["grid"] = {{"u", q.nodes.grid->u}, {"v", q.nodes.grid->v}};
    return doc;
}

QuadratureMeasure quadrature_from_json(const nlohmann::json& doc) {
    try {
        QuadratureMeasure q;
        q.space_id = doc.at("space_id").get<std::string>();
        q.certified_order = doc.at("N").get<double>();
        const auto& nodes = doc.at("nodes");
        const auto& weights = doc.at("weights");
        if (!nodes.is_array() || !weights.is_array() || nodes.size() != weights.size() || nodes.empty())
            throw ParseError("quadrature: nodes and weights must be nonempty arrays of equal length");
        if (doc.contains("grid")) {
            TensorGrid g{doc["grid"].at("u").get<std::vector<double>>(), doc["grid"].at("v").get<std::vector<double>>()};
            if (g.u.size() * g.v.size() != nodes.size()) throw ParseError("quadrature: grid does not match node count");
            q.nodes = NodeSet::from_grid(std::move(g));
        }
        std::vector<Point> pts;
        for (const auto& n : nodes) {
            if (!n.is_array() || n.size() != 2) throw ParseError("quadrature: node must be [u, v]");
            pts.push_back({n[0].get<double>(), n[1].get<double>()});
        }
        if (q.nodes.grid) {
            for (std::size_t i = 0; i < pts.size(); ++i)
                if (pts[i].u != q.nodes.points[i].u || pts[i].v != q.nodes.points[i].v)
                    throw ParseError("quadrature: grid does not match nodes");
        } else {
            q.nodes = NodeSet::from_points(std::move(pts));
        }
        q.weights.resize(static_cast<Eigen::Index>(weights.size()));
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double w = weights[i].get<double>();
            if (!std::isfinite(w)) throw ParseError("quadrature: non-finite weight");
            q.weights[static_cast<Eigen::Index>(i)] = w;
        }
        return q;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("quadrature: ") + e.what());
    }
}

}  // namespace diffcodec
