#include "diffcodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "diffcodec/parallel.hpp"

namespace diffcodec {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'F', 'C', '1'};
constexpr std::uint8_t kVersion = 1;

std::uint32_t checked_order(double N) {
    if (!(N >= 1.0) || N != std::floor(N) || N > 4294967295.0)
        throw DomainError("codec order N must be a positive 32-bit integer");
    return static_cast<std::uint32_t>(N);
}

void require_space(const Space& space, const QuadratureMeasure& q, const char* what) {
    if (q.space_id != space.id()) throw DomainError(std::string(what) + " belongs to space " + q.space_id);
}

}  // namespace

std::vector<std::int64_t> quantize(const Eigen::VectorXd& values, double N, double S, double s) {
    if (!(S > std::max(1.0, s))) throw DomainError("quantizer exponent S must exceed max(1, s)");
    if (!(N >= 1.0)) throw DomainError("quantizer needs N >= 1");
    const double scale = std::pow(N, S);
    constexpr double kLimit = 4611686018427387904.0;  // 2^62
    std::vector<std::int64_t> out(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DomainError("cannot quantize a non-finite value");
        const double x = std::floor(values[i] * scale);
        if (std::abs(x) > kLimit) throw DomainError("quantized value exceeds 62 bits");
        out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(x);
    }
    return out;
}

double quantizer_residual(const Eigen::VectorXd& values, const std::vector<std::int64_t>& ints, double N, double S) {
    if (static_cast<std::size_t>(values.size()) != ints.size()) throw DomainError("value and integer counts differ");
    const double scale = std::pow(N, S);
    double r = 0.0;
    for (std::size_t i = 0; i < ints.size(); ++i)
        r = std::max(r, std::abs(values[static_cast<Eigen::Index>(i)] * scale - static_cast<double>(ints[i])));
    return r;
}

std::uint64_t theoretical_bits(const std::vector<std::int64_t>& payload) {
    std::uint64_t m = 0;
    for (std::int64_t v : payload) m = std::max(m, static_cast<std::uint64_t>(v < 0 ? -(v + 1) + 1 : v));
    // Bits for the 2m + 1 symbols −m … m.
    const double width = std::ceil(std::log2(2.0 * static_cast<double>(m) + 1.0));
    return static_cast<std::uint64_t>(payload.size()) * static_cast<std::uint64_t>(width);
}

std::vector<std::size_t> nodes_in_ball(const Space& space, const QuadratureMeasure& q, const Ball& ball) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < q.support(); ++i)
        if (space.distance(ball.center, q.nodes.points[i]) <= ball.radius) idx.push_back(i);
    return idx;
}

EncodedFunction encode(const Space& space, const Filter& filter, const FunctionInput& f, double N, double S,
                       const QuadratureMeasure& mu_N, const QuadratureMeasure& nu_N, CodecMode mode,
                       const std::optional<Ball>& ball) {
    EncodedFunction enc;
    enc.header.N = checked_order(N);
    require_space(space, nu_N, "nu_N");
    if (!std::holds_alternative<SpectralInput>(f)) require_space(space, mu_N, "mu_N");
    if (nu_N.certified_order < N) throw CertificationError("nu_N is not certified at order N");
    if (mode == CodecMode::local && !ball) throw DomainError("local mode needs a ball");

    const DiffusionPolynomial poly = sigma(space, filter, N, f, &mu_N);
    Eigen::VectorXd values = poly.evaluate(nu_N.nodes);
    if (mode == CodecMode::local) {
        const std::vector<std::size_t> idx = nodes_in_ball(space, nu_N, *ball);
        if (idx.empty()) throw DomainError("the ball contains no node of nu_N");
        Eigen::VectorXd inside(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            inside[static_cast<Eigen::Index>(i)] = values[static_cast<Eigen::Index>(idx[i])];
        values = std::move(inside);
        enc.header.ball = ball;
    }

    enc.header.space_id = space.id();
    enc.header.S = S;
    enc.header.quantizer_scale = std::pow(N, S);
    enc.header.node_set = node_set_id(nu_N);
    enc.header.count = static_cast<std::uint32_t>(values.size());
    enc.header.mode = mode;
    enc.payload = quantize(values, N, S);
    enc.residual = quantizer_residual(values, enc.payload, N, S);
    for (std::int64_t v : enc.payload) enc.payload_bits += 8 * varint_size(zigzag_encode(v));
    return enc;
}

void NodeSetRegistry::add(const QuadratureMeasure& q) {
    known_[node_set_id(q)] = std::make_shared<const QuadratureMeasure>(q);
}

const QuadratureMeasure& NodeSetRegistry::resolve(const Space& space, const EncodedHeader& header) const {
    if (auto it = known_.find(header.node_set); it != known_.end()) return *it->second;
    if (auto it = canonical_.find(header.node_set); it != canonical_.end()) return *it->second;
    if (header.space_id == space.id() && header.N >= 1) {
        auto q = std::make_shared<const QuadratureMeasure>(make_quadrature(space, header.N));
        if (node_set_id(*q) == header.node_set) return *(canonical_[header.node_set] = q);
    }
    throw UnknownNodeSet("node set " + std::to_string(header.node_set) + " is not registered");
}

DiffusionPolynomial decode(const EncodedFunction& enc, const Space& space, const Filter& filter,
                           const NodeSetRegistry& registry) {
    const EncodedHeader& h = enc.header;
    if (h.space_id != space.id()) throw DomainError("stream was encoded on space " + h.space_id);
    const QuadratureMeasure& nu = registry.resolve(space, h);
    if (enc.payload.size() != h.count) throw CorruptStream("payload count does not match the header");

    // I(y)·w_y on the full node set, zero off the ball in local mode.
    Eigen::VectorXd iw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nu.support()));
    if (h.mode == CodecMode::local) {
        if (!h.ball) throw CorruptStream("local stream without a ball");
        const std::vector<std::size_t> idx = nodes_in_ball(space, nu, *h.ball);
        if (idx.size() != h.count) throw CorruptStream("payload count does not match the ball");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(idx[i]);
            iw[j] = static_cast<double>(enc.payload[i]) * nu.weights[j];
        }
    } else {
        if (h.count != nu.support()) throw CorruptStream("payload count does not match the node set");
        for (std::size_t i = 0; i < h.count; ++i)
            iw[static_cast<Eigen::Index>(i)] = static_cast<double>(enc.payload[i]) * nu.weights[static_cast<Eigen::Index>(i)];
    }

    const double N = h.N;
    const std::size_t count = space.count_below(2.0 * N);
    DiffusionPolynomial out{&space, space.project(iw, nu.nodes, count), 2.0 * N};
    const double inv = std::pow(N, -h.S);
    for (std::size_t k = 0; k < count; ++k) out.coeffs[static_cast<Eigen::Index>(k)] *= inv * filter.H(space.lambda(k) / (2.0 * N));
    return out;
}

std::vector<std::uint8_t> serialize(const EncodedFunction& enc) {
    const EncodedHeader& h = enc.header;
    if (enc.payload.size() != h.count) throw DomainError("payload count does not match the header");
    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u8(kVersion);
    w.short_string(h.space_id);
    w.u32(h.N);
    w.f64(h.S);
    w.f64(h.quantizer_scale);
    w.u64(h.node_set);
    w.u32(h.count);
    w.u8(static_cast<std::uint8_t>(h.mode));
    if (h.mode == CodecMode::local) {
        if (!h.ball) throw DomainError("local mode needs a ball");
        w.f64(h.ball->center.u);
        w.f64(h.ball->center.v);
        w.f64(h.ball->radius);
    }
    ByteWriter payload;
    for (std::int64_t v : enc.payload) payload.svarint(v);
    const std::vector<std::uint8_t>& p = payload.buffer();
    if (p.size() > 0xFFFFFFFFu) throw DomainError("payload exceeds 4 GiB");
    w.u32(static_cast<std::uint32_t>(p.size()));
    w.bytes(p.data(), p.size());
    w.u32(crc32_of(p.data(), p.size()));
    return w.take();
}

EncodedFunction deserialize(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    const std::uint8_t* magic = r.take(4);
    if (!std::equal(magic, magic + 4, kMagic)) throw CorruptStream("bad magic");
    if (r.u8() != kVersion) throw CorruptStream("unsupported stream version");
    EncodedFunction enc;
    EncodedHeader& h = enc.header;
    h.space_id = r.short_string();
    h.N = r.u32();
    h.S = r.f64();
    h.quantizer_scale = r.f64();
    h.node_set = r.u64();
    h.count = r.u32();
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw CorruptStream("unknown codec mode");
    h.mode = static_cast<CodecMode>(mode);
    if (h.mode == CodecMode::local) {
        Ball b;
        b.center.u = r.f64();
        b.center.v = r.f64();
        b.radius = r.f64();
        h.ball = b;
    }
    const std::uint32_t len = r.u32();
    const std::uint8_t* p = r.take(len);
    if (r.u32() != crc32_of(p, len)) throw CorruptStream("payload CRC mismatch");
    if (r.remaining() != 0) throw CorruptStream("trailing bytes after the payload");

    ByteReader pr(p, len);
    enc.payload.reserve(h.count);
    for (std::uint32_t i = 0; i < h.count; ++i) enc.payload.push_back(pr.svarint());
    if (pr.remaining() != 0) throw CorruptStream("payload longer than its count");
    enc.payload_bits = 8ULL * len;
    return enc;
}

void write_stream(const std::string& path, const EncodedFunction& enc) {
    const std::vector<std::uint8_t> bytes = serialize(enc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

EncodedFunction read_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

double CutoffFunction::profile(double rho) const {
    if (rho <= r_inner) return 1.0;
    if (rho >= r_outer) return 0.0;
    return standard_H(0.5 + (rho - r_inner) / (2.0 * (r_outer - r_inner)));
}

CutoffFunction make_cutoff(const Space& space, const Point& center, double r_inner, double r_outer) {
    if (!space.valid(center)) throw DomainError("cut-off center is not a point of " + space.id());
    if (!(r_inner > 0.0) || !(r_outer > r_inner) || !std::isfinite(r_outer))
        throw DomainError("cut-off radii need 0 < r_inner < r_outer");
    if (!(r_outer < kPi) && r_inner < space.diameter())
        throw DomainError("cut-off outer radius must stay below pi");
    return CutoffFunction{&space, center, r_inner, r_outer};
}

EncodedFunction encode_local_cutoff(const Space& space, const Filter& filter, const FunctionInput& f,
                                    const CutoffFunction& cutoff, double N, double S, const QuadratureMeasure& mu_N,
                                    const QuadratureMeasure& nu_N) {
    const Ball ball{cutoff.center, cutoff.r_outer};
    if (cutoff.trivial()) return encode(space, filter, f, N, S, mu_N, nu_N, CodecMode::local, ball);

    require_space(space, mu_N, "mu_N");
    SampledInput s;
    s.node_set = node_set_id(mu_N);
    if (const auto* spec = std::get_if<SpectralInput>(&f)) {
        s.values = space.synthesize(spec->coeffs, mu_N.nodes);
    } else if (const auto* cb = std::get_if<CallbackInput>(&f)) {
        s.values = sample(*cb, mu_N).values;
    } else {
        const auto& smp = std::get<SampledInput>(f);
        if (smp.node_set != s.node_set) throw DomainError("samples are not on mu_N");
        s.values = smp.values;
    }
    for (std::size_t i = 0; i < mu_N.support(); ++i) s.values[static_cast<Eigen::Index>(i)] *= cutoff(mu_N.nodes.points[i]);
    return encode(space, filter, s, N, S, mu_N, nu_N, CodecMode::local, ball);
}

double ball_sup_norm(const Space& space, const Eigen::VectorXd& coeffs, const Ball& ball) {
    if (coeffs.size() == 0) return 0.0;
    const double band = std::max(1.0, space.lambda(static_cast<std::size_t>(coeffs.size() - 1)));
    const QuadratureMeasure rule = reference_quadrature(space, kDenseFactor * band);
    const Eigen::VectorXd v = space.synthesize(coeffs, rule.nodes);
    double m = 0.0;
    for (std::size_t i = 0; i < rule.support(); ++i)
        if (space.distance(ball.center, rule.nodes.points[i]) <= ball.radius) m = std::max(m, std::abs(v[static_cast<Eigen::Index>(i)]));
    return m;
}

nlohmann::json to_json(const RateRecord& r) {
    return {{"N", r.N},
            {"S", r.S},
            {"error_p2", r.error_p2},
            {"error_inf", r.error_inf},
            {"payload_bits", r.payload_bits},
            {"theoretical_bits", r.theoretical_bits},
            {"residual", r.residual}};
}

std::vector<RateRecord> rate_sweep(const Space& space, const Filter& filter, const SpectralInput& f,
                                   const std::vector<double>& Ns, double S, const QuadratureFamily& family,
                                   bool with_sup) {
    std::vector<RateRecord> out(Ns.size());
    for (double N : Ns) family.at(N);
    parallel_for(0, Ns.size(), [&](std::size_t i) {
        const double N = Ns[i];
        const QuadratureMeasure& q = family.at(N);
        const EncodedFunction enc = encode(space, filter, f, N, S, q, q);
        NodeSetRegistry reg;
        reg.add(q);
        const DiffusionPolynomial rec = decode(enc, space, filter, reg);
        RateRecord& r = out[i];
        r.N = N;
        r.S = S;
        r.error_p2 = difference_lp_norm(space, f, rec.coeffs, 2.0);
        r.error_inf = with_sup ? difference_lp_norm(space, f, rec.coeffs, INFINITY) : 0.0;
        r.payload_bits = enc.payload_bits;
        r.theoretical_bits = theoretical_bits(enc.payload);
        r.residual = enc.residual;
    });
    return out;
}

}  // namespace diffcodec
