#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diffcodec/approx.hpp"
#include "diffcodec/bitstream.hpp"
#include "json.hpp"

namespace diffcodec {

// I = ⌊N^S·v⌋ per value. Requires S > max(1, s) and finite values whose
// scaled magnitude fits in 62 bits.
std::vector<std::int64_t> quantize(const Eigen::VectorXd& values, double N, double S, double s = 0.0);

// max_y |v_y·N^S − I_y|, the residual in units of N^{−S}. The quantizer
// guarantees a value in [0, 1].
double quantizer_residual(const Eigen::VectorXd& values, const std::vector<std::int64_t>& ints, double N, double S);

enum class CodecMode : std::uint8_t { global = 0, local = 1 };

struct EncodedHeader {
    std::string space_id;
    std::uint32_t N = 0;
    double S = 0.0;
    double quantizer_scale = 0.0;
    std::uint64_t node_set = 0;
    std::uint32_t count = 0;
    CodecMode mode = CodecMode::global;
    std::optional<Ball> ball;
};

struct EncodedFunction {
    EncodedHeader header;
    // I_N(f, μ_N, y) for y in supp(ν_N), restricted to the ball in local mode,
    // in node order.
    std::vector<std::int64_t> payload;
    // Varint bytes of the payload, times 8.
    std::uint64_t payload_bits = 0;
    // Not serialized: the quantizer residual of this run, units of N^{−S}.
    double residual = 0.0;
};

// count·⌈log₂(2·max|I| + 1)⌉.
std::uint64_t theoretical_bits(const std::vector<std::int64_t>& payload);

// Indices of the nodes of q inside the closed ball.
std::vector<std::size_t> nodes_in_ball(const Space& space, const QuadratureMeasure& q, const Ball& ball);

EncodedFunction encode(const Space& space, const Filter& filter, const FunctionInput& f, double N, double S,
                       const QuadratureMeasure& mu_N, const QuadratureMeasure& nu_N,
                       CodecMode mode = CodecMode::global, const std::optional<Ball>& ball = std::nullopt);

// Measures a stream's node_set may refer to.
class NodeSetRegistry {
public:
    void add(const QuadratureMeasure& q);
    // Registered measures first, then the canonical rule of order N for the
    // stream's space. Throws UnknownNodeSet.
    const QuadratureMeasure& resolve(const Space& space, const EncodedHeader& header) const;

private:
    std::map<std::uint64_t, std::shared_ptr<const QuadratureMeasure>> known_;
    mutable std::map<std::uint64_t, std::shared_ptr<const QuadratureMeasure>> canonical_;
};

// σ°_N: c_k = N^{−S} H(λ_k/2N) Σ_y I(y) φ_k(y) w_y over the stored nodes,
// band 2N.
DiffusionPolynomial decode(const EncodedFunction& enc, const Space& space, const Filter& filter,
                           const NodeSetRegistry& registry);

// DFC1 stream: magic, little-endian header, u32 payload length, varint
// payload, CRC32 of the payload.
std::vector<std::uint8_t> serialize(const EncodedFunction& enc);
// Throws CorruptStream on bad magic, truncation or CRC mismatch.
EncodedFunction deserialize(const std::vector<std::uint8_t>& bytes);

void write_stream(const std::string& path, const EncodedFunction& enc);
EncodedFunction read_stream(const std::string& path);

// Smooth cut-off: 1 on ρ ≤ r′, 0 on ρ ≥ r, H(1/2 + (ρ − r′)/(2(r − r′)))
// in between.
struct CutoffFunction {
    const Space* space = nullptr;
    Point center;
    double r_inner = 0.0;
    double r_outer = 0.0;

    double profile(double rho) const;
    double operator()(const Point& x) const { return profile(space->distance(center, x)); }
    // ≡ 1 on the whole space.
    bool trivial() const { return r_inner >= space->diameter(); }
};

// Requires 0 < r′ < r < π, except that r may exceed π when r′ covers the
// whole space.
CutoffFunction make_cutoff(const Space& space, const Point& center, double r_inner, double r_outer);

// Encodes f·φ, sampled on μ_N, with the payload restricted to the ball of
// radius r around the cut-off's center.
EncodedFunction encode_local_cutoff(const Space& space, const Filter& filter, const FunctionInput& f,
                                    const CutoffFunction& cutoff, double N, double S, const QuadratureMeasure& mu_N,
                                    const QuadratureMeasure& nu_N);

// sup over the dense rule's nodes inside the ball of |Σ_k c_k φ_k|.
double ball_sup_norm(const Space& space, const Eigen::VectorXd& coeffs, const Ball& ball);

struct RateRecord {
    double N = 0.0;
    double S = 0.0;
    double error_p2 = 0.0;
    double error_inf = 0.0;
    std::uint64_t payload_bits = 0;
    std::uint64_t theoretical_bits = 0;
    double residual = 0.0;
};

nlohmann::json to_json(const RateRecord& r);

// Global encode and decode of a spectral f on the canonical rules at each N.
std::vector<RateRecord> rate_sweep(const Space& space, const Filter& filter, const SpectralInput& f,
                                   const std::vector<double>& Ns, double S, const QuadratureFamily& family,
                                   bool with_sup = true);

}  // namespace diffcodec
