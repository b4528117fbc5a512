#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "diffcodec/spaces.hpp"
#include "json.hpp"

namespace diffcodec {

struct MzConstants {
    double lower = 0.0;
    double upper = 0.0;
};

// Atomic measure ν = Σ w_y δ_y. Weights are signed in general; every
// shipped construction is positive.
struct QuadratureMeasure {
    std::string space_id;
    NodeSet nodes;
    Eigen::VectorXd weights;
    double certified_order = 0.0;
    // Keys "1", "2", "inf".
    std::map<std::string, MzConstants> mz;

    std::size_t support() const { return nodes.size(); }
    Eigen::VectorXd abs_weights() const { return weights.cwiseAbs(); }
};

// Canonical rule of order N: integrates Π_{aN} (and products of two
// elements of Π_{aN}) exactly.
QuadratureMeasure make_quadrature(const Space& space, double N);

// Rule integrating products of two elements of Π_D; order recorded as D/a.
QuadratureMeasure reference_quadrature(const Space& space, double D);

// max_{λ_k ≤ aN} |Σ_y φ_k(y) w_y − δ_{k0}|.
double certify_quadrature(const Space& space, const QuadratureMeasure& q, double N);
inline constexpr double kQuadratureTolerance = 1e-10;

// min/max over random f ∈ Π_{aN} of ‖f‖_{|ν|,p} / ‖f‖_{μ,p}. p = 2 uses
// Parseval for the continuous norm; p ∈ {1, ∞} use a rule of 4× the order.
MzConstants certify_mz(const Space& space, const QuadratureMeasure& q, double N, double p, int trials,
                       std::uint64_t seed = 1);

// Canonical rules μ_N, built on first use and cached.
class QuadratureFamily {
public:
    explicit QuadratureFamily(const Space& space) : space_(&space) {}
    const Space& space() const { return *space_; }
    const QuadratureMeasure& at(double N) const;

private:
    const Space* space_;
    mutable std::mutex mu_;
    mutable std::map<double, std::unique_ptr<QuadratureMeasure>> cache_;
};

// ‖v‖ in L_p(|w|); p = ∞ is the max over nodes carrying nonzero weight.
double lp_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& weights, double p);

// FNV-1a 64 over the canonical node and weight serialization.
std::uint64_t node_set_id(const QuadratureMeasure& q);

nlohmann::json quadrature_to_json(const QuadratureMeasure& q, double residual);
// Throws ParseError on malformed documents.
QuadratureMeasure quadrature_from_json(const nlohmann::json& doc);

}  // namespace diffcodec
