#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "diffcodec/approx.hpp"
#include "json.hpp"

namespace diffcodec {

// The p = 2 Sobolev ball of radius r restricted to Π_N, in coefficient
// space: {c : ‖c‖₂ + sup_{dyadic M ≤ N} M^s ‖(c_k)_{λ_k > M}‖₂ ≤ r}.
class EllipsoidModel {
public:
    EllipsoidModel(const Space& space, double s, double r, double N);

    std::size_t dim() const { return lambdas_.size(); }
    double s() const { return s_; }
    double r() const { return r_; }
    double N() const { return N_; }

    // The defining norm of c; c is in the body when norm(c) ≤ r.
    double norm(const Eigen::VectorXd& c) const;
    bool contains(const Eigen::VectorXd& c) const { return norm(c) <= r_; }
    // norm(c) ≤ L‖c‖₂, so the body contains the ball of radius r/L.
    double lipschitz() const;

private:
    double s_, r_, N_;
    std::vector<double> lambdas_;
    // Dyadic M ≤ N with a nonempty tail, and the first index past M.
    std::vector<std::pair<double, std::size_t>> cuts_;
};

struct CoveringEstimate {
    double lower_log2 = 0.0;
    double upper_log2 = 0.0;
    std::size_t packing = 0;
    std::size_t net = 0;
    // Monte Carlo log₂ vol(K).
    double volume_log2 = 0.0;
    std::size_t samples = 0;
    std::uint64_t proposals = 0;

    double midpoint() const { return 0.5 * (lower_log2 + upper_log2); }
};

// Uniform samples of the body by rejection from the r-ball.
struct BodySamples {
    std::vector<Eigen::VectorXd> points;
    std::uint64_t proposals = 0;
    double volume_log2 = 0.0;
};

BodySamples sample_body(const EllipsoidModel& model, std::size_t trials, std::uint64_t seed = 1);

// Bounds on log₂ N_ε(K). Lower: the larger of a greedy 2ε-packing of
// uniform samples of K and vol K / vol B_ε. Upper: the smaller of a greedy
// ε-net of the samples (used only when it is under an eighth of them) and
// vol((1 + εL/2r)K) / vol B_{ε/2}. Needs dim ≤ 25 and 0 < ε ≤ r.
CoveringEstimate covering_estimate(const EllipsoidModel& model, double eps, std::size_t trials, std::uint64_t seed = 1);
// The same on samples shared across an ε sweep.
CoveringEstimate covering_estimate(const EllipsoidModel& model, double eps, const BodySamples& body);

// log₂ of the volume of the n-ball of radius ρ.
double ball_volume_log2(std::size_t n, double rho);

struct WidthCurve {
    std::vector<double> N;
    std::vector<double> n;
    std::vector<double> value;
    double fit_slope = 0.0;
    double theory_slope = 0.0;
    // max value / (r n^{−s/α}) over the curve.
    double constant = 0.0;
};

nlohmann::json to_json(const WidthCurve& c);

// sup over the test family (each member scaled to Sobolev norm r) of
// ‖f − σ_N f‖_p, against n = dim Π_N. The default family is the
// smoothness-s power family plus, per N, the first basis function past N.
WidthCurve linear_width_upper(const Space& space, const Filter& filter, double s, double r, double p,
                              const std::vector<double>& N_grid, const std::vector<SpectralInput>* family = nullptr);

// ‖N^{−s} f‖_{W^s(L_p)} for one f; the sup runs over dyadic M ≤ 2N.
double bernstein_ratio(const Space& space, const Filter& filter, double s, double p, double N, const SpectralInput& f);

// max over random f ∈ Π_{2N} with ‖f‖_p = 1 of bernstein_ratio. The radius
// r scales numerator and denominator alike and cancels.
double bernstein_width_lower(const Space& space, const Filter& filter, double s, double r, double p, double N,
                             int trials, std::uint64_t seed = 1);

}  // namespace diffcodec
