#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "diffcodec/filters.hpp"
#include "diffcodec/quadrature.hpp"
#include "diffcodec/spaces.hpp"

namespace diffcodec {

// f̂_k = scale·λ_k^{−q} for every k past the stored coefficients.
struct PowerTail {
    double scale = 1.0;
    double q = 1.0;
};

// Exact coefficients f̂_0 … f̂_{n−1}. With a tail, the stored block must end
// on a full eigenvalue shell so that the tail is Σ_{λ_k > λ_{n−1}}.
struct SpectralInput {
    Eigen::VectorXd coeffs;
    std::optional<PowerTail> tail;
};

// Values at the nodes of the measure identified by node_set.
struct SampledInput {
    Eigen::VectorXd values;
    std::uint64_t node_set = 0;
};

struct CallbackInput {
    std::function<double(const Point&)> f;
};

using FunctionInput = std::variant<SpectralInput, SampledInput, CallbackInput>;

FunctionInput basis_input(const Space& space, std::size_t k, double coefficient = 1.0);
SampledInput sample(const CallbackInput& f, const QuadratureMeasure& q);

struct DiffusionPolynomial {
    const Space* space = nullptr;
    Eigen::VectorXd coeffs;
    double band = 0.0;

    Eigen::VectorXd evaluate(const NodeSet& nodes) const;
    double l2_norm() const { return coeffs.norm(); }
};

// σ_N(f, μ_N): coefficients H(λ_k/N)·⟨f, φ_k⟩_{μ_N}. Spectral input uses the
// exact coefficients (μ_N = μ) and ignores mu_N.
DiffusionPolynomial sigma(const Space& space, const Filter& filter, double N, const FunctionInput& f,
                          const QuadratureMeasure* mu_N = nullptr);

// τ_N(f, μ_N) = σ_N(f, μ_N) − σ_{N/2}(f, μ_N); N ≥ 2.
DiffusionPolynomial tau(const Space& space, const Filter& filter, double N, const FunctionInput& f,
                        const QuadratureMeasure* mu_N = nullptr);

// Where L_p norms for p ≠ 2 are evaluated: the reference rule for products
// of two elements of Π_D with D = factor·(band of the function).
inline constexpr double kDenseFactor = 4.0;

// ‖g‖_p of a coefficient vector; p = 2 is Parseval.
double poly_lp_norm(const Space& space, const Eigen::VectorXd& coeffs, double p);

// ‖f‖_p. Spectral p = 2 includes the analytic tail; other p use the stored
// coefficients only.
double input_lp_norm(const Space& space, const SpectralInput& f, double p);

// ‖f − g‖_p for a coefficient vector g. p = 2 includes the analytic tail of
// f; other p use the stored coefficients and any tail terms inside g's band.
double difference_lp_norm(const Space& space, const SpectralInput& f, const Eigen::VectorXd& g, double p);

struct ApproxError {
    double value = 0.0;
    // True when the value is a σ-based stand-in for E(f, Π_N, L_p).
    bool surrogate = false;
};

// E(f, Π_N, L_p): exact tail at p = 2, ‖f − σ_{2N}(f, μ)‖_p otherwise.
ApproxError best_approx_error(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p);

// ‖f − σ_N(f)‖_p and ‖τ_N(f)‖_p for spectral input.
double sigma_error(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p);
double tau_norm(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p);

// ‖f − σ_N(f, μ_N)‖_p on the dense rule of order eval_band, for callback
// input sampled on family.at(N) (the p = ∞ scattered-data path).
double sigma_error(const Space& space, const Filter& filter, const CallbackInput& f, double N, double p,
                   const QuadratureFamily& family, double eval_band);

struct SobolevNorm {
    double value = 0.0;
    double lp_part = 0.0;
    double sup_part = 0.0;
    double argmax_N = 0.0;
    // The sup runs over N = 1, 2, 4, … only.
    bool dyadic = true;
    bool surrogate = false;
};

// ‖f‖_p + sup_{dyadic N ≤ N_max} N^s E(f, Π_N, L_p).
SobolevNorm sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                         double N_max);

struct Ball {
    Point center;
    double radius = 0.0;
};

// ‖f‖_{L_p(𝕏)} + sup_{dyadic 2 ≤ N ≤ N_max} N^s ‖τ_N(f)‖_{L_p(B)}. L_p(B)
// uses the dense rule restricted to B with unchanged weights.
SobolevNorm local_sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                               const Ball& ball, double N_max);
// The same with B = 𝕏.
SobolevNorm tau_sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                             double N_max);

struct SmoothnessEstimate {
    // Negative least-squares slope; +∞ when the errors underflow.
    double s = 0.0;
    bool band_limited = false;
    std::vector<double> errors;
};

SmoothnessEstimate estimate_smoothness(const Space& space, const Filter& filter, const SpectralInput& f, double p,
                                       const std::vector<double>& N_grid);
SmoothnessEstimate estimate_smoothness_tau(const Space& space, const Filter& filter, const SpectralInput& f, double p,
                                           const std::vector<double>& N_grid);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Synthetic family f̂_0 = 0, f̂_k = λ_k^{−q} (k ≥ 1), stored up to band with
// the rest as an analytic tail.
SpectralInput power_family(const Space& space, double q, double band);
// q = s + α/2 + 0.01: in W^s(L_2) with E(f, Π_N, L_2) ≍ N^{−s−0.01}.
inline double l2_family_exponent(const Space& space, double s) { return s + space.alpha() / 2.0 + 0.01; }
// q = s + α + 0.01: absolutely summable at rate N^{−s}, so W^s(L_∞).
inline double linf_family_exponent(const Space& space, double s) { return s + space.alpha() + 0.01; }

}  // namespace diffcodec
