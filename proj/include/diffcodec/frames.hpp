#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "diffcodec/approx.hpp"
#include "json.hpp"

namespace diffcodec {

// Scale j has band N_j = 2^{j+1}. The scale-0 symbol is h(λ/2) and the
// scale-j symbol is g(2^{−j}λ); their squares telescope to H(λ/2^{n+1}).
double frame_symbol(const Filter& filter, int j, double lambda);
inline double scale_band(int j) { return static_cast<double>(1ULL << (j + 1)); }

struct ScaleCoefficients {
    int j = 0;
    std::uint64_t node_set = 0;
    // ⟨f, Ψ_{j,y_i}⟩ at the nodes of μ_j, and the weights w_{j,i}.
    Eigen::VectorXd values;
    Eigen::VectorXd weights;
};

struct FrameCoefficients {
    std::string space_id;
    // Finest scale; the expansion reproduces σ_N with N = 2^{n+1}.
    int n = 0;
    std::vector<ScaleCoefficients> scales;
};

nlohmann::json to_json(const FrameCoefficients& c);

FrameCoefficients analyze(const Space& space, const Filter& filter, const SpectralInput& f, int n,
                          const QuadratureFamily& family);

// Inner products taken against μ_n (the samples' measure, of order 2^{n+1}).
FrameCoefficients discrete_analyze(const Space& space, const Filter& filter, const SampledInput& samples,
                                   const QuadratureMeasure& mu_n, int n, const QuadratureFamily& family);

DiffusionPolynomial synthesize(const Space& space, const Filter& filter, const FrameCoefficients& coeffs,
                               const QuadratureFamily& family);

// Σ_j Σ_i w_{j,i} |⟨f, Ψ_{j,y_i}⟩|².
double frame_energy(const FrameCoefficients& coeffs);

}  // namespace diffcodec
