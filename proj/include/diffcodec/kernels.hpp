#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "diffcodec/filters.hpp"
#include "diffcodec/quadrature.hpp"
#include "diffcodec/spaces.hpp"
#include "json.hpp"

namespace diffcodec {

// K(x, y) = Σ_k H(λ_k / (dilation·N)) φ_k(x) φ_k(y). Dilation 2 is the
// summation kernel K_N; dilation 1 is the kernel of σ_N.
struct KernelSpec {
    const Space* space = nullptr;
    const Filter* filter = nullptr;
    double N = 1.0;
    int dilation = 2;

    double band() const { return dilation * N; }
    // Number of basis functions with nonzero filter weight.
    std::size_t count() const;
    // H(λ_k / band) for k < count().
    Eigen::VectorXd weights() const;
};

void validate(const KernelSpec& spec);

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& y);
// Matrix of K(x_i, y_j).
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const NodeSet& xs, const NodeSet& ys);

struct HeatValue {
    double value = 0.0;
    // Bound on the omitted part of the series.
    double tail_bound = 0.0;
    std::size_t terms = 0;
};

// Terms with exp(−λ_k² t) < 1e−16 are dropped. Throws SpectrumExhausted
// when the bound on what was dropped exceeds 1e−10.
HeatValue eval_heat_kernel(const Space& space, double t, const Point& x, const Point& y);
inline constexpr double kHeatTruncation = 1e-16;
inline constexpr double kHeatTailLimit = 1e-10;

struct AuditRecord {
    std::string check;
    double N = 0.0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};
nlohmann::json to_json(const AuditRecord& r);

struct LocalizationReport {
    // One record per N: max over pairs of |K_N(x,y)|·ρ^S·N^{S−α}.
    std::vector<AuditRecord> buckets;
    double max_statistic = 0.0;
    // Largest bucket over smallest bucket; stable when ≤ 10.
    double spread = 0.0;
    bool stable = false;
};

LocalizationReport localization_audit(const Space& space, const Filter& filter, int dilation, double S,
                                      const std::vector<std::pair<Point, Point>>& pairs,
                                      const std::vector<double>& Ns);

// max over nodes x of Σ_y |K(x, y)|·|w_y|.
double l1_mass_audit(const KernelSpec& spec, const QuadratureMeasure& q);

// Numerical rank (σ > rel_tol·σ_max) of the first K basis functions
// sampled on dense nodes inside the ball. Small balls are exponentially
// ill-conditioned; pass a machine-precision tolerance to probe full rank.
int restricted_gram_rank(const Space& space, const Point& center, double radius, std::size_t K,
                         const NodeSet& dense_nodes, double rel_tol = 1e-8);

struct HeatThresholds {
    // Lower bound: t^{α/2} G_t(x,x) ≥ diag_min and max/min ≤ diag_ratio.
    double diag_min = 0.1;
    double diag_ratio = 10.0;
    // Upper bound: sup G_t(x,y) t^{α/2} exp(c ρ²/t) ≤ gauss_max, c = c_fit/2.
    double gauss_max = 100.0;
};

struct HeatDiagnostics {
    double diag_lo = 0.0;
    double diag_hi = 0.0;
    double c_fit = 0.0;
    double gauss_sup = 0.0;
    std::vector<AuditRecord> records;
};

HeatDiagnostics heat_diagnostics(const Space& space, const std::vector<double>& ts, const std::vector<Point>& diag_points,
                                 const std::vector<std::pair<Point, Point>>& pairs, const HeatThresholds& thr);

}  // namespace diffcodec
