#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "diffcodec/spaces.hpp"

namespace diffcodec {

struct PointCloud {
    Eigen::MatrixXd points;  // M × d
    std::string source;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

// Comma-separated reals, one point per line; blank lines are skipped.
// Throws ParseError (with the line number) on ragged or non-numeric rows
// and DomainError for fewer than 3 rows or duplicate points.
PointCloud ingest_csv(const std::string& path);

enum class GraphMetric { euclidean, knn_graph };

struct GraphOptions {
    double bandwidth = 0.0;
    std::size_t K = 0;
    // Rescale every λ_k so that λ_1 equals this value.
    std::optional<double> calibrate_lambda1;
    GraphMetric metric = GraphMetric::euclidean;
    // Neighbors per node for the shortest-path metric.
    std::size_t knn = 8;
};

// Nodes are the cloud's points, addressed by Point{u = index}. The measure
// is uniform, 1/M per node, and it is also an exact quadrature for every
// graph diffusion polynomial.
class GraphSpace final : public Space {
public:
    // phi is M × K with column k holding φ_k at the nodes.
    GraphSpace(Eigen::MatrixXd points, Eigen::VectorXd lambdas, Eigen::MatrixXd phi, GraphMetric metric = GraphMetric::euclidean,
               std::size_t knn = 8);

    std::string id() const override { return "graph"; }
    double alpha() const override { return alpha_; }
    double product_constant() const override { return 1.0; }
    double diameter() const override { return diameter_; }
    void eval_basis_all(const Point& x, std::size_t count, double* out) const override;
    double distance(const Point& x, const Point& y) const override;
    double ball_volume(const Point& x, double t) const override;
    bool valid(const Point& x) const override;
    Point random_point(std::mt19937_64& rng) const override;
    QuadratureRule quadrature_rule(double D) const override;
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const override;
    Eigen::VectorXd project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const override;
    double tail_power_sum(double cap, double q) const override;
    double weyl_constant() const override;
    bool spectrum_complete() const override { return static_cast<std::size_t>(phi_.cols()) == nodes(); }

    std::size_t nodes() const { return static_cast<std::size_t>(points_.rows()); }
    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::MatrixXd& eigenvectors() const { return phi_; }
    Eigen::VectorXd lambdas() const;
    // False when the spectrum was too short for estimate_alpha; alpha() is
    // then the ambient dimension.
    bool alpha_estimated() const { return alpha_estimated_; }
    bool disconnected() const { return disconnected_; }
    GraphMetric metric() const { return metric_; }

private:
    friend GraphSpace build_graph_space(const PointCloud&, const GraphOptions&);

    std::size_t index(const Point& x) const;

    Eigen::MatrixXd points_;
    Eigen::MatrixXd phi_;
    Eigen::MatrixXd graph_dist_;
    GraphMetric metric_;
    double alpha_ = 0.0;
    bool alpha_estimated_ = false;
    double diameter_ = 0.0;
    bool disconnected_ = false;
};

// Gaussian adjacency W_ij = exp(−‖x_i − x_j‖²/bandwidth²), balanced to a
// doubly stochastic matrix, then L = I − W and a dense eigensolve. λ_k is
// the square root of the k-th eigenvalue clamped at 0.
GraphSpace build_graph_space(const PointCloud& cloud, const GraphOptions& opts);

// Least-squares slope of log #{λ_k ≤ N} against log N on N_j = 1.5·λ_1·2^j,
// keeping grid points whose count is at most half the spectrum.
double estimate_alpha(const Space& space);

// All-pairs shortest paths over the symmetrized kNN graph with Euclidean
// edge lengths; +∞ between components.
Eigen::MatrixXd knn_graph_distances(const Eigen::MatrixXd& points, std::size_t k);

// Little-endian "DMGS" file: u32 M, d, K, then doubles for the points,
// the λ_k and the eigenvectors, row-major.
void save_graph_space(const GraphSpace& gs, const std::string& path);
// Throws CorruptStream on a malformed file.
GraphSpace load_graph_space(const std::string& path);

}  // namespace diffcodec
