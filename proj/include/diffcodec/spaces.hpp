#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "diffcodec/common.hpp"
#include "json.hpp"

namespace diffcodec {

struct SpectrumEntry {
    std::size_t index = 0;
    double lambda = 0.0;  // λ_k itself; the Laplacian eigenvalue is λ_k²
    std::array<int, 2> tag{0, 0};
};

// Product grid: node (i, j) sits at flat index i * v.size() + j.
struct TensorGrid {
    std::vector<double> u;
    std::vector<double> v;
};

struct NodeSet {
    std::vector<Point> points;
    std::optional<TensorGrid> grid;

    std::size_t size() const { return points.size(); }
    static NodeSet from_points(std::vector<Point> pts);
    static NodeSet from_grid(TensorGrid g);
    // The subset loses any grid structure.
    NodeSet subset(const std::vector<std::size_t>& idx) const;
};

struct QuadratureRule {
    NodeSet nodes;
    Eigen::VectorXd weights;
};

class Space {
public:
    virtual ~Space() = default;

    virtual std::string id() const = 0;
    virtual double alpha() const = 0;
    virtual double product_constant() const = 0;
    virtual double diameter() const = 0;

    double lambda_cap() const { return cap_; }
    const std::vector<SpectrumEntry>& spectrum() const { return spectrum_; }
    std::size_t dimension() const { return spectrum_.size(); }
    double lambda(std::size_t k) const;

    // #{k : λ_k ≤ N}; throws SpectrumExhausted when N exceeds the cap of an
    // incomplete spectrum.
    std::size_t count_upto(double N) const;
    // #{k : λ_k < N}; the exact truncation for filters vanishing at 1.
    std::size_t count_below(double N) const;

    double eval_basis(std::size_t k, const Point& x) const;
    // Writes φ_0(x) … φ_{count−1}(x) into out.
    virtual void eval_basis_all(const Point& x, std::size_t count, double* out) const = 0;

    virtual double distance(const Point& x, const Point& y) const = 0;
    virtual double ball_volume(const Point& x, double t) const = 0;
    virtual bool valid(const Point& x) const = 0;
    virtual Point random_point(std::mt19937_64& rng) const = 0;

    // Positive rule integrating every product of two elements of Π_D.
    virtual QuadratureRule quadrature_rule(double D) const = 0;

    // values_i = Σ_k c_k φ_k(x_i).
    virtual Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const;
    // out_k = Σ_i values_i φ_k(x_i) for k < count.
    virtual Eigen::VectorXd project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const;

    Eigen::MatrixXd basis_matrix(const NodeSet& nodes, std::size_t count) const;

    // Σ_{λ_k > cap} λ_k^{−q} over the infinite spectrum; q > α.
    virtual double tail_power_sum(double cap, double q) const;

    // C with #{k : λ_k ≤ λ} ≤ C·λ^α for every λ ≥ 1.
    virtual double weyl_constant() const = 0;
    // True when the stored spectrum is the whole spectrum (finite spaces).
    virtual bool spectrum_complete() const { return false; }

    nlohmann::json descriptor() const;

protected:
    void check_index(std::size_t count) const;

    std::vector<SpectrumEntry> spectrum_;
    double cap_ = 0.0;
};

class CircleSpace final : public Space {
public:
    explicit CircleSpace(double lambda_cap);
    std::string id() const override { return "S1"; }
    double alpha() const override { return 1.0; }
    double product_constant() const override { return 2.0; }
    double diameter() const override { return kPi; }
    void eval_basis_all(const Point& x, std::size_t count, double* out) const override;
    double distance(const Point& x, const Point& y) const override;
    double ball_volume(const Point& x, double t) const override;
    bool valid(const Point& x) const override;
    Point random_point(std::mt19937_64& rng) const override;
    QuadratureRule quadrature_rule(double D) const override;
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const override;
    Eigen::VectorXd project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const override;
    double tail_power_sum(double cap, double q) const override;
    double weyl_constant() const override { return 3.0; }
};

class TorusSpace final : public Space {
public:
    explicit TorusSpace(double lambda_cap);
    std::string id() const override { return "T2"; }
    double alpha() const override { return 2.0; }
    double product_constant() const override { return 2.0; }
    double diameter() const override { return kPi * std::sqrt(2.0); }
    void eval_basis_all(const Point& x, std::size_t count, double* out) const override;
    double distance(const Point& x, const Point& y) const override;
    double ball_volume(const Point& x, double t) const override;
    bool valid(const Point& x) const override;
    Point random_point(std::mt19937_64& rng) const override;
    QuadratureRule quadrature_rule(double D) const override;
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const override;
    Eigen::VectorXd project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const override;
    double tail_power_sum(double cap, double q) const override;
    // Lattice points of the disc of radius λ fit in the disc of radius λ + 1/√2.
    double weyl_constant() const override { return kPi * (1.0 + 1.0 / std::sqrt(2.0)) * (1.0 + 1.0 / std::sqrt(2.0)); }

private:
    int max_freq_ = 0;
};

class SphereSpace final : public Space {
public:
    explicit SphereSpace(double lambda_cap);
    std::string id() const override { return "S2"; }
    double alpha() const override { return 2.0; }
    double product_constant() const override { return 3.0; }
    double diameter() const override { return kPi; }
    void eval_basis_all(const Point& x, std::size_t count, double* out) const override;
    double distance(const Point& x, const Point& y) const override;
    double ball_volume(const Point& x, double t) const override;
    bool valid(const Point& x) const override;
    Point random_point(std::mt19937_64& rng) const override;
    QuadratureRule quadrature_rule(double D) const override;
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const override;
    Eigen::VectorXd project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const override;
    double tail_power_sum(double cap, double q) const override;
    // (ℓ+1)² ≤ (λ+1)² ≤ 4λ².
    double weyl_constant() const override { return 4.0; }

    int max_degree() const { return max_degree_; }
    // Largest ℓ with √(ℓ(ℓ+1)) ≤ D.
    static int degree_for(double D);

private:
    // Normalized associated Legendre values P̄_ℓ^m(x) for m ≤ ℓ ≤ L into
    // out[ℓ − m]; the seed P̄_m^m(x) is passed in.
    void legendre_column(int m, int L, double x, double pmm, double* out) const;
    double pmm_factor(int m) const { return pmm_factor_[static_cast<std::size_t>(m)]; }

    int max_degree_ = 0;
    std::vector<double> rec_a_;
    std::vector<double> rec_b_;
    std::vector<double> pmm_factor_;
    std::size_t tri(int l, int m) const { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; }
};

std::unique_ptr<Space> make_space(const std::string& id, double lambda_cap);

// Convenience aliases.
inline std::size_t max_pi_dimension(const Space& s, double N) { return s.count_upto(N); }
inline double geodesic_distance(const Space& s, const Point& x, const Point& y) { return s.distance(x, y); }

// Gauss–Legendre nodes and weights on [−1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace diffcodec
