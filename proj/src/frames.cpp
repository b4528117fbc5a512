#include "diffcodec/frames.hpp"

#include <cmath>

#include "diffcodec/parallel.hpp"

namespace diffcodec {

namespace {

const QuadratureMeasure& scale_measure(const QuadratureFamily& family, int j) {
    const QuadratureMeasure& q = family.at(scale_band(j));
    if (q.certified_order + 1e-12 < scale_band(j))
        throw CertificationError("scale " + std::to_string(j) + " needs a quadrature of order " +
                                 std::to_string(scale_band(j)));
    return q;
}

Eigen::VectorXd symbols(const Space& space, const Filter& filter, int j, std::size_t count) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) s[static_cast<Eigen::Index>(k)] = frame_symbol(filter, j, space.spectrum()[k].lambda);
    return s;
}

// Frame coefficients from the inner products ⟨f, φ_k⟩ for λ_k < 2^{n+1}.
FrameCoefficients analyze_coefficients(const Space& space, const Filter& filter, const Eigen::VectorXd& fhat, int n,
                                       const QuadratureFamily& family) {
    if (n < 0 || n > 40) throw DomainError("frame depth n must lie in [0, 40]");
    FrameCoefficients out;
    out.space_id = space.id();
    out.n = n;
    out.scales.resize(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j) scale_measure(family, j);
    parallel_for(0, static_cast<std::size_t>(n + 1), [&](std::size_t js) {
        const int j = static_cast<int>(js);
        const QuadratureMeasure& q = family.at(scale_band(j));
        const std::size_t count = space.count_below(scale_band(j));
        const Eigen::VectorXd c = symbols(space, filter, j, count).cwiseProduct(fhat.head(static_cast<Eigen::Index>(count)));
        ScaleCoefficients& sc = out.scales[js];
        sc.j = j;
        sc.node_set = node_set_id(q);
        sc.values = space.synthesize(c, q.nodes);
        sc.weights = q.weights;
    });
    return out;
}

}  // namespace

double frame_symbol(const Filter& filter, int j, double lambda) {
    if (j < 0) throw DomainError("frame scale must be >= 0");
    if (j == 0) return filter.h(lambda / 2.0);
    return filter.g(std::ldexp(lambda, -j));
}

nlohmann::json to_json(const FrameCoefficients& c) {
    nlohmann::json scales = nlohmann::json::array();
    for (const auto& s : c.scales) {
        scales.push_back({{"j", s.j},
                          {"N_j", scale_band(s.j)},
                          {"node_set_id", s.node_set},
                          {"values", std::vector<double>(s.values.data(), s.values.data() + s.values.size())},
                          {"weights", std::vector<double>(s.weights.data(), s.weights.data() + s.weights.size())}});
    }
    return {{"space_id", c.space_id}, {"n", c.n}, {"scales", scales}};
}

FrameCoefficients analyze(const Space& space, const Filter& filter, const SpectralInput& f, int n,
                          const QuadratureFamily& family) {
    const std::size_t count = space.count_below(scale_band(n));
    Eigen::VectorXd fhat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    const Eigen::Index stored = std::min<Eigen::Index>(f.coeffs.size(), fhat.size());
    fhat.head(stored) = f.coeffs.head(stored);
    if (f.tail)
        for (Eigen::Index k = stored; k < fhat.size(); ++k)
            fhat[k] = f.tail->scale * std::pow(space.spectrum()[static_cast<std::size_t>(k)].lambda, -f.tail->q);
    return analyze_coefficients(space, filter, fhat, n, family);
}

FrameCoefficients discrete_analyze(const Space& space, const Filter& filter, const SampledInput& samples,
                                   const QuadratureMeasure& mu_n, int n, const QuadratureFamily& family) {
    if (mu_n.certified_order + 1e-12 < scale_band(n))
        throw CertificationError("samples must sit on a quadrature of order 2^(n+1)");
    if (samples.node_set != node_set_id(mu_n) || static_cast<std::size_t>(samples.values.size()) != mu_n.support())
        throw DomainError("samples were taken on a different quadrature");
    const std::size_t count = space.count_below(scale_band(n));
    const Eigen::VectorXd fhat = space.project(samples.values.cwiseProduct(mu_n.weights), mu_n.nodes, count);
    return analyze_coefficients(space, filter, fhat, n, family);
}

DiffusionPolynomial synthesize(const Space& space, const Filter& filter, const FrameCoefficients& coeffs,
                               const QuadratureFamily& family) {
    if (coeffs.space_id != space.id()) throw DomainError("frame coefficients belong to another space");
    if (coeffs.scales.size() != static_cast<std::size_t>(coeffs.n + 1)) throw DomainError("frame scale count mismatch");
    const double N = scale_band(coeffs.n);
    const std::size_t total = space.count_below(N);
    std::vector<Eigen::VectorXd> parts(coeffs.scales.size());
    parallel_for(0, coeffs.scales.size(), [&](std::size_t js) {
        const ScaleCoefficients& sc = coeffs.scales[js];
        if (sc.j != static_cast<int>(js)) throw DomainError("frame scales out of order");
        const QuadratureMeasure& q = scale_measure(family, sc.j);
        if (sc.node_set != node_set_id(q) || static_cast<std::size_t>(sc.values.size()) != q.support())
            throw DomainError("scale " + std::to_string(sc.j) + " does not match the quadrature family");
        const std::size_t count = space.count_below(scale_band(sc.j));
        parts[js] = symbols(space, filter, sc.j, count)
                        .cwiseProduct(space.project(sc.values.cwiseProduct(sc.weights), q.nodes, count));
    });
    DiffusionPolynomial out{&space, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total)), N};
    for (const auto& p : parts) out.coeffs.head(p.size()) += p;
    return out;
}

double frame_energy(const FrameCoefficients& coeffs) {
    double e = 0.0;
    for (const auto& sc : coeffs.scales) e += sc.weights.dot(sc.values.cwiseAbs2());
    return e;
}

}  // namespace diffcodec
