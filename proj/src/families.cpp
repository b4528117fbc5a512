#include <cmath>

#include "diffcodec/approx.hpp"

namespace diffcodec {

SpectralInput power_family(const Space& space, double q, double band) {
    if (!(q > space.alpha() / 2.0)) throw DomainError("power family needs q > alpha/2 to lie in L2");
    const std::size_t n = space.count_upto(band);
    SpectralInput f;
    f.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) f.coeffs[static_cast<Eigen::Index>(k)] = std::pow(space.spectrum()[k].lambda, -q);
    f.tail = PowerTail{1.0, q};
    return f;
}

}  // namespace diffcodec
