#include <cmath>

#include "diffcodec/common.hpp"
#include "diffcodec/filters.hpp"
#include "doctest.h"

using namespace diffcodec;

namespace {

// Exponent of the closed form at x = p/q, evaluated in exact integer
// arithmetic: (x−½)²(2x²−2x−1)/(x²(x−1)²) with numerator and denominator
// scaled by 4q⁴ and q⁴ respectively.
double exponent_rational(long p, long q) {
    const long a = 2 * p - q;                     // 2q(x − ½)
    const long b = 2 * p * p - 2 * p * q - q * q;  // q²(2x² − 2x − 1)
    const long c = p * (p - q);                    // q²·x(x − 1)
    return static_cast<double>(a * a * b) / static_cast<double>(4 * c * c);
}

}  // namespace

TEST_CASE("standard filter plateaus and junction values") {
    const Filter f = standard_filter();
    CHECK(f.H(0.5) == 1.0);
    CHECK(f.H(1.0) == 0.0);
    CHECK(f.H(0.0) == 1.0);
    CHECK(f.H(0.25) == 1.0);
    CHECK(f.H(1.5) == 0.0);
    CHECK(f.H(1e6) == 0.0);
    CHECK(f.name() == "standard");
}

TEST_CASE("H(3/4) equals exp(-22/9)") {
    const double oracle_exponent = exponent_rational(3, 4);
    CHECK(oracle_exponent == doctest::Approx(-22.0 / 9.0).epsilon(1e-15));
    CHECK(std::abs(standard_filter().H(0.75) - std::exp(-22.0 / 9.0)) <= 1e-12);
}

TEST_CASE("closed form agrees with rational evaluation on interior fractions") {
    const Filter f = standard_filter();
    for (long p = 11; p < 20; ++p) {
        const double x = static_cast<double>(p) / 20.0;
        CHECK(f.H(x) == doctest::Approx(std::exp(exponent_rational(p, 20))).epsilon(1e-13));
    }
}

TEST_CASE("negative and non-finite arguments are domain errors") {
    const Filter f = standard_filter();
    CHECK_THROWS_AS(f.H(-1e-3), DomainError);
    CHECK_THROWS_AS(f.H(std::nan("")), DomainError);
    CHECK_THROWS_AS(standard_H(-2.0), DomainError);
}

TEST_CASE("H is nonincreasing on a 10^4 grid and continuous at the junctions") {
    const Filter f = standard_filter();
    double prev = f.H(0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double x = 1.2 * i / 10000.0;
        const double v = f.H(x);
        CHECK(v <= prev + 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(std::abs(f.H(0.5 + 2e-9) - 1.0) <= 1e-12);
    CHECK(std::abs(f.H(1.0 - 2e-9)) <= 1e-12);
}

TEST_CASE("wavelet symbols") {
    const Filter f = standard_filter();
    CHECK(f.g(0.25) == 0.0);
    CHECK(f.g(2.0) == 0.0);
    CHECK(f.g(0.5) == 0.0);
    CHECK(f.g(3.0) == 0.0);
    CHECK(f.g(1.0) == doctest::Approx(1.0));
    CHECK(f.h(0.75) == doctest::Approx(std::sqrt(std::exp(-22.0 / 9.0))));
    const double lhs = f.h(1.5) * f.h(1.5) + f.g(1.5) * f.g(1.5);
    CHECK(std::abs(lhs - f.H(0.75)) <= 1e-15);
}

TEST_CASE("g clamp only absorbs rounding") {
    const Filter f = standard_filter();
    for (int i = 0; i <= 5000; ++i) {
        const double t = 3.0 * i / 5000.0;
        const double d = f.H(0.5 * t) - f.H(t);
        CHECK(d > -1e-15);
    }
}

TEST_CASE("partition_check examples") {
    const Filter f = standard_filter();
    for (int n = 0; n <= 6; ++n) CHECK(partition_check(f, 0.0, n) == 0.0);
    CHECK(partition_check(f, 3.0, 2) <= 1e-12);
    for (int n = 0; n <= 6; ++n) CHECK(partition_check(f, std::ldexp(1.0, n + 2), n) == 0.0);
    CHECK_THROWS_AS(partition_check(f, 1.0, -1), DomainError);
}

TEST_CASE("partition identity on a dense lambda grid") {
    const Filter f = standard_filter();
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n)
        for (int i = 0; i < 1000; ++i) worst = std::max(worst, partition_check(f, 0.37 * i, n));
    CHECK(worst <= 1e-12);
}

TEST_CASE("infinite partition of unity") {
    const Filter f = standard_filter();
    for (int i = 0; i <= 1000; ++i) {
        const double lambda = static_cast<double>(i);
        double sum = f.h(lambda) * f.h(lambda);
        for (int j = 0; std::ldexp(lambda, -j) >= 0.5 / 4.0 && j < 64; ++j) {
            const double gj = f.g(std::ldexp(lambda, -j));
            sum += gj * gj;
        }
        if (lambda == 0.0) CHECK(sum == 1.0);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}
