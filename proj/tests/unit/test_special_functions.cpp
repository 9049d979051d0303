#include <cmath>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "pvvasm/errors.hpp"
#include "pvvasm/special_functions.hpp"

using namespace pvvasm;

TEST(GammaP, MatchesBoostAcrossShapes) {
    for (double a : {0.5, 1.0, 2.5, 10.0, 49.5, 500.0, 9999.5}) {
        for (double rel : {0.01, 0.3, 0.9, 1.0, 1.1, 2.0, 5.0}) {
            const double x = a * rel;
            const double expected = boost::math::gamma_p(a, x);
            EXPECT_NEAR(special::gamma_p(a, x), expected, 1e-13 + 1e-11 * expected) << "a=" << a << " x=" << x;
            EXPECT_NEAR(special::gamma_q(a, x), 1.0 - expected, 1e-12) << "a=" << a << " x=" << x;
        }
    }
}

TEST(ChiSquareQuantile, PublishedValues) {
    EXPECT_NEAR(special::chi_square_lower_quantile(10, 0.05), 3.9402991361190605, 1e-9);
    EXPECT_NEAR(special::chi_square_lower_quantile(1, 0.5), 0.454936423119572, 1e-9);
    EXPECT_NEAR(special::chi_square_lower_quantile(100, 0.05), 77.92946516501726, 1e-7);
    EXPECT_NEAR(special::chi_square_lower_quantile(19999, 0.5), 19998.333337284294, 1e-5);
}

TEST(ChiSquareQuantile, AgreesWithBoostAndRoundTrips) {
    for (double df : {1.0, 2.0, 10.0, 100.0, 1000.0, 4999.0, 19999.0}) {
        boost::math::chi_squared dist(df);
        for (double p : {1e-12, 1e-7, 2.5e-7, 1e-3, 0.05, 0.5, 0.95}) {
            const double q = special::chi_square_lower_quantile(df, p);
            EXPECT_NEAR(q, boost::math::quantile(dist, p), 1e-10 * boost::math::quantile(dist, p))
                << "df=" << df << " p=" << p;
            EXPECT_NEAR(special::chi_square_cdf(df, q), p, 1e-9 * p) << "df=" << df << " p=" << p;
        }
    }
}

TEST(ChiSquareQuantile, RejectsProbabilitiesOutsideUnitInterval) {
    EXPECT_THROW(special::chi_square_lower_quantile(10, 0.0), ConfigError);
    EXPECT_THROW(special::chi_square_lower_quantile(10, 1.0), ConfigError);
    EXPECT_THROW(special::chi_square_lower_quantile(0, 0.5), ConfigError);
}
