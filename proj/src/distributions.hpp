#pragma once

// Thin wrappers around Boost.Math distribution functions so the rest of the
// code never touches boost types directly.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

namespace cashflow::dist {

inline double normal_cdf(double z) {
    static const boost::math::normal_distribution<> norm;
    return boost::math::cdf(norm, z);
}

inline double normal_sf(double z) {
    static const boost::math::normal_distribution<> norm;
    return boost::math::cdf(boost::math::complement(norm, z));
}

inline double normal_quantile(double p) {
    static const boost::math::normal_distribution<> norm;
    return boost::math::quantile(norm, p);
}

inline double chi_squared_sf(double x, double dof) {
    const boost::math::chi_squared_distribution<> chi2(dof);
    return boost::math::cdf(boost::math::complement(chi2, x));
}

inline double fisher_f_sf(double x, double dof1, double dof2) {
    const boost::math::fisher_f_distribution<> f(dof1, dof2);
    return boost::math::cdf(boost::math::complement(f, x));
}

}  // namespace cashflow::dist
