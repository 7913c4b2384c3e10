#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "qfsim/errors.hpp"

namespace qfsim {

inline double chi_square_pvalue(double stat, unsigned dof) {
    if (dof == 0) return 1.0;
    boost::math::chi_squared_distribution<double> d(dof);
    return boost::math::cdf(boost::math::complement(d, stat));
}

// Pearson goodness-of-fit p-value of observed counts against a probability
// vector. Bins that are impossible and empty are skipped; an observation in
// an impossible bin is an immediate zero.
inline double chi_square_gof_pvalue(const std::vector<std::uint64_t>& observed,
                                    const std::vector<double>& probs) {
    if (observed.size() != probs.size() || observed.empty())
        throw StructureError("chi-square needs matching nonempty count/prob vectors");
    std::uint64_t n = 0;
    for (auto o : observed) n += o;
    if (n == 0) throw StructureError("chi-square needs at least one observation");

    double stat = 0.0;
    unsigned used = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (probs[i] <= 0.0) {
            if (observed[i] > 0) return 0.0;
            continue;
        }
        const double expd = static_cast<double>(n) * probs[i];
        const double diff = static_cast<double>(observed[i]) - expd;
        stat += diff * diff / expd;
        ++used;
    }
    if (used < 2) return 1.0;
    return chi_square_pvalue(stat, used - 1);
}

// Total variation distance between two weight vectors, each normalized first.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size() || p.empty())
        throw StructureError("total variation needs matching nonempty vectors");
    double sp = 0.0, sq = 0.0;
    for (auto v : p) sp += v;
    for (auto v : q) sq += v;
    if (sp <= 0.0 || sq <= 0.0)
        throw DegenerateObjectError("total variation of a zero distribution");
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] / sp - q[i] / sq);
    return 0.5 * tv;
}

} // namespace qfsim
