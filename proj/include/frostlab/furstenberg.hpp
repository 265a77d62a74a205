#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/grid.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/incidence.hpp"

// Dual Furstenberg families built from projections, box dimension in the
// affine Grassmannian metric, and the dimensional bound formulas.

namespace frostlab {

// For every direction V and every cell center x of E, the affine n-plane
// through x with direction V. Members indistinguishable at scale delta are
// merged greedily in (direction, cell) order.
inline AffineFamily dual_furstenberg_example(const DeltaSet& e, const DirectionFamily& dirs) {
    require(!e.empty(), "dual_furstenberg_example: empty point set");
    dirs.validate();
    require(dirs.dim_ambient() == e.dim, "dual_furstenberg_example: dimension mismatch");
    std::vector<AffinePlane> raw;
    raw.reserve(dirs.size() * e.cell_count());
    for (const auto& v : dirs.members)
        for (std::size_t i = 0; i < e.cell_count(); ++i)
            raw.push_back(AffinePlane::through(v, e.cell_center(i)));
    const auto reps = greedy_affine_net(raw, e.delta());
    std::vector<AffinePlane> members;
    members.reserve(reps.size());
    for (std::size_t i : reps) members.push_back(raw[i]);
    return AffineFamily(std::move(members), std::vector<double>(reps.size(), 1.0), e.level);
}

// Box dimension of the family in the A(d,k) metric: greedy r-net counts at
// r = 2^-l, least-squares slope across the requested levels.
inline DimensionFit affine_box_dimension(const AffineFamily& fam, int min_level, int max_level) {
    require(fam.size() >= 2, "affine_box_dimension: degenerate family");
    require(1 <= min_level && min_level < max_level, "affine_box_dimension: level range invalid");
    require(max_level - min_level + 1 >= 3, "affine_box_dimension: need at least 3 levels");
    std::vector<int> levels;
    std::vector<double> counts;
    for (int l = min_level; l <= max_level; ++l) {
        levels.push_back(l);
        counts.push_back(double(greedy_affine_net(fam.members, std::ldexp(1.0, -l)).size()));
    }
    return fit_log2_counts(levels, counts);
}

// Lower bound of the dual Furstenberg dimension. Without a split this is
// t + (d-k) - (d-s)(sigma-t) / (d + sigma - (k+1)(d-k)); with a Cartesian
// split s = s1 + s2 the numerator factor becomes d-k-s1 and the denominator
// d-k+s2+sigma-(k+1)(d-k). Only the formula's own well-definedness is
// enforced; callers may evaluate it outside the asserted parameter range.
inline double dual_furstenberg_lower_bound(int d, int k, double s, double t, double sigma,
                                std::optional<std::pair<double, double>> product_split =
                                    std::nullopt) {
    require(d >= 2 && d <= 3 && k >= 1 && k < d, "dual_furstenberg_lower_bound: invalid (d,k)");
    require(s > 0.0 && s <= double(d), "dual_furstenberg_lower_bound: need 0 < s <= d");
    require(t >= 0.0 && t <= sigma, "dual_furstenberg_lower_bound: need 0 <= t <= sigma");
    const double crit = double(k + 1) * double(d - k);
    if (!product_split) {
        const double denom = double(d) + sigma - crit;
        require(denom > 0.0, "dual_furstenberg_lower_bound: need d + sigma > (k+1)(d-k)");
        return t + double(d - k) - (double(d) - s) * (sigma - t) / denom;
    }
    const auto [s1, s2] = *product_split;
    require(std::abs(s1 + s2 - s) <= 1e-12, "dual_furstenberg_lower_bound: split must satisfy s1 + s2 = s");
    require(s1 >= 0.0 && s1 <= double(d - k), "dual_furstenberg_lower_bound: need 0 <= s1 <= d-k");
    require(s2 >= 0.0 && s2 <= double(k), "dual_furstenberg_lower_bound: need 0 <= s2 <= k");
    const double denom = double(d - k) + s2 + sigma - crit;
    require(denom > 0.0, "dual_furstenberg_lower_bound: need d-k + s2 + sigma > (k+1)(d-k)");
    return t + double(d - k) - (double(d - k) - s1) * (sigma - t) / denom;
}

// Conjectured upper bound for d=2, k=1 examples built from E of dimension s
// and directions of dimension t. Advisory: the optimality is a conjecture,
// reports carry it with a distinct flag.
inline double conjectured_upper_bound(double s, double t) {
    require(s > 0.0 && s <= 2.0, "conjectured_upper_bound: need s in (0,2]");
    require(t > 0.0 && t <= 1.0, "conjectured_upper_bound: need t in (0,1]");
    return std::min({t + s, (3.0 * t + s) / 2.0, t + 1.0});
}

struct FurstenbergReport {
    int d = 2, k = 1;
    double s = 0, t = 0, sigma = 0;
    double measured_dim = 0;
    double lower_bound = 0;
    double upper_bound = 0;  // conjectural, advisory only
    int min_level = 0, max_level = 0;
    double fit_residual = 0;
    std::size_t family_size = 0;
};

inline std::string furstenberg_csv_header() {
    return "d,k,s,t,sigma,measured_dim,lower_bound,upper_bound,levels";
}

inline std::string to_csv_row(const FurstenbergReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d..%d", r.d, r.k,
                  r.s, r.t, r.sigma, r.measured_dim, r.lower_bound, r.upper_bound, r.min_level,
                  r.max_level);
    return std::string(buf);
}

}  // namespace frostlab
