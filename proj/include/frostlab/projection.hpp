#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/measure.hpp"

// Pushforward of discrete measures under orthogonal projection, L^p norms of
// the range histogram, the exponent formulas, and the projection bound
// checkers. The lambda-integral over offsets is discretized as a step
// function at the source level: set, measure and range grid share one delta.

namespace frostlab {

struct Pushforward {
    Subspace direction;
    DiscreteMeasure histogram;  // on the n-dim range grid at the source level
    Vec range_offset;           // chart origin: range cell k covers offset + [k,k+1)*delta
};

// Every atom's mass lands in the single range cell containing its projected
// center; mass is conserved exactly up to accumulation order.
inline Pushforward project(const DiscreteMeasure& mu, const Subspace& v) {
    require(mu.dim() == v.dim_ambient, "project: dimension mismatch");
    require(mu.support.unit_range(), "project: measure must live in [0,1]^d");
    const int n = v.dim_plane;
    const int level = mu.level();
    const double d = mu.delta();
    const std::int64_t scale = std::int64_t{1} << level;

    // grid-aligned chart origin covering the projection of [0,1]^d
    std::array<std::int64_t, 3> origin_cells{0, 0, 0};
    std::int64_t extent = 1;
    Vec offset(n);
    for (int a = 0; a < n; ++a) {
        double lo = 0, hi = 0;
        for (int i = 0; i < v.dim_ambient; ++i) {
            const double e = v.basis[static_cast<std::size_t>(a)][i];
            lo += std::min(e, 0.0);
            hi += std::max(e, 0.0);
        }
        origin_cells[static_cast<std::size_t>(a)] =
            static_cast<std::int64_t>(std::floor(lo * double(scale)));
        offset[a] = double(origin_cells[static_cast<std::size_t>(a)]) * d;
        const std::int64_t cells_needed =
            static_cast<std::int64_t>(std::ceil(hi * double(scale))) -
            origin_cells[static_cast<std::size_t>(a)] + 1;
        extent = std::max(extent, cells_needed);
    }

    std::vector<std::pair<CellIndex, std::size_t>> bins(mu.atom_count());
    for (std::size_t i = 0; i < mu.atom_count(); ++i) {
        const Vec coords = project_point(v, mu.support.cell_center(i));
        CellIndex c{0, 0, 0};
        for (int a = 0; a < n; ++a) {
            std::int64_t k = static_cast<std::int64_t>(std::floor(coords[a] * double(scale))) -
                             origin_cells[static_cast<std::size_t>(a)];
            k = std::clamp<std::int64_t>(k, 0, extent - 1);
            c[static_cast<std::size_t>(a)] = static_cast<std::int32_t>(k);
        }
        bins[i] = {c, i};
    }
    std::sort(bins.begin(), bins.end());
    std::vector<CellIndex> cells;
    std::vector<double> weights;
    for (const auto& [c, i] : bins) {
        if (!cells.empty() && cells.back() == c)
            weights.back() += mu.weights[i];
        else {
            cells.push_back(c);
            weights.push_back(mu.weights[i]);
        }
    }
    DeltaSet support(n, level, std::move(cells), extent);
    return Pushforward{v, DiscreteMeasure(std::move(support), std::move(weights)), offset};
}

// (sum over cells of (w / delta^n)^p * delta^n)^(1/p): the histogram density
// integrated as a step function.
inline double lp_norm_p(const Pushforward& pf, double p) {
    require(p >= 1.0, "lp_norm_p: p must be >= 1");
    const int n = pf.histogram.dim();
    const double cell_volume = std::pow(pf.histogram.delta(), n);
    KahanSum s;
    for (double w : pf.histogram.weights) s.add(std::pow(w / cell_volume, p) * cell_volume);
    return std::pow(s.value(), 1.0 / p);
}

// p = 2 + (s + sigma - n(d-n+1)) / (d - alpha)
inline double exponent_general(int d, int n, double s, double sigma, double alpha) {
    require(d >= 2 && d <= 3 && n >= 1 && n < d, "exponent_general: invalid (d,n)");
    require(alpha > 0.0 && alpha < double(d), "exponent_general: need 0 < alpha < d");
    const double crit = double(n) * double(d - n + 1);
    require(s + sigma >= crit, "exponent_general: need s + sigma >= n(d-n+1)");
    return 2.0 + (s + sigma - crit) / (double(d) - alpha);
}

// Fubini-structure variant: p = 2 + (s + sigma - n(d-n+1)) / (n - alpha),
// strictly larger than the general exponent when alpha < n < d.
inline double exponent_fubini(int d, int n, double s, double sigma, double alpha) {
    require(d >= 2 && d <= 3 && n >= 1 && n < d, "exponent_fubini: invalid (d,n)");
    require(alpha > 0.0 && alpha < double(n), "exponent_fubini: need 0 < alpha < n");
    const double crit = double(n) * double(d - n + 1);
    require(s + sigma >= crit, "exponent_fubini: need s + sigma >= n(d-n+1)");
    return 2.0 + (s + sigma - crit) / (double(n) - alpha);
}

struct BoundParams {
    int d = 0;
    int n = 0;  // plane dimension: n for projections, k for incidences
    double s = 0, sigma = 0, alpha = 0, p = 0;
    int level = 0;
};

struct BoundReport {
    std::string check;
    double lhs = 0, rhs = 0, ratio = 0;
    BoundParams params;
    std::size_t family_size = 0;
    // secondary mass for the incidence fubini variant (mu_1 x lambda reading);
    // NaN when not applicable
    double lhs_secondary = std::numeric_limits<double>::quiet_NaN();

    void finalize() { ratio = rhs > 0 ? lhs / rhs : 0.0; }
};

inline std::string bound_report_csv_header() {
    return "check,d,n,s,sigma,alpha,p,level,lhs,rhs,ratio,family_size";
}

inline std::string to_csv_row(const BoundReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.12g,%.12g,%.12g,%.12g,%d,%.12g,%.12g,%.12g,%zu",
                  r.check.c_str(), r.params.d, r.params.n, r.params.s, r.params.sigma,
                  r.params.alpha, r.params.p, r.params.level, r.lhs, r.rhs, r.ratio,
                  r.family_size);
    return std::string(buf);
}

enum class BoundVariant { general, fubini };

namespace detail {

// span{V, {0} x R^(d-n)} = R^d, checked through the smallest singular value
// of [basis(V) | e_(n+1) ... e_d].
inline double fubini_span_margin(const Subspace& v, int n_first) {
    const int d = v.dim_ambient;
    Mat m = Mat::zero(d);
    for (int c = 0; c < v.dim_plane; ++c)
        for (int r = 0; r < d; ++r) m.at(r, c) = v.basis[static_cast<std::size_t>(c)][r];
    for (int c = 0; c < d - n_first; ++c) m.at(n_first + c, v.dim_plane + c) = 1.0;
    return smallest_singular_value(m);
}

inline double weighted_lp_mass(const DiscreteMeasure& mu, const DirectionFamily& fam, double p) {
    std::vector<double> per_dir(fam.size(), 0.0);
    parallel_for(fam.size(), [&](std::size_t i) {
        per_dir[i] = std::pow(lp_norm_p(project(mu, fam.members[i]), p), p);
    });
    KahanSum lhs;
    for (std::size_t i = 0; i < fam.size(); ++i) lhs.add(fam.nu_weights[i] * per_dir[i]);
    return lhs.value();
}

}  // namespace detail

// Projection bound check, general form: sum_V nu(V) * ||pi_V mu||_p^p against
// I_s(mu) * A_alpha(mu)^(p-2).
inline BoundReport check_projection_bound(const DiscreteMeasure& mu, const DirectionFamily& fam,
                                          double s, double alpha) {
    fam.validate();
    const int d = fam.dim_ambient();
    const int n = fam.dim_plane();
    require(mu.dim() == d, "check_projection_bound: measure dimension mismatch");
    const double p = exponent_general(d, n, s, fam.sigma, alpha);

    BoundReport r;
    r.check = "projection_general";
    r.params = {d, n, s, fam.sigma, alpha, p, mu.level()};
    r.family_size = fam.size();
    r.lhs = detail::weighted_lp_mass(mu, fam, p);
    r.rhs = energy(mu, s) * std::pow(amplitude(mu, alpha), p - 2.0);
    r.finalize();
    return r;
}

// Fubini form: the amplitude factor is the worst slice amplitude, the
// exponent is the larger Fubini one, and every direction must be transverse
// to the slice fibers.
inline BoundReport check_projection_bound(const FubiniMeasure& mu, const DirectionFamily& fam,
                                          double s, double alpha, BoundVariant variant) {
    if (variant == BoundVariant::general)
        return check_projection_bound(mu.assemble(), fam, s, alpha);
    fam.validate();
    const int d = fam.dim_ambient();
    const int n = fam.dim_plane();
    require(mu.dim() == d, "check_projection_bound: measure dimension mismatch");
    require(mu.slice_dim() == n, "check_projection_bound: fubini variant needs slices on R^n");
    for (const auto& v : fam.members)
        require(detail::fubini_span_margin(v, n) > 1e-8,
                "check_projection_bound: span{V, {0}xR^(d-n)} = R^d violated");
    const double p = exponent_fubini(d, n, s, fam.sigma, alpha);

    BoundReport r;
    r.check = "projection_fubini";
    r.params = {d, n, s, fam.sigma, alpha, p, mu.level()};
    r.family_size = fam.size();
    r.lhs = detail::weighted_lp_mass(mu.assemble(), fam, p);
    r.rhs = energy(mu.assemble(), s) * std::pow(fubini_slice_amplitude(mu, alpha), p - 2.0);
    r.finalize();
    return r;
}

// Classical L^2 bound: sum_V nu(V) ||pi_V mu||_2^2 against I_(n(d-n+1)-sigma).
inline BoundReport check_l2_classical(const DiscreteMeasure& mu, const DirectionFamily& fam,
                                      double sigma) {
    fam.validate();
    const int d = fam.dim_ambient();
    const int n = fam.dim_plane();
    require(mu.dim() == d, "check_l2_classical: measure dimension mismatch");
    const double exponent = double(n) * double(d - n + 1) - sigma;
    require(exponent > 0.0 && exponent < double(d),
            "check_l2_classical: n(d-n+1) - sigma must lie in (0,d)");

    BoundReport r;
    r.check = "l2_classical";
    r.params = {d, n, exponent, sigma, 0.0, 2.0, mu.level()};
    r.family_size = fam.size();
    r.lhs = detail::weighted_lp_mass(mu, fam, 2.0);
    r.rhs = energy(mu, exponent);
    r.finalize();
    return r;
}

}  // namespace frostlab
