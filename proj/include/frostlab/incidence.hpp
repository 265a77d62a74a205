#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/projection.hpp"

// Delta-tube rasterization around affine planes and weighted incidence mass
// mu x lambda(I_delta(E, A)). A cell is incident to a plane when its center
// lies within delta of the plane (exact point-plane distance); the center
// rule differs from box intersection only by a bounded thickness factor.

namespace frostlab {

struct AffineFamily {
    std::vector<AffinePlane> members;  // one (d,k) throughout
    std::vector<double> weights;       // lambda-discretization weights
    int level = 1;

    AffineFamily() = default;
    // empty family of a declared shape
    AffineFamily(int d, int k, int level_) : level(level_), d_(d), k_(k) {
        require(level >= 1, "AffineFamily: level must be >= 1");
    }
    AffineFamily(std::vector<AffinePlane> members_, std::vector<double> weights_, int level_)
        : members(std::move(members_)), weights(std::move(weights_)), level(level_) {
        require(!members.empty(), "AffineFamily: no members; use the explicit-shape constructor");
        require(members.size() == weights.size(), "AffineFamily: weight count mismatch");
        require(level >= 1, "AffineFamily: level must be >= 1");
        d_ = members.front().plane.dim_ambient;
        k_ = members.front().plane.dim_plane;
        const double reach = std::sqrt(double(d_)) + 1e-9;
        for (std::size_t i = 0; i < members.size(); ++i) {
            require(weights[i] >= 0, "AffineFamily: negative weight");
            require(members[i].plane.dim_ambient == d_ && members[i].plane.dim_plane == k_,
                    "AffineFamily: mixed plane shapes");
            // offsets stay within sqrt(d) of the unit cube
            double g2 = 0;
            for (int c = 0; c < d_; ++c) {
                const double x = members[i].offset[c];
                const double g = x < 0 ? -x : (x > 1 ? x - 1 : 0);
                g2 += g * g;
            }
            require(std::sqrt(g2) <= reach, "AffineFamily: offset too far from the unit cube");
        }
    }

    int dim_ambient() const { return d_; }
    int dim_plane() const { return k_; }
    std::size_t size() const { return members.size(); }

    double total_weight() const {
        KahanSum s;
        for (double w : weights) s.add(w);
        return s.value();
    }

private:
    int d_ = 2;
    int k_ = 1;
};

namespace detail {

// Candidate cell columns are found by solving the center-distance condition
// along the axis least parallel to the plane, so only the grid slabs meeting
// the tube are walked.
template <typename Emit>
inline void walk_tube_codim1(const AffinePlane& p, int level, double radius, Emit&& emit) {
    const int d = p.plane.dim_ambient;
    const std::int64_t n = std::int64_t{1} << level;
    const double delta = std::ldexp(1.0, -level);
    const Subspace nrm = orthogonal_complement(p.plane);
    const Vec m = nrm.basis[0];
    const double b = dot(m, p.offset);
    int dom = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(m[i]) > std::abs(m[dom])) dom = i;
    const double mdom = m[dom];

    std::array<int, 2> other{};
    int no = 0;
    for (int i = 0; i < d; ++i)
        if (i != dom) other[static_cast<std::size_t>(no++)] = i;

    std::array<std::int64_t, 2> hi{1, 1};
    for (int i = 0; i < no; ++i) hi[static_cast<std::size_t>(i)] = n;

    CellIndex c{0, 0, 0};
    for (std::int64_t i0 = 0; i0 < hi[0]; ++i0) {
        for (std::int64_t i1 = 0; i1 < hi[1]; ++i1) {
            double rest = -b;
            if (no >= 1) rest += m[other[0]] * (double(i0) + 0.5) * delta;
            if (no >= 2) rest += m[other[1]] * (double(i1) + 0.5) * delta;
            // |m . c - b| <= radius with c_dom = (j+0.5)*delta
            const double lo = (-radius - rest) / mdom;
            const double hiv = (radius - rest) / mdom;
            const double a0 = std::min(lo, hiv), a1 = std::max(lo, hiv);
            std::int64_t j0 = static_cast<std::int64_t>(std::floor(a0 / delta - 0.5)) - 1;
            std::int64_t j1 = static_cast<std::int64_t>(std::ceil(a1 / delta - 0.5)) + 1;
            j0 = std::max<std::int64_t>(j0, 0);
            j1 = std::min<std::int64_t>(j1, n - 1);
            for (std::int64_t j = j0; j <= j1; ++j) {
                if (no >= 1) c[static_cast<std::size_t>(other[0])] = static_cast<std::int32_t>(i0);
                if (no >= 2) c[static_cast<std::size_t>(other[1])] = static_cast<std::int32_t>(i1);
                c[static_cast<std::size_t>(dom)] = static_cast<std::int32_t>(j);
                emit(c);
            }
        }
    }
}

// Lines in R^3: walk the layers along the dominant direction axis; per layer
// the candidate box is the segment's bounding box inflated by the radius.
template <typename Emit>
inline void walk_tube_line3(const AffinePlane& p, int level, double radius, Emit&& emit) {
    const std::int64_t n = std::int64_t{1} << level;
    const double delta = std::ldexp(1.0, -level);
    const Vec e = p.plane.basis[0];
    const Vec& u = p.offset;
    int dom = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(e[i]) > std::abs(e[dom])) dom = i;
    const double edom = e[dom];

    // parametric clip against the inflated cube
    const double pad = radius + delta;
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int ax = 0; ax < 3; ++ax) {
        if (std::abs(e[ax]) < 1e-15) {
            if (u[ax] < -pad || u[ax] > 1.0 + pad) return;
            continue;
        }
        const double a = (-pad - u[ax]) / e[ax];
        const double b = (1.0 + pad - u[ax]) / e[ax];
        tmin = std::max(tmin, std::min(a, b));
        tmax = std::min(tmax, std::max(a, b));
    }
    if (tmin > tmax) return;

    double x_start = u[dom] + tmin * edom;
    double x_end = u[dom] + tmax * edom;
    if (x_start > x_end) std::swap(x_start, x_end);
    std::int64_t l0 = static_cast<std::int64_t>(std::floor(x_start / delta)) - 1;
    std::int64_t l1 = static_cast<std::int64_t>(std::ceil(x_end / delta)) + 1;
    l0 = std::max<std::int64_t>(std::min(l0, n - 1), 0);
    l1 = std::max<std::int64_t>(std::min(l1, n - 1), 0);

    std::array<int, 2> other{};
    int no = 0;
    for (int i = 0; i < 3; ++i)
        if (i != dom) other[static_cast<std::size_t>(no++)] = i;

    CellIndex c{0, 0, 0};
    for (std::int64_t layer = l0; layer <= l1; ++layer) {
        // segment portion whose dominant coordinate lies in the layer +- one
        // cell (a center within radius can have its foot in a neighbor layer)
        const double xa = double(layer) * delta - delta;
        const double xb = double(layer + 1) * delta + delta;
        const double ta = (xa - u[dom]) / edom;
        const double tb = (xb - u[dom]) / edom;
        std::array<std::int64_t, 2> jlo{}, jhi{};
        for (int oi = 0; oi < 2; ++oi) {
            const int ax = other[static_cast<std::size_t>(oi)];
            const double va = u[ax] + ta * e[ax];
            const double vb = u[ax] + tb * e[ax];
            const double lo = std::min(va, vb) - pad;
            const double hi = std::max(va, vb) + pad;
            jlo[static_cast<std::size_t>(oi)] =
                std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(lo / delta)), 0);
            jhi[static_cast<std::size_t>(oi)] =
                std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(hi / delta)), n - 1);
        }
        c[static_cast<std::size_t>(dom)] = static_cast<std::int32_t>(layer);
        for (std::int64_t a = jlo[0]; a <= jhi[0]; ++a) {
            for (std::int64_t bidx = jlo[1]; bidx <= jhi[1]; ++bidx) {
                c[static_cast<std::size_t>(other[0])] = static_cast<std::int32_t>(a);
                c[static_cast<std::size_t>(other[1])] = static_cast<std::int32_t>(bidx);
                emit(c);
            }
        }
    }
}

// Emits candidate cells (possibly with repeats) whose centers might lie
// within radius of the plane; callers apply the exact distance test.
template <typename Emit>
inline void walk_tube_candidates(const AffinePlane& p, int level, double radius, Emit&& emit) {
    const int d = p.plane.dim_ambient;
    const int k = p.plane.dim_plane;
    if (k == d - 1)
        walk_tube_codim1(p, level, radius, emit);
    else if (d == 3 && k == 1)
        walk_tube_line3(p, level, radius, emit);
    else
        require(false, "rasterize: unsupported (d,k)");
}

}  // namespace detail

// All level-cells of [0,1]^d whose center lies within delta = 2^-level of the
// plane. A plane missing the cube yields an empty set.
inline DeltaSet rasterize_tube(const AffinePlane& p, int level) {
    require(level >= 1, "rasterize_tube: level must be >= 1");
    const double delta = std::ldexp(1.0, -level);
    const double r2 = delta * delta;
    std::vector<CellIndex> cells;
    detail::walk_tube_candidates(p, level, delta, [&](const CellIndex& c) {
        Vec center(p.plane.dim_ambient);
        for (int i = 0; i < p.plane.dim_ambient; ++i)
            center[i] = (double(c[static_cast<std::size_t>(i)]) + 0.5) * delta;
        if (p.distance_sq(center) <= r2) cells.push_back(c);
    });
    return DeltaSet(p.plane.dim_ambient, level, std::move(cells));
}

// Reference rasterization scanning every cell of the grid; test oracle.
inline DeltaSet rasterize_tube_reference(const AffinePlane& p, int level) {
    const int d = p.plane.dim_ambient;
    const std::int64_t n = std::int64_t{1} << level;
    const double delta = std::ldexp(1.0, -level);
    const double r2 = delta * delta;
    std::vector<CellIndex> cells;
    std::array<std::int64_t, 3> hi{n, d >= 2 ? n : 1, d >= 3 ? n : 1};
    for (std::int64_t i = 0; i < hi[0]; ++i)
        for (std::int64_t j = 0; j < hi[1]; ++j)
            for (std::int64_t k = 0; k < hi[2]; ++k) {
                Vec center(d);
                center[0] = (double(i) + 0.5) * delta;
                if (d >= 2) center[1] = (double(j) + 0.5) * delta;
                if (d >= 3) center[2] = (double(k) + 0.5) * delta;
                if (p.distance_sq(center) <= r2)
                    cells.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                     static_cast<std::int32_t>(k)});
            }
    return DeltaSet(d, level, std::move(cells));
}

// Spatial bucket index over a measure's support, at 4x the tube thickness.
class SupportIndex {
public:
    explicit SupportIndex(const DiscreteMeasure& mu) : mu_(&mu) {
        shift_ = std::min(2, mu.level() - 1);
        for (std::size_t i = 0; i < mu.support.cell_count(); ++i) {
            buckets_[pack(bucket_of(mu.support.cells[i]))].push_back(i);
        }
    }

    // Atom indices (in support order) whose cell centers might lie within
    // delta of the plane.
    std::vector<std::size_t> candidates(const AffinePlane& p) const {
        const int level = mu_->level();
        const int blevel = level - shift_;
        const double bdelta = std::ldexp(1.0, -blevel);
        const double delta = mu_->delta();
        // bucket centers within delta + half bucket diagonal
        const double pad = delta + 0.5 * bdelta * std::sqrt(double(mu_->dim()));
        std::vector<std::size_t> out;
        detail::walk_tube_candidates(p, blevel, pad, [&](const CellIndex& c) {
            const auto it = buckets_.find(pack(c));
            if (it == buckets_.end()) return;
            out.insert(out.end(), it->second.begin(), it->second.end());
        });
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    CellIndex bucket_of(const CellIndex& c) const {
        CellIndex b{0, 0, 0};
        for (int i = 0; i < mu_->dim(); ++i)
            b[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] >> shift_;
        return b;
    }
    static std::uint64_t pack(const CellIndex& c) {
        return (std::uint64_t(std::uint32_t(c[0])) << 42) ^
               (std::uint64_t(std::uint32_t(c[1])) << 21) ^ std::uint64_t(std::uint32_t(c[2]));
    }

    const DiscreteMeasure* mu_;
    int shift_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

namespace detail {

// Inner sum of one plane: conditional adds in support order, so the
// accelerated path reproduces the reference double loop bit for bit.
inline double plane_mass(const DiscreteMeasure& mu, const AffinePlane& p,
                         const std::vector<std::size_t>& atom_indices, double r2) {
    double acc = 0.0;
    for (std::size_t i : atom_indices) {
        if (p.distance_sq(mu.support.cell_center(i)) <= r2) acc += mu.weights[i];
    }
    return acc;
}

}  // namespace detail

// sum over planes of weight(P) * mu(delta-tube around P), accelerated by the
// support bucket index; bit-identical to incidence_mass_reference.
inline double incidence_mass(const DiscreteMeasure& mu, const AffineFamily& fam) {
    require(mu.level() == fam.level, "incidence_mass: level mismatch");
    require(mu.dim() == fam.dim_ambient(), "incidence_mass: dimension mismatch");
    const double delta = mu.delta();
    const double r2 = delta * delta;
    const SupportIndex index(mu);
    std::vector<double> per_plane(fam.size(), 0.0);
    parallel_for(fam.size(), [&](std::size_t i) {
        per_plane[i] = detail::plane_mass(mu, fam.members[i], index.candidates(fam.members[i]), r2);
    });
    KahanSum total;
    for (std::size_t i = 0; i < fam.size(); ++i) total.add(fam.weights[i] * per_plane[i]);
    return total.value();
}

// Unaccelerated double loop; the oracle the fast path must match exactly.
inline double incidence_mass_reference(const DiscreteMeasure& mu, const AffineFamily& fam) {
    require(mu.level() == fam.level, "incidence_mass: level mismatch");
    const double delta = mu.delta();
    const double r2 = delta * delta;
    std::vector<std::size_t> all(mu.atom_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    KahanSum total;
    for (std::size_t i = 0; i < fam.size(); ++i)
        total.add(fam.weights[i] * detail::plane_mass(mu, fam.members[i], all, r2));
    return total.value();
}

// lambda(N_delta(A)): total weight of the representatives of a greedy
// delta-net over the family, i.e. members indistinguishable at scale delta
// count their lambda-ball once.
inline double family_neighborhood_measure(const AffineFamily& fam, double radius) {
    const auto reps = greedy_affine_net(fam.members, radius);
    KahanSum s;
    for (std::size_t i : reps) s.add(fam.weights[i]);
    return s.value();
}

// Incidence bound check. The Fubini variant computes both the
// mu x lambda and the mu_1 x lambda readings of the left side and scores the
// conservative (larger) one; the secondary mass rides along in the report.
inline BoundReport check_incidence_bound(const DiscreteMeasure& mu, const AffineFamily& fam,
                                         double s, double sigma, double alpha) {
    const int d = fam.dim_ambient();
    const int k = fam.dim_plane();
    require(mu.dim() == d, "check_incidence_bound: measure dimension mismatch");
    const double crit = double(k + 1) * double(d - k);
    require(alpha > 0.0 && alpha < double(d), "check_incidence_bound: need 0 < alpha < d");
    require(s + sigma >= crit, "check_incidence_bound: need s + sigma >= (k+1)(d-k)");
    const double p = 2.0 + (s + sigma - crit) / (double(d) - alpha);
    const double pprime = p / (p - 1.0);
    const double delta = mu.delta();

    BoundReport r;
    r.check = "incidence_general";
    r.params = {d, k, s, sigma, alpha, p, mu.level()};
    r.family_size = fam.size();
    r.lhs = incidence_mass(mu, fam);
    r.rhs = std::pow(energy(mu, s), 1.0 / p) * std::pow(amplitude(mu, alpha), (p - 2.0) / p) *
            std::pow(family_neighborhood_measure(fam, delta), 1.0 / pprime) *
            std::pow(delta, double(d - k));
    r.finalize();
    return r;
}

inline BoundReport check_incidence_bound(const FubiniMeasure& mu, const AffineFamily& fam,
                                         double s, double sigma, double alpha,
                                         BoundVariant variant) {
    if (variant == BoundVariant::general)
        return check_incidence_bound(mu.assemble(), fam, s, sigma, alpha);
    const int d = fam.dim_ambient();
    const int k = fam.dim_plane();
    require(mu.dim() == d, "check_incidence_bound: measure dimension mismatch");
    require(mu.slice_dim() == d - k,
            "check_incidence_bound: fubini variant needs slices on R^(d-k)");
    for (const auto& m : fam.members)
        require(detail::fubini_span_margin(orthogonal_complement(m.plane), d - k) > 1e-8,
                "check_incidence_bound: span{V, {0}xR^k} = R^d violated");
    const double crit = double(k + 1) * double(d - k);
    require(alpha > 0.0 && alpha < double(d - k),
            "check_incidence_bound: need 0 < alpha < d-k");
    require(s + sigma >= crit, "check_incidence_bound: need s + sigma >= (k+1)(d-k)");
    const double p = 2.0 + (s + sigma - crit) / (double(d - k) - alpha);
    const double pprime = p / (p - 1.0);
    const double delta = std::ldexp(1.0, -fam.level);

    const DiscreteMeasure assembled = mu.assemble();
    // mu_1 x lambda reading: slice weights kept, base weights replaced by 1
    const DiscreteMeasure slice_only = mu.assemble_slices_only();

    BoundReport r;
    r.check = "incidence_fubini";
    r.params = {d, k, s, sigma, alpha, p, fam.level};
    r.family_size = fam.size();
    const double mass_mu = incidence_mass(assembled, fam);
    const double mass_mu1 = incidence_mass(slice_only, fam);
    r.lhs = std::max(mass_mu, mass_mu1);
    r.lhs_secondary = std::min(mass_mu, mass_mu1);
    r.rhs = std::pow(energy(assembled, s), 1.0 / p) *
            std::pow(fubini_slice_amplitude(mu, alpha), (p - 2.0) / p) *
            std::pow(family_neighborhood_measure(fam, delta), 1.0 / pprime) *
            std::pow(delta, double(d - k));
    r.finalize();
    return r;
}

// Seeded random lines meeting the unit square, weighted by the lambda-mass of
// their delta-ball in A(2,1): nu(angle ball) * |offset ball|.
inline AffineFamily random_line_family(std::size_t count, int level, std::uint64_t seed) {
    require(count >= 1, "random_line_family: need at least one line");
    const double pi = std::acos(-1.0);
    const double delta = std::ldexp(1.0, -level);
    SplitMix64 rng(derive_stream(seed, 0x11ce));
    std::vector<AffinePlane> members;
    members.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double theta = pi * rng.uniform();
        const Subspace w = Subspace::line2(theta);
        const Vec m(-std::sin(theta), std::cos(theta));
        const double lo = std::min(m[0], 0.0) + std::min(m[1], 0.0);
        const double hi = std::max(m[0], 0.0) + std::max(m[1], 0.0);
        const double c = lo + (hi - lo) * rng.uniform();
        members.emplace_back(w, c * m);
    }
    const double ball = (2.0 * std::asin(std::min(1.0, delta)) / pi) * (2.0 * delta);
    return AffineFamily(std::move(members), std::vector<double>(count, ball), level);
}

// The canonical lambda_{d,k,nu} discretization: for each direction a
// delta-grid of offsets covering the cube's shadow in the normal directions,
// each plane weighted nu(W) * delta^(d-k).
inline AffineFamily affine_grid_family(const DirectionFamily& dirs, int level) {
    dirs.validate();
    const int d = dirs.dim_ambient();
    const int k = dirs.dim_plane();
    const double delta = std::ldexp(1.0, -level);
    std::vector<AffinePlane> members;
    std::vector<double> weights;
    for (std::size_t di = 0; di < dirs.size(); ++di) {
        const Subspace& w = dirs.members[di];
        const Subspace comp = orthogonal_complement(w);
        std::array<std::pair<std::int64_t, std::int64_t>, 2> rng{};
        for (int a = 0; a < d - k; ++a) {
            double lo = 0, hi = 0;
            for (int i = 0; i < d; ++i) {
                const double e = comp.basis[static_cast<std::size_t>(a)][i];
                lo += std::min(e, 0.0);
                hi += std::max(e, 0.0);
            }
            rng[static_cast<std::size_t>(a)] = {
                static_cast<std::int64_t>(std::floor(lo / delta)),
                static_cast<std::int64_t>(std::ceil(hi / delta))};
        }
        for (int a = d - k; a < 2; ++a) rng[static_cast<std::size_t>(a)] = {0, 0};
        const double wgt = dirs.nu_weights[di] * std::pow(delta, double(d - k));
        for (std::int64_t i = rng[0].first; i <= rng[0].second; ++i) {
            for (std::int64_t j = rng[1].first; j <= rng[1].second; ++j) {
                Vec u = (double(i) + 0.5) * delta * comp.basis[0];
                if (d - k >= 2) u = u + (double(j) + 0.5) * delta * comp.basis[1];
                AffinePlane plane(w, u);
                // keep planes whose tube can meet the cube
                bool near = true;
                for (int c = 0; c < d; ++c)
                    if (plane.offset[c] < -1.0 || plane.offset[c] > 2.0) near = false;
                if (near) {
                    members.push_back(std::move(plane));
                    weights.push_back(wgt);
                }
            }
        }
    }
    return AffineFamily(std::move(members), std::move(weights), level);
}

// --- text format: "d k count level" header, rows: plane basis entries
// row-major, offset vector, weight ---

inline void write_affine_family(std::ostream& os, const AffineFamily& fam) {
    os << fam.dim_ambient() << ' ' << fam.dim_plane() << ' ' << fam.size() << ' ' << fam.level
       << '\n';
    char buf[64];
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto& m = fam.members[i];
        for (int r = 0; r < m.plane.dim_ambient; ++r)
            for (int c = 0; c < m.plane.dim_plane; ++c) {
                std::snprintf(buf, sizeof buf, "%.15g", m.plane.basis[static_cast<std::size_t>(c)][r]);
                os << buf << ' ';
            }
        for (int r = 0; r < m.plane.dim_ambient; ++r) {
            std::snprintf(buf, sizeof buf, "%.15g", m.offset[r]);
            os << buf << ' ';
        }
        std::snprintf(buf, sizeof buf, "%.15g", fam.weights[i]);
        os << buf << '\n';
    }
}

inline AffineFamily read_affine_family(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "affine family: missing header");
    std::istringstream hdr(line);
    int d = 0, k = 0, level = 0;
    std::size_t count = 0;
    require(static_cast<bool>(hdr >> d >> k >> count >> level),
            "affine family: malformed header");
    std::vector<AffinePlane> members;
    std::vector<double> weights;
    for (std::size_t i = 0; i < count; ++i) {
        require(static_cast<bool>(std::getline(is, line)), "affine family: missing member row");
        std::istringstream ls(line);
        std::array<Vec, 3> cols{};
        for (int c = 0; c < k; ++c) cols[static_cast<std::size_t>(c)] = Vec(d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < k; ++c)
                require(static_cast<bool>(ls >> cols[static_cast<std::size_t>(c)][r]),
                        "affine family: malformed basis entry");
        Vec u(d);
        for (int r = 0; r < d; ++r)
            require(static_cast<bool>(ls >> u[r]), "affine family: malformed offset");
        double w = 0;
        require(static_cast<bool>(ls >> w), "affine family: missing weight");
        members.emplace_back(Subspace(d, k, cols), u);
        weights.push_back(w);
    }
    return AffineFamily(std::move(members), std::move(weights), level);
}

}  // namespace frostlab
