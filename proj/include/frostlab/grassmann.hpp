#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/generators.hpp"
#include "frostlab/linalg.hpp"

// Subspaces V in G(d,n), affine planes W+u in A(d,k) with u in the orthogonal
// complement, and finite direction families carrying nu-weights.

namespace frostlab {

struct Subspace {
    int dim_ambient = 2;
    int dim_plane = 1;
    std::array<Vec, 3> basis{};  // dim_plane orthonormal columns, each of dim_ambient

    Subspace() = default;
    Subspace(int d, int n, std::array<Vec, 3> cols) : dim_ambient(d), dim_plane(n), basis(cols) {
        require(d >= 1 && d <= 3 && n >= 1 && n <= d, "Subspace: invalid (d,n)");
        for (int a = 0; a < n; ++a) {
            require(basis[static_cast<std::size_t>(a)].dim == d, "Subspace: basis column dim mismatch");
            for (int b = 0; b <= a; ++b) {
                const double want = (a == b) ? 1.0 : 0.0;
                require(std::abs(dot(basis[static_cast<std::size_t>(a)],
                                     basis[static_cast<std::size_t>(b)]) - want) <= 1e-10,
                        "Subspace: basis must be orthonormal");
            }
        }
    }

    static Subspace line2(double angle) {
        return Subspace(2, 1, {Vec(std::cos(angle), std::sin(angle)), Vec(), Vec()});
    }
    static Subspace axis(int d, int k) {
        Vec e(d);
        e[k] = 1.0;
        return Subspace(d, 1, {e, Vec(), Vec()});
    }

    Mat projector() const {
        Mat p = Mat::zero(dim_ambient);
        for (int a = 0; a < dim_plane; ++a) {
            const Vec& e = basis[static_cast<std::size_t>(a)];
            for (int r = 0; r < dim_ambient; ++r)
                for (int c = 0; c < dim_ambient; ++c) p.at(r, c) += e[r] * e[c];
        }
        return p;
    }
};

// Coordinates of the orthogonal projection of x in the plane's frame.
inline Vec project_point(const Subspace& v, const Vec& x) {
    require(x.dim == v.dim_ambient, "project_point: point dimension mismatch");
    Vec out(v.dim_plane);
    for (int a = 0; a < v.dim_plane; ++a) out[a] = dot(v.basis[static_cast<std::size_t>(a)], x);
    return out;
}

// Point of R^d realizing those coordinates (basis * coords).
inline Vec embed_point(const Subspace& v, const Vec& coords) {
    Vec out(v.dim_ambient);
    for (int a = 0; a < v.dim_plane; ++a)
        out = out + coords[a] * v.basis[static_cast<std::size_t>(a)];
    return out;
}

// Orthonormal basis of the orthogonal complement, by Gram-Schmidt against the
// coordinate axes.
inline Subspace orthogonal_complement(const Subspace& v) {
    const int d = v.dim_ambient;
    std::array<Vec, 3> cols{};
    int have = 0;
    for (int k = 0; k < d && have < d - v.dim_plane; ++k) {
        Vec w(d);
        w[k] = 1.0;
        for (int a = 0; a < v.dim_plane; ++a) {
            const Vec& e = v.basis[static_cast<std::size_t>(a)];
            w = w - dot(w, e) * e;
        }
        for (int a = 0; a < have; ++a) {
            const Vec& e = cols[static_cast<std::size_t>(a)];
            w = w - dot(w, e) * e;
        }
        const double nw = norm(w);
        if (nw > 1e-8) {
            cols[static_cast<std::size_t>(have++)] = (1.0 / nw) * w;
        }
    }
    require(have == d - v.dim_plane, "orthogonal_complement: rank deficiency");
    return Subspace(d, d - v.dim_plane, cols);
}

// d_G(V,V') = operator norm of the projector difference.
inline double grassmann_metric(const Subspace& v, const Subspace& vp) {
    require(v.dim_ambient == vp.dim_ambient && v.dim_plane == vp.dim_plane,
            "grassmann_metric: shape mismatch");
    return symmetric_operator_norm(v.projector() - vp.projector());
}

struct AffinePlane {
    Subspace plane;  // the W of W+u, dim k
    Vec offset;      // u, orthogonal to W

    AffinePlane() = default;
    AffinePlane(Subspace plane_, Vec offset_) : plane(std::move(plane_)), offset(offset_) {
        require(offset.dim == plane.dim_ambient, "AffinePlane: offset dimension mismatch");
        // store the W^perp part only, so the invariant holds by construction
        for (int a = 0; a < plane.dim_plane; ++a) {
            const Vec& e = plane.basis[static_cast<std::size_t>(a)];
            offset = offset - dot(offset, e) * e;
        }
    }

    // plane through x with direction W
    static AffinePlane through(const Subspace& w, const Vec& x) { return AffinePlane(w, x); }

    // 2D line x2 = a*x1 + b. Lines built this way remember their chart so
    // duality transport can round-trip exactly; geometry never reads it.
    static AffinePlane from_slope_intercept(double a, double b) {
        const double h = std::sqrt(1.0 + a * a);
        AffinePlane p(Subspace(2, 1, {Vec(1.0 / h, a / h), Vec(), Vec()}), Vec(0.0, b));
        p.line2_chart = std::array<double, 2>{a, b};
        return p;
    }

    std::optional<std::array<double, 2>> line2_chart;

    double distance_sq(const Vec& x) const {
        Vec r = x - offset;
        for (int a = 0; a < plane.dim_plane; ++a) {
            const Vec& e = plane.basis[static_cast<std::size_t>(a)];
            r = r - dot(r, e) * e;
        }
        return dot(r, r);
    }
    double distance(const Vec& x) const { return std::sqrt(distance_sq(x)); }
};

inline double affine_metric(const AffinePlane& p, const AffinePlane& q) {
    require(p.offset.dim == q.offset.dim && p.plane.dim_plane == q.plane.dim_plane,
            "affine_metric: shape mismatch");
    return grassmann_metric(p.plane, q.plane) + norm(p.offset - q.offset);
}

namespace detail {

// Bucket embedding for r-net construction: first projector row plus offset.
// Each coordinate moves by at most the affine metric, so candidates within r
// always sit in a neighboring bucket.
struct AffineBucketIndex {
    double radius;
    int dims;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;

    static std::array<double, 6> embed(const AffinePlane& p) {
        std::array<double, 6> c{};
        const Mat proj = p.plane.projector();
        const int d = p.plane.dim_ambient;
        for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = proj.at(0, i);
        for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(d + i)] = p.offset[i];
        return c;
    }

    std::uint64_t key(const std::array<double, 6>& c,
                      const std::array<int, 6>& shift) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int i = 0; i < dims; ++i) {
            const auto cell = static_cast<std::int64_t>(
                                  std::floor(c[static_cast<std::size_t>(i)] / radius)) +
                              shift[static_cast<std::size_t>(i)];
            h ^= static_cast<std::uint64_t>(cell) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace detail

// Greedy maximal r-separated subset, scanned in member order (the
// deterministic contract). Returns the indices of the net representatives;
// every member lies within r of some representative, so the count is a
// 2-approximate covering number at scale r.
inline std::vector<std::size_t> greedy_affine_net(const std::vector<AffinePlane>& members,
                                                  double r) {
    require(r > 0, "greedy_affine_net: radius must be positive");
    std::vector<std::size_t> reps;
    if (members.empty()) return reps;
    const int d = members.front().plane.dim_ambient;
    detail::AffineBucketIndex index{r, 2 * d, {}};

    std::vector<std::array<double, 6>> coords(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
        coords[i] = detail::AffineBucketIndex::embed(members[i]);

    std::array<int, 6> shift{};
    for (std::size_t i = 0; i < members.size(); ++i) {
        bool covered = false;
        // enumerate the 3^dims neighbor buckets
        shift.fill(-1);
        while (true) {
            const auto it = index.buckets.find(index.key(coords[i], shift));
            if (it != index.buckets.end()) {
                for (std::size_t j : it->second) {
                    if (affine_metric(members[i], members[j]) <= r) {
                        covered = true;
                        break;
                    }
                }
            }
            if (covered) break;
            int k = 0;
            for (; k < index.dims; ++k) {
                if (++shift[static_cast<std::size_t>(k)] <= 1) break;
                shift[static_cast<std::size_t>(k)] = -1;
            }
            if (k == index.dims) break;
        }
        if (!covered) {
            reps.push_back(i);
            shift.fill(0);
            index.buckets[index.key(coords[i], shift)].push_back(i);
        }
    }
    return reps;
}

// How directions are sampled: the full Grassmannian at the given resolution,
// or (d=2 only) a Cantor angle family of the given exponent.
struct DirectionSpec {
    enum class Kind { full, cantor } kind = Kind::full;
    double sigma = 0.0;  // cantor only

    static DirectionSpec full() { return {Kind::full, 0.0}; }
    static DirectionSpec cantor(double sigma) { return {Kind::cantor, sigma}; }
};

struct DirectionFamily {
    std::vector<Subspace> members;   // all of one (d,n)
    std::vector<double> nu_weights;  // non-negative, summing to 1
    double sigma = 1.0;              // declared non-concentration exponent
    int angular_level = 3;           // dyadic sampling resolution

    int dim_ambient() const { return members.front().dim_ambient; }
    int dim_plane() const { return members.front().dim_plane; }
    std::size_t size() const { return members.size(); }

    void validate() const {
        require(!members.empty(), "DirectionFamily: empty family");
        double s = 0;
        for (double w : nu_weights) {
            require(w >= 0, "DirectionFamily: negative weight");
            s += w;
        }
        require(std::abs(s - 1.0) <= 1e-12, "DirectionFamily: weights must sum to 1");
        require(nu_weights.size() == members.size(), "DirectionFamily: weight count mismatch");
    }
};

namespace detail {

inline DirectionFamily full_family_2d(int angular_level) {
    const std::size_t m = std::size_t{1} << angular_level;
    DirectionFamily fam;
    fam.sigma = 1.0;
    fam.angular_level = angular_level;
    const double pi = std::acos(-1.0);
    for (std::size_t k = 0; k < m; ++k)
        fam.members.push_back(Subspace::line2(pi * double(k) / double(m)));
    fam.nu_weights.assign(m, 1.0 / double(m));
    return fam;
}

// Fibonacci lattice on the upper hemisphere; antipodal identification makes
// this a near-uniform net of G(3,1) with spacing ~ 2^-angular_level.
inline std::vector<Vec> hemisphere_lattice(int angular_level) {
    const std::size_t m = std::size_t{1} << (2 * angular_level);
    const double ga = std::acos(-1.0) * (3.0 - std::sqrt(5.0));  // golden angle
    std::vector<Vec> pts;
    pts.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double z = (double(k) + 0.5) / double(m);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = ga * double(k);
        pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return pts;
}

}  // namespace detail

// Deterministic direction sampling. `full` covers the whole Grassmannian with
// equal weights and sigma = dim G(d,n); `cantor(sigma)` (d=2 only) places the
// angle parameters on a (delta,sigma)-set in [0,pi).
inline DirectionFamily sample_directions(int d, int n, const DirectionSpec& spec,
                                         int angular_level, std::uint64_t seed) {
    require((d == 2 && n == 1) || (d == 3 && n == 1) || (d == 3 && n == 2),
            "sample_directions: (d,n) must be one of (2,1),(3,1),(3,2)");
    require(angular_level >= 3, "sample_directions: angular_level must be >= 3");
    if (spec.kind == DirectionSpec::Kind::cantor) {
        require(d == 2, "sample_directions: cantor spec requires d = 2");
        const DeltaSet angles = cantor_set(angular_level, spec.sigma, seed);
        DirectionFamily fam;
        fam.sigma = spec.sigma;
        fam.angular_level = angular_level;
        const double pi = std::acos(-1.0);
        for (std::size_t i = 0; i < angles.cell_count(); ++i)
            fam.members.push_back(Subspace::line2(pi * angles.cell_center(i)[0]));
        fam.nu_weights.assign(fam.members.size(), 1.0 / double(fam.members.size()));
        fam.validate();
        return fam;
    }
    if (d == 2) {
        DirectionFamily fam = detail::full_family_2d(angular_level);
        fam.validate();
        return fam;
    }
    const auto normals = detail::hemisphere_lattice(angular_level);
    DirectionFamily fam;
    fam.sigma = 2.0;  // dim G(3,1) = dim G(3,2) = 2
    fam.angular_level = angular_level;
    for (const auto& u : normals) {
        const Subspace line(3, 1, {u, Vec(), Vec()});
        fam.members.push_back(n == 1 ? line : orthogonal_complement(line));
    }
    fam.nu_weights.assign(fam.members.size(), 1.0 / double(fam.members.size()));
    fam.validate();
    return fam;
}

// Frostman audit of the nu-weights in the Grassmann metric, mirroring the
// measure-side audit: max over members and dyadic radii of nu(B(V,r))/r^sigma.
inline double family_frostman_constant(const DirectionFamily& fam, double sigma) {
    require(sigma > 0, "family_frostman_constant: sigma must be positive");
    const int rungs = fam.angular_level + 1;
    const std::size_t n = fam.size();
    std::vector<double> rows(n, 0.0);
    const double d0 = std::ldexp(1.0, -fam.angular_level);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> mass(static_cast<std::size_t>(rungs), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double dist = grassmann_metric(fam.members[i], fam.members[j]);
            int m = 0;
            while (m < rungs && dist >= std::ldexp(d0, m)) ++m;
            if (m < rungs) mass[static_cast<std::size_t>(m)] += fam.nu_weights[j];
        }
        double cum = 0, w = 0;
        for (int m = 0; m < rungs; ++m) {
            cum += mass[static_cast<std::size_t>(m)];
            w = std::max(w, cum / std::pow(std::ldexp(d0, m), sigma));
        }
        rows[i] = w;
    });
    return *std::max_element(rows.begin(), rows.end());
}

// --- text format: "d n count sigma" header, then per member the basis
// entries row-major followed by the weight ---

inline void write_direction_family(std::ostream& os, const DirectionFamily& fam) {
    os << fam.dim_ambient() << ' ' << fam.dim_plane() << ' ' << fam.size() << ' ';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", fam.sigma);
    os << buf << '\n';
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto& m = fam.members[i];
        for (int r = 0; r < m.dim_ambient; ++r)
            for (int c = 0; c < m.dim_plane; ++c) {
                std::snprintf(buf, sizeof buf, "%.15g", m.basis[static_cast<std::size_t>(c)][r]);
                os << buf << ' ';
            }
        std::snprintf(buf, sizeof buf, "%.15g", fam.nu_weights[i]);
        os << buf << '\n';
    }
}

inline DirectionFamily read_direction_family(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "direction family: missing header");
    std::istringstream hdr(line);
    int d = 0, n = 0;
    std::size_t count = 0;
    double sigma = 0;
    require(static_cast<bool>(hdr >> d >> n >> count >> sigma),
            "direction family: malformed header");
    DirectionFamily fam;
    fam.sigma = sigma;
    for (std::size_t i = 0; i < count; ++i) {
        require(static_cast<bool>(std::getline(is, line)), "direction family: missing member row");
        std::istringstream ls(line);
        std::array<Vec, 3> cols{};
        for (int c = 0; c < n; ++c) cols[static_cast<std::size_t>(c)] = Vec(d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < n; ++c)
                require(static_cast<bool>(ls >> cols[static_cast<std::size_t>(c)][r]),
                        "direction family: malformed basis entry");
        double w = 0;
        require(static_cast<bool>(ls >> w), "direction family: missing weight");
        fam.members.emplace_back(d, n, cols);
        fam.nu_weights.push_back(w);
    }
    fam.validate();
    return fam;
}

}  // namespace frostlab
