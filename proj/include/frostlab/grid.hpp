#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/linalg.hpp"

// Dyadic delta-discretization of subsets of [0,1]^d. Cells are half-open
// [i*delta, (i+1)*delta) per axis, so every point lies in exactly one cell.

namespace frostlab {

using CellIndex = std::array<std::int32_t, 3>;  // components beyond dim stay 0

// Half-open box [lo, hi) per coordinate; a coordinate with lo == hi means
// "the cell containing that value" (point semantics).
struct Box {
    Vec lo;
    Vec hi;
};

struct DeltaSet {
    int dim = 1;                   // ambient dimension, 1..3
    int level = 1;                 // delta = 2^-level
    std::int64_t extent = 2;       // cells per axis; 2^level for subsets of [0,1]^dim
    bool clipped = false;          // a sum/product output was truncated to a declared range
    std::vector<CellIndex> cells;  // lexicographically sorted, duplicate-free

    DeltaSet() = default;
    DeltaSet(int dim_, int level_, std::vector<CellIndex> cells_,
             std::optional<std::int64_t> extent_ = std::nullopt)
        : dim(dim_), level(level_), cells(std::move(cells_)) {
        extent = extent_ ? *extent_ : (std::int64_t{1} << level_);
        normalize();
        validate();
    }

    double delta() const { return std::ldexp(1.0, -level); }
    std::size_t cell_count() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    bool unit_range() const { return extent == (std::int64_t{1} << level); }

    Vec cell_center(std::size_t i) const {
        Vec c(dim);
        const double d = delta();
        for (int k = 0; k < dim; ++k) c[k] = (cells[i][static_cast<std::size_t>(k)] + 0.5) * d;
        return c;
    }

    void normalize() {
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    }

    void validate() const {
        require(dim >= 1 && dim <= 3, "DeltaSet: dim must be in {1,2,3}");
        require(level >= 1, "DeltaSet: level must be >= 1");
        require(extent >= 1, "DeltaSet: extent must be >= 1");
        for (const auto& c : cells)
            for (int k = 0; k < dim; ++k)
                require(c[static_cast<std::size_t>(k)] >= 0 && c[static_cast<std::size_t>(k)] < extent,
                        "DeltaSet: cell index out of range");
    }
};

struct DimensionFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;        // max |log2 count - fit|
    std::vector<int> levels;
};

// Ordinary least squares of log2(counts) against levels; residual is the
// max absolute deviation so callers can reject bad fits.
inline DimensionFit fit_log2_counts(const std::vector<int>& levels,
                                    const std::vector<double>& counts) {
    require(levels.size() >= 3, "dimension fit needs at least 3 levels");
    require(levels.size() == counts.size(), "dimension fit: size mismatch");
    const std::size_t n = levels.size();
    double sx = 0, sy = 0;
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(counts[i] > 0, "dimension fit: counts must be positive");
        ys[i] = std::log2(counts[i]);
        sx += levels[i];
        sy += ys[i];
    }
    const double xbar = sx / double(n), ybar = sy / double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (levels[i] - xbar) * (levels[i] - xbar);
        sxy += (levels[i] - xbar) * (ys[i] - ybar);
    }
    DimensionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    fit.levels = levels;
    for (std::size_t i = 0; i < n; ++i)
        fit.residual = std::max(fit.residual, std::abs(ys[i] - (fit.slope * levels[i] + fit.intercept)));
    return fit;
}

namespace detail {

// Index range of level-cells meeting the half-open interval [lo, hi) within
// [0,1); lo == hi selects the single cell containing the point (1.0 maps to
// the last cell).
inline std::pair<std::int64_t, std::int64_t> cell_range_1d(double lo, double hi, int level) {
    const std::int64_t n = std::int64_t{1} << level;
    if (lo == hi) {
        std::int64_t i = static_cast<std::int64_t>(std::floor(lo * double(n)));
        i = std::clamp<std::int64_t>(i, 0, n - 1);
        return {i, i};
    }
    // cells i with i*delta < hi and (i+1)*delta > lo
    std::int64_t first = static_cast<std::int64_t>(std::floor(lo * double(n)));
    if (double(first + 1) <= lo * double(n)) ++first;  // (first+1)*delta > lo strictly
    std::int64_t last = static_cast<std::int64_t>(std::ceil(hi * double(n))) - 1;
    first = std::clamp<std::int64_t>(first, 0, n - 1);
    last = std::clamp<std::int64_t>(last, 0, n - 1);
    return {first, last};
}

}  // namespace detail

// All level-cells meeting at least one generator box.
inline DeltaSet quantize(const std::vector<Box>& boxes, int level, int dim) {
    require(level >= 1, "quantize: level must be >= 1");
    require(dim >= 1 && dim <= 3, "quantize: dim must be in {1,2,3}");
    std::vector<CellIndex> cells;
    for (const auto& b : boxes) {
        require(b.lo.dim == dim && b.hi.dim == dim, "quantize: generator dimension mismatch");
        std::array<std::pair<std::int64_t, std::int64_t>, 3> rng;
        for (int k = 0; k < dim; ++k) {
            require(b.lo[k] >= 0.0 && b.hi[k] <= 1.0 && b.lo[k] <= b.hi[k],
                    "quantize: generator outside [0,1]^dim");
            rng[static_cast<std::size_t>(k)] = detail::cell_range_1d(b.lo[k], b.hi[k], level);
        }
        for (int k = dim; k < 3; ++k) rng[static_cast<std::size_t>(k)] = {0, 0};
        for (std::int64_t i = rng[0].first; i <= rng[0].second; ++i)
            for (std::int64_t j = rng[1].first; j <= rng[1].second; ++j)
                for (std::int64_t k = rng[2].first; k <= rng[2].second; ++k)
                    cells.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                     static_cast<std::int32_t>(k)});
    }
    return DeltaSet(dim, level, std::move(cells));
}

inline DeltaSet quantize(const std::vector<Vec>& points, int level, int dim) {
    std::vector<Box> boxes;
    boxes.reserve(points.size());
    for (const auto& p : points) boxes.push_back(Box{p, p});
    return quantize(boxes, level, dim);
}

// The same set re-expressed at a coarser scale.
inline DeltaSet coarsen(const DeltaSet& set, int coarse_level) {
    require(coarse_level >= 1 && coarse_level <= set.level,
            "coarsen: coarse_level out of range");
    const int shift = set.level - coarse_level;
    std::vector<CellIndex> cells(set.cells);
    for (auto& c : cells)
        for (int k = 0; k < set.dim; ++k) c[static_cast<std::size_t>(k)] >>= shift;
    std::int64_t ext = (set.extent + ((std::int64_t{1} << shift) - 1)) >> shift;
    DeltaSet out(set.dim, coarse_level, std::move(cells), ext);
    out.clipped = set.clipped;
    return out;
}

// Number of cells at scale 2^-coarse_level containing at least one cell of set.
inline std::size_t box_count(const DeltaSet& set, int coarse_level) {
    require(coarse_level >= 1 && coarse_level <= set.level,
            "box_count: coarse_level out of range");
    if (coarse_level == set.level) return set.cell_count();
    return coarsen(set, coarse_level).cell_count();
}

// All cells within Chebyshev distance radius_cells of some cell of set,
// clipped to the set's extent. Superset of set for radius >= 0.
inline DeltaSet neighborhood(const DeltaSet& set, int radius_cells) {
    require(radius_cells >= 0, "neighborhood: radius must be >= 0");
    if (radius_cells == 0) return set;
    std::vector<CellIndex> cells;
    cells.reserve(set.cells.size());
    const std::int32_t r = radius_cells;
    const std::int64_t n = set.extent;
    for (const auto& c : set.cells) {
        std::array<std::pair<std::int32_t, std::int32_t>, 3> rng;
        for (int k = 0; k < set.dim; ++k) {
            auto lo = std::max<std::int64_t>(0, c[static_cast<std::size_t>(k)] - r);
            auto hi = std::min<std::int64_t>(n - 1, c[static_cast<std::size_t>(k)] + r);
            rng[static_cast<std::size_t>(k)] = {static_cast<std::int32_t>(lo), static_cast<std::int32_t>(hi)};
        }
        for (int k = set.dim; k < 3; ++k) rng[static_cast<std::size_t>(k)] = {0, 0};
        for (std::int32_t i = rng[0].first; i <= rng[0].second; ++i)
            for (std::int32_t j = rng[1].first; j <= rng[1].second; ++j)
                for (std::int32_t kk = rng[2].first; kk <= rng[2].second; ++kk)
                    cells.push_back({i, j, kk});
    }
    DeltaSet out(set.dim, set.level, std::move(cells), set.extent);
    out.clipped = set.clipped;
    return out;
}

// Least-squares box dimension over [min_level, max_level].
inline DimensionFit box_dimension(const DeltaSet& set, int min_level, int max_level) {
    require(1 <= min_level && min_level < max_level && max_level <= set.level,
            "box_dimension: level range invalid");
    require(max_level - min_level + 1 >= 3, "box_dimension: need at least 3 levels");
    std::vector<int> levels;
    std::vector<double> counts;
    for (int l = min_level; l <= max_level; ++l) {
        levels.push_back(l);
        counts.push_back(double(box_count(set, l)));
    }
    return fit_log2_counts(levels, counts);
}

// Index-arithmetic Minkowski sum for 1D sets at a common level: cell i + cell
// j covers exactly cells i+j and i+j+1. Output range defaults to the sum of
// the input ranges; a narrower declared range sets the clipped flag instead
// of dropping mass silently.
inline DeltaSet sumset(const DeltaSet& a, const DeltaSet& b,
                       std::optional<std::int64_t> declared_extent = std::nullopt) {
    require(a.dim == 1 && b.dim == 1, "sumset: 1D sets only");
    require(a.level == b.level, "sumset: level mismatch");
    std::int64_t full = a.extent + b.extent;
    std::int64_t ext = declared_extent ? *declared_extent : full;
    require(ext >= 1, "sumset: declared range must be positive");
    bool clip = false;
    std::vector<CellIndex> cells;
    cells.reserve(2 * a.cells.size());
    for (const auto& ca : a.cells) {
        for (const auto& cb : b.cells) {
            std::int64_t base = std::int64_t{ca[0]} + std::int64_t{cb[0]};
            for (std::int64_t s = base; s <= base + 1; ++s) {
                if (s >= ext) {
                    clip = true;
                    continue;
                }
                cells.push_back({static_cast<std::int32_t>(s), 0, 0});
            }
        }
    }
    DeltaSet out(1, a.level, std::move(cells), ext);
    out.clipped = clip || a.clipped || b.clipped;
    return out;
}

// Product set of two subsets of [1,2] stored in the chart x -> x-1, i.e. as
// ordinary 1D unit-range sets. Cell i stands for [1+i*delta, 1+(i+1)*delta);
// endpoint products are dyadic rationals, so the covered output cells are
// computed in exact integer arithmetic. Output extent 3*2^level covers [1,4].
inline DeltaSet productset(const DeltaSet& a, const DeltaSet& c) {
    require(a.dim == 1 && c.dim == 1, "productset: 1D sets only");
    require(a.level == c.level, "productset: level mismatch");
    require(a.unit_range() && c.unit_range(), "productset: support outside [1,2]");
    const std::int64_t L = std::int64_t{1} << a.level;
    std::vector<CellIndex> cells;
    for (const auto& ca : a.cells) {
        const std::int64_t i = ca[0];
        for (const auto& cc : c.cells) {
            const std::int64_t j = cc[0];
            // chart endpoints of the product interval, as numerators over L:
            // lo - 1 = (i+j)*delta + i*j*delta^2, hi - 1 likewise with i+1, j+1
            const std::int64_t lo_num = (i + j) * L + i * j;
            const std::int64_t hi_num = (i + j + 2) * L + (i + 1) * (j + 1);
            const std::int64_t k_first = lo_num / L;
            const std::int64_t k_last = (hi_num - 1) / L;  // cells with k*L < hi_num
            for (std::int64_t k = k_first; k <= k_last; ++k)
                cells.push_back({static_cast<std::int32_t>(k), 0, 0});
        }
    }
    return DeltaSet(1, a.level, std::move(cells), 3 * L);
}

// --- text format: "dim level[ extent]" header, one index vector per line ---

inline void write_delta_set(std::ostream& os, const DeltaSet& set) {
    os << set.dim << ' ' << set.level;
    if (!set.unit_range()) os << ' ' << set.extent;
    os << '\n';
    for (const auto& c : set.cells) {
        for (int k = 0; k < set.dim; ++k) {
            if (k) os << ' ';
            os << c[static_cast<std::size_t>(k)];
        }
        os << '\n';
    }
}

inline DeltaSet read_delta_set(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "delta set: missing header");
    std::istringstream hdr(line);
    int dim = 0, level = 0;
    std::int64_t extent = -1;
    require(static_cast<bool>(hdr >> dim >> level), "delta set: malformed header");
    hdr >> extent;
    std::vector<CellIndex> cells;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::istringstream ls(line);
        CellIndex c{0, 0, 0};
        for (int k = 0; k < dim; ++k)
            require(static_cast<bool>(ls >> c[static_cast<std::size_t>(k)]),
                    "delta set: malformed cell row");
        cells.push_back(c);
    }
    if (extent < 0) extent = std::int64_t{1} << level;
    return DeltaSet(dim, level, std::move(cells), extent);
}

}  // namespace frostlab
