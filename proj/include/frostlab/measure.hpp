#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/grid.hpp"

// Discrete measures on DeltaSets: weights on cells, atoms at cell centers.
// Energies and amplitudes clamp the kernel singularity at delta and keep the
// diagonal term, matching the delta-discretized heuristic I_s(chi_A) ~
// delta^(1-s)|A| instead of mollifying.

namespace frostlab {

struct DiscreteMeasure {
    DeltaSet support;
    std::vector<double> weights;  // one per support cell, in support order

    DiscreteMeasure() = default;
    DiscreteMeasure(DeltaSet support_, std::vector<double> weights_)
        : support(std::move(support_)), weights(std::move(weights_)) {
        require(weights.size() == support.cell_count(),
                "DiscreteMeasure: weight count must match cell count");
        for (double w : weights) require(w >= 0.0, "DiscreteMeasure: negative weight");
    }

    int dim() const { return support.dim; }
    int level() const { return support.level; }
    double delta() const { return support.delta(); }
    std::size_t atom_count() const { return weights.size(); }

    double total_mass() const {
        KahanSum s;
        for (double w : weights) s.add(w);
        return s.value();
    }
};

inline DiscreteMeasure uniform_measure(const DeltaSet& set) {
    require(!set.empty(), "uniform_measure: empty set");
    return DiscreteMeasure(set, std::vector<double>(set.cell_count(), 1.0 / double(set.cell_count())));
}

namespace detail {

inline std::vector<Vec> atom_centers(const DiscreteMeasure& mu) {
    std::vector<Vec> c(mu.atom_count());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = mu.support.cell_center(i);
    return c;
}

inline double clamped_distance(const Vec& a, const Vec& b, double floor_value) {
    double d2 = 0;
    for (int k = 0; k < a.dim; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::max(std::sqrt(d2), floor_value);
}

}  // namespace detail

// I_s(mu) = sum_{i,j} w_i w_j max(|x_i-x_j|, delta)^-s, diagonal included.
// Rows are evaluated independently (schedule invariant) and combined with a
// compensated sum in index order.
inline double energy(const DiscreteMeasure& mu, double s) {
    require(s > 0, "energy: s must be positive");
    const auto centers = detail::atom_centers(mu);
    const double d = mu.delta();
    const std::size_t n = mu.atom_count();
    std::vector<double> rows(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += mu.weights[j] * std::pow(detail::clamped_distance(centers[i], centers[j], d), -s);
        rows[i] = mu.weights[i] * acc;
    });
    KahanSum total;
    for (double r : rows) total.add(r);
    return total.value();
}

// A_alpha(mu) = max over support centers x of sum_y w_y max(|x-y|, delta)^-alpha.
inline double amplitude(const DiscreteMeasure& mu, double alpha) {
    require(alpha > 0, "amplitude: alpha must be positive");
    const auto centers = detail::atom_centers(mu);
    const double d = mu.delta();
    const std::size_t n = mu.atom_count();
    std::vector<double> rows(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += mu.weights[j] * std::pow(detail::clamped_distance(centers[i], centers[j], d), -alpha);
        rows[i] = acc;
    });
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

// Smallest Frostman constant witnessed on the dyadic ladder: max over support
// centers x and radii r in {delta, 2*delta, ..., 1} of mu(B(x,r))/r^alpha.
// Balls are open; the closed-ball constant differs by at most the next rung.
inline double frostman_constant(const DiscreteMeasure& mu, double alpha) {
    require(alpha > 0, "frostman_constant: alpha must be positive");
    const auto centers = detail::atom_centers(mu);
    const double d = mu.delta();
    const std::size_t n = mu.atom_count();
    const int rungs = mu.level() + 1;  // r = 2^m * delta, m = 0..level
    std::vector<double> rows(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> mass(static_cast<std::size_t>(rungs), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double dist = detail::clamped_distance(centers[i], centers[j], 0.0);
            int m = 0;
            while (m < rungs && dist >= std::ldexp(d, m)) ++m;
            if (m < rungs) mass[static_cast<std::size_t>(m)] += mu.weights[j];
        }
        double cum = 0, w = 0;
        for (int m = 0; m < rungs; ++m) {
            cum += mass[static_cast<std::size_t>(m)];
            w = std::max(w, cum / std::pow(std::ldexp(d, m), alpha));
        }
        rows[i] = w;
    });
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

// Measure with the Fubini disintegration d mu = d mu_1^{x2}(x1) d mu_2(x2):
// one slice measure on R^n per cell of the base measure on R^(d-n).
struct FubiniMeasure {
    DiscreteMeasure base2;                 // mu_2
    std::vector<DiscreteMeasure> slices;   // mu_1^{x2}, indexed in base2 support order

    FubiniMeasure() = default;
    FubiniMeasure(DiscreteMeasure base2_, std::vector<DiscreteMeasure> slices_)
        : base2(std::move(base2_)), slices(std::move(slices_)) {
        require(!slices.empty(), "FubiniMeasure: empty slices");
        require(slices.size() == base2.atom_count(),
                "FubiniMeasure: one slice per base cell required");
        for (const auto& s : slices) {
            require(s.dim() == slices.front().dim(), "FubiniMeasure: slice dimension mismatch");
            require(s.level() == base2.level(), "FubiniMeasure: slices must share the base level");
            require(!s.support.empty(), "FubiniMeasure: empty slice support");
        }
        require(slice_dim() + base2.dim() <= 3, "FubiniMeasure: assembled dimension exceeds 3");
    }

    int slice_dim() const { return slices.front().dim(); }
    int dim() const { return slice_dim() + base2.dim(); }
    int level() const { return base2.level(); }

    // Assembled measure on R^d with cell (x1, x2) carrying w1^{x2}(x1)*w2(x2).
    DiscreteMeasure assemble() const { return assemble_impl(true); }

    // Same support, but each cell carries only its slice weight w1^{x2}(x1);
    // the discrete reading of "mu_1 x lambda" quantities.
    DiscreteMeasure assemble_slices_only() const { return assemble_impl(false); }

private:
    DiscreteMeasure assemble_impl(bool with_base_weight) const {
        const int n = slice_dim();
        std::vector<CellIndex> cells;
        std::vector<double> weights;
        for (std::size_t b = 0; b < base2.atom_count(); ++b) {
            const auto& s = slices[b];
            for (std::size_t a = 0; a < s.atom_count(); ++a) {
                CellIndex c{0, 0, 0};
                for (int k = 0; k < n; ++k)
                    c[static_cast<std::size_t>(k)] = s.support.cells[a][static_cast<std::size_t>(k)];
                for (int k = 0; k < base2.dim(); ++k)
                    c[static_cast<std::size_t>(n + k)] = base2.support.cells[b][static_cast<std::size_t>(k)];
                cells.push_back(c);
                weights.push_back((with_base_weight ? base2.weights[b] : 1.0) * s.weights[a]);
            }
        }
        // sort weights along with cells
        std::vector<std::size_t> order(cells.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return cells[a] < cells[b]; });
        std::vector<CellIndex> sc(cells.size());
        std::vector<double> sw(cells.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            sc[i] = cells[order[i]];
            sw[i] = weights[order[i]];
        }
        DeltaSet support(dim(), level(), sc);
        require(support.cell_count() == sc.size(), "FubiniMeasure: overlapping slice cells");
        return DiscreteMeasure(std::move(support), std::move(sw));
    }
};

// Cartesian product mu1 x mu2: every slice equals mu1.
inline FubiniMeasure product_measure(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
    require(mu1.level() == mu2.level(), "product_measure: level mismatch");
    require(mu1.dim() + mu2.dim() <= 3, "product_measure: dimension overflow");
    return FubiniMeasure(mu2, std::vector<DiscreteMeasure>(mu2.atom_count(), mu1));
}

// sup over base cells of A_alpha of the slice.
inline double fubini_slice_amplitude(const FubiniMeasure& m, double alpha) {
    require(alpha > 0 && alpha < double(m.slice_dim()),
            "fubini_slice_amplitude: alpha must lie in (0, slice dim)");
    double worst = 0;
    for (const auto& s : m.slices) worst = std::max(worst, amplitude(s, alpha));
    return worst;
}

// Sum the weights of sibling cells into their parent at a coarser level.
inline DiscreteMeasure coarsen_measure(const DiscreteMeasure& mu, int coarse_level) {
    require(coarse_level >= 1 && coarse_level <= mu.level(),
            "coarsen_measure: coarse_level out of range");
    const int shift = mu.level() - coarse_level;
    std::vector<std::pair<CellIndex, double>> entries(mu.atom_count());
    for (std::size_t i = 0; i < mu.atom_count(); ++i) {
        CellIndex c = mu.support.cells[i];
        for (int k = 0; k < mu.dim(); ++k) c[static_cast<std::size_t>(k)] >>= shift;
        entries[i] = {c, mu.weights[i]};
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<CellIndex> cells;
    std::vector<double> weights;
    for (const auto& [c, w] : entries) {
        if (!cells.empty() && cells.back() == c)
            weights.back() += w;
        else {
            cells.push_back(c);
            weights.push_back(w);
        }
    }
    std::int64_t ext = (mu.support.extent + ((std::int64_t{1} << shift) - 1)) >> shift;
    return DiscreteMeasure(DeltaSet(mu.dim(), coarse_level, std::move(cells), ext),
                           std::move(weights));
}

// --- text format: DeltaSet block, then one weight per line ---

inline void write_measure(std::ostream& os, const DiscreteMeasure& mu) {
    write_delta_set(os, mu.support);
    char buf[64];
    for (double w : mu.weights) {
        std::snprintf(buf, sizeof buf, "%.15g", w);
        os << buf << '\n';
    }
}

inline DiscreteMeasure read_measure(std::istream& is) {
    // the support block is terminated by the first weight line; read cells and
    // weights by counting
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "measure: missing header");
    std::istringstream hdr(line);
    int dim = 0, level = 0;
    std::int64_t extent = -1;
    require(static_cast<bool>(hdr >> dim >> level), "measure: malformed header");
    hdr >> extent;
    std::vector<std::string> rows;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        rows.push_back(line);
    }
    require(rows.size() % 2 == 0, "measure: cell rows and weight rows must pair up");
    const std::size_t n = rows.size() / 2;
    std::vector<CellIndex> cells(n, CellIndex{0, 0, 0});
    std::vector<double> weights(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream cs(rows[i]);
        for (int k = 0; k < dim; ++k)
            require(static_cast<bool>(cs >> cells[i][static_cast<std::size_t>(k)]),
                    "measure: malformed cell row");
        std::istringstream ws(rows[n + i]);
        require(static_cast<bool>(ws >> weights[i]), "measure: malformed weight row");
    }
    if (extent < 0) extent = std::int64_t{1} << level;
    DeltaSet support(dim, level, cells, extent);
    require(support.cell_count() == n, "measure: duplicate cells in support");
    // weights pair with cells positionally, so the file must list cells in
    // sorted order (writers always do)
    require(support.cells == cells, "measure: support cells must be sorted");
    return DiscreteMeasure(std::move(support), std::move(weights));
}

}  // namespace frostlab
