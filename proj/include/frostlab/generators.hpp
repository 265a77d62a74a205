#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/grid.hpp"

// Seeded constructors for (delta,s)-sets and structured examples. Everything
// here is deterministic in the seed and certified by the count audit below.

namespace frostlab {

// Non-concentration audit in counting form: over all support cells x and
// dyadic radii r in {delta, 2*delta, ..., 1}, the number of cells whose
// center lies strictly within r of x should stay below 8*(r/delta)^s.
// Returns the worst ratio count/(r/delta)^s.
inline double delta_set_audit(const DeltaSet& set, double s) {
    require(s > 0, "delta_set_audit: s must be positive");
    const std::size_t n = set.cell_count();
    require(n > 0, "delta_set_audit: empty set");
    const int radii = set.level + 1;
    std::vector<double> worst(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const Vec xi = set.cell_center(i);
        std::vector<std::size_t> counts(static_cast<std::size_t>(radii), 0);
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0;
            const Vec xj = set.cell_center(j);
            for (int k = 0; k < set.dim; ++k) d2 += (xi[k] - xj[k]) * (xi[k] - xj[k]);
            const double dist = std::sqrt(d2);
            // smallest m with dist < 2^m * delta
            int m = 0;
            while (m < radii && dist >= std::ldexp(1.0, m - set.level)) ++m;
            if (m < radii) ++counts[static_cast<std::size_t>(m)];
        }
        std::size_t cum = 0;
        double w = 0;
        for (int m = 0; m < radii; ++m) {
            cum += counts[static_cast<std::size_t>(m)];
            w = std::max(w, double(cum) / std::pow(std::ldexp(1.0, m), s));
        }
        worst[i] = w;
    });
    return *std::max_element(worst.begin(), worst.end());
}

// 1D Cantor-type (delta,s)-set. Construction runs in 2-level steps: each kept
// cell splits into 4 children and the number of survivors per step follows
// the envelope round(2^(2*s*t)), distributed over cells largest-remainder
// style in seeded-shuffled order. The stepwise construction makes the output
// prefix-stable: the level-(j+2) set coarsens exactly onto the level-j set.
inline DeltaSet cantor_set(int level, double s, std::uint64_t seed) {
    require(s > 0.0 && s <= 1.0, "cantor_set: s must lie in (0,1]");
    require(level >= 2, "cantor_set: level must be >= 2");
    require(level % 2 == 0, "cantor_set: level must be even for exact branching");
    const int steps = level / 2;
    std::vector<std::int64_t> cells{0};
    for (int t = 0; t < steps; ++t) {
        const double target = std::exp2(2.0 * s * double(t + 1));
        std::int64_t want = static_cast<std::int64_t>(std::llround(target));
        const std::int64_t cur = static_cast<std::int64_t>(cells.size());
        want = std::clamp(want, cur, 4 * cur);
        const std::int64_t base = want / cur;
        const std::int64_t rem = want % cur;

        SplitMix64 rng(derive_stream(seed, 0x1000u + static_cast<std::uint64_t>(t)));
        // which cells keep one extra child
        std::vector<std::uint8_t> extra(static_cast<std::size_t>(cur), 0);
        {
            std::vector<std::size_t> order(static_cast<std::size_t>(cur));
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.below(i)]);
            for (std::int64_t i = 0; i < rem; ++i) extra[order[static_cast<std::size_t>(i)]] = 1;
        }
        std::vector<std::int64_t> next;
        next.reserve(static_cast<std::size_t>(want));
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const std::int64_t keep = base + extra[ci];
            std::array<int, 4> kids{0, 1, 2, 3};
            for (std::size_t i = 4; i > 1; --i)
                std::swap(kids[i - 1], kids[rng.below(i)]);
            std::array<int, 4> chosen{};
            for (std::int64_t k = 0; k < keep; ++k)
                chosen[static_cast<std::size_t>(k)] = kids[static_cast<std::size_t>(k)];
            std::sort(chosen.begin(), chosen.begin() + keep);
            for (std::int64_t k = 0; k < keep; ++k)
                next.push_back(4 * cells[ci] + chosen[static_cast<std::size_t>(k)]);
        }
        cells = std::move(next);
    }
    std::vector<CellIndex> out;
    out.reserve(cells.size());
    for (auto c : cells) out.push_back({static_cast<std::int32_t>(c), 0, 0});
    return DeltaSet(1, level, std::move(out));
}

// Union of delta-cells around the arithmetic progression
// {m * 2^-spacing_exponent : m = 0..terms-1}.
inline DeltaSet ap_neighborhood_set(int level, std::int64_t terms, int spacing_exponent) {
    require(level >= 1, "ap_neighborhood_set: level must be >= 1");
    require(terms >= 1, "ap_neighborhood_set: terms must be >= 1");
    require(spacing_exponent >= 0, "ap_neighborhood_set: spacing exponent must be >= 0");
    const double spacing = std::ldexp(1.0, -spacing_exponent);
    require(double(terms - 1) * spacing <= 1.0,
            "ap_neighborhood_set: progression overflows the unit interval");
    const double d = std::ldexp(1.0, -level);
    std::vector<Box> boxes;
    boxes.reserve(static_cast<std::size_t>(terms));
    for (std::int64_t m = 0; m < terms; ++m) {
        const double x = double(m) * spacing;
        boxes.push_back(Box{Vec(std::max(0.0, x - d)), Vec(std::min(1.0, x + d))});
    }
    return quantize(boxes, level, 1);
}

// Cartesian index product; cell counts multiply exactly.
inline DeltaSet product_set(const DeltaSet& e1, const DeltaSet& e2) {
    require(e1.dim + e2.dim <= 3, "product_set: dimension overflow");
    require(e1.level == e2.level, "product_set: level mismatch");
    require(e1.unit_range() && e2.unit_range(), "product_set: unit-range factors only");
    std::vector<CellIndex> cells;
    cells.reserve(e1.cell_count() * e2.cell_count());
    for (const auto& a : e1.cells) {
        for (const auto& b : e2.cells) {
            CellIndex c{0, 0, 0};
            for (int k = 0; k < e1.dim; ++k) c[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)];
            for (int k = 0; k < e2.dim; ++k)
                c[static_cast<std::size_t>(e1.dim + k)] = b[static_cast<std::size_t>(k)];
            cells.push_back(c);
        }
    }
    return DeltaSet(e1.dim + e2.dim, e1.level, std::move(cells));
}

}  // namespace frostlab
