#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "frostlab/core.hpp"
#include "frostlab/grid.hpp"

using namespace frostlab;

namespace {

DeltaSet random_1d_set(int level, std::size_t count, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<CellIndex> cells;
    const std::int64_t n = std::int64_t{1} << level;
    while (cells.size() < count)
        cells.push_back({static_cast<std::int32_t>(rng.below(std::uint64_t(n))), 0, 0});
    return DeltaSet(1, level, std::move(cells));
}

}  // namespace

TEST_CASE("quantize covers the full interval") {
    const auto set = quantize(std::vector<Box>{Box{Vec(0.0), Vec(1.0)}}, 3, 1);
    REQUIRE(set.cell_count() == 8);
    REQUIRE(set.cells.front()[0] == 0);
    REQUIRE(set.cells.back()[0] == 7);
}

TEST_CASE("quantize puts a boundary point in the upper half-open cell") {
    const auto set = quantize(std::vector<Vec>{Vec(0.5, 0.5)}, 2, 2);
    REQUIRE(set.cell_count() == 1);
    REQUIRE(set.cells[0] == CellIndex{2, 2, 0});
}

TEST_CASE("quantize of thirds boxes matches the hand enumeration") {
    // cells at level 2: [0,1/4) [1/4,1/2) [1/2,3/4) [3/4,1); [0,1/3] meets
    // {0,1}, [2/3,1] meets {2,3} since 2/3 < 3/4
    const auto set = quantize(
        std::vector<Box>{Box{Vec(0.0), Vec(1.0 / 3.0)}, Box{Vec(2.0 / 3.0), Vec(1.0)}}, 2, 1);
    REQUIRE(set.cell_count() == 4);
    for (int i = 0; i < 4; ++i) REQUIRE(set.cells[std::size_t(i)][0] == i);
}

TEST_CASE("quantize rejects bad input") {
    REQUIRE_THROWS_AS(quantize(std::vector<Vec>{Vec(0.5)}, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(quantize(std::vector<Vec>{Vec(1.5)}, 3, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(quantize(std::vector<Box>{Box{Vec(-0.1), Vec(0.5)}}, 3, 1),
                      std::invalid_argument);
}

TEST_CASE("quantize is idempotent under re-quantization") {
    const auto set = quantize(
        std::vector<Box>{Box{Vec(0.1), Vec(0.35)}, Box{Vec(0.7), Vec(0.9)}}, 5, 1);
    std::vector<Box> cells_as_boxes;
    for (std::size_t i = 0; i < set.cell_count(); ++i) {
        const double lo = set.cells[i][0] * set.delta();
        cells_as_boxes.push_back(Box{Vec(lo), Vec(lo + set.delta())});
    }
    const auto again = quantize(cells_as_boxes, set.level, 1);
    REQUIRE(again.cells == set.cells);
}

TEST_CASE("box_count on full and singleton sets") {
    const auto full = quantize(std::vector<Box>{Box{Vec(0.0), Vec(1.0)}}, 5, 1);
    REQUIRE(box_count(full, 3) == 8);
    const DeltaSet one(2, 6, {CellIndex{13, 40, 0}});
    for (int l = 1; l <= 6; ++l) REQUIRE(box_count(one, l) == 1);
    REQUIRE_THROWS_AS(box_count(one, 7), std::invalid_argument);
    REQUIRE_THROWS_AS(box_count(one, 0), std::invalid_argument);
}

TEST_CASE("box_count of a middle-thirds approximation matches an independent recount") {
    // stage-4 middle thirds intervals quantized at level 8
    std::vector<Box> stage{Box{Vec(0.0), Vec(1.0)}};
    for (int it = 0; it < 4; ++it) {
        std::vector<Box> next;
        for (const auto& b : stage) {
            const double len = (b.hi[0] - b.lo[0]) / 3.0;
            next.push_back(Box{b.lo, Vec(b.lo[0] + len)});
            next.push_back(Box{Vec(b.hi[0] - len), b.hi});
        }
        stage = std::move(next);
    }
    const auto set = quantize(stage, 8, 1);
    // oracle: recount by explicit shifting into a std::set
    std::set<std::int32_t> coarse;
    for (const auto& c : set.cells) coarse.insert(c[0] >> 4);
    REQUIRE(box_count(set, 4) == coarse.size());
}

TEST_CASE("neighborhood basics") {
    const DeltaSet one(1, 4, {CellIndex{7, 0, 0}});
    REQUIRE(neighborhood(one, 0).cells == one.cells);
    REQUIRE(neighborhood(one, 1).cell_count() == 3);
    const DeltaSet one2(2, 4, {CellIndex{7, 9, 0}});
    REQUIRE(neighborhood(one2, 1).cell_count() == 9);
}

TEST_CASE("neighborhood is monotone and extensive") {
    const auto set = random_1d_set(7, 9, 42);
    const auto n1 = neighborhood(set, 1);
    const auto n2 = neighborhood(set, 2);
    REQUIRE(std::includes(n1.cells.begin(), n1.cells.end(), set.cells.begin(), set.cells.end()));
    REQUIRE(std::includes(n2.cells.begin(), n2.cells.end(), n1.cells.begin(), n1.cells.end()));
}

TEST_CASE("box dimension of full cubes is exact") {
    std::vector<Box> sq{Box{Vec(0.0, 0.0), Vec(1.0, 1.0)}};
    const auto square = quantize(sq, 6, 2);
    const auto fit2 = box_dimension(square, 2, 6);
    REQUIRE(fit2.slope == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(fit2.residual <= 1e-12);

    const auto line = quantize(std::vector<Box>{Box{Vec(0.0), Vec(1.0)}}, 8, 1);
    const auto fit1 = box_dimension(line, 2, 8);
    REQUIRE(fit1.slope == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(fit1.residual <= 1e-12);
}

TEST_CASE("box dimension of the deterministic quarter Cantor set") {
    // keep children {0,3} of each cell per 2-level step: 2^t cells at level 2t
    std::vector<std::int64_t> cells{0};
    const int level = 12;
    for (int t = 0; t < level / 2; ++t) {
        std::vector<std::int64_t> next;
        for (auto c : cells) {
            next.push_back(4 * c);
            next.push_back(4 * c + 3);
        }
        cells = std::move(next);
    }
    std::vector<CellIndex> idx;
    for (auto c : cells) idx.push_back({static_cast<std::int32_t>(c), 0, 0});
    const DeltaSet set(1, level, std::move(idx));
    const auto fit = box_dimension(set, 2, 12);
    REQUIRE(fit.slope == Catch::Approx(0.5).margin(0.05));
    REQUIRE_THROWS_AS(box_dimension(set, 5, 6), std::invalid_argument);
}

TEST_CASE("refinement sandwich for box counts") {
    const auto set = random_1d_set(9, 40, 7);
    for (int l = 1; l < 9; ++l) {
        const auto coarse = box_count(set, l);
        const auto fine = box_count(set, l + 1);
        REQUIRE(coarse <= fine);
        REQUIRE(fine <= 2 * coarse);
    }
}

TEST_CASE("sumset covers a doubled cell") {
    const DeltaSet a(1, 4, {CellIndex{0, 0, 0}});
    const auto s = sumset(a, a);
    REQUIRE(s.cell_count() == 2);
    REQUIRE(s.cells[0][0] == 0);
    REQUIRE(s.cells[1][0] == 1);
    REQUIRE(s.extent == 32);
    REQUIRE_FALSE(s.clipped);
}

TEST_CASE("sumset with the zero cell contains the original") {
    const auto a = random_1d_set(8, 20, 11);
    const DeltaSet zero(1, 8, {CellIndex{0, 0, 0}});
    const auto s = sumset(a, zero);
    REQUIRE(std::includes(s.cells.begin(), s.cells.end(), a.cells.begin(), a.cells.end()));
}

TEST_CASE("sumset equals the interval-union oracle") {
    const auto a = random_1d_set(8, 20, 3);
    const auto b = random_1d_set(8, 20, 4);
    const auto s = sumset(a, b);
    // oracle: mark covered output indices from integer interval endpoints
    std::set<std::int64_t> covered;
    for (const auto& ca : a.cells)
        for (const auto& cb : b.cells) {
            covered.insert(std::int64_t{ca[0]} + cb[0]);
            covered.insert(std::int64_t{ca[0]} + cb[0] + 1);
        }
    REQUIRE(s.cell_count() == covered.size());
    std::size_t i = 0;
    for (auto v : covered) REQUIRE(s.cells[i++][0] == v);
}

TEST_CASE("sumset respects a declared range") {
    const DeltaSet a(1, 3, {CellIndex{7, 0, 0}});
    const auto s = sumset(a, a, 8);
    REQUIRE(s.clipped);
    REQUIRE(s.cell_count() == 0);
    REQUIRE_THROWS_AS(sumset(a, DeltaSet(1, 4, {CellIndex{0, 0, 0}})), std::invalid_argument);
}

TEST_CASE("sumset cell count bounds") {
    const auto a = random_1d_set(9, 25, 5);
    const auto b = random_1d_set(9, 13, 6);
    const auto s = sumset(a, b);
    REQUIRE(s.cell_count() >= a.cell_count() + b.cell_count() - 1);
    REQUIRE(s.cell_count() <= 2 * a.cell_count() * b.cell_count());
}

TEST_CASE("productset of the first cell squared") {
    // [1,1+delta)^2 = [1, 1+2delta+delta^2): chart [0, 2delta+delta^2) ->
    // cells {0,1,2}
    const DeltaSet a(1, 4, {CellIndex{0, 0, 0}});
    const auto p = productset(a, a);
    REQUIRE(p.cell_count() == 3);
    REQUIRE(p.extent == 3 * 16);
}

TEST_CASE("productset with a near-one factor nearly preserves the set") {
    const auto a = random_1d_set(8, 20, 9);
    const DeltaSet first(1, 8, {CellIndex{0, 0, 0}});
    const auto p = productset(a, first);
    // every original cell is covered, up to one-cell dilation at the edges
    const auto n1 = neighborhood(DeltaSet(1, 8, p.cells, p.extent), 1);
    REQUIRE(std::includes(n1.cells.begin(), n1.cells.end(), a.cells.begin(), a.cells.end()));
    for (const auto& c : a.cells)
        REQUIRE(std::binary_search(p.cells.begin(), p.cells.end(), c));
}

TEST_CASE("productset equals the exact rational interval oracle") {
    const auto a = random_1d_set(8, 20, 13);
    const auto c = random_1d_set(8, 20, 14);
    const auto p = productset(a, c);
    // oracle with independent arithmetic: all numerators over L^2
    const std::int64_t L = 256;
    std::set<std::int64_t> covered;
    for (const auto& ca : a.cells)
        for (const auto& cc : c.cells) {
            const std::int64_t n1 = (L + ca[0]) * (L + cc[0]);
            const std::int64_t n2 = (L + ca[0] + 1) * (L + cc[0] + 1);
            for (std::int64_t k = 0; k < 3 * L; ++k) {
                const std::int64_t cell_lo = (L + k) * L;
                const std::int64_t cell_hi = (L + k + 1) * L;
                if (cell_lo < n2 && cell_hi > n1) covered.insert(k);
            }
        }
    REQUIRE(p.cell_count() == covered.size());
    std::size_t i = 0;
    for (auto v : covered) REQUIRE(p.cells[i++][0] == v);
}

TEST_CASE("productset rejects non-unit ranges") {
    const DeltaSet a(1, 4, {CellIndex{0, 0, 0}});
    const auto s = sumset(a, a);
    REQUIRE_THROWS_AS(productset(s, a), std::invalid_argument);
}

TEST_CASE("delta set text format round-trips") {
    const auto a = random_1d_set(6, 9, 21);
    std::stringstream ss;
    write_delta_set(ss, a);
    const auto back = read_delta_set(ss);
    REQUIRE(back.dim == a.dim);
    REQUIRE(back.level == a.level);
    REQUIRE(back.cells == a.cells);

    const auto s = sumset(a, a);
    std::stringstream s2;
    write_delta_set(s2, s);
    const auto back2 = read_delta_set(s2);
    REQUIRE(back2.extent == s.extent);
    REQUIRE(back2.cells == s.cells);
}
