#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "frostlab/generators.hpp"
#include "frostlab/projection.hpp"

using namespace frostlab;

namespace {

const double kPi = std::acos(-1.0);

DeltaSet full_square(int level) {
    return quantize(std::vector<Box>{Box{Vec(0.0, 0.0), Vec(1.0, 1.0)}}, level, 2);
}

}  // namespace

TEST_CASE("axis projection is the exact marginal") {
    const auto m1 = uniform_measure(cantor_set(6, 0.5, 1));
    const auto m2 = uniform_measure(cantor_set(6, 0.7, 2));
    const auto mu = product_measure(m1, m2).assemble();
    const auto pf = project(mu, Subspace::axis(2, 0));
    REQUIRE(pf.histogram.atom_count() == m1.atom_count());
    for (std::size_t i = 0; i < m1.atom_count(); ++i) {
        REQUIRE(pf.histogram.support.cells[i][0] == m1.support.cells[i][0]);
        REQUIRE(pf.histogram.weights[i] == Catch::Approx(m1.weights[i]).margin(1e-12));
    }
}

TEST_CASE("point mass projects to a single cell of the same mass") {
    const DiscreteMeasure mu(DeltaSet(2, 5, {CellIndex{11, 17, 0}}), {0.625});
    const auto pf = project(mu, Subspace::line2(1.1));
    REQUIRE(pf.histogram.atom_count() == 1);
    REQUIRE(pf.histogram.weights[0] == 0.625);
}

TEST_CASE("diagonal projection matches the independent reassignment oracle") {
    const auto mu = uniform_measure(full_square(8));
    const auto v = Subspace::line2(kPi / 4);
    const auto pf = project(mu, v);
    // oracle: rational centers (2i+1)/2^(l+1), long-double arithmetic, same
    // half-open binning rule
    std::map<std::int64_t, double> bins;
    const long double invsqrt2 = 1.0L / std::sqrt(2.0L);
    const std::int64_t scale = 256;
    for (std::size_t i = 0; i < mu.atom_count(); ++i) {
        const auto& c = mu.support.cells[i];
        const long double coord =
            ((2.0L * c[0] + 1) + (2.0L * c[1] + 1)) / (2.0L * scale) * invsqrt2;
        bins[static_cast<std::int64_t>(std::floor(coord * scale))] += mu.weights[i];
    }
    REQUIRE(pf.histogram.atom_count() == bins.size());
    const std::int64_t origin =
        static_cast<std::int64_t>(std::llround(pf.range_offset[0] * scale));
    for (std::size_t i = 0; i < pf.histogram.atom_count(); ++i) {
        const std::int64_t cell = pf.histogram.support.cells[i][0] + origin;
        REQUIRE(bins.count(cell) == 1);
        REQUIRE(pf.histogram.weights[i] == Catch::Approx(bins[cell]).margin(1e-12));
    }
}

TEST_CASE("mass is conserved by every projection") {
    const auto mu = uniform_measure(cantor_set(8, 0.6, 3));
    const auto mu2 = product_measure(mu, mu).assemble();
    for (double angle : {0.0, .3, kPi / 4, 1.2, kPi / 2}) {
        const auto pf = project(mu2, Subspace::line2(angle));
        REQUIRE(pf.histogram.total_mass() == Catch::Approx(mu2.total_mass()).margin(1e-9));
    }
}

TEST_CASE("lp norms of flat, point and two-cell histograms") {
    // constant density 1 on [0,1]
    const auto flat = uniform_measure(quantize(std::vector<Box>{Box{Vec(0.0), Vec(1.0)}}, 6, 1));
    const Pushforward pf_flat{Subspace::axis(1, 0), flat, Vec(0.0)};
    for (double p : {1.0, 2.0, 3.5}) REQUIRE(lp_norm_p(pf_flat, p) == Catch::Approx(1.0).margin(1e-12));

    const DiscreteMeasure point(DeltaSet(1, 4, {CellIndex{3, 0, 0}}), {1.0});
    const Pushforward pf_point{Subspace::axis(1, 0), point, Vec(0.0)};
    for (double p : {1.0, 2.0, 4.0})
        REQUIRE(lp_norm_p(pf_point, p) ==
                Catch::Approx(std::pow(1.0 / 16.0, (1.0 - p) / p)).margin(1e-10));

    const DiscreteMeasure two(DeltaSet(1, 2, {CellIndex{0, 0, 0}, CellIndex{1, 0, 0}}),
                              {0.25, 0.75});
    const Pushforward pf_two{Subspace::axis(1, 0), two, Vec(0.0)};
    REQUIRE(lp_norm_p(pf_two, 2.0) == Catch::Approx(std::sqrt(2.5)).margin(1e-12));
    REQUIRE_THROWS_AS(lp_norm_p(pf_two, 0.5), std::invalid_argument);
}

TEST_CASE("exponent formulas reproduce the stated values") {
    REQUIRE(exponent_general(2, 1, 1.5, 1.0, 1.5) == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(exponent_general(3, 1, 1.5, 2.0, 1.0) == Catch::Approx(2.25).margin(1e-12));
    REQUIRE(exponent_general(2, 1, 1.0, 1.0, 0.7) == 2.0);  // boundary case
    REQUIRE(exponent_fubini(2, 1, 1.4, 1.0, 0.4) == Catch::Approx(8.0 / 3.0).margin(1e-12));
    REQUIRE(exponent_fubini(2, 1, 1.0, 1.0, 0.4) == 2.0);
    REQUIRE_THROWS_WITH(exponent_general(2, 1, 0.5, 0.5, 1.0),
                        Catch::Matchers::ContainsSubstring("s + sigma"));
    REQUIRE_THROWS_WITH(exponent_fubini(2, 1, 1.4, 1.0, 1.2),
                        Catch::Matchers::ContainsSubstring("alpha"));
}

TEST_CASE("the fubini exponent beats the general one") {
    SplitMix64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const double alpha = 0.05 + 0.9 * rng.uniform();  // < n = 1
        const double s = 1.0 + rng.uniform();
        REQUIRE(exponent_fubini(2, 1, s, 1.0, alpha) >
                exponent_general(2, 1, s, 1.0, alpha));
    }
}

TEST_CASE("projection bound smoke run on a point mass") {
    const DiscreteMeasure mu(DeltaSet(2, 6, {CellIndex{31, 12, 0}}), {1.0});
    const auto fam = sample_directions(2, 1, DirectionSpec::full(), 4, 0);
    const auto rep = check_projection_bound(mu, fam, 1.5, 1.5);
    REQUIRE(rep.lhs > 0);
    REQUIRE(rep.rhs > 0);
    REQUIRE(rep.ratio == Catch::Approx(rep.lhs / rep.rhs).margin(1e-15));
    REQUIRE(rep.params.p == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(rep.family_size == 16);
}

TEST_CASE("fubini variant rejects families spanning the slice fibers") {
    const auto m1 = uniform_measure(cantor_set(6, 0.5, 1));
    const auto prod = product_measure(m1, m1);
    const auto full = sample_directions(2, 1, DirectionSpec::full(), 4, 0);  // has the vertical
    REQUIRE_THROWS_WITH(check_projection_bound(prod, full, 1.4, 0.4, BoundVariant::fubini),
                        Catch::Matchers::ContainsSubstring("span"));
    // a family of cell-center angles avoids the vertical
    const auto safe = sample_directions(2, 1, DirectionSpec::cantor(1.0), 4, 0);
    const auto rep = check_projection_bound(prod, safe, 1.4, 0.4, BoundVariant::fubini);
    REQUIRE(rep.params.p == Catch::Approx(8.0 / 3.0).margin(1e-12));
}

TEST_CASE("pushforward coarsening commutes for axis directions") {
    const auto mu = uniform_measure(cantor_set(8, 0.7, 5));
    const auto mu2 = product_measure(mu, mu).assemble();
    const auto v = Subspace::axis(2, 0);
    const auto route_a = coarsen_measure(project(mu2, v).histogram, 7);
    const auto route_b = project(coarsen_measure(mu2, 7), v).histogram;
    REQUIRE(route_a.atom_count() == route_b.atom_count());
    for (std::size_t i = 0; i < route_a.atom_count(); ++i) {
        REQUIRE(route_a.support.cells[i] == route_b.support.cells[i]);
        REQUIRE(route_a.weights[i] == Catch::Approx(route_b.weights[i]).margin(1e-12));
    }
    // skew directions only commute up to one-cell transport; masses agree
    const auto skew = Subspace::line2(kPi / 4);
    const auto sa = coarsen_measure(project(mu2, skew).histogram, 7);
    const auto sb = project(coarsen_measure(mu2, 7), skew).histogram;
    REQUIRE(sa.total_mass() == Catch::Approx(sb.total_mass()).margin(1e-9));
}

TEST_CASE("window-normalized lp norms are nondecreasing in p") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<CellIndex> cells;
        std::vector<double> w;
        const int count = 4 + int(rng.below(20));
        for (int i = 0; i < count; ++i) {
            cells.push_back({static_cast<std::int32_t>(rng.below(64)), 0, 0});
            w.push_back(rng.uniform() + 0.01);
        }
        DeltaSet supp(1, 6, cells);
        w.resize(supp.cell_count());
        const DiscreteMeasure hist(supp, w);
        const Pushforward pf{Subspace::axis(1, 0), hist, Vec(0.0)};
        const double window = double(hist.atom_count()) * hist.delta();
        double prev = 0;
        for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
            const double normalized = lp_norm_p(pf, p) / std::pow(window, 1.0 / p);
            REQUIRE(normalized >= prev - 1e-9);
            prev = normalized;
        }
    }
}

TEST_CASE("classical l2 bound uses the right energy exponent") {
    const auto m1 = uniform_measure(cantor_set(6, 0.6, 1));
    const auto mu = product_measure(m1, m1).assemble();
    const auto fam = sample_directions(2, 1, DirectionSpec::full(), 5, 0);
    const auto rep = check_l2_classical(mu, fam, 1.0);
    REQUIRE(rep.rhs == Catch::Approx(energy(mu, 1.0)).margin(1e-12));
    REQUIRE(rep.params.p == 2.0);
    REQUIRE_THROWS_AS(check_l2_classical(mu, fam, 2.5), std::invalid_argument);

    const DiscreteMeasure point(DeltaSet(2, 5, {CellIndex{3, 3, 0}}), {1.0});
    const auto smoke = check_l2_classical(point, fam, 1.0);
    REQUIRE(std::isfinite(smoke.lhs));
    REQUIRE(std::isfinite(smoke.rhs));
}

TEST_CASE("bound report csv rows carry the schema") {
    BoundReport r;
    r.check = "projection_general";
    r.params = {2, 1, 1.5, 1.0, 1.5, 3.0, 8};
    r.lhs = 2.0;
    r.rhs = 4.0;
    r.finalize();
    r.family_size = 16;
    REQUIRE(bound_report_csv_header() ==
            "check,d,n,s,sigma,alpha,p,level,lhs,rhs,ratio,family_size");
    REQUIRE(to_csv_row(r) == "projection_general,2,1,1.5,1,1.5,3,8,2,4,0.5,16");
}
