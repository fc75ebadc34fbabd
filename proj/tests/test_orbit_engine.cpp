#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace nestlab;
using namespace nestlab::testing;

TEST_CASE("certify_branch fixtures") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    Interval<double> T(0.1, 0.2);
    auto b0 = certify_branch(f4, T, 0);
    REQUIRE(b0.images.size() == 1);
    CHECK(b0.images[0] == T);
    CHECK(b0.max_image_length() == 0.0);

    auto b1 = certify_branch(f4, T, 1);
    REQUIRE(b1.images.size() == 2);
    CHECK(b1.images[1].lo == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(b1.images[1].hi == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(b1.itinerary == Itinerary{Lap::left});
    CHECK(b1.max_image_length() == doctest::Approx(0.1));

    try {
        certify_branch(f4, Interval<double>(0.4, 0.6), 1);
        FAIL("fold not detected");
    } catch (const FoldError& e) {
        CHECK(e.k() == 0);
    }
    // (1 - sqrt(1/2)) / 2 maps to c: the second iterate folds.
    try {
        certify_branch(f4, Interval<double>(0.14, 0.16), 3);
        FAIL("fold not detected");
    } catch (const FoldError& e) {
        CHECK(e.k() == 1);
    }
}

TEST_CASE("property: re-certifying with n-1 gives a prefix") {
    auto f = UnimodalMap<double>::logistic(3.9);
    std::mt19937_64 rng(31);
    int tested = 0;
    while (tested < 200) {
        auto s = random_branch(f, rng, 25);
        if (!s || s->first.n == 0) continue;
        const auto& br = s->first;
        auto shorter = certify_branch(f, br.T, br.n - 1);
        for (std::size_t k = 0; k < br.n; ++k) CHECK(shorter.images[k] == br.images[k]);
        auto d = branch_distortion(f, br, s->second);
        CHECK(std::isfinite(d.b));
        CHECK(d.b > 0);
        ++tested;
    }
}

TEST_CASE("first entry times") {
    auto f = UnimodalMap<double>::logistic(3.9);
    Interval<double> V(1 / 3.9, 1 - 1 / 3.9);
    // Direct iteration: 0.5 -> 0.975 -> 0.0950625 -> 0.33549992...
    CHECK(iterate(f, 0.5, 3) == doctest::Approx(0.3354999222656).epsilon(1e-12));
    auto e = first_entry_time(f, 0.5, V, 100);
    CHECK(e.found());
    CHECK(e.time == 3);
    // 0.5 is inside V but the search starts at k = 1.
    CHECK(V.contains(0.5));

    auto f4 = UnimodalMap<double>::logistic(4.0);
    for (std::size_t cap : {1u, 10u, 100000u}) {
        auto none = first_entry_time(f4, 0.75, Interval<double>(0.1, 0.2), cap);
        CHECK_FALSE(none.found());
        CHECK(none.cap == cap);
    }
    CHECK_THROWS_AS(first_entry_time(f4, 0.3, Interval<double>(0.1, 0.2), 0), ParameterError);
}

TEST_CASE("periodic points of the full logistic map") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    auto p = find_periodic_point(f4, Interval<double>(0.7, 0.8), 1);
    CHECK(p.x == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(p.multiplier == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(p.minimal);
    CHECK_THROWS_AS(find_periodic_point(f4, Interval<double>(0.3, 0.4), 1), NoSignChangeError);

    // Conjugacy to angle doubling: period-3 points are sin^2(pi k / 7) and
    // sin^2(pi k / 9), k = 1, 2, 4, with |multiplier| = 2^3.
    std::vector<double> expected;
    for (int k : {1, 2, 4}) {
        expected.push_back(std::pow(std::sin(M_PI * k / 7), 2));
        expected.push_back(std::pow(std::sin(M_PI * k / 9), 2));
    }
    std::sort(expected.begin(), expected.end());
    auto pts = periodic_orbit_points(f4, 3, 4000);
    REQUIRE(pts.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(pts[i].x == doctest::Approx(expected[i]).epsilon(1e-12));
        CHECK(std::abs(pts[i].multiplier) == doctest::Approx(8.0).epsilon(1e-6));
        CHECK(pts[i].minimal);
    }
}

TEST_CASE("property: multiplier matches a finite difference across the root") {
    auto f = UnimodalMap<double>::logistic(3.95);
    for (std::size_t period : {1u, 2u, 3u, 4u, 5u}) {
        for (const auto& p : periodic_orbit_points(f, period, 20000)) {
            const double h = 1e-7;
            double fd = (iterate(f, p.x + h, period) - iterate(f, p.x - h, period)) / (2 * h);
            CHECK(rel_close(p.multiplier, fd, 1e-4));
            CHECK(std::abs(iterate(f, p.x, period) - p.x) < 1e-12);
        }
    }
}

TEST_CASE("preimages along itineraries") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    CHECK(refine_preimage(f4, 0.75, Itinerary{Lap::left}) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(refine_preimage(f4, 0.75, Itinerary{Lap::right}) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK_THROWS_AS(refine_preimage(f4, 1.5, Itinerary{Lap::left}), BracketMissError);

    auto f = UnimodalMap<double>::logistic(3.9);
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        double x = u(rng);
        Itinerary it = itinerary_of(f, x, 12);
        double y = iterate(f, x, 12);
        double back = refine_preimage(f, y, it);
        CHECK(itinerary_of(f, back, 12) == it);
        CHECK(std::abs(iterate(f, back, 12) - y) < 1e-9);
    }
}

TEST_CASE("itinerary helpers") {
    CHECK(itinerary_string(parse_itinerary("LRRL")) == "LRRL");
    CHECK(itinerary_orientation(parse_itinerary("LRRL")) == 1);
    CHECK(itinerary_orientation(parse_itinerary("LRL")) == -1);
    CHECK_THROWS_AS(parse_itinerary("LX"), ParameterError);
}

TEST_CASE("extended precision periodic multiplier") {
    PrecisionScope scope(40);
    auto f4 = UnimodalMap<ext_real>::logistic(ext_real(4));
    auto p = find_periodic_point(f4, Interval<ext_real>(ext_real("0.7"), ext_real("0.8")), 1);
    CHECK(abs_value(ext_real(p.x - ext_real("0.75"))) < ext_real("1e-35"));
    CHECK(abs_value(ext_real(p.multiplier + 2)) < ext_real("1e-35"));
}
