#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace nestlab;
using namespace nestlab::testing;

TEST_CASE("interval basics") {
    CHECK_THROWS_AS(Interval<double>(0.5, 0.5), DomainError);
    CHECK_THROWS_AS(Interval<double>(0.6, 0.5), DomainError);
    Interval<double> I(0.2, 0.6);
    CHECK(I.length() == doctest::Approx(0.4));
    CHECK(I.contains(0.3));
    CHECK_FALSE(I.contains(0.2));
    CHECK(I.contains_closed(0.2));
    CHECK(Interval<double>::hull(0.7, 0.1) == Interval<double>(0.1, 0.7));
}

TEST_CASE("cross-ratio fixtures") {
    auto cr = cross_ratio(Interval<double>(0, 1), Interval<double>(0.25, 0.75));
    CHECK(cr.b == 8.0);
    CHECK(cr.a == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK_THROWS_AS(cross_ratio(Interval<double>(0, 1), Interval<double>(0, 0.5)), DegenerateError);
    CHECK_THROWS_AS(cross_ratio(Interval<double>(0, 1), Interval<double>(0.5, 1.0)), DegenerateError);
    CHECK_THROWS_AS(cross_ratio(Interval<double>(0, 1), Interval<double>(0.5, 1.5)), DomainError);
    // Affine image (x -> 1 + x) and a scaled copy.
    auto moved = cross_ratio(Interval<double>(1, 2), Interval<double>(1.25, 1.75));
    auto scaled = cross_ratio(Interval<double>(0, 3), Interval<double>(0.75, 2.25));
    CHECK(moved.b == doctest::Approx(8.0));
    CHECK(scaled.b == doctest::Approx(8.0));
    CHECK(scaled.a == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("scaled neighbourhood factor") {
    CHECK(scaled_neighborhood_factor(Interval<double>(0, 1), Interval<double>(0.25, 0.75)) == 0.5);
    CHECK(scaled_neighborhood_factor(Interval<double>(0, 1), Interval<double>(0.4, 0.6)) == doctest::Approx(2.0));
    CHECK(scaled_neighborhood_factor(Interval<double>(0, 1), Interval<double>(0, 1)) == 0.0);
    CHECK(scaled_neighborhood_factor(Interval<double>(0, 1), Interval<double>(0, 0.3)) == 0.0);
}

TEST_CASE("distortion fixtures") {
    Interval<double> T(1, 2), J(1.25, 1.75);
    auto sq = distortion_of([](double x) { return x * x; }, T, J);
    CHECK(sq.b == doctest::Approx(16.0 / 15.0).epsilon(1e-14));

    auto affine = distortion_of([](double x) { return 0.3 - 2.5 * x; }, T, J);
    CHECK(rel_close(affine.b, 1.0, 1e-14));
    CHECK(rel_close(affine.a, 1.0, 1e-14));

    auto f = UnimodalMap<double>::logistic(3.9);
    Interval<double> T0(0.1, 0.3), J0(0.15, 0.2);
    auto id = branch_distortion(f, certify_branch(f, T0, 0), J0);
    CHECK(id.b == 1.0);
    CHECK(id.a == 1.0);
}

TEST_CASE("property: Moebius maps preserve cross-ratios") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < 1000; ++i) {
        // c x + d > 0 on [0,1] and ad - bc != 0.
        Mobius m{u(rng), u(rng) - 1, u(rng) - 0.5, u(rng) + 1};
        auto [T, J] = random_nested(rng);
        auto d = distortion_of(m, T, J);
        // Side lengths are differences of images: relative error grows like eps / min side.
        double gap = std::min({J.lo - T.lo, J.length(), T.hi - J.hi});
        double tol = std::max(1e-12, 64 * 2.2e-16 / gap);
        CHECK(rel_close(d.b, 1.0, tol));
        CHECK(rel_close(d.a, 1.0, tol));
    }
}

TEST_CASE("property: A = B / (1 + B)") {
    std::mt19937_64 rng(22);
    double worst = 0;
    for (int i = 0; i < 100000; ++i) {
        auto [T, J] = random_nested(rng);
        auto cr = cross_ratio(T, J);
        worst = std::max(worst, rel_err(cr.a, cr.b / (1 + cr.b)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("property: chain rule across branch splits") {
    auto f = UnimodalMap<double>::logistic(3.9);
    std::mt19937_64 rng(23);
    std::size_t tested = 0;
    double worst_b = 0, worst_a = 0;
    while (tested < 1000) {
        auto sample = random_branch(f, rng, 20);
        if (!sample || sample->first.n < 2) continue;
        const auto& [br, J] = *sample;
        std::uniform_int_distribution<std::size_t> pick(1, br.n - 1);
        std::size_t k = pick(rng);
        try {
            auto whole = branch_distortion(f, br, J);
            auto head = branch_distortion(f, certify_branch(f, br.T, k), J);
            Interval<double> Jk = Interval<double>::hull(iterate(f, J.lo, k), iterate(f, J.hi, k));
            auto tail = branch_distortion(f, certify_branch(f, br.images[k], br.n - k), Jk);
            worst_b = std::max(worst_b, rel_err(head.b * tail.b, whole.b));
            worst_a = std::max(worst_a, rel_err(head.a * tail.a, whole.a));
            ++tested;
        } catch (const DegenerateError&) {
        }
    }
    CHECK(worst_b < 1e-10);
    CHECK(worst_a < 1e-10);
}

TEST_CASE("property: negative Schwarzian expands cross-ratios") {
    std::mt19937_64 rng(24);
    for (double a : {3.6, 3.9, 4.0}) {
        auto f = UnimodalMap<double>::logistic(a);
        std::size_t tested = 0;
        while (tested < 300) {
            auto sample = random_branch(f, rng, 10);
            if (!sample) continue;
            try {
                auto d = branch_distortion(f, sample->first, sample->second);
                CHECK(d.b >= 1 - 1e-9);
                CHECK(d.a >= 1 - 1e-9);
                ++tested;
            } catch (const DegenerateError&) {
            }
        }
    }
}

TEST_CASE("delta bound closed form") {
    CHECK(delta_bound(1.0) == 3.0);
    CHECK(delta_bound(0.5) == doctest::Approx(8.0));
}
