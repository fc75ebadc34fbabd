#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "nestlab/kernels.hpp"

using namespace nestlab;

TEST_CASE("holder supremum: serial and parallel agree") {
    for (auto f : {UnimodalMap<double>::power(2.5, 1.0), UnimodalMap<double>::power(3.3, 0.95),
                   UnimodalMap<double>::logistic(3.9)}) {
        for (std::size_t grid : {2u, 17u, 400u}) {
            double s = holder_sup_serial(f, 0.5, grid);
            double p = holder_sup_parallel(f, 0.5, grid);
            CHECK(s == p);
        }
    }
}

TEST_CASE("return scan: serial and parallel agree") {
    auto f = UnimodalMap<double>::logistic(3.9);
    auto I = construct_nice_interval(f);
    std::vector<double> seeds;
    for (int j = 0; j < 5000; ++j) seeds.push_back(I.lo + I.length() * (j + 0.5) / 5000);
    auto s = scan_returns_serial(f, I, seeds, 100000);
    auto p = scan_returns_parallel(f, I, seeds, 100000);
    REQUIRE(s.size() == p.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(s[j].status == p[j].status);
        CHECK(s[j].time == p[j].time);
        CHECK(s[j].itinerary == p[j].itinerary);
    }
    // The boundary is the fixed point: seeds next to it return after two steps.
    CHECK(s.front().time == 2);
}

TEST_CASE("branch measurement: serial and parallel agree") {
    auto f = UnimodalMap<double>::logistic(3.9);
    std::mt19937_64 rng(51);
    std::vector<BranchSample> samples;
    for (int i = 0; i < 400; ++i) samples.push_back(sample_cylinder_branch(f, rng, 30));
    MeasureSettings ms;
    ms.holder = estimate_holder_constant(f, 1.0, 50);
    ms.koebe_settings.grid = 100;
    auto s = measure_branches_serial(f, f, samples, ms);
    auto p = measure_branches_parallel(f, f, samples, ms);
    REQUIRE(s.size() == p.size());
    std::size_t measured = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        REQUIRE(s[j].has_value() == p[j].has_value());
        if (!s[j]) continue;
        ++measured;
        CHECK(s[j]->measured_B == p[j]->measured_B);
        CHECK(s[j]->measured_A == p[j]->measured_A);
        CHECK(s[j]->derivative_ratio_max == p[j]->derivative_ratio_max);
        CHECK(s[j]->koebe_bound == p[j]->koebe_bound);
    }
    CHECK(measured > 300);
}
