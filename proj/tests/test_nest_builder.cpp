#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace nestlab;
using namespace nestlab::testing;

namespace {

UnimodalMap<double> logistic(double a) { return UnimodalMap<double>::logistic(a); }

PrincipalNest<double> nest_of(const UnimodalMap<double>& f, std::size_t depth, std::size_t scan = 0) {
    NestOptions o;
    o.depth = depth;
    o.scan = scan;
    return build_nest(f, construct_nice_interval(f), o);
}

// Hand-made nest carrying only classifications.
PrincipalNest<double> labelled_nest(const std::vector<std::string>& labels) {
    PrincipalNest<double> nest;
    double half = 0.5;
    for (const auto& l : labels) {
        NestLevel<double> lv;
        lv.interval = Interval<double>(0.5 - half, 0.5 + half);
        half /= 2;
        if (l != "-") {
            Classification c;
            c.centrality = l.rfind("NC", 0) == 0 ? Centrality::non_central : Centrality::central;
            c.side = l.ends_with("low") ? Side::low : l.ends_with("high") ? Side::high : Side::ambiguous;
            lv.classification = c;
        }
        nest.levels.push_back(lv);
    }
    return nest;
}

}  // namespace

TEST_CASE("nice interval construction") {
    auto I4 = construct_nice_interval(logistic(4.0));
    CHECK(I4.lo == 0.25);
    CHECK(I4.hi == 0.75);
    auto I = construct_nice_interval(logistic(3.9));
    CHECK(I.lo == doctest::Approx(1 / 3.9).epsilon(1e-15));
    CHECK(I.hi == doctest::Approx(1 - 1 / 3.9).epsilon(1e-15));
    CHECK_THROWS_AS(construct_nice_interval(logistic(1.5)), ConstructionError);
    CHECK_THROWS_AS(construct_nice_interval(logistic(2.0)), ConstructionError);
}

TEST_CASE("niceness verification") {
    auto f4 = logistic(4.0);
    auto ok = verify_niceness(f4, Interval<double>(0.25, 0.75), 10000);
    CHECK(ok.verified);
    CHECK(ok.horizon == 10000);
    // f(0.2) = 0.64 lies in V.
    auto bad = verify_niceness(f4, Interval<double>(0.2, 0.8), 10);
    CHECK_FALSE(bad.verified);
    CHECK(bad.k == 1);
    CHECK_THROWS_AS(verify_niceness(f4, Interval<double>(0.25, 0.75), 0), ParameterError);
}

TEST_CASE("central domain") {
    auto f = logistic(3.9);
    auto I = construct_nice_interval(f);
    auto cr = central_domain(f, I, 1000);
    const auto& D = cr.domain.domain;
    CHECK(cr.domain.return_time == 3);
    CHECK(cr.domain.is_central);
    CHECK(cr.critical_return == doctest::Approx(0.33549992226562525).epsilon(1e-14));
    CHECK(I.strictly_contains(D));
    CHECK(D.lo + D.hi == doctest::Approx(1.0).epsilon(1e-14));
    // Both boundary points land on the same endpoint of I after s steps.
    double target = cr.maximum_at_c ? I.lo : I.hi;
    CHECK(std::abs(iterate(f, D.lo, 3) - target) < 1e-12);
    CHECK(std::abs(iterate(f, D.hi, 3) - target) < 1e-12);

    // The critical orbit of the full map lands on the fixed point 0.
    CHECK_THROWS_AS(central_domain(logistic(4.0), Interval<double>(0.25, 0.75), 1000), NotFoundError);
    CHECK_THROWS_AS(central_domain(f, Interval<double>(0.6, 0.7), 1000), ConstructionError);
}

TEST_CASE("central branch: halves certify, the whole domain folds at the critical step") {
    for (double a : {3.9, 3.8, 3.858}) {
        auto f = logistic(a);
        auto nest = nest_of(f, 6);
        for (const auto& lv : nest.levels) {
            if (!lv.central) continue;
            const auto& D = lv.central->domain;
            const std::size_t s = lv.central->return_time;
            CHECK_NOTHROW(certify_branch(f, Interval<double>(D.lo, 0.5), s));
            CHECK_NOTHROW(certify_branch(f, Interval<double>(0.5, D.hi), s));
            try {
                certify_branch(f, D, s);
                FAIL("central domain certified");
            } catch (const FoldError& e) {
                CHECK(e.k() == 0);
            }
        }
    }
}

TEST_CASE("return domains") {
    auto f = logistic(3.9);
    auto I0 = construct_nice_interval(f);
    CHECK_THROWS_AS(return_domains(f, I0, 0, 100), ParameterError);
    CHECK_THROWS_AS(return_domains(f, I0, 100, 0), ParameterError);

    auto level1 = central_domain(f, I0, 1000).domain.domain;
    for (const auto& I : {I0, level1}) {
        auto rs = return_domains(f, I, 10000, 100000);
        CHECK(rs.coverage >= 0.98);
        bool has_central = false;
        const double tol = 10 * real_traits<double>::root_tolerance();
        for (std::size_t j = 0; j < rs.domains.size(); ++j) {
            const auto& d = rs.domains[j];
            if (j > 0) CHECK(rs.domains[j - 1].domain.hi <= d.domain.lo);
            CHECK(I.contains_closed(d.domain.lo));
            CHECK(I.contains_closed(d.domain.hi));
            if (d.is_central) {
                has_central = true;
                CHECK(d.domain.contains(0.5));
                continue;
            }
            // Endpointwise onto I, through a certified monotone branch. The
            // forward image of a boundary carries the orbit's rounding noise.
            auto br = certify_branch(f, d.domain, d.return_time);
            auto slack = [&](double x) {
                return tol + 10 * real_traits<double>::epsilon() * forward_noise_factor(f, x, d.return_time);
            };
            double lo_end = br.orientation() > 0 ? d.domain.lo : d.domain.hi;
            double hi_end = br.orientation() > 0 ? d.domain.hi : d.domain.lo;
            CHECK(std::abs(br.image().lo - I.lo) < slack(lo_end));
            CHECK(std::abs(br.image().hi - I.hi) < slack(hi_end));
        }
        CHECK(has_central);
    }
    // Level 0 is tiled exactly by three domains.
    auto rs0 = return_domains(f, I0, 10000, 100000);
    CHECK(rs0.coverage >= 0.99);
    CHECK(rs0.domains.size() == 3);
    CHECK(rs0.unresolved_seeds == 0);
}

TEST_CASE("return domain scan: serial and parallel agree") {
    auto f = logistic(3.9);
    auto I1 = central_domain(f, construct_nice_interval(f), 1000).domain.domain;
    auto serial = return_domains(f, I1, 3000, 100000, false);
    auto parallel = return_domains(f, I1, 3000, 100000, true);
    REQUIRE(serial.domains.size() == parallel.domains.size());
    CHECK(serial.coverage == parallel.coverage);
    for (std::size_t j = 0; j < serial.domains.size(); ++j) {
        CHECK(serial.domains[j].domain == parallel.domains[j].domain);
        CHECK(serial.domains[j].return_time == parallel.domains[j].return_time);
    }
}

TEST_CASE("principal nest fixtures") {
    auto f = logistic(3.9);
    auto nest = nest_of(f, 6);
    REQUIRE(nest.levels.size() == 4);
    CHECK(nest.return_levels() == 3);
    CHECK(nest.termination.kind == TerminationKind::non_recurrent);
    const char* labels[] = {"NC-high", "NC-low", "NC-low"};
    const std::size_t times[] = {3, 5, 43};
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(nest.levels[i].classification);
        CHECK(nest.levels[i].classification->label() == labels[i]);
        CHECK(nest.levels[i].central->return_time == times[i]);
    }
    CHECK(nest.levels[3].interval.length() == doctest::Approx(2.5052577258e-7).epsilon(1e-6));

    auto shallow = nest_of(f, 0);
    CHECK(shallow.levels.size() == 1);
    CHECK(shallow.termination.kind == TerminationKind::depth_reached);

    // Period-doubling parameter: the first return is central.
    auto pd = nest_of(logistic(3.2), 4);
    REQUIRE(pd.levels[0].classification);
    CHECK(pd.levels[0].classification->central());

    CHECK_THROWS_AS(build_nest(f, Interval<double>(0.2, 0.8), NestOptions{}), ConstructionError);
}

TEST_CASE("nest invariants across parameters") {
    double scaling_floor = 1e300;
    for (double a : {3.7, 3.75, 3.8, 3.83, 3.858, 3.9, 3.99}) {
        auto f = logistic(a);
        auto nest = nest_of(f, 12);
        std::size_t run = 0;
        bool after_nc = false;
        for (std::size_t i = 0; i < nest.levels.size(); ++i) {
            const auto& lv = nest.levels[i];
            if (i > 0) CHECK(nest.levels[i - 1].interval.strictly_contains(lv.interval));
            if (!lv.classification) continue;
            // Niceness of every constructed level.
            CHECK(verify_niceness(f, lv.interval, 200).verified);
            // Classification matches the position of F_i(c).
            CHECK(lv.classification->central() == lv.central->domain.contains(lv.critical_return));
            run = lv.classification->central() ? run + 1 : 0;
            CHECK(lv.central_run == run);
            if (after_nc && i + 1 < nest.levels.size()) {
                CHECK(lv.measured_scaling > 0);
                scaling_floor = std::min(scaling_floor, lv.measured_scaling);
            }
            if (!lv.classification->central()) after_nc = true;
        }
    }
    // Recorded floor over this fixture family.
    CHECK(scaling_floor >= 0.009);
}

TEST_CASE("cascade detection") {
    auto sn = detect_cascade(labelled_nest({"NC-high", "C-low", "C-low", "C-low", "NC-low"}), 1);
    CHECK(sn.kind == CascadeKind::saddle_node);
    CHECK(sn.m == 3);
    CHECK_FALSE(sn.mixed);
    auto un = detect_cascade(labelled_nest({"C-high", "C-high", "C-low", "NC-low"}), 0);
    CHECK(un.kind == CascadeKind::ulam_neumann);
    CHECK(un.m == 3);
    CHECK(un.mixed);
    auto none = labelled_nest({"NC-high", "NC-low", "NC-low"});
    for (std::size_t i = 0; i < 3; ++i) CHECK(detect_cascade(none, i).kind == CascadeKind::none);
    CHECK_THROWS_AS(detect_cascade(none, 3), ParameterError);

    // Below the period-3 tangency the low-central run lengthens as 1/sqrt(delta).
    const std::size_t expected_m[] = {36, 117, 375};
    const double deltas[] = {1e-4, 1e-5, 1e-6};
    for (int j = 0; j < 3; ++j) {
        auto f = logistic(1 + std::sqrt(8.0) - deltas[j]);
        NestOptions o;
        o.depth = 100000;
        o.stop_after_cascade_exit = true;
        auto nest = build_nest(f, construct_nice_interval(f), o);
        auto c = detect_cascade(nest, 0);
        CHECK(c.kind == CascadeKind::saddle_node);
        CHECK(c.m == expected_m[j]);
        CHECK(c.m * std::sqrt(deltas[j]) == doctest::Approx(0.37).epsilon(0.05));
    }
}

TEST_CASE("exceptional levels") {
    auto gate = labelled_nest({"C-high", "NC-low", "-"});
    CHECK_FALSE(detect_exceptional(logistic(3.9), gate, 2).exceptional);
    CHECK_FALSE(detect_exceptional(logistic(3.9), gate, 1).exceptional);

    // Exit of an Ulam-Neumann run: C-high x3 then NC-high.
    auto f = logistic(3.858);
    auto nest = nest_of(f, 12, 2000);
    REQUIRE(nest.levels.size() > 4);
    CHECK(nest.levels[2].classification->label() == "C-high");
    CHECK(nest.levels[3].classification->label() == "NC-high");
    auto exc = detect_exceptional(f, nest, 4);
    REQUIRE(exc.exceptional);
    const std::size_t s = exc.branch_time;
    CHECK(std::abs(iterate(f, exc.p, s) - exc.p) < 1e-10);
    CHECK(exc.V.contains_closed(exc.p));
    CHECK(exc.right.contains_closed(exc.p));
    CHECK(exc.left.contains_closed(exc.p_prime));
    CHECK(exc.hull.contains(exc.V));
    for (std::size_t i = 0; i < nest.levels.size(); ++i)
        if (i != 4) CHECK_FALSE(detect_exceptional(f, nest, i).exceptional);
}

TEST_CASE("infinite cascade probe") {
    auto feig = logistic(3.5699456);
    auto nest = nest_of(feig, 12);
    auto probe = infinite_cascade_probe(feig, nest);
    CHECK(probe.suspected);
    CHECK(probe.run >= 6);
    REQUIRE(probe.levels.size() >= 6);
    for (std::size_t k = 0; k < probe.levels.size(); ++k) {
        CHECK(probe.levels[k].theta > 0);
        CHECK(probe.levels[k].theta < 1);
        CHECK(probe.levels[k].return_time == (std::size_t{2} << k));
    }
    CHECK(probe.levels[3].theta == doctest::Approx(0.3995).epsilon(0.01));

    auto f = logistic(3.9);
    CHECK_FALSE(infinite_cascade_probe(f, nest_of(f, 6)).suspected);
    CHECK_FALSE(infinite_cascade_probe(f, nest_of(f, 0)).suspected);
}

TEST_CASE("extended precision nest matches binary64") {
    PrecisionScope scope(40);
    auto fe = UnimodalMap<ext_real>::logistic(ext_real("3.9"));
    auto fd = logistic(3.9);
    NestOptions o;
    o.depth = 6;
    auto ne = build_nest(fe, construct_nice_interval(fe), o);
    auto nd = nest_of(fd, 6);
    REQUIRE(ne.return_levels() >= nd.return_levels());
    for (std::size_t i = 0; i < nd.return_levels(); ++i) {
        CHECK(ne.levels[i].classification->label() == nd.levels[i].classification->label());
        CHECK(ne.levels[i].central->return_time == nd.levels[i].central->return_time);
        CHECK(rel_close(to_double(ne.levels[i].interval.lo), nd.levels[i].interval.lo, 1e-9));
    }
}
