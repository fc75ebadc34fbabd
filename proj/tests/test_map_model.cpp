#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "nestlab/report.hpp"

using namespace nestlab;
using nestlab::testing::rel_close;

TEST_CASE("logistic evaluation") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    CHECK(f4.eval(0.5) == 1.0);
    CHECK(f4.eval(0.75) == 0.75);
    CHECK(UnimodalMap<double>::logistic(3.9).eval(0.5) == doctest::Approx(0.975).epsilon(1e-15));
    CHECK_THROWS_AS(f4.eval(1.5), DomainError);
    CHECK_THROWS_AS(f4.eval(-0.1), DomainError);
}

TEST_CASE("analytic derivatives") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    CHECK(f4.deriv(0.0, 1) == 4.0);
    CHECK(f4.deriv(0.5, 1) == 0.0);
    for (double x : {0.0, 0.1, 0.5, 0.77, 1.0}) CHECK(f4.deriv(x, 2) == -8.0);
    CHECK(f4.deriv(0.3, 3) == 0.0);
    CHECK_THROWS_AS(f4.deriv(0.3, 4), UnsupportedOrderError);
    auto p = UnimodalMap<double>::power(2.5, 1.0);
    CHECK_THROWS_AS(p.deriv(0.5, 3), UnsupportedOrderError);
    CHECK_NOTHROW(p.deriv(0.3, 3));
}

TEST_CASE("schwarzian closed form") {
    CHECK(UnimodalMap<double>::logistic(4.0).schwarzian(0.0) == doctest::Approx(-6.0));
    CHECK(UnimodalMap<double>::logistic(3.9).schwarzian(0.25) == doctest::Approx(-24.0));
    CHECK_THROWS_AS(UnimodalMap<double>::logistic(3.3).schwarzian(0.5), SingularityError);
}

TEST_CASE("property: logistic schwarzian is negative and matches -6/(1-2x)^2") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(1.01, 4.0), ux(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        auto f = UnimodalMap<double>::logistic(ua(rng));
        double x = ux(rng);
        if (std::abs(x - 0.5) < 1e-6) continue;
        double s = f.schwarzian(x);
        CHECK(s < 0);
        CHECK(rel_close(s, -6.0 / ((1 - 2 * x) * (1 - 2 * x)), 1e-12));
    }
}

TEST_CASE("property: first derivative matches central differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ux(0.01, 0.99);
    for (auto f : {UnimodalMap<double>::logistic(3.7), UnimodalMap<double>::power(2.5, 1.0),
                   UnimodalMap<double>::power(4.0, 0.9)}) {
        for (int i = 0; i < 1000; ++i) {
            double x = ux(rng);
            if (std::abs(x - 0.5) < 1e-3) continue;
            const double h = 1e-6;
            double fd = (f.eval(x + h) - f.eval(x - h)) / (2 * h);
            // truncation O(h^2) relative, cancellation ~ eps / h absolute
            CHECK(std::abs(f.deriv(x, 1) - fd) <= 1e-6 * std::abs(fd) + 1e-9);
        }
    }
}

TEST_CASE("property: built-in families are symmetric about c") {
    std::mt19937_64 rng(13);
    // Dyadic offsets keep both 1/2 - t and 1/2 + t exact.
    std::uniform_int_distribution<int> ut(0, 1 << 20);
    for (auto f : {UnimodalMap<double>::logistic(3.83), UnimodalMap<double>::power(3.3, 1.0)}) {
        for (int i = 0; i < 1000; ++i) {
            double t = std::ldexp(double(ut(rng)), -21);
            CHECK(rel_close(f.eval(0.5 - t), f.eval(0.5 + t), 1e-14));
        }
    }
}

TEST_CASE("construction validation") {
    CHECK_THROWS_AS(UnimodalMap<double>::logistic(5.0), DomainError);
    CHECK_THROWS_AS(UnimodalMap<double>::logistic(1.0), DomainError);
    CHECK_THROWS_AS(UnimodalMap<double>::power(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(UnimodalMap<double>::power(2.0, 1.5), DomainError);
    CHECK(UnimodalMap<double>::logistic(3.9).critical_order() == 2.0);
    CHECK(UnimodalMap<double>::logistic(3.9).smoothness_eta() == 1.0);
}

TEST_CASE("holder constant") {
    auto f4 = UnimodalMap<double>::logistic(4.0);
    for (std::size_t g : {2u, 10u, 1000u}) CHECK(estimate_holder_constant(f4, 1.0, g).c_eta == 0.0);
    CHECK_THROWS_AS(estimate_holder_constant(f4, 1.0, 1), ParameterError);
    CHECK_THROWS_AS(estimate_holder_constant(f4, 0.0, 10), ParameterError);

    // D2f = -15 sqrt(2) |x - 1/2|^(1/2): the 1/2-Hoelder constant is 15 sqrt(2),
    // approached by pairs with one point at c.
    auto p = UnimodalMap<double>::power(2.5, 1.0);
    HolderEstimate h = estimate_holder_constant(p, 0.5, 1000);
    const double exact = 15 * std::sqrt(2.0);
    CHECK(h.grid_size == 1000);
    CHECK(h.c_eta > 0.9 * exact);
    CHECK(h.c_eta <= exact * (1 + 1e-12));

    // Nested grids: a refined grid contains the coarse one.
    double coarse = estimate_holder_constant(p, 0.5, 101).c_eta;
    double fine = estimate_holder_constant(p, 0.5, 201).c_eta;
    CHECK(fine >= coarse);
}

TEST_CASE("descriptors and precision") {
    auto d = MapDescriptor::parse("logistic:3.9");
    CHECK(d.family == Family::logistic);
    CHECK(d.a == 3.9);
    CHECK(d.label() == "logistic:3.9");
    auto p = MapDescriptor::parse("power:2.5,0.9");
    CHECK(p.family == Family::power);
    CHECK(p.alpha == 2.5);
    CHECK(p.a == 0.9);
    CHECK_THROWS_AS(MapDescriptor::parse("quadratic:2"), ConfigError);
    CHECK_THROWS_AS(MapDescriptor::parse("logistic:abc"), ConfigError);
    CHECK_THROWS_AS(MapDescriptor::parse("logistic"), ConfigError);

    json j = to_json(d);
    CHECK(j["family"] == "logistic");
    CHECK(j["a"] == 3.9);
    CHECK(j["precision"] == "f64");
    CHECK(map_from_json(j) == d);

    CHECK(Precision::parse("f64") == Precision::f64());
    CHECK(Precision::parse("ext50").digits == 50);
    CHECK_THROWS_AS(Precision::parse("ext10"), ConfigError);
    CHECK_THROWS_AS(Precision::parse("f32"), ConfigError);
}

TEST_CASE("extended backend agrees with binary64 and keeps the typed digits") {
    PrecisionScope scope(50);
    auto d = MapDescriptor::parse("logistic:3.82842712474619");
    auto fe = UnimodalMap<ext_real>::from_descriptor(d);
    auto fd = UnimodalMap<double>::from_descriptor(d);
    for (double x : {0.1, 0.33, 0.5, 0.9}) CHECK(rel_close(to_double(fe.eval(ext_real(x))), fd.eval(x), 1e-15));
    CHECK(fe.a() == ext_real("3.82842712474619"));
    CHECK(real_traits<ext_real>::epsilon() < ext_real("1e-48"));
}
