#include <doctest.h>

#include <cmath>
#include <numbers>

#include "copcoal/coalition.hpp"
#include "copcoal/copula.hpp"
#include "copcoal/error.hpp"
#include "copcoal/network.hpp"

using namespace copcoal;

TEST_CASE("tau matrix from distances") {
    const std::vector<Sensor> s = {{0, {0.2, 0.2}}, {1, {0.2, 0.2}}, {2, {1.2, 0.2}}, {3, {50.0, 0.2}}};
    const Matrix tau = build_tau_matrix(s);
    CHECK(tau(0, 1) == 1.0);
    CHECK(tau(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(tau(0, 3) < 1e-300);
    CHECK(tau(2, 2) == 1.0);
}

TEST_CASE("correlation from tau") {
    CHECK(build_correlation_matrix(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));
    Matrix tau(2, 2);
    tau << 1, 0.5, 0.5, 1;
    CHECK(build_correlation_matrix(tau)(0, 1) == doctest::Approx(std::sin(std::numbers::pi / 4)).epsilon(1e-14));

    // sin-map of this tau pattern is indefinite
    Matrix adv(3, 3);
    adv << 1, 0.9, 0.9, 0.9, 1, 0.05, 0.9, 0.05, 1;
    Matrix raw = adv;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) raw(i, j) = i == j ? 1.0 : std::sin(std::numbers::pi * adv(i, j) / 2);
    REQUIRE(min_eigenvalue(raw) < 0.0);
    const Matrix r = build_correlation_matrix(adv);
    CHECK(min_eigenvalue(r) >= -1e-10);
    for (int i = 0; i < 3; ++i) CHECK(r(i, i) == doctest::Approx(1.0));
    CHECK(min_eigenvalue(build_correlation_matrix(adv, 0.01)) >= 0.01 * (1 - 1e-6));
}

TEST_CASE("sensor variance policies") {
    const Point src{0.75, 0.75};
    const Sensor at_one{0, {1.75, 0.75}};
    CHECK(sensor_variance(at_one, src, VariancePolicy::PaperLiteral) == doctest::Approx(1.0));
    CHECK(sensor_variance(at_one, src, VariancePolicy::DistanceProportional) == doctest::Approx(1.0));
    const Sensor quarter{0, {1.0, 0.75}};
    CHECK(sensor_variance(quarter, src, VariancePolicy::PaperLiteral) == doctest::Approx(4.0));
    CHECK(sensor_variance(quarter, src, VariancePolicy::DistanceProportional) == doctest::Approx(0.25));
    const Sensor on_top{0, {0.75, 0.75 + 1e-8}};
    try {
        (void)sensor_variance(on_top, src);
        FAIL("expected SourceCollocation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SourceCollocation);
    }
}

TEST_CASE("coalition energy and feasibility") {
    EnergyModel e;
    e.requests_per_unit_time = 1;
    e.energy_per_transmission = 1;
    e.alpha = 4;
    CHECK(coalition_energy(1, e) == 0.0);
    CHECK(coalition_energy(Coalition{0, 1, 2, 3}, e) == 3.0);
    CHECK(coalition_energy(5, e) == 4.0);
    CHECK(e.max_feasible_size(100) == 4);
    CHECK(e.max_feasible_size(3) == 3);
    e.requests_per_unit_time = 2.5;
    CHECK(coalition_energy(3, e) == 5.0);
    CHECK(e.max_feasible_size(100) == 2);
    try {
        (void)coalition_energy(0, e);
        FAIL("expected EmptyCoalition");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::EmptyCoalition);
    }
}

TEST_CASE("uniform deployment") {
    const Region reg{0.0, 1.5, 0.0, 1.5};
    Rng a(3), b(3);
    const auto s = deploy_uniform(28, reg, a);
    REQUIRE(s.size() == 28);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(reg.contains(s[i].location));
        CHECK(s[i].id == static_cast<SensorId>(i));
    }
    const auto t = deploy_uniform(28, reg, b);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].location == t[i].location);
    CHECK(deploy_uniform(1, reg, a).size() == 1);
    CHECK_THROWS_AS(deploy_uniform(0, reg, a), Error);
}

TEST_CASE("network model blocks") {
    Rng rng(11);
    auto s = deploy_uniform(6, Region{}, rng);
    assign_distance_gaussian(s, {0.75, 0.75}, VariancePolicy::PaperLiteral);
    const NetworkModel net(s, {0.75, 0.75}, EnergyModel{});
    const Coalition c{1, 3, 4};
    const Matrix r = net.corr_block(c);
    const Matrix cov = net.covariance_block(c);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto a = c.members()[i], b = c.members()[j];
            CHECK(r(i, j) == net.corr_matrix()(a, b));
            const double sa = std::get<GaussianMean>(net.sensor(a).marginal).sigma;
            const double sb = std::get<GaussianMean>(net.sensor(b).marginal).sigma;
            CHECK(cov(i, j) == doctest::Approx(sa * sb * r(i, j)).epsilon(1e-14));
        }
    CHECK(net.all_gaussian());
    CHECK(min_eigenvalue(net.corr_matrix()) >= net.psd_floor() * (1 - 1e-6));
    // paper-literal variance is 1 / distance
    const double d = distance(net.sensor(2).location, net.source());
    CHECK(std::pow(std::get<GaussianMean>(net.sensor(2).marginal).sigma, 2) == doctest::Approx(1.0 / d));
}

TEST_CASE("coalition and partition basics") {
    const Coalition a{3, 1, 2};
    CHECK(a.members() == std::vector<SensorId>{1, 2, 3});
    CHECK(a.to_string() == "1 2 3");
    CHECK_THROWS_AS(Coalition(std::vector<SensorId>{}), Error);
    CHECK_THROWS_AS(Coalition({1, 1}), Error);
    const Partition p({Coalition{2, 3}, Coalition{0}, Coalition{1}}, 4);
    CHECK(p.to_string() == "0;1;2 3");
    CHECK(p.coalition_of(3) == Coalition{2, 3});
    CHECK(p.max_coalition_size() == 2);
    CHECK_THROWS_AS(Partition({Coalition{0, 1}, Coalition{1}}, 2), Error);
    CHECK_THROWS_AS(Partition({Coalition{0}}, 2), Error);
}
