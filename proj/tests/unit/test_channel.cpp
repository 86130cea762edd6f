#include <cmath>
#include <numbers>

#include "doctest.h"
#include "iabplace/channel.hpp"
#include "iabplace/errors.hpp"
#include "iabplace/rng.hpp"

using namespace iabplace;
using std::numbers::pi;

TEST_CASE("los probability end points") {
    RadioParams p;
    const double top = los_probability(pi / 2, p);
    CHECK(top < 1.0);
    CHECK(1.0 - top < 1e-10);
    const double expected = 1.0 / (1.0 + 4.88 * std::exp(4.88));
    CHECK(los_probability(0.0, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(los_probability(0.0, p) == doctest::Approx(1.555e-3).epsilon(1e-3));
}

TEST_CASE("los probability is increasing and bounded") {
    RadioParams p;
    double prev = -1.0;
    for (int k = 0; k <= 1000; ++k) {
        const double phi = (pi / 2) * k / 1000.0;
        const double v = los_probability(phi, p);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(v > prev);
        CHECK(v + (1.0 - v) == 1.0);
        prev = v;
    }
}

TEST_CASE("los probability rejects angles outside the quarter turn") {
    RadioParams p;
    CHECK_THROWS_AS(los_probability(-0.01, p), DomainError);
    CHECK_THROWS_AS(los_probability(pi / 2 + 0.01, p), DomainError);
}

TEST_CASE("elevation angle") {
    CHECK(elevation_angle({0, 0, 0}, {100, 0, 100}) == doctest::Approx(pi / 4));
    CHECK(elevation_angle({0, 0, 0}, {0, 0, 100}) == doctest::Approx(pi / 2));
    CHECK(elevation_angle({0, 0, 5}, {30, 40, 5}) == 0.0);
}

TEST_CASE("air-to-ground path loss") {
    RadioParams p;
    const double d = 137.0;
    const double core = 20.0 * std::log10(4.0 * pi * p.f_access_hz * d / p.c_mps);
    const double pl = los_probability(0.3, p);
    CHECK(atg_path_loss_db(d, 0.3, p) ==
          doctest::Approx(core + pl * p.eta_los_db + (1 - pl) * p.eta_nlos_db).epsilon(1e-12));

    RadioParams flat = p;
    flat.eta_los_db = flat.eta_nlos_db = 0.0;
    CHECK(atg_path_loss_db(2 * d, 0.3, flat) - atg_path_loss_db(d, 0.3, flat) ==
          doctest::Approx(20.0 * std::log10(2.0)));

    // Overhead the link is almost surely LoS, so only the LoS excess remains.
    CHECK(atg_path_loss_db(d, pi / 2, p) - core == doctest::Approx(0.1).epsilon(1e-9));

    CHECK_THROWS_AS(atg_path_loss_db(0.0, 0.3, p), DomainError);
    CHECK_THROWS_AS(atg_path_loss_db(-1.0, 0.3, p), DomainError);
}

TEST_CASE("free-space path loss") {
    RadioParams p;
    const double unit = p.c_mps / (4 * pi * p.f_a2a_hz);
    CHECK(std::abs(fspl_db(unit, p)) < 1e-9);
    CHECK(fspl_db(500.0, p) - fspl_db(50.0, p) == doctest::Approx(20.0));
    CHECK_THROWS_AS(fspl_db(0.0, p), DomainError);
}

TEST_CASE("atg collapses to fspl without excess losses") {
    RadioParams p;
    p.f_access_hz = p.f_a2a_hz;
    p.eta_los_db = p.eta_nlos_db = 0.0;
    Rng rng = make_rng(3, 0);
    for (int k = 0; k < 1000; ++k) {
        const double d = uniform_real(rng, 1.0, 5000.0);
        const double phi = uniform_real(rng, 0.0, pi / 2);
        CHECK(std::abs(atg_path_loss_db(d, phi, p) - fspl_db(d, p)) < 1e-9);
    }
}

TEST_CASE("snr and rate") {
    CHECK(snr_linear(2.0, 0.0, 2.0) == doctest::Approx(1.0));
    CHECK(snr_linear(1000.0, 30.0, 1.0) == doctest::Approx(1.0));
    CHECK(snr_linear(1000.0, 90.0, dbm_to_mw(-96.0)) == doctest::Approx(std::pow(10.0, 3.6)));
    CHECK(snr_linear(1.0, 10.0, 1.0) > snr_linear(1.0, 10.5, 1.0));

    CHECK(shannon_rate_bps(25e6, 1.0) == doctest::Approx(25e6));
    CHECK(shannon_rate_bps(25e6, 0.0) == 0.0);
    CHECK(shannon_rate_bps(25e6, 3.0) == doctest::Approx(50e6));
}

TEST_CASE("radio parameter validation") {
    RadioParams p;
    CHECK_NOTHROW(p.validate());
    p.delta_exp = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = RadioParams{};
    p.eta_los_db = 30.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = RadioParams{};
    p.noise_mw = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
