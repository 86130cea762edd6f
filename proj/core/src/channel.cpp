#include "iabplace/channel.hpp"

#include <algorithm>
#include <string>

#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void require(bool ok, const char* field, const std::string& rule) {
    if (!ok) {
        throw ConfigError(std::string("radio parameter '") + field + "' must be " + rule);
    }
}

double floored(double d, const RadioParams& params) { return std::max(d, params.min_distance_m); }

}  // namespace

double distance(const Position& a, const Position& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double horizontal_distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void RadioParams::validate() const {
    require(std::isfinite(theta_env) && theta_env > 0.0, "theta_env", "positive");
    require(std::isfinite(xi_env) && xi_env > 0.0, "xi_env", "positive");
    require(std::isfinite(delta_exp) && delta_exp >= 1.0, "delta_exp", ">= 1");
    require(eta_los_db >= 0.0, "eta_los_db", ">= 0");
    require(eta_nlos_db >= eta_los_db, "eta_nlos_db", ">= eta_los_db");
    require(f_access_hz > 0.0, "f_access_hz", "positive");
    require(f_a2a_hz > 0.0, "f_a2a_hz", "positive");
    require(c_mps > 0.0, "c_mps", "positive");
    for (double p : tx_power_mw) {
        require(std::isfinite(p) && p > 0.0, "tx_power", "positive");
    }
    require(std::isfinite(noise_mw) && noise_mw > 0.0, "noise", "positive");
    require(bw_access_hz > 0.0, "bw_access_hz", "positive");
    require(bw_bs_hz > 0.0, "bw_bs_hz", "positive");
    require(snr_threshold > 0.0, "snr_threshold", "positive");
    require(comm_range_m > 0.0, "comm_range", "positive");
    require(min_distance_m > 0.0, "min_distance_m", "positive");
}

double los_probability(double elevation_rad, const RadioParams& params) {
    if (!(elevation_rad >= 0.0 && elevation_rad <= std::numbers::pi / 2.0)) {
        throw DomainError("elevation angle outside [0, pi/2]: " + std::to_string(elevation_rad));
    }
    const double exponent = -params.xi_env * kRadToDeg * elevation_rad + params.theta_env;
    return 1.0 / (1.0 + params.theta_env * std::exp(exponent));
}

double elevation_angle(const Position& a, const Position& b) {
    const double dz = std::abs(a.z - b.z);
    const double horiz = horizontal_distance(a, b);
    if (horiz == 0.0) {
        return dz == 0.0 ? 0.0 : std::numbers::pi / 2.0;
    }
    return std::atan(dz / horiz);
}

double atg_path_loss_db(double distance_m, double elevation_rad, const RadioParams& params) {
    if (!(distance_m > 0.0)) {
        throw DomainError("path loss needs a positive distance");
    }
    // 10 log10(x^delta) written as 10 delta log10(x); bit-identical to the
    // 20 log10(x) free-space form when delta == 2.
    const double x = 4.0 * std::numbers::pi * params.f_access_hz * distance_m / params.c_mps;
    const double free_space = 10.0 * params.delta_exp * std::log10(x);
    const double p_los = los_probability(elevation_rad, params);
    const double p_nlos = 1.0 - p_los;
    return free_space + p_los * params.eta_los_db + p_nlos * params.eta_nlos_db;
}

double fspl_db(double distance_m, const RadioParams& params) {
    if (!(distance_m > 0.0)) {
        throw DomainError("path loss needs a positive distance");
    }
    const double x = 4.0 * std::numbers::pi * params.f_a2a_hz * distance_m / params.c_mps;
    return 20.0 * std::log10(x);
}

double snr_linear(double tx_mw, double path_loss_db, double noise_mw) {
    const double received_mw = tx_mw / std::pow(10.0, path_loss_db / 10.0);
    return received_mw / noise_mw;
}

double shannon_rate_bps(double bandwidth_hz, double snr) {
    return bandwidth_hz * std::log2(1.0 + snr);
}

double access_snr(const Position& tx, const Position& user, LinkClass link,
                  const RadioParams& params) {
    const double d = floored(distance(tx, user), params);
    const double pl = atg_path_loss_db(d, elevation_angle(tx, user), params);
    return snr_linear(params.tx_mw(link), pl, params.noise_mw);
}

double backhaul_snr(const Position& a, const Position& b, const RadioParams& params) {
    const double d = floored(distance(a, b), params);
    return snr_linear(params.tx_mw(LinkClass::Backhaul), fspl_db(d, params), params.noise_mw);
}

}  // namespace iabplace
