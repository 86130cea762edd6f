#pragma once

// Link-level radio model: LoS probability, air-to-ground and free-space path
// loss, SNR and Shannon rate. Every dB <-> linear conversion in the project
// goes through this header; callers above this layer work in linear SNR and
// bits per second.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace iabplace {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);
double horizontal_distance(const Position& a, const Position& b);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// Transmit power is configured separately for each of these.
enum class LinkClass : std::size_t {
    Direct = 0,     // cellular BS -> ground user
    Fronthaul = 1,  // UAV -> ground user
    Backhaul = 2,   // BS <-> UAV and UAV <-> UAV
};

struct RadioParams {
    // Environment constants of the LoS sigmoid.
    double theta_env = 4.88;
    double xi_env = 0.43;
    double delta_exp = 2.0;
    double eta_los_db = 0.1;
    double eta_nlos_db = 21.0;

    double f_access_hz = 2.0e9;
    double f_a2a_hz = 2.4e9;
    double c_mps = 299792458.0;

    // Indexed by LinkClass. 30 dBm each.
    std::array<double, 3> tx_power_mw{1000.0, 1000.0, 1000.0};
    double noise_mw = dbm_to_mw(-96.0);

    double bw_access_hz = 25.0e6;
    double bw_bs_hz = 25.0e6;

    double snr_threshold = 3.0;  // linear, not dB
    double comm_range_m = 500.0;
    double min_distance_m = 1.0;

    double tx_mw(LinkClass link) const { return tx_power_mw[static_cast<std::size_t>(link)]; }

    /// Throws ConfigError naming the first violated field.
    void validate() const;
};

/// Probability of a line-of-sight path at elevation angle `elevation_rad`
/// (radians, in [0, pi/2]). Uses the standard sigmoid
///     1 / (1 + theta * exp(-xi * deg(phi) + theta)),
/// which rises from ~0 near the horizon to ~1 overhead.
double los_probability(double elevation_rad, const RadioParams& params);

/// Elevation of the segment a-b above the horizontal, in [0, pi/2].
double elevation_angle(const Position& a, const Position& b);

/// Air-to-ground path loss for direct and fronthaul links, f = f_access.
double atg_path_loss_db(double distance_m, double elevation_rad, const RadioParams& params);

/// Free-space path loss for backhaul links, f = f_a2a.
double fspl_db(double distance_m, const RadioParams& params);

double snr_linear(double tx_mw, double path_loss_db, double noise_mw);

double shannon_rate_bps(double bandwidth_hz, double snr);

// Link helpers used by the topology layer. Distances below min_distance_m
// are floored, so co-located endpoints give a finite, very large SNR.
// Range limits are not applied here.

double access_snr(const Position& tx, const Position& user, LinkClass link,
                  const RadioParams& params);

double backhaul_snr(const Position& a, const Position& b, const RadioParams& params);

}  // namespace iabplace
