#pragma once

// Network entities, backhaul formation, user association and the per-user
// end-to-end rate.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "iabplace/channel.hpp"

namespace iabplace {

struct GroundStation {
    Position pos;
};

struct Uav {
    std::size_t id = 0;
    Position pos;
    bool alive = true;
};

struct UserTerminal {
    std::size_t id = 0;
    Position pos;
};

/// Ordered backhaul network. `order[k]` is the k-th UAV to join; it hangs
/// off `parent[k]` (nullopt for the BS), which is always an earlier member.
/// `hop_snr[k]` is the linear SNR of that attachment hop. The last entry is
/// the UAV that serves users.
struct BackhaulChain {
    std::vector<std::size_t> order;
    std::vector<std::optional<std::size_t>> parent;
    std::vector<double> hop_snr;

    /// Distinct link SNR evaluations spent forming the chain.
    std::size_t snr_evaluations = 0;

    bool empty() const { return order.empty(); }
    std::size_t size() const { return order.size(); }
    std::optional<std::size_t> tail() const {
        if (order.empty()) return std::nullopt;
        return order.back();
    }
};

enum class Association { Direct, ViaUav };

struct NetworkSnapshot {
    GroundStation bs;
    std::vector<Uav> uavs;
    std::vector<UserTerminal> users;
    std::vector<Association> association;
    BackhaulChain chain;

    /// Per user, same order as `users`.
    std::vector<double> user_rates_bps;
    /// Per-user end-to-end SNR, max(min(chain, fronthaul), direct).
    std::vector<double> user_snr;

    /// Link terms compared while associating users (per user: every chain
    /// hop, the fronthaul hop and the direct link).
    std::size_t association_terms = 0;
};

/// Breadth-first backhaul formation rooted at the BS. The BS starts as the
/// only explored node. Unexplored UAVs are visited in id order; a UAV joins
/// via the explored node with the strongest in-range link whose SNR exceeds
/// the threshold, where another UAV is only eligible if it beats the
/// candidate's own BS link. Passes repeat until no UAV can join. Each
/// (UAV, node) SNR is evaluated at most once.
///
/// `uavs` must contain only alive UAVs.
BackhaulChain form_backhaul(const GroundStation& bs, std::span<const Uav> uavs,
                            const RadioParams& params);

/// ViaUav iff min(fronthaul, chain) > direct. Ties go Direct.
Association associate_user(double snr_fronthaul, double snr_chain_min, double snr_direct);

/// max(min(chain_rates, fronthaul), direct). Without a serving UAV the
/// chain term is absent and the direct rate is returned.
double effective_rate(std::span<const double> chain_rates_bps,
                      std::optional<double> fronthaul_rate_bps, double direct_rate_bps);

/// Forms the chain over alive UAVs, associates every user with the chain
/// tail or the BS and fills the per-user rates. Fronthaul links longer than
/// the communication range carry nothing; the direct BS link is not range
/// limited.
NetworkSnapshot evaluate_network(const GroundStation& bs, std::span<const Uav> uavs,
                                 std::span<const UserTerminal> users, const RadioParams& params);

/// Fraction of users whose end-to-end SNR is at least the threshold.
double coverage_ratio(const NetworkSnapshot& snapshot, const RadioParams& params);

}  // namespace iabplace
