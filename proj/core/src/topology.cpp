#include "iabplace/topology.hpp"

#include <algorithm>
#include <limits>

#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

// Backhaul SNR with the range constraint folded in: out-of-range links are
// unusable and report zero.
double ranged_backhaul_snr(const Position& a, const Position& b, const RadioParams& params) {
    if (distance(a, b) > params.comm_range_m) return 0.0;
    return backhaul_snr(a, b, params);
}

struct Candidate {
    double bs_snr = 0.0;
    bool bs_evaluated = false;
    std::size_t members_seen = 0;  // prefix of chain.order already evaluated
    double best_snr = 0.0;
    std::optional<std::size_t> best_parent;
    bool eligible = false;
};

}  // namespace

BackhaulChain form_backhaul(const GroundStation& bs, std::span<const Uav> uavs,
                            const RadioParams& params) {
    BackhaulChain chain;
    const double threshold = params.snr_threshold;
    std::vector<Candidate> cand(uavs.size());
    std::vector<bool> joined(uavs.size(), false);
    // chain.order holds ids; members[k] is the index into `uavs` of order[k].
    std::vector<std::size_t> members;

    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t i = 0; i < uavs.size(); ++i) {
            if (joined[i]) continue;
            Candidate& c = cand[i];
            if (!c.bs_evaluated) {
                c.bs_snr = ranged_backhaul_snr(uavs[i].pos, bs.pos, params);
                c.bs_evaluated = true;
                ++chain.snr_evaluations;
                if (c.bs_snr > threshold) {
                    c.best_snr = c.bs_snr;
                    c.best_parent.reset();
                    c.eligible = true;
                }
            }
            for (; c.members_seen < members.size(); ++c.members_seen) {
                const std::size_t m = members[c.members_seen];
                const double s = ranged_backhaul_snr(uavs[i].pos, uavs[m].pos, params);
                ++chain.snr_evaluations;
                if (s > threshold && s > c.bs_snr && (!c.eligible || s > c.best_snr)) {
                    c.best_snr = s;
                    c.best_parent = uavs[m].id;
                    c.eligible = true;
                }
            }
            if (c.eligible) {
                joined[i] = true;
                members.push_back(i);
                chain.order.push_back(uavs[i].id);
                chain.parent.push_back(c.best_parent);
                chain.hop_snr.push_back(c.best_snr);
                progress = true;
            }
        }
    }
    return chain;
}

Association associate_user(double snr_fronthaul, double snr_chain_min, double snr_direct) {
    return std::min(snr_fronthaul, snr_chain_min) > snr_direct ? Association::ViaUav
                                                               : Association::Direct;
}

double effective_rate(std::span<const double> chain_rates_bps,
                      std::optional<double> fronthaul_rate_bps, double direct_rate_bps) {
    if (!fronthaul_rate_bps) return direct_rate_bps;
    double via = *fronthaul_rate_bps;
    for (double r : chain_rates_bps) via = std::min(via, r);
    return std::max(via, direct_rate_bps);
}

NetworkSnapshot evaluate_network(const GroundStation& bs, std::span<const Uav> uavs,
                                 std::span<const UserTerminal> users, const RadioParams& params) {
    NetworkSnapshot snap;
    snap.bs = bs;
    snap.uavs.assign(uavs.begin(), uavs.end());
    snap.users.assign(users.begin(), users.end());

    std::vector<Uav> alive;
    alive.reserve(uavs.size());
    for (const Uav& u : uavs) {
        if (u.alive) alive.push_back(u);
    }
    snap.chain = form_backhaul(bs, alive, params);

    std::vector<double> hop_rates;
    hop_rates.reserve(snap.chain.size());
    double chain_min_snr = std::numeric_limits<double>::infinity();
    for (double s : snap.chain.hop_snr) {
        hop_rates.push_back(shannon_rate_bps(params.bw_bs_hz, s));
        chain_min_snr = std::min(chain_min_snr, s);
    }

    std::optional<Position> server;
    if (const auto tail = snap.chain.tail()) {
        for (const Uav& u : alive) {
            if (u.id == *tail) server = u.pos;
        }
    }

    snap.association.reserve(users.size());
    snap.user_rates_bps.reserve(users.size());
    snap.user_snr.reserve(users.size());
    for (const UserTerminal& user : users) {
        const double direct_snr = access_snr(bs.pos, user.pos, LinkClass::Direct, params);
        const double direct_rate = shannon_rate_bps(params.bw_bs_hz, direct_snr);
        snap.association_terms += 1;

        if (!server) {
            snap.association.push_back(Association::Direct);
            snap.user_rates_bps.push_back(direct_rate);
            snap.user_snr.push_back(direct_snr);
            continue;
        }

        double fronthaul_snr = 0.0;
        if (distance(*server, user.pos) <= params.comm_range_m) {
            fronthaul_snr = access_snr(*server, user.pos, LinkClass::Fronthaul, params);
        }
        const double fronthaul_rate = shannon_rate_bps(params.bw_access_hz, fronthaul_snr);

        double via_snr = fronthaul_snr;
        for (double s : snap.chain.hop_snr) via_snr = std::min(via_snr, s);
        snap.association_terms += snap.chain.size() + 1;

        snap.association.push_back(associate_user(fronthaul_snr, chain_min_snr, direct_snr));
        snap.user_rates_bps.push_back(effective_rate(hop_rates, fronthaul_rate, direct_rate));
        snap.user_snr.push_back(std::max(via_snr, direct_snr));
    }
    return snap;
}

double coverage_ratio(const NetworkSnapshot& snapshot, const RadioParams& params) {
    if (snapshot.user_snr.empty()) {
        throw DomainError("coverage ratio needs at least one user");
    }
    std::size_t covered = 0;
    for (double s : snapshot.user_snr) {
        if (s >= params.snr_threshold) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(snapshot.user_snr.size());
}

}  // namespace iabplace
