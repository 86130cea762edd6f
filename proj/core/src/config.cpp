#include "iabplace/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "iabplace/errors.hpp"

extern char** environ;

namespace iabplace {

namespace {

constexpr std::string_view kEnvPrefix = "IABPLACE_";

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T scalar(const YAML::Node& n) {
    if (!n.IsScalar()) throw ConfigError("expected a scalar value");
    if constexpr (std::is_unsigned_v<T>) {
        if (!n.Scalar().empty() && n.Scalar().front() == '-') throw ConfigError("expected a non-negative integer");
    }
    return n.as<T>();
}

double finite(const YAML::Node& n) {
    const double v = scalar<double>(n);
    if (!std::isfinite(v)) throw ConfigError("expected a finite number");
    return v;
}

std::vector<double> number_list(const YAML::Node& n, std::size_t size) {
    if (!n.IsSequence() || n.size() != size) {
        throw ConfigError("expected a list of " + std::to_string(size) + " numbers");
    }
    std::vector<double> out;
    for (const auto& item : n) out.push_back(finite(item));
    return out;
}

std::string list_text(std::initializer_list<double> xs) {
    std::string s = "[";
    bool first = true;
    for (double x : xs) {
        if (!first) s += ", ";
        s += fmt_double(x);
        first = false;
    }
    return s + "]";
}

struct Key {
    std::string_view name;
    std::function<void(ExperimentConfig&, const YAML::Node&)> set;
    std::function<std::string(const ExperimentConfig&)> get;  // empty: not rendered
};

#define IAB_DOUBLE(key, field)                                                    \
    Key {                                                                         \
        key, [](ExperimentConfig& c, const YAML::Node& n) { c.field = finite(n); }, \
            [](const ExperimentConfig& c) { return fmt_double(c.field); }         \
    }
#define IAB_UINT(key, field)                                                                         \
    Key {                                                                                            \
        key, [](ExperimentConfig& c, const YAML::Node& n) { c.field = scalar<std::uint64_t>(n); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }                        \
    }
#define IAB_INT(key, field)                                                               \
    Key {                                                                                 \
        key, [](ExperimentConfig& c, const YAML::Node& n) { c.field = scalar<int>(n); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }             \
    }

Key tx_key(std::string_view name, LinkClass link) {
    const auto i = static_cast<std::size_t>(link);
    return {name, [i](ExperimentConfig& c, const YAML::Node& n) { c.radio.tx_power_mw[i] = dbm_to_mw(finite(n)); },
            [i](const ExperimentConfig& c) { return fmt_double(mw_to_dbm(c.radio.tx_power_mw[i])); }};
}

// Applied in this order, so `tx_power_dbm` is refined by the per-link keys.
const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        // Channel and link budget.
        IAB_DOUBLE("theta_env", radio.theta_env),
        IAB_DOUBLE("xi_env", radio.xi_env),
        IAB_DOUBLE("delta_exp", radio.delta_exp),
        IAB_DOUBLE("eta_los_db", radio.eta_los_db),
        IAB_DOUBLE("eta_nlos_db", radio.eta_nlos_db),
        IAB_DOUBLE("f_access_hz", radio.f_access_hz),
        IAB_DOUBLE("f_a2a_hz", radio.f_a2a_hz),
        {"tx_power_dbm",
         [](ExperimentConfig& c, const YAML::Node& n) { c.radio.tx_power_mw.fill(dbm_to_mw(finite(n))); },
         {}},
        tx_key("tx_power_direct_dbm", LinkClass::Direct),
        tx_key("tx_power_fronthaul_dbm", LinkClass::Fronthaul),
        tx_key("tx_power_backhaul_dbm", LinkClass::Backhaul),
        {"noise_dbm", [](ExperimentConfig& c, const YAML::Node& n) { c.radio.noise_mw = dbm_to_mw(finite(n)); },
         [](const ExperimentConfig& c) { return fmt_double(mw_to_dbm(c.radio.noise_mw)); }},
        IAB_DOUBLE("bw_access_hz", radio.bw_access_hz),
        IAB_DOUBLE("bw_bs_hz", radio.bw_bs_hz),
        IAB_DOUBLE("snr_threshold", radio.snr_threshold),
        IAB_DOUBLE("comm_range", radio.comm_range_m),
        IAB_DOUBLE("min_distance_m", radio.min_distance_m),

        // Scenario geometry.
        IAB_INT("grid_nx", grid.nx),
        IAB_INT("grid_ny", grid.ny),
        IAB_DOUBLE("cell_size_m", grid.cell_size),
        IAB_DOUBLE("altitude_m", grid.altitude_m),
        IAB_UINT("n_uavs", n_uavs),
        IAB_UINT("n_users", n_users),
        {"user_mean",
         [](ExperimentConfig& c, const YAML::Node& n) {
             const auto v = number_list(n, 2);
             c.users.mean = {v[0], v[1]};
         },
         [](const ExperimentConfig& c) { return list_text({c.users.mean[0], c.users.mean[1]}); }},
        {"user_cov",
         [](ExperimentConfig& c, const YAML::Node& n) {
             if (!n.IsSequence() || n.size() != 2) throw ConfigError("expected a 2x2 matrix");
             const auto r0 = number_list(n[0], 2);
             const auto r1 = number_list(n[1], 2);
             c.users.cov = {{{r0[0], r0[1]}, {r1[0], r1[1]}}};
         },
         [](const ExperimentConfig& c) {
             const auto& m = c.users.cov;
             return "[" + list_text({m[0][0], m[0][1]}) + ", " + list_text({m[1][0], m[1][1]}) + "]";
         }},
        {"bs_position",
         [](ExperimentConfig& c, const YAML::Node& n) {
             const auto v = number_list(n, 3);
             c.bs_position = {v[0], v[1], v[2]};
         },
         [](const ExperimentConfig& c) {
             return list_text({c.bs_position.x, c.bs_position.y, c.bs_position.z});
         }},
        {"initial_cells",
         [](ExperimentConfig& c, const YAML::Node& n) {
             if (!n.IsSequence()) throw ConfigError("expected a list of [x, y] cells");
             c.initial_cells.clear();
             for (const auto& item : n) {
                 if (!item.IsSequence() || item.size() != 2) throw ConfigError("expected [x, y] cell pairs");
                 c.initial_cells.push_back({scalar<int>(item[0]), scalar<int>(item[1])});
             }
         },
         [](const ExperimentConfig& c) {
             std::string s = "[";
             for (std::size_t i = 0; i < c.initial_cells.size(); ++i) {
                 if (i > 0) s += ", ";
                 s += "[" + std::to_string(c.initial_cells[i].x) + ", " + std::to_string(c.initial_cells[i].y) + "]";
             }
             return s + "]";
         }},

        // Learning.
        {"learner",
         [](ExperimentConfig& c, const YAML::Node& n) { c.learner = learner_kind_from_string(scalar<std::string>(n)); },
         [](const ExperimentConfig& c) { return std::string(to_string(c.learner)); }},
        IAB_DOUBLE("alpha", weights.alpha),
        IAB_DOUBLE("mu", train.mu),
        IAB_DOUBLE("gamma", train.gamma),
        IAB_UINT("batch_size", train.batch_size),
        IAB_UINT("buffer_capacity", train.buffer_capacity),
        IAB_UINT("target_sync_period", train.target_sync_period),
        {"grad_clip",
         [](ExperimentConfig& c, const YAML::Node& n) {
             if (n.IsNull()) {
                 c.train.grad_clip.reset();
             } else {
                 c.train.grad_clip = finite(n);
             }
         },
         [](const ExperimentConfig& c) { return c.train.grad_clip ? fmt_double(*c.train.grad_clip) : "null"; }},
        IAB_UINT("trunk_width1", widths.trunk1),
        IAB_UINT("trunk_width2", widths.trunk2),
        IAB_UINT("head_width", widths.head),
        {"eps_max",
         [](ExperimentConfig& c, const YAML::Node& n) {
             c.schedule.eps_max = finite(n);
             c.schedule.current = c.schedule.eps_max;
         },
         [](const ExperimentConfig& c) { return fmt_double(c.schedule.eps_max); }},
        IAB_DOUBLE("eps_min", schedule.eps_min),
        IAB_DOUBLE("eps_delta", schedule.eps_delta),
        {"eps_decay",
         [](ExperimentConfig& c, const YAML::Node& n) {
             const auto s = scalar<std::string>(n);
             if (s == "iteration") {
                 c.eps_decay = DecayMode::PerIteration;
             } else if (s == "episode") {
                 c.eps_decay = DecayMode::PerEpisode;
             } else {
                 throw ConfigError("expected 'iteration' or 'episode'");
             }
         },
         [](const ExperimentConfig& c) {
             return std::string(c.eps_decay == DecayMode::PerIteration ? "iteration" : "episode");
         }},
        IAB_DOUBLE("reward_scale", reward_scale),
        IAB_INT("episodes", episodes),
        IAB_INT("iterations", iterations),

        // Failure runs.
        {"failure_step",
         [](ExperimentConfig& c, const YAML::Node& n) {
             if (n.IsNull()) {
                 c.failure.reset();
                 return;
             }
             if (!c.failure) c.failure.emplace();
             c.failure->step = scalar<int>(n);
         },
         [](const ExperimentConfig& c) { return c.failure ? std::to_string(c.failure->step) : "null"; }},
        {"failure_victim",
         [](ExperimentConfig& c, const YAML::Node& n) {
             const bool random = n.IsNull() || (n.IsScalar() && n.Scalar() == "random");
             if (random && !c.failure) return;
             if (!c.failure) throw ConfigError("failure_victim needs failure_step");
             if (random) {
                 c.failure->victim.reset();
             } else {
                 c.failure->victim = scalar<std::size_t>(n);
             }
         },
         [](const ExperimentConfig& c) {
             return c.failure && c.failure->victim ? std::to_string(*c.failure->victim) : "random";
         }},
        IAB_INT("eval_steps", eval_steps),
        {"recovery",
         [](ExperimentConfig& c, const YAML::Node& n) {
             const auto s = scalar<std::string>(n);
             if (s == "reduced") {
                 c.recovery = RecoveryPolicy::Reduced;
             } else if (s == "same") {
                 c.recovery = RecoveryPolicy::Same;
             } else {
                 throw ConfigError("expected 'reduced' or 'same'");
             }
         },
         [](const ExperimentConfig& c) {
             return std::string(c.recovery == RecoveryPolicy::Reduced ? "reduced" : "same");
         }},
        {"fine_tune", [](ExperimentConfig& c, const YAML::Node& n) { c.fine_tune = scalar<bool>(n); },
         [](const ExperimentConfig& c) { return std::string(c.fine_tune ? "true" : "false"); }},

        IAB_UINT("seed", seed),
    };
    return table;
}

#undef IAB_DOUBLE
#undef IAB_UINT
#undef IAB_INT

std::string render(const ExperimentConfig& cfg, bool with_seed) {
    std::string out;
    for (const Key& k : keys()) {
        if (!k.get || (!with_seed && k.name == "seed")) continue;
        out += std::string(k.name) + ": " + k.get(cfg) + "\n";
    }
    return out;
}

}  // namespace

Overrides environment_overrides() {
    Overrides out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        const std::string_view entry(*e);
        if (!entry.starts_with(kEnvPrefix)) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        std::string key(entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size()));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
        out[key] = std::string(entry.substr(eq + 1));
    }
    return out;
}

ExperimentConfig parse_config_text(std::string_view yaml_text, const Overrides& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.IsNull() && !root.IsMap()) throw ConfigError("config must be a mapping of key: value");

    std::map<std::string, YAML::Node> given;
    if (root.IsMap()) {
        for (const auto& kv : root) given[kv.first.as<std::string>()] = kv.second;
    }
    for (const auto& [key, text] : overrides) {
        try {
            given[key] = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw ConfigError("override " + std::string(kEnvPrefix) + key + ": " + e.what());
        }
    }

    std::set<std::string_view> known;
    for (const Key& k : keys()) known.insert(k.name);
    for (const auto& [key, node] : given) {
        if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    ExperimentConfig cfg;
    for (const Key& k : keys()) {
        const auto it = given.find(std::string(k.name));
        if (it == given.end()) continue;
        try {
            k.set(cfg, it->second);
        } catch (const YAML::Exception& e) {
            throw ConfigError("config key '" + std::string(k.name) + "': " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("config key '" + std::string(k.name) + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), overrides);
}

std::string render_config(const ExperimentConfig& cfg) { return render(cfg, true); }

std::string config_hash(const ExperimentConfig& cfg) {
    // FNV-1a, 64 bit.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : render(cfg, false)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace iabplace
