#include "iabplace/agent/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "iabplace-model";
constexpr int kVersion = 1;

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void fill_vector(const json& j, Eigen::VectorXd& v, const std::string& what) {
    const auto values = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != v.size()) {
        throw FormatError(what + ": expected " + std::to_string(v.size()) + " parameters, found " +
                          std::to_string(values.size()));
    }
    v = Eigen::Map<const Eigen::VectorXd>(values.data(), v.size());
}

json tabular_json(const TabularLearner& l) {
    const QTable& t = l.table();
    std::vector<double> flat;
    flat.reserve(t.state_count() * kActionCount);
    for (const auto& row : t.rows()) flat.insert(flat.end(), row.begin(), row.end());
    return {{"kind", "tabular"},
            {"uav", l.uav_index()},
            {"shape", {t.nx(), t.ny(), kActionCount}},
            {"values", flat}};
}

json d3qn_json(const D3qnLearner& l) {
    json layers = json::array();
    for (const LayerInfo& info : l.nets().online.layers()) {
        layers.push_back({{"name", info.name}, {"rows", info.rows}, {"cols", info.cols}});
    }
    return {{"kind", "d3qn"},
            {"uav", l.uav_index()},
            {"train_steps", l.nets().train_steps},
            {"layers", layers},
            {"online", vector_json(l.nets().online.parameters())},
            {"target", vector_json(l.nets().target.parameters())}};
}

void restore_tabular(const json& j, TabularLearner& l) {
    QTable& t = l.table();
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape != std::vector<std::size_t>{static_cast<std::size_t>(t.nx()),
                                          static_cast<std::size_t>(t.ny()), kActionCount}) {
        throw FormatError("Q-table shape in checkpoint does not match the grid");
    }
    const auto flat = j.at("values").get<std::vector<double>>();
    if (flat.size() != t.state_count() * kActionCount) {
        throw FormatError("Q-table value count does not match its shape");
    }
    auto rows = t.rows();
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (std::size_t a = 0; a < kActionCount; ++a) rows[s][a] = flat[s * kActionCount + a];
    }
}

void restore_d3qn(const json& j, D3qnLearner& l) {
    NetPair& nets = l.nets();
    const auto& stored = j.at("layers");
    const auto& expected = nets.online.layers();
    if (stored.size() != expected.size()) throw FormatError("network layer count mismatch");
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const auto& s = stored[k];
        if (s.at("name").get<std::string>() != expected[k].name ||
            s.at("rows").get<std::size_t>() != expected[k].rows ||
            s.at("cols").get<std::size_t>() != expected[k].cols) {
            throw FormatError("layer '" + expected[k].name + "' shape mismatch");
        }
    }
    fill_vector(j.at("online"), nets.online.parameters(), "online network");
    fill_vector(j.at("target"), nets.target.parameters(), "target network");
    nets.train_steps = j.at("train_steps").get<std::size_t>();
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     std::span<const std::unique_ptr<Learner>> learners) {
    json doc{{"format", kFormat},
             {"version", kVersion},
             {"config_hash", header.config_hash},
             {"schedule",
              {{"eps_max", header.schedule.eps_max},
               {"eps_min", header.schedule.eps_min},
               {"eps_delta", header.schedule.eps_delta},
               {"current", header.schedule.current}}}};
    json list = json::array();
    for (const auto& l : learners) {
        if (l->kind() == LearnerKind::Tabular) {
            list.push_back(tabular_json(static_cast<const TabularLearner&>(*l)));
        } else {
            list.push_back(d3qn_json(static_cast<const D3qnLearner&>(*l)));
        }
    }
    doc["learners"] = std::move(list);
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
    out << doc.dump(1) << '\n';
}

CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 std::span<const std::unique_ptr<Learner>> learners) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kFormat || doc.at("version").get<int>() != kVersion) {
            throw FormatError("unrecognised checkpoint format in " + path.string());
        }
        const auto& list = doc.at("learners");
        if (list.size() != learners.size()) {
            throw FormatError("checkpoint holds " + std::to_string(list.size()) + " learners, expected " +
                              std::to_string(learners.size()));
        }
        for (std::size_t i = 0; i < learners.size(); ++i) {
            const auto& j = list[i];
            const auto kind = learner_kind_from_string(j.at("kind").get<std::string>());
            if (kind != learners[i]->kind() || j.at("uav").get<std::size_t>() != learners[i]->uav_index()) {
                throw FormatError("learner " + std::to_string(i) + " kind or UAV index mismatch");
            }
            if (kind == LearnerKind::Tabular) {
                restore_tabular(j, static_cast<TabularLearner&>(*learners[i]));
            } else {
                restore_d3qn(j, static_cast<D3qnLearner&>(*learners[i]));
            }
        }
        CheckpointHeader header;
        header.config_hash = doc.at("config_hash").get<std::string>();
        const auto& s = doc.at("schedule");
        header.schedule = {s.at("eps_max").get<double>(), s.at("eps_min").get<double>(),
                           s.at("eps_delta").get<double>(), s.at("current").get<double>()};
        return header;
    } catch (const json::exception& e) {
        throw FormatError("malformed checkpoint " + path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace iabplace
