// Plain-text key = value scenario configuration: the robot description, the
// obstacle, controller/observer/filter parameters and run settings, with
// line-precise error reporting.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "control.hpp"
#include "isolation_pf.hpp"
#include "model.hpp"
#include "sim.hpp"

namespace contact2d {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Raw parsed file: keys with their values and source lines. Unknown keys are
// rejected after loading so typos surface immediately.
class ParsedConfig {
  public:
    ParsedConfig() = default;

    static ParsedConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open config file");
        std::ostringstream text;
        text << in.rdbuf();
        return from_string(text.str(), path);
    }

    static ParsedConfig from_string(const std::string& text, const std::string& name = "<config>") {
        ParsedConfig cfg;
        cfg.path_ = name;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(cfg.where(lineno) + "expected 'key = value'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(cfg.where(lineno) + "empty key");
            if (cfg.entries_.count(key))
                throw ConfigError(cfg.where(lineno) + "duplicate key '" + key + "'");
            cfg.entries_[key] = Entry{value, lineno, false};
        }
        return cfg;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const Entry* e = lookup(key, fallback.has_value());
        if (!e) return *fallback;
        return parse_double(*e, key);
    }

    int get_int(const std::string& key, std::optional<int> fallback = std::nullopt) {
        const Entry* e = lookup(key, fallback.has_value());
        if (!e) return *fallback;
        const double d = parse_double(*e, key);
        const int i = static_cast<int>(std::llround(d));
        if (std::abs(d - i) > 1e-9)
            throw ConfigError(where(e->line) + "expected integer for '" + key + "'");
        return i;
    }

    bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) {
        const Entry* e = lookup(key, fallback.has_value());
        if (!e) return *fallback;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        throw ConfigError(where(e->line) + "expected true/false for '" + key + "'");
    }

    std::string get_string(const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) {
        const Entry* e = lookup(key, fallback.has_value());
        if (!e) return *fallback;
        return e->value;
    }

    // whitespace-separated list of numbers; length checked when n >= 0
    std::vector<double> get_vector(const std::string& key, int n = -1,
                                   std::optional<std::vector<double>> fallback = std::nullopt) {
        const Entry* e = lookup(key, fallback.has_value());
        if (!e) return *fallback;
        std::istringstream in(e->value);
        std::vector<double> out;
        std::string tok;
        while (in >> tok) {
            try {
                size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ConfigError(where(e->line) + "expected number in '" + key + "', got '" +
                                  tok + "'");
            }
        }
        if (n >= 0 && static_cast<int>(out.size()) != n)
            throw ConfigError(where(e->line) + "'" + key + "' needs " + std::to_string(n) +
                              " values, got " + std::to_string(out.size()));
        return out;
    }

    int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    // call after reading everything: any untouched key is a config mistake
    void reject_unknown_keys() const {
        for (const auto& [key, entry] : entries_)
            if (!entry.used)
                throw ConfigError(where(entry.line) + "unknown key '" + key + "'");
    }

    std::string where(int line) const { return path_ + ":" + std::to_string(line) + ": "; }

  private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    const Entry* lookup(const std::string& key, bool has_fallback) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (has_fallback) return nullptr;
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        }
        it->second.used = true;
        return &it->second;
    }

    double parse_double(const Entry& e, const std::string& key) const {
        try {
            size_t used = 0;
            const double d = std::stod(e.value, &used);
            if (detail::trim(e.value.substr(used)).empty()) return d;
        } catch (const std::exception&) {
        }
        throw ConfigError(where(e.line) + "expected number for '" + key + "', got '" + e.value +
                          "'");
    }

    std::string path_;
    std::map<std::string, Entry> entries_;
};

enum class RunMethod { analytic, pf, both };

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::hold;
    double duration = 5.0;
    uint64_t seed = 1;
    RunMethod method = RunMethod::both;

    int sim_rate_hz = 1000;
    int estimator_rate_hz = 100;

    RobotModel model;
    VectorXd initial_q;
    std::optional<Obstacle> obstacle;

    double kp = 100.0, kv = 20.0;
    TrajectoryParams trajectory;

    double observer_gain = 100.0;
    double detection_threshold = 0.1;  // N m on the residual infinity norm

    PfParams pf;

    double noise_qdot_std = 0.0;  // rad/s on measured joint velocity
    double noise_tau_std = 0.0;   // N m on the torque seen by the observer

    void validate() const {
        if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
        if (sim_rate_hz <= 0 || estimator_rate_hz <= 0 || sim_rate_hz % estimator_rate_hz != 0)
            throw ConfigError("estimator rate must divide the simulation rate");
        if (initial_q.size() != model.joint_count())
            throw ConfigError("initial_q dimension does not match the robot");
        if (!(detection_threshold > 0.0)) throw ConfigError("observer.threshold must be > 0");
        if (!(observer_gain > 0.0)) throw ConfigError("observer.gain must be > 0");
        if (pf.particle_count < 1) throw ConfigError("pf.particle_count must be >= 1");
        if (!(pf.temperature > 0.0)) throw ConfigError("pf.temperature must be > 0");
        if (pf.motion_sigma < 0.0) throw ConfigError("pf.motion_sigma must be >= 0");
        if (pf.dropout_ticks < 1) throw ConfigError("pf.dropout_ticks must be >= 1");
        if (noise_qdot_std < 0.0 || noise_tau_std < 0.0)
            throw ConfigError("noise std must be >= 0");
        if (obstacle) obstacle->validate();
    }
};

inline ScenarioConfig scenario_config_from_parsed(ParsedConfig& p) {
    ScenarioConfig cfg;

    const std::string scen = p.get_string("scenario", std::string("hold"));
    if (scen == "hold") cfg.scenario = ScenarioKind::hold;
    else if (scen == "track") cfg.scenario = ScenarioKind::track;
    else throw ConfigError(p.where(p.line_of("scenario")) + "scenario must be hold or track");

    const std::string method = p.get_string("method", std::string("both"));
    if (method == "analytic") cfg.method = RunMethod::analytic;
    else if (method == "pf") cfg.method = RunMethod::pf;
    else if (method == "both") cfg.method = RunMethod::both;
    else throw ConfigError(p.where(p.line_of("method")) + "method must be analytic, pf or both");

    cfg.duration = p.get_double("duration", 5.0);
    cfg.seed = static_cast<uint64_t>(p.get_int("seed", 1));
    cfg.sim_rate_hz = p.get_int("sim.rate_hz", 1000);
    cfg.estimator_rate_hz = p.get_int("estimator.rate_hz", 100);

    const int n = p.get_int("robot.joints");
    auto broadcast = [&](const std::string& key, double fallback) {
        if (!p.has(key)) return std::vector<double>(static_cast<size_t>(n), fallback);
        std::vector<double> v = p.get_vector(key);
        if (static_cast<int>(v.size()) == 1) v.assign(static_cast<size_t>(n), v[0]);
        if (static_cast<int>(v.size()) != n)
            throw ConfigError(p.where(p.line_of(key)) + "'" + key + "' needs 1 or " +
                              std::to_string(n) + " values");
        return v;
    };
    const auto lengths = broadcast("robot.link_lengths", 0.5);
    const auto widths = broadcast("robot.link_widths", 0.08);
    const auto masses = broadcast("robot.link_masses", 1.0);
    const auto coms = broadcast("robot.com_offsets", -1.0);
    const auto inertias = broadcast("robot.inertias_zz", 0.0);
    const auto damping = broadcast("robot.joint_damping", 0.0);
    cfg.model.links.clear();
    for (int i = 0; i < n; ++i)
        cfg.model.links.push_back(LinkParams{lengths[static_cast<size_t>(i)],
                                             widths[static_cast<size_t>(i)],
                                             masses[static_cast<size_t>(i)],
                                             inertias[static_cast<size_t>(i)],
                                             coms[static_cast<size_t>(i)]});
    cfg.model.joint_damping =
        Eigen::Map<const VectorXd>(damping.data(), static_cast<int>(damping.size()));
    const auto grav = p.get_vector("gravity", 2, std::vector<double>{0.0, -9.81});
    cfg.model.gravity = Vector2d(grav[0], grav[1]);
    try {
        cfg.model.finalize();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(p.where(p.line_of("robot.joints")) + e.what());
    }

    const auto q0 = p.get_vector("robot.initial_q", n);
    cfg.initial_q = Eigen::Map<const VectorXd>(q0.data(), n);

    if (p.has("obstacle.center")) {
        Obstacle obs;
        const auto c = p.get_vector("obstacle.center", 2);
        obs.center = Vector2d(c[0], c[1]);
        obs.radius = p.get_double("obstacle.radius");
        obs.stiffness = p.get_double("obstacle.stiffness", 1e4);
        obs.damping = p.get_double("obstacle.damping", 0.0);
        try {
            obs.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(p.where(p.line_of("obstacle.radius")) + e.what());
        }
        cfg.obstacle = obs;
    }

    cfg.kp = p.get_double("control.kp", 100.0);
    cfg.kv = p.get_double("control.kv", 20.0);
    const auto hold = p.get_vector("control.hold_target", 2);
    cfg.trajectory.hold_point = Vector2d(hold[0], hold[1]);
    cfg.trajectory.track_radius = p.get_double("control.track_radius", 0.1);
    cfg.trajectory.track_period = p.get_double("control.track_period", 4.0);

    cfg.observer_gain = p.get_double("observer.gain", 100.0);
    cfg.detection_threshold = p.get_double("observer.threshold", 0.1);

    cfg.pf.particle_count = p.get_int("pf.particle_count", 50);
    cfg.pf.motion_sigma = p.get_double("pf.motion_sigma", 0.01);
    cfg.pf.temperature = p.get_double("pf.temperature", 0.05);
    cfg.pf.seed_all_distal_links = p.get_bool("pf.seed_all_distal_links", false);
    cfg.pf.dropout_ticks = p.get_int("pf.dropout_ticks", 5);

    cfg.noise_qdot_std = p.get_double("noise.qdot_std", 0.0);
    cfg.noise_tau_std = p.get_double("noise.tau_std", 0.0);

    p.reject_unknown_keys();
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    ParsedConfig p = ParsedConfig::from_file(path);
    return scenario_config_from_parsed(p);
}

// The tuned two-scenario setup shipped in configs/: a 4-link arm reaching to
// the right, dropping its fourth link onto a circular obstacle and pressing
// against it while the tip holds position or tracks a circle.
inline ScenarioConfig default_scenario_config(ScenarioKind kind) {
    ScenarioConfig cfg;
    cfg.scenario = kind;
    cfg.duration = 5.0;
    cfg.seed = 1;
    cfg.model = RobotModel::uniform(4, 0.5, 0.08, 1.0);
    cfg.initial_q = VectorXd(4);
    cfg.initial_q << -0.5235987755982988, 0.4363323129985824, 0.3490658503988659,
        0.2617993877991494;  // -30, 25, 20, 15 degrees
    cfg.obstacle = Obstacle{Vector2d(1.63, -0.56), 0.30, 3000.0, 200.0};
    cfg.kp = 20.0;
    cfg.kv = 9.0;
    cfg.trajectory.hold_point = Vector2d(1.73, -0.51);
    cfg.trajectory.track_radius = 0.1;
    cfg.trajectory.track_period = 4.0;
    cfg.observer_gain = 100.0;
    cfg.detection_threshold = 0.1;
    cfg.validate();
    return cfg;
}

}  // namespace contact2d
