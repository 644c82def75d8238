#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "airmatrix/batch.hpp"
#include "airmatrix/occupancy.hpp"
#include "airmatrix/reporting.hpp"

namespace airmatrix {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a:") + buf;
}

// ---------------------------------------------------------------- grid

inline GridSpec grid_from_json(const Json& j) {
    GridSpec g;
    if (j.contains("origin")) {
        const auto& o = j.at("origin");
        g.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
    }
    g.a = j.at("a").get<double>();
    g.h = j.at("h").get<double>();
    g.I = j.at("I").get<int>();
    g.J = j.at("J").get<int>();
    g.K = j.at("K").get<int>();
    g.validate();
    return g;
}

inline Json grid_to_json(const GridSpec& g) {
    return Json{{"origin", {g.origin.x, g.origin.y, g.origin.z}},
                {"a", g.a},
                {"h", g.h},
                {"I", g.I},
                {"J", g.J},
                {"K", g.K}};
}

// ---------------------------------------------------------------- fleet

inline Fleet fleet_from_json(const Json& j) {
    Fleet fleet;
    for (const auto& [name, spec] : j.items()) {
        fleet.emplace(name, calibrate(spec.at("m").get<double>(),
                                      spec.at("v_mv").get<double>(),
                                      spec.at("v_mh").get<double>(), name));
    }
    if (fleet.empty()) throw ConfigError("fleet: no aircraft defined");
    return fleet;
}

inline Json fleet_to_json(const Fleet& fleet) {
    Json j = Json::object();
    for (const auto& [name, perf] : fleet)
        j[name] = {{"m", perf.mass_kg},
                   {"v_mv", perf.v_max_vertical},
                   {"v_mh", perf.v_max_horizontal}};
    return j;
}

// ---------------------------------------------------------------- buildings

inline std::vector<BuildingFootprint> buildings_from_json(const Json& j) {
    std::vector<BuildingFootprint> out;
    for (const auto& item : j) {
        BuildingFootprint f;
        f.height = item.at("height").get<double>();
        for (const auto& v : item.at("polygon"))
            f.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        out.push_back(std::move(f));
    }
    return out;
}

inline Json buildings_to_json(std::span<const BuildingFootprint> footprints) {
    Json j = Json::array();
    for (const BuildingFootprint& f : footprints) {
        Json poly = Json::array();
        for (const Vec2& v : f.polygon) poly.push_back({v.x, v.y});
        j.push_back({{"polygon", poly}, {"height", f.height}});
    }
    return j;
}

// ---------------------------------------------------------------- flight plans

inline std::string plans_to_csv(std::span<const FlightPlan> plans) {
    std::string out = "id,ox,oy,oz,dx,dy,dz,t_dep,aircraft\n";
    for (const FlightPlan& p : plans) {
        out += std::to_string(p.id) + ',';
        out += format_double(p.origin.x) + ',' + format_double(p.origin.y) + ',' +
               format_double(p.origin.z) + ',';
        out += format_double(p.destination.x) + ',' + format_double(p.destination.y) +
               ',' + format_double(p.destination.z) + ',';
        out += format_double(p.t_dep) + ',' + p.aircraft + '\n';
    }
    return out;
}

inline std::vector<FlightPlan> plans_from_csv(const std::string& text) {
    std::vector<FlightPlan> plans;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("id,", 0) == 0) continue;  // header
        }
        std::vector<std::string> parts;
        std::size_t pos = 0;
        for (int field = 0; field < 8; ++field) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos)
                throw ConfigError("plans csv: expected 9 fields: " + line);
            parts.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        parts.push_back(line.substr(pos));  // aircraft (may contain spaces)
        FlightPlan p;
        p.id = std::stoi(parts[0]);
        p.origin = {std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3])};
        p.destination = {std::stod(parts[4]), std::stod(parts[5]), std::stod(parts[6])};
        p.t_dep = std::stod(parts[7]);
        p.aircraft = parts[8];
        plans.push_back(std::move(p));
    }
    return plans;
}

inline Json plans_to_json(std::span<const FlightPlan> plans) {
    Json j = Json::array();
    for (const FlightPlan& p : plans)
        j.push_back({{"id", p.id},
                     {"ox", p.origin.x},
                     {"oy", p.origin.y},
                     {"oz", p.origin.z},
                     {"dx", p.destination.x},
                     {"dy", p.destination.y},
                     {"dz", p.destination.z},
                     {"t_dep", p.t_dep},
                     {"aircraft", p.aircraft}});
    return j;
}

inline std::vector<FlightPlan> plans_from_json(const Json& j) {
    std::vector<FlightPlan> plans;
    for (const auto& item : j) {
        FlightPlan p;
        p.id = item.at("id").get<int>();
        p.origin = {item.at("ox").get<double>(), item.at("oy").get<double>(),
                    item.at("oz").get<double>()};
        p.destination = {item.at("dx").get<double>(), item.at("dy").get<double>(),
                         item.at("dz").get<double>()};
        p.t_dep = item.at("t_dep").get<double>();
        p.aircraft = item.at("aircraft").get<std::string>();
        plans.push_back(std::move(p));
    }
    return plans;
}

inline std::vector<FlightPlan> load_plans(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (path.extension() == ".json") return plans_from_json(Json::parse(text));
    return plans_from_csv(text);
}

// ---------------------------------------------------------------- trajectories

inline Json trajectory_to_json(const Trajectory4D& traj, std::string_view planner) {
    Json visits = Json::array();
    for (const BlockVisit& v : traj.visits)
        visits.push_back({{"i", v.block.i},
                          {"j", v.block.j},
                          {"k", v.block.k},
                          {"t_enter", v.t_enter},
                          {"t_exit", v.t_exit},
                          {"hover", v.hover}});
    return Json{{"id", traj.id},
                {"aircraft", traj.aircraft},
                {"t_dep", traj.departure_time()},
                {"visits", visits},
                {"flight_time", traj.flight_time},
                {"planner", std::string(planner)}};
}

// One flight per line; `planner` tags which algorithm produced the list.
inline std::string trajectories_to_jsonl(std::span<const Trajectory4D> trajectories,
                                         std::string_view planner) {
    std::string out;
    for (const Trajectory4D& t : trajectories) {
        out += trajectory_to_json(t, planner).dump();
        out += '\n';
    }
    return out;
}

struct TrajectoryRecord {
    Trajectory4D trajectory;
    std::string planner;
};

inline std::vector<TrajectoryRecord> trajectories_from_jsonl(const std::string& text) {
    std::vector<TrajectoryRecord> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Json j = Json::parse(line);
        TrajectoryRecord rec;
        rec.planner = j.value("planner", "");
        rec.trajectory.id = j.at("id").get<int>();
        rec.trajectory.aircraft = j.value("aircraft", "");
        rec.trajectory.flight_time = j.at("flight_time").get<double>();
        for (const auto& v : j.at("visits")) {
            BlockVisit visit;
            visit.block = {v.at("i").get<int>(), v.at("j").get<int>(),
                           v.at("k").get<int>()};
            visit.t_enter = v.at("t_enter").get<double>();
            visit.t_exit = v.at("t_exit").get<double>();
            visit.hover = v.value("hover", 0.0);
            rec.trajectory.visits.push_back(visit);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------- ledger export

// Debug dump: "i,j,k" -> [[start, end, owner], ...]; an unbounded end (the
// building horizon or a landing hold) serializes as null.
inline Json ledger_to_json(const OccupancyLedger& ledger) {
    const GridSpec& g = ledger.grid();
    Json j = Json::object();
    for (int k = 0; k < g.K; ++k)
        for (int jj = 0; jj < g.J; ++jj)
            for (int i = 0; i < g.I; ++i) {
                const auto& entries = ledger.entries({i, jj, k});
                if (entries.empty()) continue;
                Json list = Json::array();
                for (const auto& e : entries) {
                    Json end = e.interval.end == kInf ? Json(nullptr)
                                                      : Json(e.interval.end);
                    list.push_back({e.interval.start, end, e.owner});
                }
                j[std::to_string(i) + "," + std::to_string(jj) + "," +
                  std::to_string(k)] = list;
            }
    return j;
}

// ---------------------------------------------------------------- reports

inline std::string delays_to_csv(const ComparisonReport& report) {
    std::string out = "id,baseline_s,cfa_s,delay_s,ratio\n";
    for (const FlightDelayRow& r : report.per_flight) {
        out += std::to_string(r.id) + ',' + format_double(r.baseline_s) + ',' +
               format_double(r.cfa_s) + ',' + format_double(r.delay_s) + ',' +
               format_double(r.ratio) + '\n';
    }
    return out;
}

inline std::string conflict_curve_to_csv(std::span<const double> curve) {
    std::string out = "n,cumulative_block_seconds\n";
    for (std::size_t n = 0; n < curve.size(); ++n)
        out += std::to_string(n + 1) + ',' + format_double(curve[n]) + '\n';
    return out;
}

inline std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::string out = "window_s,flights_per_min,conflicts,total_delay_s\n";
    for (const SweepRow& r : rows) {
        out += format_double(r.window_s) + ',' + format_double(r.flights_per_min) +
               ',' + format_double(r.conflict_block_seconds) + ',' +
               format_double(r.total_delay_s) + '\n';
    }
    return out;
}

inline Json heatmap_layer_to_json(const LayerHeatmap& map, int k) {
    Json rows = Json::array();
    for (int i = 0; i < map.I; ++i) {
        Json row = Json::array();
        for (int j = 0; j < map.J; ++j) row.push_back(map.seconds[k][i][j]);
        rows.push_back(std::move(row));
    }
    return Json{{"layer", k},
                {"I", map.I},
                {"J", map.J},
                {"occupied_seconds", rows}};
}

// ---------------------------------------------------------------- scenario

// Scenario file: planning parameters plus grid/fleet/buildings, each inline
// or referenced by a path relative to the scenario file. `fleet` may also be
// the string "default"; `buildings` may be {"synthetic": {...}} to generate
// a deterministic building stock.
struct Scenario {
    ScenarioConfig cfg;
    PlanningEnv env;
    Json raw;
    std::map<std::string, std::string> input_digests;
};

inline ScenarioConfig scenario_config_from_json(const Json& j) {
    ScenarioConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.count = j.value("count", 0);
    cfg.window_s = j.value("window_s", 300.0);
    cfg.speed_scale = j.value("speed_scale", 0.6);
    cfg.hover_threshold_s = j.value("hover_threshold_s", 60.0);
    cfg.dt_s = j.value("dt_s", 1.0);
    cfg.goal_hold_s = j.value("goal_hold_s", kInf);
    cfg.ground_hold = j.value("ground_hold", false);
    if (!(cfg.speed_scale > 0.0) || cfg.speed_scale > 1.0)
        throw ConfigError("scenario: speed_scale must be in (0, 1]");
    return cfg;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    Scenario s;
    const std::string text = read_file(path);
    s.raw = Json::parse(text);
    s.input_digests["scenario"] = fnv1a_hex(text);
    s.cfg = scenario_config_from_json(s.raw);
    const auto dir = path.parent_path();

    const auto fetch = [&](const char* key) -> std::pair<Json, bool> {
        if (!s.raw.contains(key)) return {Json(), false};
        const Json& v = s.raw.at(key);
        if (v.is_string() && !(std::string(key) == "fleet" && v == "default")) {
            const std::string file_text = read_file(dir / v.get<std::string>());
            s.input_digests[key] = fnv1a_hex(file_text);
            return {Json::parse(file_text), true};
        }
        return {v, true};
    };

    GridSpec grid;
    if (const auto [j, ok] = fetch("grid"); ok)
        grid = grid_from_json(j);
    else
        throw ConfigError("scenario: missing grid");

    Fleet fleet;
    if (const auto [j, ok] = fetch("fleet"); ok && !(j.is_string() && j == "default"))
        fleet = fleet_from_json(j);
    else
        fleet = default_fleet();

    std::vector<BuildingFootprint> buildings;
    if (const auto [j, ok] = fetch("buildings"); ok) {
        if (j.is_object() && j.contains("synthetic")) {
            const Json& syn = j.at("synthetic");
            BuildingGenConfig gen;
            gen.seed = syn.value("seed", std::uint64_t{0});
            if (syn.contains("layer_fractions"))
                gen.layer_fractions = syn.at("layer_fractions").get<std::vector<double>>();
            buildings = generate_buildings(gen, grid);
        } else {
            buildings = buildings_from_json(j);
        }
    }

    s.env = PlanningEnv::make(grid, std::move(fleet), std::move(buildings));
    return s;
}

// ---------------------------------------------------------------- manifest

inline Json make_manifest(const Json& config_snapshot,
                          const std::map<std::string, std::string>& input_digests,
                          std::span<const std::string> artifacts) {
    Json files = Json::array();
    for (const std::string& a : artifacts) files.push_back(a);
    Json j;
    j["version"] = kVersion;
    j["config"] = config_snapshot;
    j["inputs"] = input_digests;
    j["artifacts"] = files;
    return j;
}

}  // namespace airmatrix
