#include "opev/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "opev/errors.hpp"

namespace opev::trace {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void put_state(std::ostream& os, const dynamics::SpacecraftState& s) {
    for (int i = 0; i < 3; ++i) os << ',' << fmt(s.position[i]);
    for (int i = 0; i < 3; ++i) os << ',' << fmt(s.velocity[i]);
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

void write_trace(const std::string& path_base, const TraceHeader& header,
                 const std::vector<TraceRow>& rows) {
    std::ofstream csv(path_base + ".csv");
    if (!csv) throw IoError("cannot open " + path_base + ".csv");
    csv << "step,phase"
           ",ev_px,ev_py,ev_pz,ev_vx,ev_vy,ev_vz"
           ",a0_px,a0_py,a0_pz,a0_vx,a0_vy,a0_vz"
           ",a1_px,a1_py,a1_pz,a1_vx,a1_vy,a1_vz"
           ",ev_ax,ev_ay,ev_az,a0_ax,a0_ay,a0_az,a1_ax,a1_ay,a1_az"
           ",r_evader,r_adversary\n";
    for (const TraceRow& r : rows) {
        csv << r.step << ',' << (r.phase == arena::GamePhase::Outbound ? 0 : 1);
        put_state(csv, r.evader);
        put_state(csv, r.adversaries[0]);
        put_state(csv, r.adversaries[1]);
        for (int i = 0; i < 3; ++i) csv << ',' << fmt(r.evader_action[i]);
        for (const auto& a : r.adversary_actions)
            for (int i = 0; i < 3; ++i) csv << ',' << fmt(a[i]);
        csv << ',' << fmt(r.reward_evader) << ',' << fmt(r.reward_adversary) << '\n';
    }

    json j;
    j["format"] = "opev-trace-v1";
    j["mode"] = header.mode;
    j["seed"] = header.seed;
    j["config_hash"] = header.config_hash;
    j["outcome"] = header.outcome;
    j["cause"] = header.cause;
    j["steps"] = header.steps;
    j["start"] = vec_json(header.start);
    j["far_goal"] = vec_json(header.far_goal);
    j["goal_radius"] = header.goal_radius;
    j["collision_center_distance"] = header.collision_center_distance;
    j["obstacles"] = json::array();
    for (const Vec3& o : header.obstacles) j["obstacles"].push_back(vec_json(o));

    std::ofstream jf(path_base + ".json");
    if (!jf) throw IoError("cannot open " + path_base + ".json");
    jf << j.dump(2) << '\n';
}

TraceHeader read_header(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path);
    json j = json::parse(in);
    if (j.value("format", "") != "opev-trace-v1")
        throw IoError(json_path + ": unknown trace format tag");
    TraceHeader h;
    h.mode = j.at("mode").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.config_hash = j.at("config_hash").get<std::string>();
    h.outcome = j.at("outcome").get<std::string>();
    h.cause = j.at("cause").get<std::string>();
    h.steps = j.at("steps").get<std::size_t>();
    h.start = vec_from(j.at("start"));
    h.far_goal = vec_from(j.at("far_goal"));
    h.goal_radius = j.at("goal_radius").get<double>();
    h.collision_center_distance = j.at("collision_center_distance").get<double>();
    for (const auto& o : j.at("obstacles")) h.obstacles.push_back(vec_from(o));
    return h;
}

std::vector<TraceRow> read_rows(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(csv_path + ": empty trace");

    std::vector<TraceRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> f;
        f.reserve(31);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                f.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(csv_path + ": bad value at row " + std::to_string(line_no));
            }
        }
        if (f.size() != 31)
            throw IoError(csv_path + ": wrong column count at row " + std::to_string(line_no));
        TraceRow r;
        r.step = static_cast<std::size_t>(f[0]);
        r.phase = f[1] == 0.0 ? arena::GamePhase::Outbound : arena::GamePhase::Return;
        auto state = [&f](std::size_t base) {
            return dynamics::SpacecraftState{{f[base], f[base + 1], f[base + 2]},
                                             {f[base + 3], f[base + 4], f[base + 5]}};
        };
        r.evader = state(2);
        r.adversaries[0] = state(8);
        r.adversaries[1] = state(14);
        r.evader_action = {f[20], f[21], f[22]};
        r.adversary_actions[0] = {f[23], f[24], f[25]};
        r.adversary_actions[1] = {f[26], f[27], f[28]};
        r.reward_evader = f[29];
        r.reward_adversary = f[30];
        rows.push_back(r);
    }
    return rows;
}

namespace {

bool collided_at(const TraceHeader& h, const TraceRow& r) {
    if (h.mode == "stage2") {
        for (const auto& adv : r.adversaries)
            if (dynamics::norm(adv.position - r.evader.position) < h.collision_center_distance)
                return true;
        return false;
    }
    for (const Vec3& o : h.obstacles)
        if (dynamics::norm(o - r.evader.position) < h.collision_center_distance) return true;
    return false;
}

}  // namespace

arena::Outcome classify(const TraceHeader& header, const std::vector<TraceRow>& rows) {
    if (rows.empty()) throw IoError("classify: empty trace");
    const TraceRow& last = rows.back();
    const bool collided = collided_at(header, last);

    bool reached_outbound = false;
    for (const TraceRow& r : rows)
        if (r.phase == arena::GamePhase::Return) reached_outbound = true;
    if (header.mode == "stage1" && !collided &&
        dynamics::norm(last.evader.position - header.far_goal) <= header.goal_radius)
        reached_outbound = true;

    bool success = false;
    if (!collided) {
        if (header.mode == "stage2")
            success = reached_outbound &&
                      dynamics::norm(last.evader.position - header.start) <= header.goal_radius;
        else
            success = reached_outbound;
    }

    if (success) return arena::Outcome::Success;
    if (reached_outbound) return arena::Outcome::Partial;
    return arena::Outcome::Failure;
}

ReplaySummary summarize(const TraceHeader& header, const std::vector<TraceRow>& rows) {
    ReplaySummary s;
    s.outcome = classify(header, rows);
    s.steps = rows.size();
    s.min_adversary_distance = std::numeric_limits<double>::infinity();
    for (const TraceRow& r : rows) {
        if (header.mode == "stage2") {
            for (const auto& adv : r.adversaries)
                s.min_adversary_distance = std::min(
                    s.min_adversary_distance, dynamics::norm(adv.position - r.evader.position));
        }
        if (s.outbound_goal_step < 0 && r.phase == arena::GamePhase::Return)
            s.outbound_goal_step = static_cast<std::ptrdiff_t>(r.step);
    }
    if (header.mode == "stage1" && s.outcome == arena::Outcome::Success)
        s.outbound_goal_step = static_cast<std::ptrdiff_t>(rows.back().step);
    if (s.outcome == arena::Outcome::Success)
        s.return_goal_step = static_cast<std::ptrdiff_t>(rows.back().step);
    return s;
}

void write_downsampled(const std::string& path, const std::vector<TraceRow>& rows,
                       std::size_t stride) {
    if (stride == 0) stride = 1;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "step,ev_px,ev_py,ev_pz,a0_px,a0_py,a0_pz,a1_px,a1_py,a1_pz\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i % stride != 0 && i + 1 != rows.size()) continue;
        const TraceRow& r = rows[i];
        out << r.step;
        for (int k = 0; k < 3; ++k) out << ',' << fmt(r.evader.position[k]);
        for (const auto& a : r.adversaries)
            for (int k = 0; k < 3; ++k) out << ',' << fmt(a.position[k]);
        out << '\n';
    }
}

}  // namespace opev::trace
