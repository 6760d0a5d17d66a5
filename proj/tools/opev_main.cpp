// Batch entry point for the orbital pursuit-evasion toolkit: two-stage
// training, standardized evaluation, validation sweeps, trace replay, and
// divergence inspection.

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opev/checkpoint.hpp"
#include "opev/config.hpp"
#include "opev/divergence.hpp"
#include "opev/errors.hpp"
#include "opev/evalharness.hpp"
#include "opev/trace.hpp"
#include "opev/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace opev;

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 runtime abort,
// 3 validation-gate failure (compatibility refusals).
constexpr int kOk = 0, kUsage = 1, kRuntime = 2, kGate = 3;

struct CommonOpts {
    std::string config_path;
    std::string profile;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;  // -1: keep the config's seed
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Config file (JSON; partial configs allowed)");
    cmd->add_option("--profile", o.profile, "Profile: desk or full (overrides the file)");
    cmd->add_option("--override,-O", o.overrides,
                    "Dotted-path config override, e.g. arena.max_steps=100");
    cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
    cmd->add_option("--workers", o.workers, "Worker threads for parallel episode evaluation");
}

config::RunConfig resolve(const CommonOpts& o) {
    config::RunConfig cfg = config::load_config(o.config_path, o.overrides, o.profile);
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.workers > 0) omp_set_num_threads(o.workers);
    return cfg;
}

std::string default_output_root() {
    if (const char* env = std::getenv("OPEV_OUTPUT_ROOT")) return env;
    return "runs";
}

void write_episode_csv(const std::string& path,
                       const std::vector<evalharness::EpisodeRecord>& eps) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "index,seed,outcome,cause,steps,min_adversary_distance,return_evader\n";
    char buf[32];
    for (const auto& e : eps) {
        out << e.index << ',' << e.seed << ',' << to_string(e.outcome) << ','
            << to_string(e.cause) << ',' << e.steps << ',';
        std::snprintf(buf, sizeof buf, "%.17g", e.min_adversary_distance);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", e.return_evader);
        out << buf << '\n';
    }
}

void write_results_csv(const std::string& path,
                       const std::vector<evalharness::MethodResult>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "method,episodes,failure_pct,partial_pct,success_pct,"
           "failure_ci95,partial_ci95,success_ci95\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.1f,%.1f,%.1f,%.2f,%.2f,%.2f\n", r.method.c_str(),
                      r.episodes, r.failure_pct(), r.partial_pct(), r.success_pct(),
                      r.ci_half_width_pct(r.n_failure), r.ci_half_width_pct(r.n_partial),
                      r.ci_half_width_pct(r.n_success));
        out << buf;
    }
}

int cmd_train_stage1(const CommonOpts& o, const std::string& out_dir) {
    config::RunConfig cfg = resolve(o);
    fs::create_directories(out_dir);
    config::write_snapshot(cfg, out_dir);
    metrics::JsonlLogger log(out_dir + "/metrics.jsonl");
    trainer::Stage1Result res = trainer::run_stage1(cfg.trainer, cfg.seed, out_dir,
                                                    config::env_config_hash(cfg), log);
    std::cout << "stage1 done: " << res.episodes << " episodes, final 0-obstacle success rate "
              << res.final_success_rate << "\n"
              << "checkpoint: " << res.checkpoint_path << "\n";
    return kOk;
}

int cmd_train_stage2(const CommonOpts& o, std::string stage1, const std::string& out_dir,
                     const std::string& method) {
    config::RunConfig cfg = resolve(o);
    if (!method.empty()) config::apply_method(cfg, method);
    if (fs::is_directory(stage1)) stage1 += "/evader_stage1.json";
    if (!fs::exists(stage1)) throw ConfigError("stage-1 checkpoint not found: " + stage1);
    fs::create_directories(out_dir);
    config::write_snapshot(cfg, out_dir);
    metrics::JsonlLogger log(out_dir + "/metrics.jsonl");
    trainer::Stage2Result res = trainer::run_stage2(stage1, cfg.trainer, cfg.seed, out_dir,
                                                    config::env_config_hash(cfg), log);

    json div = json::array();
    for (const auto& row : res.divergence_matrix) div.push_back(row);
    std::ofstream dout(out_dir + "/divergence.json");
    dout << json{{"matrix", div},
                 {"mean_off_diagonal", divergence::mean_off_diagonal(res.divergence_matrix)}}
                .dump(2)
         << '\n';

    std::cout << "stage2 done: " << res.adversary_checkpoints.size()
              << " adversary checkpoint(s), evader checkpoint: " << res.evader_checkpoint << "\n";
    if (res.divergence_matrix.size() >= 2)
        std::cout << "mean off-diagonal divergence: "
                  << divergence::mean_off_diagonal(res.divergence_matrix) << "\n";
    return kOk;
}

int cmd_eval(const CommonOpts& o, const std::string& checkpoint, const std::string& out_dir,
             std::size_t episodes, const std::string& label, bool deterministic) {
    config::RunConfig cfg = resolve(o);
    evalharness::BenchmarkSpec spec;
    spec.method = label.empty() ? "eval" : label;
    spec.checkpoint_path = checkpoint;
    spec.n_episodes = episodes > 0 ? episodes : cfg.eval.n_episodes;
    if (spec.n_episodes == 0) throw ConfigError("eval: episode count is zero");
    spec.seed_base = cfg.eval.seed_base;
    spec.deterministic_policy = deterministic || cfg.eval.deterministic_policy;

    evalharness::BenchmarkOutput out = evalharness::run_benchmark_from_file(
        spec, cfg.trainer.arena, cfg.heuristics, config::env_config_hash(cfg));

    fs::create_directories(out_dir);
    const std::vector<evalharness::MethodResult> rows{out.result};
    const std::string table = evalharness::render_table(rows);
    std::cout << table;
    std::ofstream(out_dir + "/table.txt") << table;
    std::ofstream(out_dir + "/results.json") << evalharness::results_json(rows) << '\n';
    write_results_csv(out_dir + "/results.csv", rows);
    write_episode_csv(out_dir + "/episodes.csv", out.episodes);
    return kOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& run_dir, const std::string& out_path,
              std::size_t battery) {
    CommonOpts opts = o;
    if (opts.config_path.empty()) opts.config_path = run_dir + "/config.json";
    config::RunConfig cfg = resolve(opts);

    std::vector<evalharness::SweepEntry> series;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        const std::string prefix = "evader_phase2_step_";
        if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() + 5) {
            const std::size_t step = std::stoul(name.substr(prefix.size()));
            series.push_back({step, entry.path().string()});
        }
    }
    if (fs::exists(run_dir + "/evader_final.json"))
        series.push_back({cfg.trainer.schedule.phase2_steps, run_dir + "/evader_final.json"});
    std::sort(series.begin(), series.end(),
              [](const auto& a, const auto& b) { return a.training_step < b.training_step; });
    if (series.empty()) throw ConfigError("sweep: no evader checkpoints found in " + run_dir);

    const std::size_t n = battery > 0 ? battery : cfg.eval.sweep_battery;
    auto points = evalharness::run_validation_sweep(series, cfg.trainer.arena, cfg.heuristics,
                                                    config::env_config_hash(cfg), n,
                                                    cfg.eval.seed_base,
                                                    cfg.eval.deterministic_policy);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path);
    out << "training_step,success_pct,partial_pct,failure_pct\n";
    for (const auto& p : points) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%zu,%.1f,%.1f,%.1f\n", p.training_step, p.success_pct,
                      p.partial_pct, p.failure_pct);
        out << buf;
        std::cout << buf;
    }
    return kOk;
}

int cmd_replay(const std::string& trace_base, const std::string& downsample_path,
               std::size_t stride) {
    std::string base = trace_base;
    if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") base.resize(base.size() - 4);
    trace::TraceHeader header = trace::read_header(base + ".json");
    std::vector<trace::TraceRow> rows = trace::read_rows(base + ".csv");
    if (rows.empty()) throw IoError("replay: empty trace " + base + ".csv");

    trace::ReplaySummary s = trace::summarize(header, rows);
    std::cout << "mode:    " << header.mode << "\n"
              << "outcome: " << to_string(s.outcome) << " (header says " << header.outcome
              << ", cause " << header.cause << ")\n"
              << "steps:   " << s.steps << "\n";
    if (header.mode == "stage2")
        std::cout << "min evader-adversary distance: " << s.min_adversary_distance << " m\n";
    if (s.outbound_goal_step >= 0)
        std::cout << "outbound goal reached at step " << s.outbound_goal_step << "\n";
    if (s.return_goal_step >= 0)
        std::cout << "return goal reached at step " << s.return_goal_step << "\n";
    if (to_string(s.outcome) != header.outcome) {
        std::cout << "warning: recomputed outcome disagrees with the header\n";
        return kGate;
    }
    if (!downsample_path.empty()) {
        trace::write_downsampled(downsample_path, rows, stride);
        std::cout << "downsampled trajectory written to " << downsample_path << "\n";
    }
    return kOk;
}

int cmd_inspect_divergence(const CommonOpts& o, const std::string& run_dir,
                           const std::string& out_path) {
    CommonOpts opts = o;
    if (opts.config_path.empty() && fs::exists(run_dir + "/config.json"))
        opts.config_path = run_dir + "/config.json";
    resolve(opts);  // validates the config; the checkpoints carry their own spec

    std::vector<checkpoint::AgentFile> files;
    for (std::size_t i = 0;; ++i) {
        const std::string path = run_dir + "/adv_" + std::to_string(i) + "_phase1.json";
        if (!fs::exists(path)) break;
        files.push_back(checkpoint::load_agent(path));
    }
    if (files.size() < 2)
        throw ConfigError("inspect-divergence: need at least 2 adversary checkpoints in " + run_dir);

    sac::Tensor2 probes = trainer::read_probe_states(run_dir + "/probe_states.csv");
    std::vector<const sac::Agent*> agents;
    for (const auto& f : files) agents.push_back(&f.agent);
    auto matrix = divergence::pairwise_policy_divergence(agents, probes);

    std::cout << "pairwise mean KL over " << probes.rows() << " probe states:\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = 0; j < matrix.size(); ++j)
            std::printf("%10.4f", matrix[i][j]);
        std::printf("\n");
    }
    std::cout << "mean off-diagonal: " << divergence::mean_off_diagonal(matrix) << "\n";

    if (!out_path.empty()) {
        json m = json::array();
        for (const auto& row : matrix) m.push_back(row);
        std::ofstream out(out_path);
        out << json{{"matrix", m}, {"mean_off_diagonal", divergence::mean_off_diagonal(matrix)},
                    {"probe_states", probes.rows()}}
                   .dump(2)
            << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbital pursuit-evasion toolkit"};
    app.require_subcommand(1);

    CommonOpts o1, o2, oe, os, oi;
    std::string out_dir, stage1, method, checkpoint, label, run_dir;
    std::string trace_base, downsample_path, sweep_out = "sweep.csv", div_out;
    std::size_t episodes = 0, battery = 0, stride = 10;
    bool deterministic = false;

    CLI::App* t1 = app.add_subcommand("train-stage1", "Curriculum-train the base evader");
    add_common(t1, o1);
    t1->add_option("--out", out_dir, "Run directory (default: $OPEV_OUTPUT_ROOT/stage1)");

    CLI::App* t2 = app.add_subcommand("train-stage2",
                                      "Adversary training then evader retraining");
    add_common(t2, o2);
    t2->add_option("--stage1", stage1, "Stage-1 run dir or checkpoint file")->required();
    t2->add_option("--out", out_dir, "Run directory (default: $OPEV_OUTPUT_ROOT/stage2)");
    t2->add_option("--method", method, "SA | MA | DARL | NSA")
        ->check(CLI::IsMember({"SA", "MA", "DARL", "NSA"}));

    CLI::App* ev = app.add_subcommand("eval", "Standardized heuristic-adversary evaluation");
    add_common(ev, oe);
    ev->add_option("--checkpoint", checkpoint, "Evader checkpoint")->required();
    ev->add_option("--out", out_dir, "Output directory")->required();
    ev->add_option("--episodes", episodes, "Episode count (default from config)");
    ev->add_option("--label", label, "Method label for the results table");
    ev->add_flag("--deterministic", deterministic, "Deterministic policy actions");

    CLI::App* sw = app.add_subcommand("sweep", "Validation curve over phase-2 checkpoints");
    add_common(sw, os);
    sw->add_option("--run-dir", run_dir, "Stage-2 run directory")->required();
    sw->add_option("--out", sweep_out, "Output CSV path");
    sw->add_option("--battery", battery, "Episodes per checkpoint");

    CLI::App* rp = app.add_subcommand("replay", "Summarize a logged episode trace");
    rp->add_option("--trace", trace_base, "Trace path base (or .csv path)")->required();
    rp->add_option("--downsample", downsample_path, "Write plot-ready positions CSV here");
    rp->add_option("--stride", stride, "Downsampling stride");

    CLI::App* iv = app.add_subcommand("inspect-divergence",
                                      "Pairwise policy KL matrix on saved probe states");
    add_common(iv, oi);
    iv->add_option("--run-dir", run_dir, "Stage-2 run directory")->required();
    iv->add_option("--out", div_out, "Optional JSON output path");

    try {
        app.parse(argc, argv);
        if (out_dir.empty()) out_dir = default_output_root() + (t1->parsed() ? "/stage1" : "/stage2");
        if (t1->parsed()) return cmd_train_stage1(o1, out_dir);
        if (t2->parsed()) return cmd_train_stage2(o2, stage1, out_dir, method);
        if (ev->parsed()) return cmd_eval(oe, checkpoint, out_dir, episodes, label, deterministic);
        if (sw->parsed()) return cmd_sweep(os, run_dir, sweep_out, battery);
        if (rp->parsed()) return cmd_replay(trace_base, downsample_path, stride);
        if (iv->parsed()) return cmd_inspect_divergence(oi, run_dir, div_out);
        return kUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const CompatibilityError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kGate;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const TrainingDiverged& e) {
        std::cerr << "training aborted: " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}
