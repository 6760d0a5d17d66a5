#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "opev/checkpoint.hpp"
#include "opev/config.hpp"
#include "opev/evalharness.hpp"

using namespace opev;
using namespace opev::evalharness;

namespace {

// Evader that never thrusts: zero actor weights, deterministic sampling.
sac::Agent zero_thrust_evader(const arena::ArenaConfig& acfg) {
    sac::SacConfig cfg;
    cfg.hidden_width = 8;
    cfg.hidden_depth = 1;
    const std::size_t obs_dim = acfg.sensor.bins_az * acfg.sensor.bins_el + 3;
    sac::Agent agent(cfg, obs_dim, 3, {}, 1);
    for (auto& w : agent.actor().weights()) w.fill(0.0);
    for (auto& b : agent.actor().biases()) b.fill(0.0);
    return agent;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("a never-thrusting evader cannot succeed") {
    arena::ArenaConfig acfg;
    acfg.max_steps = 120;
    heuristics::HeuristicConfig hcfg;
    sac::Agent evader = zero_thrust_evader(acfg);

    BenchmarkSpec spec;
    spec.method = "null";
    spec.n_episodes = 30;
    spec.seed_base = 500;
    spec.deterministic_policy = true;

    BenchmarkOutput out = run_benchmark(spec, evader, acfg, hcfg);
    CHECK(out.result.n_success == 0);
    CHECK(out.result.n_failure + out.result.n_partial + out.result.n_success == 30);
    CHECK(out.result.success_pct() == 0.0);
}

TEST_CASE("outcome counts always partition the episode count") {
    arena::ArenaConfig acfg;
    acfg.max_steps = 60;
    heuristics::HeuristicConfig hcfg;
    sac::Agent evader = zero_thrust_evader(acfg);
    BenchmarkSpec spec;
    spec.method = "x";
    spec.n_episodes = 25;
    spec.seed_base = 900;
    BenchmarkOutput out = run_benchmark(spec, evader, acfg, hcfg);
    CHECK(out.result.n_failure + out.result.n_partial + out.result.n_success == 25);
    CHECK(out.episodes.size() == 25);
    CHECK(out.result.failure_pct() + out.result.partial_pct() + out.result.success_pct() ==
          doctest::Approx(100.0));
}

TEST_CASE("episodes are seed-isolated: results keyed by seed base + k") {
    arena::ArenaConfig acfg;
    acfg.max_steps = 60;
    heuristics::HeuristicConfig hcfg;
    sac::Agent evader = zero_thrust_evader(acfg);

    BenchmarkSpec small;
    small.n_episodes = 6;
    small.seed_base = 1234;
    BenchmarkSpec big = small;
    big.n_episodes = 12;

    BenchmarkOutput a = run_benchmark(small, evader, acfg, hcfg);
    BenchmarkOutput b = run_benchmark(big, evader, acfg, hcfg);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(a.episodes[k].outcome == b.episodes[k].outcome);
        CHECK(a.episodes[k].steps == b.episodes[k].steps);
        CHECK(a.episodes[k].min_adversary_distance == b.episodes[k].min_adversary_distance);
    }

    BenchmarkOutput again = run_benchmark(small, evader, acfg, hcfg);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(a.episodes[k].outcome == again.episodes[k].outcome);
        CHECK(a.episodes[k].return_evader == again.episodes[k].return_evader);
    }
}

TEST_CASE("checkpoint env-hash mismatch is refused") {
    arena::ArenaConfig acfg;
    sac::Agent evader = zero_thrust_evader(acfg);
    const std::string path =
        (std::filesystem::temp_directory_path() / "opev_eval_hash.json").string();
    checkpoint::save_agent(path, evader, "evader", "1111111111111111");
    BenchmarkSpec spec;
    spec.checkpoint_path = path;
    spec.n_episodes = 1;
    heuristics::HeuristicConfig hcfg;
    CHECK_THROWS_AS(run_benchmark_from_file(spec, acfg, hcfg, "2222222222222222"),
                    CompatibilityError);
    std::remove(path.c_str());
}

TEST_CASE("aggregation: all-failure row renders 100/0/0 to one decimal") {
    MethodResult r;
    r.method = "BE";
    r.episodes = 40;
    r.n_failure = 40;
    CHECK(r.failure_pct() == 100.0);
    CHECK(r.success_pct() == 0.0);
    const std::string table = render_table({r});
    CHECK(table.find("100.0") != std::string::npos);
    CHECK(table.find("BE") != std::string::npos);

    const std::string empty_table = render_table({});
    CHECK(empty_table.find("Method") != std::string::npos);  // header only

    // CI half-width sanity: p = 0.5, n = 100 -> ~9.8 percentage points.
    MethodResult half;
    half.episodes = 100;
    half.n_success = 50;
    CHECK(half.ci_half_width_pct(half.n_success) == doctest::Approx(9.8).epsilon(0.01));
}

}  // TEST_SUITE
