#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "opev/config.hpp"

using namespace opev;
using namespace opev::config;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("defaults round-trip through JSON") {
    for (const char* profile : {"desk", "full"}) {
        RunConfig cfg = defaults_for(profile);
        RunConfig back = from_json(to_json(cfg));
        CHECK(full_config_hash(cfg) == full_config_hash(back));
        CHECK(env_config_hash(cfg) == env_config_hash(back));
    }
}

TEST_CASE("profiles differ in budgets but share the environment") {
    RunConfig desk = defaults_for("desk");
    RunConfig full = defaults_for("full");
    CHECK(desk.trainer.schedule.stage1_steps < full.trainer.schedule.stage1_steps);
    CHECK(full_config_hash(desk) != full_config_hash(full));
    CHECK_THROWS_AS(defaults_for("huge"), ConfigError);
}

TEST_CASE("hash is independent of key order in the source file") {
    const std::string p1 = (std::filesystem::temp_directory_path() / "opev_cfg_a.json").string();
    const std::string p2 = (std::filesystem::temp_directory_path() / "opev_cfg_b.json").string();
    std::ofstream(p1) << R"({"seed": 9, "arena": {"goal_radius": 3.0, "max_steps": 120}})";
    std::ofstream(p2) << R"({"arena": {"max_steps": 120, "goal_radius": 3.0}, "seed": 9})";
    RunConfig a = load_config(p1, {});
    RunConfig b = load_config(p2, {});
    CHECK(full_config_hash(a) == full_config_hash(b));
    CHECK(env_config_hash(a) == env_config_hash(b));
    CHECK(a.trainer.arena.max_steps == 120);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("dotted overrides patch individual leaves") {
    RunConfig cfg = load_config("", {"arena.max_steps=100", "seed=42",
                                     "divergence.c_kl=2.5", "evader_sac.hidden_act=tanh"});
    CHECK(cfg.trainer.arena.max_steps == 100);
    CHECK(cfg.seed == 42);
    CHECK(cfg.trainer.divergence.c_kl == 2.5);
    CHECK(cfg.trainer.evader_sac.hidden_act == nn::Act::Tanh);
}

TEST_CASE("unknown override paths and malformed specs are rejected") {
    CHECK_THROWS_AS(load_config("", {"arena.not_a_field=1"}), ConfigError);
    CHECK_THROWS_AS(load_config("", {"no_equals_sign"}), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.json", {}), ConfigError);
}

TEST_CASE("env hash covers the environment, not training hyperparameters") {
    RunConfig base = defaults_for("desk");
    RunConfig lr_change = base;
    lr_change.trainer.evader_sac.lr = 1e-5;
    CHECK(env_config_hash(base) == env_config_hash(lr_change));
    CHECK(full_config_hash(base) != full_config_hash(lr_change));

    RunConfig arena_change = base;
    arena_change.trainer.arena.goal_radius = 2.0;
    CHECK(env_config_hash(base) != env_config_hash(arena_change));
}

TEST_CASE("method matrix: SA, MA, DARL, NSA") {
    RunConfig sa = defaults_for("desk");
    apply_method(sa, "SA");
    CHECK(sa.trainer.divergence.n_adversaries == 1);
    CHECK(sa.trainer.divergence.alpha_start == 0.0);
    CHECK(sa.trainer.adversary_sac.mean_act == nn::Act::Linear);

    RunConfig ma = defaults_for("desk");
    apply_method(ma, "MA");
    CHECK(ma.trainer.divergence.n_adversaries == 2);
    CHECK(ma.trainer.divergence.alpha_start == 0.0);
    CHECK(ma.trainer.adversary_sac.mean_act == nn::Act::Linear);

    RunConfig darl = defaults_for("desk");
    apply_method(darl, "DARL");
    CHECK(darl.trainer.divergence.n_adversaries == 2);
    CHECK(darl.trainer.divergence.alpha_start > 0.0);
    CHECK(darl.trainer.adversary_sac.mean_act == nn::Act::Sine);

    RunConfig nsa = defaults_for("desk");
    apply_method(nsa, "NSA");
    CHECK(nsa.trainer.adversary_sac.mean_act == nn::Act::Linear);

    // Ablation isolation: DARL and NSA differ only in the actor output head.
    json jd = to_json(darl);
    json jn = to_json(nsa);
    jd["adversary_sac"].erase("mean_act");
    jn["adversary_sac"].erase("mean_act");
    CHECK(jd == jn);

    RunConfig bad = defaults_for("desk");
    CHECK_THROWS_AS(apply_method(bad, "EVADE"), ConfigError);
}

TEST_CASE("snapshot writes a self-describing config.json") {
    const std::string dir = (std::filesystem::temp_directory_path() / "opev_snap").string();
    RunConfig cfg = defaults_for("desk");
    cfg.seed = 7;
    write_snapshot(cfg, dir);
    std::ifstream in(dir + "/config.json");
    REQUIRE(in.good());
    json j = json::parse(in);
    CHECK(j.at("seed") == 7);
    CHECK(j.at("env_config_hash") == env_config_hash(cfg));
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
