#include "opev/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "opev/errors.hpp"

namespace opev::checkpoint {

using nlohmann::json;
using nn::Act;
using nn::AdamState;
using nn::Mlp;
using nn::MlpSpec;
using opev::Tensor2;

namespace {

json tensor_to_json(const Tensor2& t) {
    return json{{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.vec()}};
}

Tensor2 tensor_from_json(const json& j) {
    return Tensor2(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                   j.at("data").get<std::vector<double>>());
}

json mlp_to_json(const Mlp& net) {
    json j;
    j["widths"] = net.spec().layer_widths;
    j["hidden"] = nn::act_name(net.spec().hidden);
    j["output"] = nn::act_name(net.spec().output);
    j["w"] = json::array();
    j["b"] = json::array();
    for (const auto& w : net.weights()) j["w"].push_back(tensor_to_json(w));
    for (const auto& b : net.biases()) j["b"].push_back(tensor_to_json(b));
    return j;
}

Mlp mlp_from_json(const json& j) {
    MlpSpec spec;
    spec.layer_widths = j.at("widths").get<std::vector<std::size_t>>();
    spec.hidden = nn::act_from_name(j.at("hidden").get<std::string>());
    spec.output = nn::act_from_name(j.at("output").get<std::string>());
    std::vector<Tensor2> w, b;
    for (const auto& tw : j.at("w")) w.push_back(tensor_from_json(tw));
    for (const auto& tb : j.at("b")) b.push_back(tensor_from_json(tb));
    return Mlp::from_params(std::move(spec), std::move(w), std::move(b));
}

json adam_to_json(const AdamState& s) {
    json j;
    j["step"] = s.step;
    j["m"] = json::array();
    j["v"] = json::array();
    for (const auto& m : s.m) j["m"].push_back(tensor_to_json(m));
    for (const auto& v : s.v) j["v"].push_back(tensor_to_json(v));
    return j;
}

AdamState adam_from_json(const json& j) {
    AdamState s;
    s.step = j.at("step").get<std::int64_t>();
    for (const auto& m : j.at("m")) s.m.push_back(tensor_from_json(m));
    for (const auto& v : j.at("v")) s.v.push_back(tensor_from_json(v));
    return s;
}

json sac_config_to_json(const sac::SacConfig& c) {
    json j;
    j["gamma"] = c.gamma;
    j["tau"] = c.tau;
    j["lr"] = c.lr;
    j["batch_size"] = c.batch_size;
    j["buffer_capacity"] = c.buffer_capacity;
    j["warmup_steps"] = c.warmup_steps;
    j["update_every"] = c.update_every;
    j["target_entropy"] = c.target_entropy;
    j["hidden_width"] = c.hidden_width;
    j["hidden_depth"] = c.hidden_depth;
    j["hidden_act"] = nn::act_name(c.hidden_act);
    j["mean_act"] = nn::act_name(c.mean_act);
    j["log_std_min"] = c.log_std_min;
    j["log_std_max"] = c.log_std_max;
    j["clip_norm"] = c.clip_norm;
    j["init_log_alpha"] = c.init_log_alpha;
    return j;
}

sac::SacConfig sac_config_from_json(const json& j) {
    sac::SacConfig c;
    c.gamma = j.at("gamma").get<double>();
    c.tau = j.at("tau").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    c.warmup_steps = j.at("warmup_steps").get<std::size_t>();
    c.update_every = j.at("update_every").get<std::size_t>();
    c.target_entropy = j.at("target_entropy").get<double>();
    c.hidden_width = j.at("hidden_width").get<std::size_t>();
    c.hidden_depth = j.at("hidden_depth").get<std::size_t>();
    c.hidden_act = nn::act_from_name(j.at("hidden_act").get<std::string>());
    c.mean_act = nn::act_from_name(j.at("mean_act").get<std::string>());
    c.log_std_min = j.at("log_std_min").get<double>();
    c.log_std_max = j.at("log_std_max").get<double>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.init_log_alpha = j.at("init_log_alpha").get<double>();
    return c;
}

}  // namespace

void save_agent(const std::string& path, const sac::Agent& agent_in, const std::string& kind,
                const std::string& env_config_hash) {
    // The accessors are non-const; checkpointing does not mutate.
    sac::Agent& agent = const_cast<sac::Agent&>(agent_in);
    json j;
    j["format"] = kFormatTag;
    j["kind"] = kind;
    j["env_config_hash"] = env_config_hash;
    j["obs_dim"] = agent.obs_dim();
    j["act_dim"] = agent.act_dim();
    j["sac_config"] = sac_config_to_json(agent.config());
    j["obs_scale"] = agent.obs_scale();
    j["log_alpha"] = agent.log_alpha();
    j["rng"] = agent.rng().serialize();
    j["actor"] = mlp_to_json(agent.actor());
    j["q1"] = mlp_to_json(agent.q1());
    j["q2"] = mlp_to_json(agent.q2());
    j["q1_target"] = mlp_to_json(agent.q1_target());
    j["q2_target"] = mlp_to_json(agent.q2_target());
    j["adam"] = json{{"actor", adam_to_json(agent.opt_actor())},
                     {"actor_extra", adam_to_json(agent.opt_actor_extra())},
                     {"q1", adam_to_json(agent.opt_q1())},
                     {"q2", adam_to_json(agent.opt_q2())},
                     {"alpha", adam_to_json(agent.opt_alpha())}};

    std::ofstream out(path);
    if (!out) throw IoError("save_agent: cannot open " + path);
    out << j.dump() << '\n';
}

AgentFile load_agent(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_agent: cannot open " + path);
    json j = json::parse(in);
    if (j.value("format", "") != kFormatTag)
        throw IoError("load_agent: unknown format tag in " + path);

    const sac::SacConfig cfg = sac_config_from_json(j.at("sac_config"));
    const auto obs_dim = j.at("obs_dim").get<std::size_t>();
    const auto act_dim = j.at("act_dim").get<std::size_t>();
    auto obs_scale = j.at("obs_scale").get<std::vector<double>>();

    sac::Agent agent(cfg, obs_dim, act_dim, std::move(obs_scale), 0);
    agent.actor() = mlp_from_json(j.at("actor"));
    agent.q1() = mlp_from_json(j.at("q1"));
    agent.q2() = mlp_from_json(j.at("q2"));
    agent.q1_target() = mlp_from_json(j.at("q1_target"));
    agent.q2_target() = mlp_from_json(j.at("q2_target"));
    agent.opt_actor() = adam_from_json(j.at("adam").at("actor"));
    agent.opt_actor_extra() = adam_from_json(j.at("adam").at("actor_extra"));
    agent.opt_q1() = adam_from_json(j.at("adam").at("q1"));
    agent.opt_q2() = adam_from_json(j.at("adam").at("q2"));
    agent.opt_alpha() = adam_from_json(j.at("adam").at("alpha"));
    agent.set_log_alpha(j.at("log_alpha").get<double>());
    agent.rng().deserialize(j.at("rng").get<std::string>());

    AgentFile f{j.at("kind").get<std::string>(), j.at("env_config_hash").get<std::string>(),
                std::move(agent)};
    return f;
}

std::string peek_env_hash(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("peek_env_hash: cannot open " + path);
    json j = json::parse(in);
    return j.at("env_config_hash").get<std::string>();
}

}  // namespace opev::checkpoint
