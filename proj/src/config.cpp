#include "genco/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace genco {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key))
            throw IoError("config: unknown key '" + key + "' in " + where);
    }
}

const char* optim_name(OptimMethod m) { return m == OptimMethod::sgd ? "sgd" : "adam"; }
OptimMethod optim_from(const std::string& s) {
    if (s == "sgd") return OptimMethod::sgd;
    if (s == "adam") return OptimMethod::adam;
    throw IoError("config: unknown optim method '" + s + "'");
}

const char* method_name(DiffMethod m) {
    return m == DiffMethod::blackbox ? "blackbox" : "identity";
}
DiffMethod method_from(const std::string& s) {
    if (s == "blackbox") return DiffMethod::blackbox;
    if (s == "identity") return DiffMethod::identity;
    throw IoError("config: unknown solver-layer method '" + s + "'");
}

const char* adv_mode_name(AdversaryMode m) {
    return m == AdversaryMode::fixed ? "fixed" : "updated";
}
AdversaryMode adv_mode_from(const std::string& s) {
    if (s == "fixed") return AdversaryMode::fixed;
    if (s == "updated") return AdversaryMode::updated;
    throw IoError("config: unknown adversary_mode '" + s + "'");
}

const char* penalty_name(PenaltyMode m) {
    return m == PenaltyMode::shortest_path ? "shortest-path" : "semantic";
}
PenaltyMode penalty_from(const std::string& s) {
    if (s == "shortest-path") return PenaltyMode::shortest_path;
    if (s == "semantic") return PenaltyMode::semantic;
    throw IoError("config: unknown penalty mode '" + s + "'");
}

json layer_to_json(const SolverLayerConfig& l) {
    return json{{"method", method_name(l.method)},
                {"lambda", l.lambda},
                {"project_grad", l.project_grad}};
}

SolverLayerConfig layer_from_json(const json& j, const std::string& where) {
    check_keys(j, {"method", "lambda", "project_grad"}, where);
    SolverLayerConfig l;
    l.method = method_from(j.at("method").get<std::string>());
    l.lambda = j.at("lambda").get<double>();
    l.project_grad = j.at("project_grad").get<bool>();
    return l;
}

json gan_to_json(const GanTrainConfig& g) {
    return json{{"noise_dim", g.noise_dim},
                {"batch", g.batch},
                {"epochs", g.epochs},
                {"adv_steps", g.adv_steps},
                {"w_clip", g.w_clip},
                {"lr_gen", g.lr_gen},
                {"lr_adv", g.lr_adv},
                {"optim", optim_name(g.optim)},
                {"gen_hidden", g.gen_hidden},
                {"adv_hidden", g.adv_hidden},
                {"layer", layer_to_json(g.layer)},
                {"adversary_mode", adv_mode_name(g.adversary_mode)},
                {"solver_budget", g.solver_budget}};
}

void gan_from_json(const json& j, GanTrainConfig& g, const std::string& where,
                   const std::set<std::string>& extra_keys = {}) {
    std::set<std::string> keys{"noise_dim", "batch",      "epochs",     "adv_steps",
                               "w_clip",    "lr_gen",     "lr_adv",     "optim",
                               "gen_hidden", "adv_hidden", "layer",      "adversary_mode",
                               "solver_budget"};
    keys.insert(extra_keys.begin(), extra_keys.end());
    check_keys(j, keys, where);
    g.noise_dim = j.at("noise_dim").get<int>();
    g.batch = j.at("batch").get<int>();
    g.epochs = j.at("epochs").get<int>();
    g.adv_steps = j.at("adv_steps").get<int>();
    g.w_clip = j.at("w_clip").get<double>();
    g.lr_gen = j.at("lr_gen").get<double>();
    g.lr_adv = j.at("lr_adv").get<double>();
    g.optim = optim_from(j.at("optim").get<std::string>());
    g.gen_hidden = j.at("gen_hidden").get<std::vector<int>>();
    g.adv_hidden = j.at("adv_hidden").get<std::vector<int>>();
    g.layer = layer_from_json(j.at("layer"), where + ".layer");
    g.adversary_mode = adv_mode_from(j.at("adversary_mode").get<std::string>());
    g.solver_budget = j.at("solver_budget").get<long>();
}

} // namespace

void RunConfig::validate() const {
    if (regime != "constrained-gan" && regime != "penalized-gan" && regime != "vqvae" &&
        regime != "baseline-postprocess")
        throw IoError("config: unknown regime '" + regime + "'");
    if (level_height < 1 || level_width < 1 || terrain_height < 1 || terrain_width < 1)
        throw IoError("config: grid dims must be positive");
    gan.validate();
    penalized.validate();
    vqvae.validate();
    if (eval.n_eval < 1 || eval.n_epoch_eval < 1 || eval.k < 1)
        throw IoError("config: eval parameters must be positive");
}

std::string config_to_json(const RunConfig& cfg) {
    json pen = gan_to_json(cfg.penalized);
    pen["gamma"] = cfg.penalized.gamma;
    pen["penalty"] = penalty_name(cfg.penalized.penalty);
    pen["gamma_ladder"] = cfg.penalized.gamma_ladder;

    json vq{{"codebook_size", cfg.vqvae.codebook_size},
            {"embed_dim", cfg.vqvae.embed_dim},
            {"beta1", cfg.vqvae.beta1},
            {"beta2", cfg.vqvae.beta2},
            {"commit", cfg.vqvae.commit},
            {"epochs", cfg.vqvae.epochs},
            {"lr", cfg.vqvae.lr},
            {"optim", optim_name(cfg.vqvae.optim)},
            {"enc_hidden", cfg.vqvae.enc_hidden},
            {"dec_hidden", cfg.vqvae.dec_hidden},
            {"use_recon", cfg.vqvae.use_recon},
            {"use_objective", cfg.vqvae.use_objective},
            {"layer", layer_to_json(cfg.vqvae.layer)},
            {"solver_budget", cfg.vqvae.solver_budget}};

    json root{{"version", 1},
              {"regime", cfg.regime},
              {"seed", cfg.seed},
              {"dataset", cfg.dataset},
              {"init_checkpoint", cfg.init_checkpoint},
              {"checkpoint", cfg.checkpoint},
              {"level", json{{"height", cfg.level_height}, {"width", cfg.level_width}}},
              {"terrain", json{{"height", cfg.terrain_height}, {"width", cfg.terrain_width}}},
              {"gan", gan_to_json(cfg.gan)},
              {"penalized", pen},
              {"vqvae", vq},
              {"eval", json{{"n_eval", cfg.eval.n_eval},
                            {"k", cfg.eval.k},
                            {"n_epoch_eval", cfg.eval.n_epoch_eval}}}};
    return root.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
    json root = json::parse(text);
    check_keys(root,
               {"version", "regime", "seed", "dataset", "init_checkpoint", "checkpoint",
                "level", "terrain", "gan", "penalized", "vqvae", "eval"},
               "<root>");
    if (root.at("version").get<int>() != 1) throw IoError("config: unsupported version");
    RunConfig cfg;
    cfg.regime = root.at("regime").get<std::string>();
    cfg.seed = root.at("seed").get<std::uint64_t>();
    cfg.dataset = root.at("dataset").get<std::string>();
    cfg.init_checkpoint = root.at("init_checkpoint").get<std::string>();
    cfg.checkpoint = root.at("checkpoint").get<std::string>();

    const json& lvl = root.at("level");
    check_keys(lvl, {"height", "width"}, "level");
    cfg.level_height = lvl.at("height").get<int>();
    cfg.level_width = lvl.at("width").get<int>();
    const json& ter = root.at("terrain");
    check_keys(ter, {"height", "width"}, "terrain");
    cfg.terrain_height = ter.at("height").get<int>();
    cfg.terrain_width = ter.at("width").get<int>();

    gan_from_json(root.at("gan"), cfg.gan, "gan");
    gan_from_json(root.at("penalized"), cfg.penalized, "penalized",
                  {"gamma", "penalty", "gamma_ladder"});
    cfg.penalized.gamma = root.at("penalized").at("gamma").get<double>();
    cfg.penalized.penalty = penalty_from(root.at("penalized").at("penalty").get<std::string>());
    cfg.penalized.gamma_ladder =
        root.at("penalized").at("gamma_ladder").get<std::vector<double>>();

    const json& vq = root.at("vqvae");
    check_keys(vq,
               {"codebook_size", "embed_dim", "beta1", "beta2", "commit", "epochs", "lr",
                "optim", "enc_hidden", "dec_hidden", "use_recon", "use_objective", "layer",
                "solver_budget"},
               "vqvae");
    cfg.vqvae.codebook_size = vq.at("codebook_size").get<int>();
    cfg.vqvae.embed_dim = vq.at("embed_dim").get<int>();
    cfg.vqvae.beta1 = vq.at("beta1").get<double>();
    cfg.vqvae.beta2 = vq.at("beta2").get<double>();
    cfg.vqvae.commit = vq.at("commit").get<double>();
    cfg.vqvae.epochs = vq.at("epochs").get<int>();
    cfg.vqvae.lr = vq.at("lr").get<double>();
    cfg.vqvae.optim = optim_from(vq.at("optim").get<std::string>());
    cfg.vqvae.enc_hidden = vq.at("enc_hidden").get<std::vector<int>>();
    cfg.vqvae.dec_hidden = vq.at("dec_hidden").get<std::vector<int>>();
    cfg.vqvae.use_recon = vq.at("use_recon").get<bool>();
    cfg.vqvae.use_objective = vq.at("use_objective").get<bool>();
    cfg.vqvae.layer = layer_from_json(vq.at("layer"), "vqvae.layer");
    cfg.vqvae.solver_budget = vq.at("solver_budget").get<long>();

    const json& ev = root.at("eval");
    check_keys(ev, {"n_eval", "k", "n_epoch_eval"}, "eval");
    cfg.eval.n_eval = ev.at("n_eval").get<int>();
    cfg.eval.k = ev.at("k").get<int>();
    cfg.eval.n_epoch_eval = ev.at("n_epoch_eval").get<int>();

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return config_from_json(ss.str());
    } catch (const json::exception& e) {
        throw IoError("config parse error in " + path + ": " + e.what());
    }
}

void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open config for writing: " + path);
    out << config_to_json(cfg);
    if (!out) throw IoError("config write failed: " + path);
}

} // namespace genco
