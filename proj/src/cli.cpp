#include "hbcd/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbcd/csvio.hpp"

namespace hbcd::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846264338;

json default_config() {
    json j;
    j["alpha_grid"] = json::array();
    // 7 log-spaced points over [0.05, 0.4], descending
    for (int i = 0; i < 7; ++i)
        j["alpha_grid"].push_back(0.4 * std::pow(0.05 / 0.4, i / 6.0));
    j["epsilon_list"] = {0.05};
    j["protocol"] = "sequential";
    j["depth"] = 4;
    j["seed"] = 1;
    j["trials_l"] = 0;
    j["p_conf"] = 0.95;
    j["n_cap"] = 200;
    j["m_cap"] = 2000000;
    j["threads"] = 0;
    j["optimizer"] = {{"n_reps", 60},
                      {"max_iterations", 500},
                      {"gradient_step", 1e-5},
                      {"convergence_tol", 1e-10},
                      {"per_query_psi", false}};
    j["qdoc"] = {{"lengths", {4, 8, 12, 16}}, {"budget", 16}, {"budget_depths", {2, 4, 8, 16}}};
    j["noise"] = {{"alpha", 0.25},
                  {"queries", 8},
                  {"gamma", 0.0},
                  {"cqed_grid", {0.0, 25.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 800.0}}};
    j["perfect"] = {{"alphas", {0.1, 0.2, 0.5, "pi/2", "0.7*pi"}}, {"cap", 1000000}};
    j["optimize"] = {{"alpha", 0.1}, {"K", 16}};
    return j;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config error at '" + key + "': " + what);
}

double angle_from_json(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return parse_angle_token(v.get<std::string>());
        } catch (const std::exception& e) {
            fail(key, e.what());
        }
    }
    fail(key, "expected a number or an angle token");
}

double number_from_json(const json& v, const std::string& key) {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
}

long integer_from_json(const json& v, const std::string& key) {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
}

}  // namespace

double parse_angle_token(const std::string& token) {
    std::string s;
    for (char c : token)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty angle token");
    double sign = 1.0;
    std::size_t pos = 0;
    if (s[0] == '-') { sign = -1.0; pos = 1; }
    else if (s[0] == '+') { pos = 1; }
    s = s.substr(pos);

    const auto pi_at = s.find("pi");
    if (pi_at == std::string::npos) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("malformed numeric token '" + s + "'");
        return sign * v;
    }
    double coeff = 1.0;
    std::string head = s.substr(0, pi_at);
    if (!head.empty()) {
        if (head.back() == '*') head.pop_back();
        if (!head.empty()) {
            std::size_t used = 0;
            coeff = std::stod(head, &used);
            if (used != head.size())
                throw std::invalid_argument("malformed angle coefficient '" + head + "'");
        }
    }
    double divisor = 1.0;
    std::string tail = s.substr(pi_at + 2);
    if (!tail.empty()) {
        if (tail[0] != '/') throw std::invalid_argument("malformed angle token '" + s + "'");
        std::size_t used = 0;
        divisor = std::stod(tail.substr(1), &used);
        if (used != tail.size() - 1 || divisor == 0.0)
            throw std::invalid_argument("malformed angle divisor '" + tail + "'");
    }
    return sign * coeff * kPi / divisor;
}

namespace {

void apply_override(json& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config error at '--set': expected key=value, got '" + spec + "'");
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (...) {
        value = raw;  // plain string (angle tokens, names)
    }
    // dotted path
    json* node = &cfg;
    std::istringstream parts(key);
    std::string part, prev;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    if (path.empty()) throw ConfigError("config error at '--set': empty key");
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &((*node)[path[i]]);
    json& slot = (*node)[path.back()];
    if (slot.is_array() && !value.is_array()) {
        slot = json::array({value});
    } else {
        slot = value;
    }
}

ExperimentConfig config_from_json(const json& j, ResolvedRun& run) {
    ExperimentConfig cfg;
    cfg.alpha_grid.clear();
    for (const auto& v : j.at("alpha_grid")) cfg.alpha_grid.push_back(angle_from_json(v, "alpha_grid"));
    cfg.epsilon_list.clear();
    for (const auto& v : j.at("epsilon_list")) cfg.epsilon_list.push_back(number_from_json(v, "epsilon_list"));

    const std::string proto = j.at("protocol").get<std::string>();
    if (proto == "sequential") cfg.protocol = ProtocolKind::Sequential;
    else if (proto == "multishot") cfg.protocol = ProtocolKind::MultiShot;
    else fail("protocol", "expected 'sequential' or 'multishot'");

    cfg.depth = static_cast<int>(integer_from_json(j.at("depth"), "depth"));
    if (cfg.depth < 1) fail("depth", "must be >= 1");
    cfg.seed = static_cast<std::uint64_t>(integer_from_json(j.at("seed"), "seed"));
    cfg.trials_l = static_cast<int>(integer_from_json(j.at("trials_l"), "trials_l"));
    cfg.p_conf = number_from_json(j.at("p_conf"), "p_conf");
    cfg.n_cap = static_cast<int>(integer_from_json(j.at("n_cap"), "n_cap"));
    cfg.m_cap = static_cast<int>(integer_from_json(j.at("m_cap"), "m_cap"));
    cfg.threads = static_cast<int>(integer_from_json(j.at("threads"), "threads"));

    const json& opt = j.at("optimizer");
    cfg.optimizer.n_reps = static_cast<int>(integer_from_json(opt.at("n_reps"), "optimizer.n_reps"));
    cfg.optimizer.max_iterations =
        static_cast<int>(integer_from_json(opt.at("max_iterations"), "optimizer.max_iterations"));
    cfg.optimizer.gradient_step = number_from_json(opt.at("gradient_step"), "optimizer.gradient_step");
    cfg.optimizer.convergence_tol =
        number_from_json(opt.at("convergence_tol"), "optimizer.convergence_tol");
    cfg.optimizer.per_query_psi = opt.at("per_query_psi").get<bool>();
    cfg.optimizer.seed = cfg.seed;

    const json& qd = j.at("qdoc");
    cfg.qdoc_lengths.clear();
    for (const auto& v : qd.at("lengths"))
        cfg.qdoc_lengths.push_back(static_cast<int>(integer_from_json(v, "qdoc.lengths")));
    cfg.budget = static_cast<int>(integer_from_json(qd.at("budget"), "qdoc.budget"));
    cfg.budget_depths.clear();
    for (const auto& v : qd.at("budget_depths"))
        cfg.budget_depths.push_back(static_cast<int>(integer_from_json(v, "qdoc.budget_depths")));

    const json& noise = j.at("noise");
    cfg.noise_alpha = angle_from_json(noise.at("alpha"), "noise.alpha");
    cfg.noise_queries = static_cast<int>(integer_from_json(noise.at("queries"), "noise.queries"));
    cfg.noise_gamma = number_from_json(noise.at("gamma"), "noise.gamma");
    cfg.cqed_grid.clear();
    for (const auto& v : noise.at("cqed_grid"))
        cfg.cqed_grid.push_back(number_from_json(v, "noise.cqed_grid"));

    const json& perf = j.at("perfect");
    cfg.perfect_alphas.clear();
    for (const auto& v : perf.at("alphas"))
        cfg.perfect_alphas.push_back(angle_from_json(v, "perfect.alphas"));
    cfg.perfect_cap = integer_from_json(perf.at("cap"), "perfect.cap");

    const json& op = j.at("optimize");
    run.optimize_alpha = angle_from_json(op.at("alpha"), "optimize.alpha");
    run.optimize_k = static_cast<int>(integer_from_json(op.at("K"), "optimize.K"));

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        fail("(validate)", e.what());
    }
    return cfg;
}

}  // namespace

ResolvedRun parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    json j = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config error at '" + path + "': cannot open file");
        std::ostringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        if (!text.empty() &&
            text.find_first_not_of(" \t\r\n") != std::string::npos) {
            json user;
            try {
                user = json::parse(text);
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config error at '") + path + "': " + e.what());
            }
            if (!user.is_object()) throw ConfigError("config error: top level must be an object");
            j.merge_patch(user);
        }
    }
    if (const char* env_seed = std::getenv("HBCD_SEED")) {
        if (!path.empty()) {
            // config file wins over the environment; only apply when absent
        }
        if (j["seed"] == default_config()["seed"]) j["seed"] = std::atoll(env_seed);
    }
    for (const auto& o : overrides) apply_override(j, o);

    ResolvedRun run;
    run.config = config_from_json(j, run);
    run.resolved_json = j.dump(2);
    return run;
}

namespace {

std::string protocol_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Sequential: return "sequential";
        case ProtocolKind::MultiShot: return "multishot";
        case ProtocolKind::Parallel: return "parallel";
    }
    return "?";
}

void write_manifest(const std::string& out_dir, RunManifest& m) {
    json j;
    j["subcommand"] = m.subcommand;
    j["config_digest"] = m.config_digest;
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    j["output_paths"] = m.output_paths;
    std::ofstream out(out_dir + "/manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace

int run(const std::string& subcommand, ResolvedRun& resolved, const std::string& out_dir,
        RunManifest* manifest_out) {
    fs::create_directories(out_dir);
    const std::string cfg_path = out_dir + "/resolved_config.json";
    {
        std::ofstream out(cfg_path, std::ios::binary);
        out << resolved.resolved_json << "\n";
    }
    RunManifest manifest;
    manifest.subcommand = subcommand;
    manifest.config_digest = file_digest(cfg_path);
    manifest.seed = resolved.config.seed;
    manifest.tool_version = kToolVersion;
    manifest.output_paths.push_back(cfg_path);

    ExperimentConfig& cfg = resolved.config;
    int exit_code = 0;

    if (subcommand == "scaling") {
        cfg.experiment = Experiment::Scaling;
        const ScalingResult res = scaling_sweep(cfg);
        CsvWriter csv(out_dir + "/scaling.csv",
                      {"alpha", "epsilon", "protocol", "d", "m", "N", "achieved"});
        for (const auto& p : res.points) {
            if (!p.found) exit_code = 1;
            csv.row({CsvWriter::cell(p.alpha), CsvWriter::cell(p.epsilon),
                     protocol_name(p.protocol), CsvWriter::cell(p.depth),
                     CsvWriter::cell(p.shots), CsvWriter::cell(p.total_queries),
                     CsvWriter::cell(p.achieved)});
        }
        manifest.output_paths.push_back(csv.path());
        CsvWriter slopes(out_dir + "/scaling_slopes.csv", {"epsilon", "slope"});
        for (const auto& [eps, slope] : res.slope_per_epsilon)
            slopes.row({CsvWriter::cell(eps), CsvWriter::cell(slope)});
        manifest.output_paths.push_back(slopes.path());
    } else if (subcommand == "qdoc" || subcommand == "fixed-budget") {
        const auto curves = (subcommand == "qdoc") ? qdoc_experiment(cfg)
                                                   : fixed_budget_experiment(cfg);
        const std::string name = (subcommand == "qdoc") ? "qdoc.csv" : "fixed_budget.csv";
        CsvWriter csv(out_dir + "/" + name, {"protocol", "d", "m", "eta", "P_F", "P_D"});
        for (const auto& c : curves)
            for (const auto& pt : c.points)
                csv.row({c.protocol, CsvWriter::cell(c.depth), CsvWriter::cell(c.shots),
                         CsvWriter::cell(pt.eta), CsvWriter::cell(pt.p_false_alarm),
                         CsvWriter::cell(pt.p_detect)});
        manifest.output_paths.push_back(csv.path());
    } else if (subcommand == "mstar") {
        cfg.experiment = Experiment::MStarMonteCarlo;
        const MStarResult res = mstar_montecarlo(cfg);
        CsvWriter csv(out_dir + "/mstar.csv",
                      {"alpha", "epsilon", "d", "L", "m_star", "exact_min_shots"});
        csv.row({CsvWriter::cell(cfg.alpha_grid.front()), CsvWriter::cell(cfg.epsilon_list.front()),
                 CsvWriter::cell(cfg.depth), CsvWriter::cell(res.trials_used),
                 CsvWriter::cell(res.m_star),
                 res.exact_min_shots ? CsvWriter::cell(*res.exact_min_shots) : "notfound"});
        manifest.output_paths.push_back(csv.path());
        if (!res.exact_min_shots) exit_code = 1;
    } else if (subcommand == "noise") {
        cfg.experiment = Experiment::Noise;
        const auto rows = noise_table(cfg);
        CsvWriter csv(out_dir + "/noise.csv", {"C_QED", "P_se", "eta", "P_s_bound", "P_D"});
        for (const auto& r : rows)
            csv.row({CsvWriter::cell(r.c_qed), CsvWriter::cell(r.p_se), CsvWriter::cell(r.eta),
                     CsvWriter::cell(r.p_s_bound), CsvWriter::cell(r.p_d)});
        manifest.output_paths.push_back(csv.path());
    } else if (subcommand == "perfect") {
        cfg.experiment = Experiment::Perfect;
        CsvWriter csv(out_dir + "/perfect.csv",
                      {"alpha", "j", "beta", "N", "p1_given_0", "p1_given_alpha"});
        for (double a : cfg.perfect_alphas) {
            try {
                const PerfectProtocolResult r = perfect_protocol(a, cfg.perfect_cap);
                csv.row({CsvWriter::cell(r.alpha), CsvWriter::cell(r.region.j),
                         CsvWriter::cell(r.beta), CsvWriter::cell(r.query_count),
                         CsvWriter::cell(r.p1_given_0), CsvWriter::cell(r.p1_given_alpha)});
            } catch (const std::exception& e) {
                std::cerr << "perfect: alpha=" << a << ": " << e.what() << "\n";
                csv.row({CsvWriter::cell(a), "0", "nan", "0", "nan", "nan"});
                exit_code = 1;
            }
        }
        manifest.output_paths.push_back(csv.path());
    } else if (subcommand == "bounds") {
        cfg.experiment = Experiment::Bounds;
        const double eps = cfg.epsilon_list.empty() ? 0.05 : cfg.epsilon_list.front();
        CsvWriter csv(out_dir + "/bounds.csv", {"alpha", "lower_bound", "sql_reference"});
        for (double a : cfg.alpha_grid) {
            const SqlReference sql = sql_shot_bound(eps, a);
            csv.row({CsvWriter::cell(a), CsvWriter::cell(lower_bound_queries(a)),
                     CsvWriter::cell(sql.value)});
        }
        manifest.output_paths.push_back(csv.path());
    } else if (subcommand == "optimize") {
        HBCDProblem problem = HBCDProblem::with_mixed_hidden(
            resolved.optimize_alpha, cfg.epsilon_list.empty() ? 0.05 : cfg.epsilon_list.front());
        OptimizerConfig opt = cfg.optimizer;
        opt.seed = cfg.seed;
        const OptimizationResult res = optimize_phases(resolved.optimize_k, problem, opt);
        CsvWriter csv(out_dir + "/optimize.csv", {"restart", "loss", "iterations"});
        for (std::size_t i = 0; i < res.losses_per_restart.size(); ++i)
            csv.row({CsvWriter::cell(static_cast<int>(i)),
                     CsvWriter::cell(res.losses_per_restart[i]),
                     CsvWriter::cell(res.iterations[i])});
        manifest.output_paths.push_back(csv.path());
        json best;
        best["best_loss"] = res.best_loss;
        best["phi0"] = res.best_phi.phi0();
        best["phis"] = res.best_phi.phis();
        best["psi"] = res.best_phi.has_shared_psi() ? json(res.best_phi.shared_psi())
                                                    : json(res.best_phi.per_query_psis());
        std::ofstream out(out_dir + "/best_phases.json", std::ios::binary);
        out << best.dump(2) << "\n";
        manifest.output_paths.push_back(out_dir + "/best_phases.json");
    } else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }

    write_manifest(out_dir, manifest);
    if (manifest_out) *manifest_out = manifest;
    return exit_code;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Hidden binary channel discrimination toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::vector<std::string> overrides;
    long long seed_flag = -1;

    for (const char* name : {"scaling", "qdoc", "fixed-budget", "mstar", "noise",
                             "perfect", "bounds", "optimize"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config path");
        sub->add_option("--set", overrides, "key=value override (dotted paths)");
        sub->add_option("--seed", seed_flag, "master seed");
        sub->add_option("--out", out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ResolvedRun resolved = parse_config(config_path, overrides);
        if (seed_flag >= 0) {
            // Re-resolve with the explicit seed so the echoed config matches.
            std::vector<std::string> o = overrides;
            o.push_back("seed=" + std::to_string(seed_flag));
            resolved = parse_config(config_path, o);
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        return run(sub, resolved, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hbcd::cli
