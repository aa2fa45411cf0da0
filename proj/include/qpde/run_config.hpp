#pragma once

// JSON run configuration: parsing, validation and the canonical echo written
// into summary.json. Unknown keys are rejected so typos surface as errors.

#include "qpde/engine.hpp"
#include "qpde/sampling.hpp"
#include "qpde/spin_model.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpde {

using Json = nlohmann::ordered_json;

/// Raised for malformed or invalid configuration; what() carries the
/// location (line, when it can be found) and the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string name = "run";
    std::size_t n_spins = 2;
    std::vector<Coupling> couplings;
    StateLabel ground = StateLabel::T;
    StateLabel excited = StateLabel::S;
    PriorSpec prior;
    bool prior_mu_auto = false;  // mu taken from <Phi1|H|Phi1> - <Phi0|H|Phi0>
    EstimatorConfig estimator;
    SamplerSpec sampler;
    std::string output_dir = "qpde_out";

    SpinSystem system() const { return SpinSystem(n_spins, couplings); }

    /// Prior with an automatic mean resolved.
    PriorSpec resolved_prior() const
    {
        PriorSpec p = prior;
        if (prior_mu_auto) {
            const auto s = system();
            p.mu = expectation_gap(s, named_state(ground, n_spins), named_state(excited, n_spins));
        }
        return p;
    }
};

namespace detail {

// 1-based line of the first occurrence of "key" in the raw text, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key)
{
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) {
        return 0;
    }
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class ConfigReader {
public:
    ConfigReader(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const
    {
        const auto leaf = field.substr(field.find_last_of('.') + 1);
        const auto line = line_of_key(text_, leaf);
        std::ostringstream os;
        os << source_;
        if (line > 0) {
            os << ":" << line;
        }
        os << ": field '" << field << "': " << msg;
        throw ConfigError(os.str());
    }

    void only_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) const
    {
        if (!obj.is_object()) {
            fail(where, "expected an object");
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items()) {
            if (!ok.count(k)) {
                fail(where.empty() ? k : where + "." + k, "unknown key");
            }
        }
    }

    double number(const Json& obj, const char* key, const std::string& path, double def) const
    {
        if (!obj.contains(key)) {
            return def;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(path + key, "expected a number");
        }
        return v.get<double>();
    }

    std::uint64_t integer(const Json& obj, const char* key, const std::string& path, std::uint64_t def) const
    {
        if (!obj.contains(key)) {
            return def;
        }
        const auto& v = obj.at(key);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
            fail(path + key, "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const Json& obj, const char* key, const std::string& path, const std::string& def) const
    {
        if (!obj.contains(key)) {
            return def;
        }
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            fail(path + key, "expected a string");
        }
        return v.get<std::string>();
    }

    bool boolean(const Json& obj, const char* key, const std::string& path, bool def) const
    {
        if (!obj.contains(key)) {
            return def;
        }
        const auto& v = obj.at(key);
        if (!v.is_boolean()) {
            fail(path + key, "expected true or false");
        }
        return v.get<bool>();
    }

    const std::string& text() const { return text_; }

private:
    std::string source_;
    std::string text_;
};

inline std::vector<ScheduleEntry> parse_schedule(const Json& v, const ConfigReader& rd, const std::string& field)
{
    if (!v.is_array() || v.empty()) {
        rd.fail(field, "expected a non-empty array of [t, n_steps] pairs");
    }
    std::vector<ScheduleEntry> out;
    for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number_integer() ||
            e[1].get<long long>() < 1 || e[0].get<double>() <= 0.0) {
            rd.fail(field, "each entry must be [t > 0, n_steps >= 1]");
        }
        out.push_back({e[0].get<double>(), e[1].get<std::size_t>()});
    }
    return out;
}

}  // namespace detail

/// "0.2:30,0.4:60" -> schedule entries.
inline std::vector<ScheduleEntry> parse_schedule_flag(const std::string& s)
{
    std::vector<ScheduleEntry> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("--schedule: entry '" + item + "' is not t:n_steps");
        }
        try {
            std::size_t used = 0;
            const double t = std::stod(item.substr(0, colon), &used);
            const long long n = std::stoll(item.substr(colon + 1));
            if (t <= 0.0 || n < 1) {
                throw std::invalid_argument("range");
            }
            out.push_back({t, static_cast<std::size_t>(n)});
        } catch (const std::exception&) {
            throw ConfigError("--schedule: entry '" + item + "' needs t > 0 and n_steps >= 1");
        }
    }
    if (out.empty()) {
        throw ConfigError("--schedule: empty schedule");
    }
    return out;
}

inline RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>")
{
    detail::ConfigReader rd(source, text);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        // e.what() names line and column
        throw ConfigError(source + ": malformed JSON: " + e.what());
    }
    rd.only_keys(j, "", {"name", "system", "ground", "excited", "prior", "estimator", "sampler", "output_dir"});

    RunConfig cfg;
    cfg.name = rd.string(j, "name", "", cfg.name);
    cfg.output_dir = rd.string(j, "output_dir", "", cfg.output_dir);

    if (!j.contains("system")) {
        rd.fail("system", "missing");
    }
    const Json& sys = j.at("system");
    rd.only_keys(sys, "system", {"n_spins", "couplings"});
    cfg.n_spins = rd.integer(sys, "n_spins", "system.", 0);
    if (cfg.n_spins < 2 || cfg.n_spins > 5) {
        rd.fail("system.n_spins", "must be between 2 and 5");
    }
    if (!sys.contains("couplings") || !sys.at("couplings").is_array()) {
        rd.fail("system.couplings", "expected an array of {i, j, J}");
    }
    for (const auto& c : sys.at("couplings")) {
        rd.only_keys(c, "system.couplings", {"i", "j", "J"});
        const auto i = rd.integer(c, "i", "system.couplings.", 0);
        const auto k = rd.integer(c, "j", "system.couplings.", 0);
        if (!c.contains("J")) {
            rd.fail("system.couplings.J", "missing");
        }
        cfg.couplings.push_back({i, k, rd.number(c, "J", "system.couplings.", 0.0)});
    }
    try {
        (void)cfg.system();
    } catch (const std::invalid_argument& e) {
        rd.fail("system.couplings", e.what());
    }

    auto label = [&](const char* key, StateLabel def) {
        const auto s = rd.string(j, key, "", to_string(def));
        const auto l = parse_state_label(s);
        if (!l) {
            rd.fail(key, "unknown state label '" + s + "' (expected T, S, Q, D1, D2, D1_supp or D2_supp)");
        }
        if (spins_for(*l) != cfg.n_spins) {
            rd.fail(key, "label '" + s + "' needs " + std::to_string(spins_for(*l)) + " spins, system has " +
                             std::to_string(cfg.n_spins));
        }
        return *l;
    };
    if (!j.contains("ground")) {
        rd.fail("ground", "missing");
    }
    if (!j.contains("excited")) {
        rd.fail("excited", "missing");
    }
    cfg.ground = label("ground", cfg.ground);
    cfg.excited = label("excited", cfg.excited);
    if (cfg.ground == cfg.excited) {
        rd.fail("excited", "must differ from ground");
    }

    if (j.contains("prior")) {
        const Json& p = j.at("prior");
        rd.only_keys(p, "prior", {"shape", "mu", "sigma"});
        const auto shape = rd.string(p, "shape", "prior.", "gaussian");
        if (shape == "gaussian") {
            cfg.prior.shape = PriorShape::gaussian;
        } else if (shape == "uniform") {
            cfg.prior.shape = PriorShape::uniform;
        } else {
            rd.fail("prior.shape", "expected 'gaussian' or 'uniform'");
        }
        if (p.contains("mu") && p.at("mu").is_string()) {
            if (p.at("mu").get<std::string>() != "auto") {
                rd.fail("prior.mu", "expected a number or \"auto\"");
            }
            cfg.prior_mu_auto = true;
        } else {
            cfg.prior.mu = rd.number(p, "mu", "prior.", cfg.prior.mu);
        }
        cfg.prior.sigma = rd.number(p, "sigma", "prior.", cfg.prior.sigma);
        if (!(cfg.prior.sigma > 0.0)) {
            rd.fail("prior.sigma", "must be positive");
        }
    }

    if (j.contains("estimator")) {
        const Json& e = j.at("estimator");
        rd.only_keys(e, "estimator",
                     {"lambda_restart", "e_thre", "grid_points", "initial_t", "steps_per_unit_time", "max_iterations",
                      "explicit_schedule", "max_time_growth", "max_consecutive_restarts", "fit_attempts", "evolution",
                      "compress_evolution"});
        auto& est = cfg.estimator;
        const std::string p = "estimator.";
        est.lambda_restart = rd.number(e, "lambda_restart", p, est.lambda_restart);
        est.e_thre = rd.number(e, "e_thre", p, est.e_thre);
        est.grid_points = rd.integer(e, "grid_points", p, est.grid_points);
        est.initial_t = rd.number(e, "initial_t", p, est.initial_t);
        est.steps_per_unit_time = rd.number(e, "steps_per_unit_time", p, est.steps_per_unit_time);
        est.max_iterations = rd.integer(e, "max_iterations", p, est.max_iterations);
        est.max_time_growth = rd.number(e, "max_time_growth", p, est.max_time_growth);
        est.max_consecutive_restarts = rd.integer(e, "max_consecutive_restarts", p, est.max_consecutive_restarts);
        est.fit_attempts = rd.integer(e, "fit_attempts", p, est.fit_attempts);
        est.compress_evolution = rd.boolean(e, "compress_evolution", p, est.compress_evolution);
        const auto evo = rd.string(e, "evolution", p, "trotter");
        if (evo == "trotter") {
            est.evolution = EvolutionMode::trotter;
        } else if (evo == "exact") {
            est.evolution = EvolutionMode::exact;
        } else {
            rd.fail("estimator.evolution", "expected 'trotter' or 'exact'");
        }
        if (e.contains("explicit_schedule") && !e.at("explicit_schedule").is_null()) {
            est.explicit_schedule = detail::parse_schedule(e.at("explicit_schedule"), rd, "estimator.explicit_schedule");
        }
        try {
            est.validate();
        } catch (const std::invalid_argument& ex) {
            rd.fail("estimator", ex.what());
        }
    }

    if (j.contains("sampler")) {
        const Json& s = j.at("sampler");
        rd.only_keys(s, "sampler", {"mode", "shots", "p_depol", "seed"});
        const auto mode = rd.string(s, "mode", "sampler.", "exact");
        if (mode == "exact") {
            cfg.sampler.mode = SamplerMode::exact;
        } else if (mode == "shots") {
            cfg.sampler.mode = SamplerMode::shots;
        } else if (mode == "noisy") {
            cfg.sampler.mode = SamplerMode::noisy;
        } else {
            rd.fail("sampler.mode", "expected 'exact', 'shots' or 'noisy'");
        }
        cfg.sampler.shots = rd.integer(s, "shots", "sampler.", cfg.sampler.shots);
        cfg.sampler.p_depol = rd.number(s, "p_depol", "sampler.", cfg.sampler.p_depol);
        cfg.sampler.seed = rd.integer(s, "seed", "sampler.", cfg.sampler.seed);
        try {
            cfg.sampler.validate();
        } catch (const std::invalid_argument& ex) {
            rd.fail("sampler", ex.what());
        }
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

/// Canonical JSON form; parse_run_config(to_json(c).dump()) reproduces c with
/// the prior mean resolved.
inline Json to_json(const RunConfig& c)
{
    Json j;
    j["name"] = c.name;
    Json couplings = Json::array();
    for (const auto& k : c.couplings) {
        couplings.push_back(Json{{"i", k.i}, {"j", k.j}, {"J", k.value}});
    }
    j["system"] = Json{{"n_spins", c.n_spins}, {"couplings", couplings}};
    j["ground"] = to_string(c.ground);
    j["excited"] = to_string(c.excited);
    const auto prior = c.resolved_prior();
    j["prior"] = Json{{"shape", prior.shape == PriorShape::gaussian ? "gaussian" : "uniform"},
                      {"mu", prior.mu},
                      {"sigma", prior.sigma}};
    const auto& e = c.estimator;
    Json est{{"lambda_restart", e.lambda_restart},
             {"e_thre", e.e_thre},
             {"grid_points", e.grid_points},
             {"initial_t", e.initial_t},
             {"steps_per_unit_time", e.steps_per_unit_time},
             {"max_iterations", e.max_iterations},
             {"max_time_growth", e.max_time_growth},
             {"max_consecutive_restarts", e.max_consecutive_restarts},
             {"fit_attempts", e.fit_attempts},
             {"evolution", e.evolution == EvolutionMode::trotter ? "trotter" : "exact"},
             {"compress_evolution", e.compress_evolution}};
    if (e.explicit_schedule) {
        Json s = Json::array();
        for (const auto& x : *e.explicit_schedule) {
            s.push_back(Json::array({x.t, x.n_steps}));
        }
        est["explicit_schedule"] = s;
    }
    j["estimator"] = est;
    j["sampler"] = Json{{"mode", to_string(c.sampler.mode)},
                        {"shots", c.sampler.shots},
                        {"p_depol", c.sampler.p_depol},
                        {"seed", c.sampler.seed}};
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace qpde
