#include "shs/scenario.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace shs {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& ptr, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ScenarioError(ptr.empty() ? "/" : ptr, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ScenarioError(ptr + "/" + key, "unknown key");
}

double get_number(const json& j, const std::string& key, const std::string& ptr) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ScenarioError(ptr + "/" + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ScenarioError(ptr + "/" + key, "must be finite");
    return x;
}

std::uint64_t get_count(const json& j, const std::string& key, const std::string& ptr) {
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ScenarioError(ptr + "/" + key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& ptr) {
    const json& v = j.at(key);
    if (!v.is_array()) throw ScenarioError(ptr + "/" + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ScenarioError(ptr + "/" + key + "/" + std::to_string(i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::string fmt(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

}  // namespace

StepInitialData parse_preset(const std::string& text, const std::string& pointer) {
    static const std::regex re(R"(\s*box\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ScenarioError(pointer, "unknown preset '" + text + "'");
    double v[3];
    for (int i = 0; i < 3; ++i) {
        const std::string s = m[i + 1].str();
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v[i]);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw ScenarioError(pointer, "preset argument '" + s + "' is not a number");
    }
    if (!(v[1] < v[2])) throw ScenarioError(pointer, "box(V0, a, b) needs a < b");
    return StepInitialData::box(v[0], v[1], v[2]);
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    only_keys(j, "", {"sigma", "initial", "grid", "mode", "ensemble", "outputs", "times", "law_q0"});
    if (j.contains("sigma")) {
        const json& g = j["sigma"];
        only_keys(g, "/sigma", {"slope", "intercept"});
        if (g.contains("slope")) s.sigma.slope = get_number(g, "slope", "/sigma");
        if (g.contains("intercept")) s.sigma.intercept = get_number(g, "intercept", "/sigma");
    }
    if (j.contains("initial")) {
        const json& in = j["initial"];
        if (in.is_string()) {
            s.preset = in.get<std::string>();
            s.initial = parse_preset(s.preset);
        } else {
            only_keys(in, "/initial", {"breakpoints", "values"});
            if (!in.contains("breakpoints")) throw ScenarioError("/initial/breakpoints", "missing");
            if (!in.contains("values")) throw ScenarioError("/initial/values", "missing");
            s.preset.clear();
            s.initial.breakpoints = get_numbers(in, "breakpoints", "/initial");
            s.initial.values = get_numbers(in, "values", "/initial");
            try {
                s.initial.validate();
            } catch (const std::invalid_argument& e) {
                throw ScenarioError("/initial", e.what());
            }
        }
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        only_keys(g, "/grid", {"t_end", "n_steps"});
        if (g.contains("t_end")) s.grid.t_end = get_number(g, "t_end", "/grid");
        if (g.contains("n_steps")) s.grid.n_steps = get_count(g, "n_steps", "/grid");
        if (!(s.grid.t_end > 0.0)) throw ScenarioError("/grid/t_end", "must be positive");
        if (s.grid.n_steps == 0) throw ScenarioError("/grid/n_steps", "must be at least 1");
    }
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) throw ScenarioError("/mode", "expected \"conservative\" or \"dissipative\"");
        try {
            s.mode = parse_mode(j["mode"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ScenarioError("/mode", e.what());
        }
    }
    if (j.contains("ensemble")) {
        const json& e = j["ensemble"];
        only_keys(e, "/ensemble", {"n_paths", "master_seed"});
        if (e.contains("n_paths")) s.n_paths = get_count(e, "n_paths", "/ensemble");
        if (e.contains("master_seed")) s.master_seed = get_count(e, "master_seed", "/ensemble");
        if (s.n_paths == 0) throw ScenarioError("/ensemble/n_paths", "must be at least 1");
    }
    if (j.contains("outputs")) {
        const json& o = j["outputs"];
        only_keys(o, "/outputs", {"directory", "formats"});
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) throw ScenarioError("/outputs/directory", "expected a string");
            s.out_dir = o["directory"].get<std::string>();
        }
        if (o.contains("formats")) {
            const json& f = o["formats"];
            if (!f.is_array()) throw ScenarioError("/outputs/formats", "expected an array");
            s.formats.clear();
            for (std::size_t i = 0; i < f.size(); ++i) {
                const std::string p = "/outputs/formats/" + std::to_string(i);
                if (!f[i].is_string()) throw ScenarioError(p, "expected a string");
                const std::string v = f[i].get<std::string>();
                if (v != "csv" && v != "json") throw ScenarioError(p, "unknown format '" + v + "'");
                s.formats.push_back(v);
            }
        }
    }
    if (j.contains("times")) {
        s.times = get_numbers(j, "times", "");
        for (std::size_t i = 0; i < s.times.size(); ++i)
            if (s.times[i] < 0.0 || s.times[i] > s.grid.t_end)
                throw ScenarioError("/times/" + std::to_string(i), "outside [0, t_end]");
    }
    if (j.contains("law_q0")) s.law_q0 = get_numbers(j, "law_q0", "");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("", "cannot open scenario file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["sigma"] = {{"slope", s.sigma.slope}, {"intercept", s.sigma.intercept}};
    if (!s.preset.empty())
        j["initial"] = s.preset;
    else
        j["initial"] = {{"breakpoints", s.initial.breakpoints}, {"values", s.initial.values}};
    j["grid"] = {{"t_end", s.grid.t_end}, {"n_steps", s.grid.n_steps}};
    j["mode"] = to_string(s.mode);
    j["ensemble"] = {{"n_paths", s.n_paths}, {"master_seed", s.master_seed}};
    j["outputs"] = {{"directory", s.out_dir}, {"formats", s.formats}};
    if (!s.times.empty()) j["times"] = s.times;
    if (!s.law_q0.empty()) j["law_q0"] = s.law_q0;
    return j;
}

std::string scenario_hash(const Scenario& s) {
    json j = scenario_to_json(s);
    // The output location does not change any number.
    j.erase("outputs");
    std::string text = j.dump();
    // Doubles through to_chars so the hash does not depend on the JSON float printer.
    text += "|" + fmt(s.sigma.slope) + "|" + fmt(s.sigma.intercept) + "|" + fmt(s.grid.t_end);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

void apply_seed_override(Scenario& s) {
    const char* env = std::getenv("SHS_SEED");
    if (!env || !*env) return;
    const std::string v(env);
    std::uint64_t seed = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ScenarioError("/ensemble/master_seed", "SHS_SEED='" + v + "' is not an unsigned integer");
    s.master_seed = seed;
}

Experiment Scenario::experiment(unsigned threads) const {
    return Experiment{sigma, initial, grid, mode, n_paths, master_seed, threads};
}

}  // namespace shs
