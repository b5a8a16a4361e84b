#include "syklab/config.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"

namespace syklab {

namespace {

constexpr int large_threshold = 16;

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ArgumentError(fmt::format("not a boolean: '{}'", v));
}

std::size_t parse_count(std::string_view v) {
    const long long x = parse_int(v);
    if (x < 0) throw ArgumentError(fmt::format("expected a non-negative count, got '{}'", v));
    return static_cast<std::size_t>(x);
}

template <class T, class F>
std::vector<T> parse_list(std::string_view v, F parse) {
    std::vector<T> out;
    if (trim(v).empty()) return out;
    for (auto item : split(v, ',')) out.push_back(static_cast<T>(parse(trim(item))));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt_one) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ',';
        out += fmt_one(v[k]);
    }
    return out;
}

ExperimentConfig defaults_for(const std::string& command) {
    ExperimentConfig c;
    c.command = command;
    if (command == "metropolis" || command == "gram") c.n_fermions = 10;
    if (command == "decompose") c.samples = 16;
    if (command == "correlators") c.pool_size = 256;
    if (command == "gram") {
        c.samples = 128;
        c.pool_size = 256;
    }
    return c;
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "n",        "j-scale",   "seed",         "out",     "jobs",          "large",
        "samples",  "pool-size", "sampling",     "identity-draw", "index",   "betas",
        "t-max",    "t-points",  "fermion-a",    "fermion-b", "bins",        "input",
        "compare",  "n-list",    "stages",       "sigma0",  "scope",         "checkpoint-every",
        "resume",   "stop-after", "gram-beta",   "t1",      "omega",         "sff-t-max"};
    return keys;
}

bool is_flag_key(const std::string& key) {
    return key == "large" || key == "resume" || key == "identity-draw";
}

EnsembleParams ExperimentConfig::params() const {
    EnsembleParams p;
    p.n_fermions = n_fermions;
    p.j_scale = j_scale;
    p.seed = seed;
    return p;
}

std::vector<double> ExperimentConfig::times() const { return linear_grid(0, t_max, t_points); }

std::map<std::string, std::string> ExperimentConfig::to_map() const {
    std::map<std::string, std::string> m;
    m["n"] = std::to_string(n_fermions);
    m["j-scale"] = format_double(j_scale);
    m["seed"] = std::to_string(seed);
    m["out"] = out.string();
    m["jobs"] = std::to_string(jobs);
    m["large"] = large ? "true" : "false";
    m["samples"] = std::to_string(samples);
    m["pool-size"] = std::to_string(pool_size);
    m["sampling"] = sampling == PoolSampling::with_replacement ? "with" : "without";
    m["identity-draw"] = identity_draw ? "true" : "false";
    m["index"] = std::to_string(index);
    m["betas"] = join(betas, format_double);
    m["t-max"] = format_double(t_max);
    m["t-points"] = std::to_string(t_points);
    m["fermion-a"] = std::to_string(fermion_a);
    m["fermion-b"] = std::to_string(fermion_b);
    m["bins"] = std::to_string(bins);
    m["input"] = input ? input->string() : "";
    m["compare"] = compare ? compare->string() : "";
    m["n-list"] = join(n_list, [](int v) { return std::to_string(v); });
    m["stages"] = schedule.stages_text();
    m["sigma0"] = format_double(schedule.sigma0);
    m["scope"] = std::string(scope_name(scope));
    m["checkpoint-every"] = std::to_string(checkpoint_every);
    m["resume"] = resume ? "true" : "false";
    m["stop-after"] = std::to_string(stop_after);
    m["sff-t-max"] = format_double(sff_t_max);
    m["gram-beta"] = format_double(gram_beta);
    m["t1"] = format_double(t1);
    m["omega"] = std::to_string(omega);
    return m;
}

std::string ExperimentConfig::to_text() const {
    std::string s = fmt::format("# syklab {}\ncommand = {}\n", command, command);
    const auto m = to_map();
    for (const auto& key : config_keys()) s += fmt::format("{} = {}\n", key, m.at(key));
    // fixed parts of the annealing schedule, for the record
    s += fmt::format("# window = {}, raise above {}, lower below {}, factor {}\n", schedule.window,
                     schedule.raise_above, schedule.lower_below, format_double(schedule.factor));
    return s;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    std::map<std::string, std::string> out;
    std::string line;
    int row = 0;
    while (std::getline(is, line)) {
        ++row;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw ArgumentError(fmt::format("{}:{}: expected 'key = value'", path.string(), row));
        }
        out[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
    }
    out.erase("command");
    return out;
}

ExperimentConfig resolve_config(const std::string& command,
                                const std::map<std::string, std::string>& values) {
    ExperimentConfig c = defaults_for(command);
    const auto& keys = config_keys();
    for (const auto& [key, v] : values) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ArgumentError(fmt::format("unknown setting '{}'", key));
        }
        if (key == "n") c.n_fermions = static_cast<int>(parse_int(v));
        else if (key == "j-scale") c.j_scale = parse_double(v);
        else if (key == "seed") {
            const long long s = parse_int(v);
            if (s < 0) throw ArgumentError("seed must be >= 0");
            c.seed = static_cast<std::uint64_t>(s);
        } else if (key == "out") c.out = v;
        else if (key == "jobs") c.jobs = static_cast<int>(parse_int(v));
        else if (key == "large") c.large = parse_bool(v);
        else if (key == "samples") c.samples = parse_count(v);
        else if (key == "pool-size") c.pool_size = parse_count(v);
        else if (key == "sampling") {
            if (v == "with") c.sampling = PoolSampling::with_replacement;
            else if (v == "without") c.sampling = PoolSampling::without_replacement;
            else throw ArgumentError(fmt::format("sampling must be 'with' or 'without', got '{}'", v));
        } else if (key == "identity-draw") c.identity_draw = parse_bool(v);
        else if (key == "index") c.index = parse_count(v);
        else if (key == "betas") c.betas = parse_list<double>(v, parse_double);
        else if (key == "t-max") c.t_max = parse_double(v);
        else if (key == "t-points") c.t_points = parse_count(v);
        else if (key == "fermion-a") c.fermion_a = static_cast<int>(parse_int(v));
        else if (key == "fermion-b") c.fermion_b = static_cast<int>(parse_int(v));
        else if (key == "bins") c.bins = static_cast<int>(parse_int(v));
        else if (key == "input") c.input = v.empty() ? std::nullopt : std::optional<std::filesystem::path>(v);
        else if (key == "compare") c.compare = v.empty() ? std::nullopt : std::optional<std::filesystem::path>(v);
        else if (key == "n-list") c.n_list = parse_list<int>(v, parse_int);
        else if (key == "stages") c.schedule.stages = Schedule::parse_stages(v);
        else if (key == "sigma0") c.schedule.sigma0 = parse_double(v);
        else if (key == "scope") c.scope = parse_scope(v);
        else if (key == "checkpoint-every") c.checkpoint_every = parse_count(v);
        else if (key == "resume") c.resume = parse_bool(v);
        else if (key == "stop-after") c.stop_after = parse_count(v);
        else if (key == "sff-t-max") c.sff_t_max = parse_double(v);
        else if (key == "gram-beta") c.gram_beta = parse_double(v);
        else if (key == "t1") c.t1 = parse_double(v);
        else if (key == "omega") c.omega = static_cast<int>(parse_int(v));
    }

    c.params().validate();
    std::vector<int> sizes = c.n_list;
    sizes.push_back(c.n_fermions);
    for (int n : sizes) {
        EnsembleParams p = c.params();
        p.n_fermions = n;
        p.validate();
        if (n > large_threshold && !c.large) {
            throw ArgumentError(fmt::format("N={} needs --large (desk-scale limit is N={})", n,
                                            large_threshold));
        }
    }
    if (c.jobs < 1) throw ArgumentError("jobs must be >= 1");
    if (c.samples < 1 || c.pool_size < 1) throw ArgumentError("samples and pool-size must be >= 1");
    if (c.t_points < 1 || !(c.t_max >= 0)) throw ArgumentError("time grid needs t-points >= 1 and t-max >= 0");
    for (double b : c.betas) {
        if (!(b >= 0)) throw ArgumentError("betas must be >= 0");
    }
    for (int f : {c.fermion_a, c.fermion_b}) {
        if (f < 0 || f >= c.n_fermions) {
            throw ArgumentError(fmt::format("fermion index {} out of range for N={}", f, c.n_fermions));
        }
    }
    if (c.fermion_a == c.fermion_b) throw ArgumentError("OTOC needs two different fermions");
    if (c.bins < 1) throw ArgumentError("bins must be >= 1");
    if (c.omega < 1 || !(c.t1 > 0) || !(c.gram_beta >= 0)) {
        throw ArgumentError("gram needs omega >= 1, t1 > 0 and gram-beta >= 0");
    }
    c.schedule.validate();
    return c;
}

} // namespace syklab
