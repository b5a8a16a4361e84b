#include "syklab/metropolis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"
#include "syklab/spectral.hpp"

namespace syklab {

namespace {

constexpr std::string_view checkpoint_magic = "syklab-checkpoint 1";

double drift(std::span<const double> couplings, int n_fermions, double target) {
    double s = 0;
    for (double v : couplings) s += v * v;
    return std::abs(std::ldexp(s, n_fermions / 2) - target) / target;
}

struct Checkpoint {
    EnsembleParams params;
    Schedule schedule;
    ObjectiveScope scope = ObjectiveScope::full_spectrum;
    double target_trace = 0;
    double max_trace_drift = 0;
    std::vector<double> initial;
    ChainState state;
    std::vector<TrajectoryRow> trajectory;
};

std::string join_doubles(std::span<const double> v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ' ';
        out += format_double(v[k]);
    }
    return out;
}

std::vector<double> parse_doubles(std::string_view text) {
    std::vector<double> out;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok));
    return out;
}

std::string serialize(const Checkpoint& c) {
    std::string s;
    s += fmt::format("{}\n", checkpoint_magic);
    s += fmt::format("n_fermions {}\n", c.params.n_fermions);
    s += fmt::format("j_scale {}\n", format_double(c.params.j_scale));
    s += fmt::format("seed {}\n", c.params.seed);
    s += fmt::format("scope {}\n", scope_name(c.scope));
    s += fmt::format("stages {}\n", c.schedule.stages_text());
    s += fmt::format("sigma0 {}\n", format_double(c.schedule.sigma0));
    s += fmt::format("window {} {} {} {}\n", c.schedule.window, c.schedule.raise_above,
                     c.schedule.lower_below, format_double(c.schedule.factor));
    s += fmt::format("target_trace {}\n", format_double(c.target_trace));
    s += fmt::format("max_trace_drift {}\n", format_double(c.max_trace_drift));
    s += fmt::format("steps {}\n", c.state.steps);
    s += fmt::format("sigma {}\n", format_double(c.state.sigma));
    s += fmt::format("log_weight {}\n", format_double(c.state.log_weight));
    s += fmt::format("accepts {} {} {}\n", c.state.window_accepts, c.state.window_steps,
                     c.state.total_accepts);
    s += fmt::format("rng {}\n", c.state.rng.state());
    s += fmt::format("initial {}\n", join_doubles(c.initial));
    s += fmt::format("couplings {}\n", join_doubles(c.state.couplings));
    s += fmt::format("trajectory {}\n", c.trajectory.size());
    for (const auto& r : c.trajectory) {
        s += fmt::format("{} {} {} {} {}\n", r.step, format_double(r.beta_d), format_double(r.f),
                         format_double(r.sigma), format_double(r.accept_rate));
    }
    return s;
}

Checkpoint deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != checkpoint_magic) {
        throw ArgumentError("not a syklab checkpoint (or an unsupported version)");
    }
    std::map<std::string, std::string, std::less<>> kv;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "trajectory") {
            rows = static_cast<std::size_t>(parse_int(value));
            break;
        }
        kv[key] = value;
    }
    auto get = [&](std::string_view key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ArgumentError(fmt::format("checkpoint lacks '{}'", key));
        return it->second;
    };
    Checkpoint c;
    c.params.n_fermions = static_cast<int>(parse_int(get("n_fermions")));
    c.params.j_scale = parse_double(get("j_scale"));
    c.params.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
    c.scope = parse_scope(get("scope"));
    c.schedule.stages = Schedule::parse_stages(get("stages"));
    c.schedule.sigma0 = parse_double(get("sigma0"));
    {
        std::istringstream w(get("window"));
        std::string factor;
        w >> c.schedule.window >> c.schedule.raise_above >> c.schedule.lower_below >> factor;
        c.schedule.factor = parse_double(factor);
    }
    c.target_trace = parse_double(get("target_trace"));
    c.max_trace_drift = parse_double(get("max_trace_drift"));
    c.state.steps = static_cast<std::size_t>(parse_int(get("steps")));
    c.state.sigma = parse_double(get("sigma"));
    c.state.log_weight = parse_double(get("log_weight"));
    {
        std::istringstream a(get("accepts"));
        a >> c.state.window_accepts >> c.state.window_steps >> c.state.total_accepts;
    }
    c.state.rng.restore(get("rng"));
    c.initial = parse_doubles(get("initial"));
    c.state.couplings = parse_doubles(get("couplings"));
    for (std::size_t k = 0; k < rows; ++k) {
        if (!std::getline(is, line)) throw ArgumentError("truncated checkpoint trajectory");
        const auto v = parse_doubles(line);
        if (v.size() != 5) throw ArgumentError("malformed checkpoint trajectory row");
        c.trajectory.push_back({static_cast<std::size_t>(v[0]), v[1], v[2], v[3], v[4]});
    }
    return c;
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    write_text_file(tmp, contents);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(fmt::format("cannot move checkpoint into '{}': {}", path.string(), ec.message()));
}

} // namespace

// ------------------------------------------------------------------ Schedule

Schedule Schedule::standard() {
    Schedule s;
    s.stages = {{0.5, 20000}, {1.0, 20000}, {1.5, 20000}, {2.0, 20000}};
    return s;
}

std::size_t Schedule::total_steps() const {
    std::size_t n = 0;
    for (const auto& st : stages) n += st.steps;
    return n;
}

void Schedule::validate() const {
    if (!(sigma0 > 0) || !std::isfinite(sigma0)) throw ArgumentError("sigma0 must be positive");
    if (window == 0) throw ArgumentError("adaptation window must be positive");
    if (!(factor > 1)) throw ArgumentError("adaptation factor must exceed 1");
    if (lower_below > raise_above) throw ArgumentError("lower threshold above raise threshold");
    for (const auto& st : stages) {
        if (!(st.beta_d >= 0) || !std::isfinite(st.beta_d)) throw ArgumentError("beta_D must be >= 0");
    }
}

std::string Schedule::stages_text() const {
    std::string out;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        if (k) out += ',';
        out += fmt::format("{}:{}", format_double(stages[k].beta_d), stages[k].steps);
    }
    return out;
}

std::vector<Schedule::Stage> Schedule::parse_stages(std::string_view text) {
    std::vector<Stage> out;
    text = trim(text);
    if (text.empty() || text == "none") return out;
    for (auto item : split(text, ',')) {
        const auto parts = split(trim(item), ':');
        if (parts.size() != 2) throw ArgumentError(fmt::format("stage '{}' is not beta:steps", item));
        const long long steps = parse_int(parts[1]);
        if (steps < 0) throw ArgumentError("stage step count must be >= 0");
        out.push_back({parse_double(parts[0]), static_cast<std::size_t>(steps)});
    }
    return out;
}

std::string_view scope_name(ObjectiveScope s) {
    return s == ObjectiveScope::full_spectrum ? "full" : "sector";
}

ObjectiveScope parse_scope(std::string_view s) {
    if (s == "full") return ObjectiveScope::full_spectrum;
    if (s == "sector") return ObjectiveScope::per_sector;
    throw ArgumentError(fmt::format("unknown objective scope '{}' (full|sector)", s));
}

// ----------------------------------------------------------------- objective

double log_vandermonde(std::span<const double> l) {
    if (l.size() < 2) return 0.0;
    const double floor = gap_clamp * (l.back() - l.front());
    double s = 0;
    for (std::size_t i = 0; i < l.size(); ++i)
        for (std::size_t j = i + 1; j < l.size(); ++j) s += std::log(std::max(std::abs(l[j] - l[i]), floor));
    return s;
}

double objective(std::span<const double> ascending, double beta_d) {
    return -beta_d * log_vandermonde(ascending);
}

namespace {

double syk_log_weight(const DenseOperator& h, ObjectiveScope scope) {
    if (scope == ObjectiveScope::full_spectrum) return -log_vandermonde(eigenvalues_only(h));
    return -(log_vandermonde(sector_eigenvalues(h, Sector::even)) +
             log_vandermonde(sector_eigenvalues(h, Sector::odd)));
}

} // namespace

double objective(const DenseOperator& h, double beta_d, ObjectiveScope scope) {
    if (!h.is_hermitian()) throw ArgumentError("objective needs a Hermitian operator");
    return beta_d * syk_log_weight(h, scope);
}

double step_length(double x, double sigma) {
    return 0.5 * sigma * (std::sqrt(1.0 + 4.0 * x * x / (1.0 - x * x)) - 1.0);
}

std::vector<double> propose(std::span<const double> current, double sigma, Rng& rng) {
    const double l = step_length(rng.uniform(), sigma);
    std::vector<double> d(current.size());
    rng.fill_normal(d);
    double norm = 0;
    for (double v : d) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<double> out(current.begin(), current.end());
    if (norm > 0) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += l * d[k] / norm;
    }
    return out;
}

CouplingTensor propose(const CouplingTensor& current, double sigma, Rng& rng) {
    return CouplingTensor(current.fermions(), propose(current.values(), sigma, rng));
}

ChainModel syk_chain_model(int n_fermions, double target_trace, ObjectiveScope scope) {
    ChainModel m;
    m.normalize = [n_fermions, target_trace](std::vector<double>& x) {
        CouplingTensor c = rescale_to_trace(CouplingTensor(n_fermions, x), target_trace);
        std::copy(c.values().begin(), c.values().end(), x.begin());
    };
    m.log_weight = [n_fermions, scope](const std::vector<double>& x) {
        return syk_log_weight(build_hamiltonian(CouplingTensor(n_fermions, x)), scope);
    };
    return m;
}

bool metropolis_step(ChainState& s, const ChainModel& model, double beta_d) {
    std::vector<double> candidate = propose(s.couplings, s.sigma, s.rng);
    model.normalize(candidate);
    const double g = model.log_weight(candidate);
    const double u = s.rng.uniform();
    const bool accept = u < std::exp(beta_d * (g - s.log_weight));
    if (accept) {
        s.couplings = std::move(candidate);
        s.log_weight = g;
        ++s.window_accepts;
        ++s.total_accepts;
    }
    ++s.window_steps;
    ++s.steps;
    return accept;
}

void adapt_sigma(ChainState& s, const Schedule& schedule) {
    if (s.window_accepts > schedule.raise_above) {
        s.sigma *= schedule.factor;
    } else if (s.window_accepts < schedule.lower_below) {
        s.sigma /= schedule.factor;
    }
    s.window_accepts = 0;
    s.window_steps = 0;
}

// ------------------------------------------------------------------- driver

RunResult run_schedule(const EnsembleParams& params, const Schedule& schedule,
                       const RunOptions& options) {
    params.validate();
    schedule.validate();
    const int n = params.n_fermions;

    Checkpoint cp;
    bool resumed = false;
    if (options.resume && options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
        cp = deserialize(read_text_file(*options.checkpoint));
        if (cp.params.n_fermions != n || cp.params.j_scale != params.j_scale ||
            cp.params.seed != params.seed || cp.scope != options.scope || !(cp.schedule == schedule)) {
            throw ArgumentError("checkpoint was written for different parameters or schedule");
        }
        if (cp.state.couplings.size() != binomial(n, 4) || cp.initial.size() != binomial(n, 4)) {
            throw ArgumentError("checkpoint coupling count does not match N");
        }
        resumed = true;
    } else {
        CouplingTensor init = [&] {
            if (options.initial) {
                if (options.initial->fermions() != n) throw ArgumentError("initial couplings have the wrong N");
                return *options.initial;
            }
            Rng rng(params.seed, streams::target);
            return sample_couplings(params, rng);
        }();
        cp.params = params;
        cp.schedule = schedule;
        cp.scope = options.scope;
        cp.target_trace = hamiltonian_trace_square(init);
        if (!(cp.target_trace > 0)) throw DegenerateInputError("initial couplings are all zero");
        cp.initial.assign(init.values().begin(), init.values().end());
        cp.state.couplings = cp.initial;
        cp.state.sigma = schedule.sigma0;
        cp.state.rng = Rng(params.seed, streams::chain);
    }

    const ChainModel model = syk_chain_model(n, cp.target_trace, options.scope);
    if (!resumed) cp.state.log_weight = model.log_weight(cp.state.couplings);

    auto save = [&] {
        if (!options.checkpoint) return;
        try {
            write_atomically(*options.checkpoint, serialize(cp));
        } catch (const IoError& e) {
            throw IoError(fmt::format("{}; last durable checkpoint is the one before step {}",
                                      e.what(), cp.state.steps));
        }
    };

    RunResult result{CouplingTensor(n, cp.initial), CouplingTensor(n, cp.initial), cp.target_trace,
                     0, {}, cp.state, false};
    std::size_t stage_start = 0;
    bool stopped = false;
    for (const auto& stage : schedule.stages) {
        const std::size_t stage_end = stage_start + stage.steps;
        while (cp.state.steps < stage_end && !stopped) {
            if (options.stop_after && cp.state.steps >= *options.stop_after) {
                stopped = true;
                break;
            }
            if (metropolis_step(cp.state, model, stage.beta_d)) {
                cp.max_trace_drift =
                    std::max(cp.max_trace_drift, drift(cp.state.couplings, n, cp.target_trace));
            }
            if (cp.state.window_steps == schedule.window) {
                cp.trajectory.push_back({cp.state.steps, stage.beta_d,
                                         stage.beta_d * cp.state.log_weight, cp.state.sigma,
                                         static_cast<double>(cp.state.window_accepts) /
                                             static_cast<double>(schedule.window)});
                adapt_sigma(cp.state, schedule);
            }
            if (options.checkpoint_every > 0 && cp.state.steps % options.checkpoint_every == 0) save();
        }
        stage_start = stage_end;
        if (stopped) break;
    }
    save();

    result.final = CouplingTensor(n, cp.state.couplings);
    result.max_trace_drift = cp.max_trace_drift;
    result.trajectory = cp.trajectory;
    result.state = cp.state;
    result.completed = !stopped;
    return result;
}

std::string trajectory_csv(std::span<const TrajectoryRow> rows) {
    std::string out = "step,beta_D,f,sigma,accept_rate\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.step, format_double(r.beta_d), format_double(r.f),
                           format_double(r.sigma), format_double(r.accept_rate));
    }
    return out;
}

} // namespace syklab
