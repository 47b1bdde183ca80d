#include "willmore/experiments.hpp"

#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace willmore {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string lower(std::string s)
{
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

long long parse_integer(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + text + "'");
    }
    if (used != text.size()) throw ConfigError(key + ": not an integer: '" + text + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& text, int lo)
{
    const auto v = parse_integer(key, text);
    if (v < lo || v > std::numeric_limits<int>::max())
        throw ConfigError(key + ": " + text + " out of range (>= " + std::to_string(lo) + ")");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const auto t = lower(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key + ": not a boolean: '" + text + "'");
}

double parse_key_real(const std::string& key, const std::string& text)
{
    try {
        return parse_real(text);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

double positive(const std::string& key, double v)
{
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(key + ": must be positive and finite");
    return v;
}

Mesh stretched_z(const Mesh& mesh, double s)
{
    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    a(2, 2) = s;
    return transformed(mesh, a);
}

bool usable(FlowStatus s) { return s != FlowStatus::self_intersection && s != FlowStatus::approach_failed; }

struct Job {
    std::size_t row;
    int index;  // seed index within the row
};

struct RunOutcome {
    double willmore = 0;
    double iso = 0;
    int iterations = 0;
    FlowStatus status = FlowStatus::max_iters;
};

}  // namespace

double parse_real(const std::string& raw)
{
    auto text = lower(trim(raw));
    if (text.empty()) throw ConfigError("empty number");
    double factor = 1.0;
    if (text.size() >= 2 && text.compare(text.size() - 2, 2, "pi") == 0) {
        factor = kPi;
        text = trim(text.substr(0, text.size() - 2));
        if (!text.empty() && text.back() == '*') text = trim(text.substr(0, text.size() - 1));
        if (text.empty()) return kPi;
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + raw + "'");
    }
    if (used != text.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + raw + "'");
    return v * factor;
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ExperimentConfig::canonical() const
{
    std::ostringstream out;
    const auto& f = flow;
    out << "max_iterations = " << f.max_iterations << '\n'
        << "gradient_tolerance = " << fmt17(f.gradient_tolerance) << '\n'
        << "constraint_tolerance = " << fmt17(f.constraint_tolerance) << '\n'
        << "initial_step = " << (f.initial_step ? fmt17(*f.initial_step) : "auto") << '\n'
        << "backtracking_factor = " << fmt17(f.backtracking_factor) << '\n'
        << "sufficient_decrease = " << fmt17(f.sufficient_decrease) << '\n'
        << "restoration_max_iters = " << f.restoration_max_iters << '\n'
        << "remesh_every = " << f.remesh_every << '\n'
        << "normal_descent = " << (f.normal_descent ? "true" : "false") << '\n'
        << "intersection_check_every = " << f.intersection_check_every << '\n'
        << "max_backtracks = " << f.max_backtracks << '\n'
        << "max_approach_iterations = " << f.max_approach_iterations << '\n'
        << "lbfgs_memory = " << f.lbfgs_memory << '\n'
        << "preconditioner = " << to_string(f.preconditioner) << '\n'
        << "sobolev_shift = " << fmt17(f.sobolev_shift) << '\n'
        << "random_seed = " << f.random_seed << '\n'
        << "target_iso = " << (target_iso ? fmt17(*target_iso) : "none") << '\n'
        << "seeds = " << seeds << '\n'
        << "perturbation = " << fmt17(perturbation) << '\n'
        << "sphere_subdivisions = " << sphere_subdivisions << '\n'
        << "torus_resolution = " << torus_resolution << '\n'
        << "genus = " << genus << '\n'
        << "curve = " << curve_path << '\n'
        << "betas = " << beta_path << '\n'
        << "anchor_round_sphere = " << (anchor_round_sphere ? "true" : "false") << '\n';
    // threads not included
    return out.str();
}

std::string ExperimentConfig::hash() const
{
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical());
    return out.str();
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    auto& f = c.flow;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"max_iterations", [&](auto& k, auto& v) { f.max_iterations = parse_int(k, v, 0); }},
        {"gradient_tolerance", [&](auto& k, auto& v) { f.gradient_tolerance = positive(k, parse_key_real(k, v)); }},
        {"constraint_tolerance", [&](auto& k, auto& v) { f.constraint_tolerance = positive(k, parse_key_real(k, v)); }},
        {"initial_step",
         [&](auto& k, auto& v) {
             if (lower(v) == "auto") f.initial_step.reset();
             else f.initial_step = positive(k, parse_key_real(k, v));
         }},
        {"backtracking_factor", [&](auto& k, auto& v) { f.backtracking_factor = parse_key_real(k, v); }},
        {"sufficient_decrease", [&](auto& k, auto& v) { f.sufficient_decrease = parse_key_real(k, v); }},
        {"restoration_max_iters", [&](auto& k, auto& v) { f.restoration_max_iters = parse_int(k, v, 1); }},
        {"remesh_every", [&](auto& k, auto& v) { f.remesh_every = parse_int(k, v, 0); }},
        {"normal_descent", [&](auto& k, auto& v) { f.normal_descent = parse_bool(k, v); }},
        {"intersection_check_every", [&](auto& k, auto& v) { f.intersection_check_every = parse_int(k, v, 0); }},
        {"max_backtracks", [&](auto& k, auto& v) { f.max_backtracks = parse_int(k, v, 1); }},
        {"max_approach_iterations", [&](auto& k, auto& v) { f.max_approach_iterations = parse_int(k, v, 0); }},
        {"lbfgs_memory", [&](auto& k, auto& v) { f.lbfgs_memory = parse_int(k, v, 0); }},
        {"preconditioner",
         [&](auto& k, auto& v) {
             const auto t = lower(v);
             if (t == "none") f.preconditioner = Preconditioner::none;
             else if (t == "sobolev") f.preconditioner = Preconditioner::sobolev;
             else throw ConfigError(k + ": expected none or sobolev, got '" + v + "'");
         }},
        {"sobolev_shift", [&](auto& k, auto& v) { f.sobolev_shift = positive(k, parse_key_real(k, v)); }},
        {"random_seed",
         [&](auto& k, auto& v) {
             const auto s = parse_integer(k, v);
             if (s < 0) throw ConfigError(k + ": must be >= 0");
             f.random_seed = static_cast<std::uint64_t>(s);
         }},
        {"target_iso",
         [&](auto& k, auto& v) {
             if (lower(v) == "none") {
                 c.target_iso.reset();
                 return;
             }
             const double r = parse_key_real(k, v);
             if (!(r >= 36.0 * kPi * (1.0 - 0.02))) throw ConfigError(k + ": below 36 pi");
             c.target_iso = r;
         }},
        {"seeds", [&](auto& k, auto& v) { c.seeds = parse_int(k, v, 1); }},
        {"perturbation",
         [&](auto& k, auto& v) {
             c.perturbation = parse_key_real(k, v);
             if (!(c.perturbation >= 0 && c.perturbation < 0.5)) throw ConfigError(k + ": must be in [0, 0.5)");
         }},
        {"sphere_subdivisions",
         [&](auto& k, auto& v) {
             c.sphere_subdivisions = parse_int(k, v, 0);
             if (c.sphere_subdivisions > 7) throw ConfigError(k + ": must be <= 7");
         }},
        {"torus_resolution", [&](auto& k, auto& v) { c.torus_resolution = parse_int(k, v, 8); }},
        {"genus", [&](auto& k, auto& v) { c.genus = parse_int(k, v, 1); }},
        {"curve", [&](auto&, auto& v) { c.curve_path = v; }},
        {"betas", [&](auto&, auto& v) { c.beta_path = v; }},
        {"anchor_round_sphere", [&](auto& k, auto& v) { c.anchor_round_sphere = parse_bool(k, v); }},
        {"threads", [&](auto& k, auto& v) { c.threads = parse_int(k, v, 0); }},
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        it->second(key, value);
    }
    try {
        f.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    bool first_token = true;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (auto& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            if (first_token && (tok == "R" || tok == "r")) {
                first_token = false;
                continue;
            }
            first_token = false;
            const double r = parse_real(tok);
            if (!(r >= 36.0 * kPi * (1.0 - 0.02)))
                throw ConfigError("grid: R = " + fmt17(r) + " below 36 pi");
            if (!out.empty() && !(r > out.back())) throw ConfigError("grid: values must be strictly increasing");
            out.push_back(r);
        }
    }
    if (out.empty()) throw ConfigError("grid: no values");
    return out;
}

SweepStart schygulla_start(double r, int subdivisions, double perturbation, std::uint64_t seed)
{
    const Mesh base = icosphere(subdivisions);
    Mesh stretched = base;
    if (measure_constraints(base).iso() < r) {
        double lo = 1.0, hi = 2.0;
        while (measure_constraints(stretched_z(base, hi)).iso() < r) {
            hi *= 2.0;
            if (hi > 1e4) throw ConfigError("schygulla start: cannot stretch to R = " + fmt17(r));
        }
        for (int k = 0; k < 100 && hi - lo > 1e-14 * hi; ++k) {
            const double mid = 0.5 * (lo + hi);
            (measure_constraints(stretched_z(base, mid)).iso() < r ? lo : hi) = mid;
        }
        stretched = stretched_z(base, 0.5 * (lo + hi));
    }
    SweepStart s{stretched, targets_for_iso(stretched, r)};
    if (perturbation > 0) s.mesh = perturb(stretched, perturbation, seed);
    return s;
}

Mesh inverted_clifford(double distance, int resolution)
{
    auto spec = clifford_torus_spec(resolution, resolution);
    if (std::isinf(distance)) return torus(spec);
    if (!(distance > 0)) throw ConfigError("inversion distance must be positive");
    const double rr = spec.ring_radius, r = spec.tube_radius;
    spec.u_warp = distance / (2.0 * (rr + r) + distance);
    spec.v_warp = distance / (2.0 * r + distance);
    return sphere_inversion(torus(spec), {Vec3(rr + r + distance, 0, 0), 1.0});
}

double inversion_distance_for_iso(double r, int resolution)
{
    if (r >= measure_constraints(inverted_clifford(kInf, resolution)).iso()) return kInf;
    double lo = std::log(1e-3), hi = std::log(1e3);
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (measure_constraints(inverted_clifford(std::exp(mid), resolution)).iso() < r ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

std::string to_string(SweepMode mode) { return mode == SweepMode::schygulla ? "schygulla" : "ig_probe"; }

SweepMode sweep_mode_from_string(const std::string& text)
{
    if (text == "schygulla") return SweepMode::schygulla;
    if (text == "ig_probe") return SweepMode::ig_probe;
    throw ConfigError("unknown sweep mode '" + text + "' (schygulla or ig_probe)");
}

std::string SweepResult::csv_header() { return "R_target,R_achieved,W_min,threshold,admissible,seed,iterations,status"; }

std::string SweepResult::csv_body() const
{
    std::ostringstream out;
    out << csv_header() << '\n';
    for (const auto& row : rows)
        out << fmt17(row.r_target) << ',' << fmt17(row.r_achieved) << ',' << fmt17(row.w_min) << ','
            << fmt17(row.threshold) << ',' << (row.admissible ? "true" : "false") << ',' << row.seed << ','
            << row.iterations << ',' << to_string(row.status) << '\n';
    return out.str();
}

std::string SweepResult::to_csv() const
{
    return "# mode=" + to_string(mode) + " config_hash=" + config_hash + " timestamp=" + timestamp + '\n' + csv_body();
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SweepOutput run_sweep(SweepMode mode, const std::vector<double>& grid, const ExperimentConfig& config,
                      const std::optional<SchygullaCurve>& curve, const BetaTable& betas)
{
    if (grid.empty()) throw ConfigError("sweep: empty grid");
    try {
        config.flow.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::vector<double> thresholds(grid.size(), 8.0 * kPi);
    std::vector<double> distances(grid.size(), kInf);
    if (mode == SweepMode::ig_probe) {
        if (config.genus != 1)
            throw ConfigError("ig_probe: warm starts are tori, only genus = 1 is supported");
        if (!curve) throw ConfigError("ig_probe needs a Schygulla curve; run the schygulla sweep first and pass its curve");
        if (!betas.has(config.genus)) throw ConfigError("ig_probe: beta table has no entry for genus " + std::to_string(config.genus));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < 36.0 * kPi) throw ConfigError("ig_probe: R = " + fmt17(grid[i]) + " below 36 pi");
            if (grid[i] < curve->min_r() || grid[i] > curve->max_r())
                throw ConfigError("ig_probe: R = " + fmt17(grid[i]) + " outside the curve's range [" +
                                  fmt17(curve->min_r()) + ", " + fmt17(curve->max_r()) + "]");
            thresholds[i] = ig_threshold(grid[i], config.genus, betas, *curve).threshold;
            distances[i] = inversion_distance_for_iso(grid[i], config.torus_resolution);
        }
    }

    std::vector<Job> jobs;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (int k = 0; k < config.seeds; ++k) jobs.push_back({i, k});
    std::vector<RunOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

    const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        try {
            const auto [i, k] = jobs[j];
            const std::uint64_t seed = config.flow.random_seed + static_cast<std::uint64_t>(k);
            Mesh start = icosphere(0);
            ConstraintTargets targets{0, 0};
            if (mode == SweepMode::schygulla) {
                auto s = schygulla_start(grid[i], config.sphere_subdivisions, config.perturbation, seed);
                start = std::move(s.mesh);
                targets = s.targets;
            } else {
                const Mesh warm = inverted_clifford(distances[i], config.torus_resolution);
                targets = targets_for_iso(warm, grid[i]);
                start = (k == 0 || config.perturbation == 0) ? warm : perturb(warm, config.perturbation, seed);
            }
            FlowConfig fc = config.flow;
            fc.random_seed = seed;
            const auto run = run_flow(start, fc, targets);
            auto& o = outcomes[j];
            o.status = run.trace.status;
            o.iterations = run.trace.approach_iterations + static_cast<int>(run.trace.rows.size());
            o.willmore = willmore_energy(run.mesh);
            o.iso = measure_constraints(run.mesh).iso();
        } catch (...) {
            errors[j] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    SweepOutput out;
    out.result.mode = mode;
    out.result.config_hash = config.hash();
    out.result.timestamp = utc_timestamp();
    auto& log = out.result.log;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SweepRow row;
        row.r_target = grid[i];
        row.threshold = thresholds[i];
        row.w_min = std::numeric_limits<double>::quiet_NaN();
        row.r_achieved = std::numeric_limits<double>::quiet_NaN();
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].row != i) continue;
            if (!usable(outcomes[j].status)) {
                log.push_back("R=" + fmt17(grid[i]) + " seed " +
                              std::to_string(config.flow.random_seed + static_cast<std::uint64_t>(jobs[j].index)) +
                              " dropped: " + to_string(outcomes[j].status));
                continue;
            }
            if (!best || outcomes[j].willmore < outcomes[*best].willmore) best = j;
        }
        if (best) {
            const auto& o = outcomes[*best];
            row.w_min = o.willmore;
            row.r_achieved = o.iso;
            row.seed = config.flow.random_seed + static_cast<std::uint64_t>(jobs[*best].index);
            row.iterations = o.iterations;
            row.status = o.status;
            row.admissible = row.w_min < row.threshold;
        } else {
            // every run failed: report the first one
            for (std::size_t j = 0; j < jobs.size(); ++j)
                if (jobs[j].row == i) {
                    row.seed = config.flow.random_seed + static_cast<std::uint64_t>(jobs[j].index);
                    row.iterations = outcomes[j].iterations;
                    row.status = outcomes[j].status;
                    break;
                }
        }
        out.result.rows.push_back(row);
    }

    if (mode == SweepMode::schygulla) {
        std::vector<std::pair<double, double>> samples;
        for (const auto& row : out.result.rows) {
            if (std::isnan(row.w_min)) {
                log.push_back("curve: R=" + fmt17(row.r_target) + " excluded, no usable run");
            } else if (!(row.w_min < 8.0 * kPi)) {
                log.push_back("curve: R=" + fmt17(row.r_target) + " excluded, W=" + fmt17(row.w_min) + " >= 8 pi");
            } else if (!(row.w_min >= 4.0 * kPi * (1.0 - 0.02))) {
                log.push_back("curve: R=" + fmt17(row.r_target) + " excluded, W=" + fmt17(row.w_min) + " below 4 pi");
            } else if (config.anchor_round_sphere && row.r_target == 36.0 * kPi) {
                log.push_back("curve: R=36 pi sample replaced by the round-sphere anchor");
            } else if (row.r_target < 36.0 * kPi * (1.0 - 0.02)) {
                log.push_back("curve: R=" + fmt17(row.r_target) + " excluded, below 36 pi");
            } else {
                samples.emplace_back(row.r_target, row.w_min);
            }
        }
        if (!samples.empty() || config.anchor_round_sphere) {
            out.curve.emplace(samples, config.anchor_round_sphere);
            for (std::size_t idx : out.curve->monotone_violations()) {
                const auto& raw = out.curve->raw_samples()[idx];
                log.push_back("curve: R=" + fmt17(raw.first) + " W adjusted from " + fmt17(raw.second) + " to " +
                              fmt17(out.curve->samples()[idx].second) + " for monotonicity");
            }
        } else {
            log.push_back("curve: no usable samples, no curve written");
        }
    }
    return out;
}

}  // namespace willmore
