#include "harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "embounds/bounds.hpp"
#include "embounds/discrete_opt.hpp"
#include "embounds/scenario_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace embounds::tools {

namespace {

LogLevel log_threshold() {
    static const LogLevel level = [] {
        const char* env = std::getenv("EM_BOUNDS_LOG");
        if (!env) return LogLevel::info;
        const std::string v(env);
        if (v == "debug") return LogLevel::debug;
        if (v == "info") return LogLevel::info;
        if (v == "warn") return LogLevel::warn;
        if (v == "error") return LogLevel::error;
        std::cerr << "[warn] unknown EM_BOUNDS_LOG value '" << v
                  << "', using info\n";
        return LogLevel::info;
    }();
    return level;
}

const char* level_name(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
    }
    return "?";
}

std::mutex log_mutex;

const std::set<std::string> kBoundMethods = {
    "frob_sdr", "frob_ni", "frob_nio", "fid_sdr", "fid_bisection"};
const std::set<std::string> kOptimizerMethods = {"es", "cd", "ga", "p-sdr"};

bool is_fidelity_method(const std::string& m) {
    return m == "fid_sdr" || m == "fid_bisection";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

double parse_double_field(const std::string& s, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "results line " << line_no << ": bad numeric field '" << s << "'";
        throw ValidationError(os.str());
    }
}

}  // namespace

void log(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[" << level_name(level) << "] " << msg << "\n";
}

void SweepConfig::validate(const ScenarioModel& scenario) const {
    if (n_s_values.empty())
        throw ValidationError("config: n_s_values must not be empty");
    for (int v : n_s_values)
        if (v < 1 || v > scenario.n_s) {
            std::ostringstream os;
            os << "config: n_s value " << v
               << " outside the scenario's range [1, " << scenario.n_s << "]";
            throw ValidationError(os.str());
        }
    for (const auto& b : bounds)
        if (!kBoundMethods.count(b))
            throw ValidationError("config: unknown bound '" + b + "'");
    for (const auto& o : optimizers)
        if (!kOptimizerMethods.count(o))
            throw ValidationError("config: unknown optimizer '" + o + "'");

    const bool wants_fidelity =
        std::any_of(bounds.begin(), bounds.end(), is_fidelity_method) ||
        (!targets.empty() && !optimizers.empty());
    if (std::any_of(bounds.begin(), bounds.end(), is_fidelity_method) &&
        targets.empty())
        throw ValidationError(
            "config: fidelity bounds requested without any targets");
    if (wants_fidelity && !targets.empty() && scenario.n_r != scenario.n_t)
        throw ValidationError(
            "config: fidelity targets need a square channel (n_r == n_t)");

    const bool seeded = std::count(optimizers.begin(), optimizers.end(),
                                   std::string("cd")) ||
                        std::count(optimizers.begin(), optimizers.end(),
                                   std::string("ga"));
    if (seeded && seeds.empty())
        throw ValidationError(
            "config: cd/ga optimizers need at least one seed");
    if (std::count(optimizers.begin(), optimizers.end(), std::string("es"))) {
        const int top = *std::max_element(n_s_values.begin(), n_s_values.end());
        if (top > 20) {
            std::ostringstream os;
            os << "config: exhaustive search requested for n_s = " << top
               << "; the enumeration cap is 20";
            throw ValidationError(os.str());
        }
    }
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();

    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded())
        throw ValidationError("config file is not valid JSON");
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    if (j.value("version", 1) != kReportVersion)
        throw ValidationError("config: unsupported version");

    SweepConfig cfg;
    const fs::path base = fs::path(path).parent_path();
    if (j.contains("scenario_file")) {
        fs::path p = j.at("scenario_file").get<std::string>();
        if (p.is_relative()) p = base / p;
        cfg.scenario_file = p.string();
    }
    if (j.contains("spec"))
        cfg.inline_spec = spec_from_json_text(j.at("spec").dump());
    if (cfg.scenario_file.empty() == !cfg.inline_spec)
        throw ValidationError(
            "config: exactly one of 'scenario_file' or 'spec' is required");

    if (!j.contains("n_s_values") || !j.at("n_s_values").is_array())
        throw ValidationError("config: field 'n_s_values' must be an array");
    for (const auto& v : j.at("n_s_values"))
        cfg.n_s_values.push_back(v.get<int>());

    for (const auto& t : j.value("targets", json::array()))
        cfg.targets.push_back(target_kind_from_string(t.get<std::string>()));
    for (const auto& b : j.value("bounds", json::array()))
        cfg.bounds.push_back(b.get<std::string>());
    for (const auto& o : j.value("optimizers", json::array()))
        cfg.optimizers.push_back(o.get<std::string>());
    for (const auto& s : j.value("seeds", json::array()))
        cfg.seeds.push_back(s.get<std::uint64_t>());
    cfg.target_seed = j.value("target_seed", std::uint64_t{0});

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.solver.tol_feas = s.value("tol_feas", cfg.solver.tol_feas);
        cfg.solver.tol_gap = s.value("tol_gap", cfg.solver.tol_gap);
        cfg.solver.max_iterations =
            s.value("max_iterations", cfg.solver.max_iterations);
        cfg.solver.max_dim = s.value("max_dim", cfg.solver.max_dim);
    }
    return cfg;
}

std::string ResultRow::key() const {
    std::ostringstream os;
    os << scenario << "|" << n_s << "|" << target << "|" << seed << "|"
       << method;
    return os.str();
}

std::string ResultRow::to_csv() const {
    std::ostringstream os;
    os << kReportVersion << "," << scenario << "," << n_s << "," << objective
       << "," << target << "," << seed << "," << method << "," << status << ","
       << (value ? fmt_double(*value) : "") << ","
       << (raw_value ? fmt_double(*raw_value) : "") << ","
       << (sigma ? fmt_double(*sigma) : "") << ","
       << (eff_rank ? fmt_double(*eff_rank) : "") << ","
       << (evaluations >= 0 ? std::to_string(evaluations) : "") << ","
       << best_v << "," << fmt_double(wall_ms) << "," << sanitize(note);
    return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open results file '" + path + "'");
    std::vector<ResultRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kCsvHeader)
                throw ValidationError(
                    "results file has an unrecognized header; refusing to "
                    "resume against it");
            continue;
        }
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 16) {
            std::ostringstream os;
            os << "results line " << line_no << ": expected 16 fields, got "
               << f.size();
            throw ValidationError(os.str());
        }
        if (f[0] != std::to_string(kReportVersion)) {
            std::ostringstream os;
            os << "results line " << line_no << ": unsupported row version '"
               << f[0] << "'";
            throw ValidationError(os.str());
        }
        ResultRow r;
        r.scenario = f[1];
        r.n_s = static_cast<int>(parse_double_field(f[2], line_no));
        r.objective = f[3];
        r.target = f[4];
        r.seed = static_cast<std::uint64_t>(parse_double_field(f[5], line_no));
        r.method = f[6];
        r.status = f[7];
        if (!f[8].empty()) r.value = parse_double_field(f[8], line_no);
        if (!f[9].empty()) r.raw_value = parse_double_field(f[9], line_no);
        if (!f[10].empty()) r.sigma = parse_double_field(f[10], line_no);
        if (!f[11].empty()) r.eff_rank = parse_double_field(f[11], line_no);
        if (!f[12].empty())
            r.evaluations =
                static_cast<long long>(parse_double_field(f[12], line_no));
        r.best_v = f[13];
        if (!f[14].empty()) r.wall_ms = parse_double_field(f[14], line_no);
        r.note = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

int run_gen(const std::string& spec_path, const std::string& out_path,
            std::optional<std::uint64_t> seed_override) {
    ScenarioSpec spec = load_spec(spec_path);
    if (seed_override) spec.seed = *seed_override;
    const ScenarioModel model = generate(spec);
    save_scenario(model, out_path);
    const double s_norm = spectral_norm(model.assembled_scattering());
    const double g_norm = spectral_norm(model.gamma);
    std::cout << "wrote " << out_path << "\n"
              << "achieved scattering norm " << fmt_double(s_norm)
              << ", coupling norm " << fmt_double(g_norm) << "\n";
    return 0;
}

namespace {

struct Cell {
    int n_s = 0;
    std::string objective;
    std::string target;  // empty when objective == frobenius
    TargetKind target_kind = TargetKind::identity;
    std::uint64_t seed = 0;
    std::string method;
};

void fill_bound(ResultRow& row, const BoundResult& r) {
    row.status = r.valid ? "ok" : "invalid";
    row.value = r.value;
    row.raw_value = r.raw_value;
    row.sigma = r.sigma;
    row.eff_rank = r.eff_rank;
    row.evaluations = r.iterations;
    row.note = r.note;
}

void fill_opt(ResultRow& row, const OptResult& r) {
    row.status = "ok";
    row.value = r.value;
    row.evaluations = r.evaluations;
    row.best_v = r.best.to_string();
    row.note = r.note;
    if (r.fallback_used) {
        if (!row.note.empty()) row.note += "; ";
        row.note += "incremental updater rebuilt at least once";
    }
}

ResultRow compute_cell(const ScenarioModel& model, const Cell& cell,
                       const TransferMatrix* h_des, const SdpOptions& solver,
                       const std::string& hash) {
    ResultRow row;
    row.scenario = hash;
    row.n_s = cell.n_s;
    row.objective = cell.objective;
    row.target = cell.target;
    row.seed = cell.seed;
    row.method = cell.method;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const bool fid = cell.objective == "fidelity";
        auto objective = [&]() {
            return fid ? fidelity_objective(*h_des) : frobenius_objective();
        };
        if (cell.method == "frob_sdr") {
            fill_bound(row, frob_sdr_bound(model, solver));
        } else if (cell.method == "frob_ni") {
            fill_bound(row, frob_ni_bound(model));
        } else if (cell.method == "frob_nio") {
            fill_bound(row, frob_nio_bound(model));
        } else if (cell.method == "fid_sdr") {
            fill_bound(row, fid_sdr_bound(model, *h_des, solver));
        } else if (cell.method == "fid_bisection") {
            fill_bound(row, fid_bisection_bound(model, *h_des, solver));
        } else if (cell.method == "es") {
            fill_opt(row, exhaustive_search(model, objective()));
        } else if (cell.method == "cd") {
            fill_opt(row, coordinate_descent(model, objective(), cell.seed));
        } else if (cell.method == "ga") {
            fill_opt(row, genetic_algorithm(model, objective(), cell.seed));
        } else if (cell.method == "p-sdr") {
            const BoundResult b = fid ? fid_sdr_bound(model, *h_des, solver)
                                      : frob_sdr_bound(model, solver);
            if (!b.blocks)
                throw NumericalError(
                    "relaxation produced no solution blocks to round" +
                    (b.note.empty() ? std::string() : ": " + b.note));
            OptResult r = project_sdr(model, *b.blocks, objective());
            fill_opt(row, r);
            if (!b.valid) {
                if (!row.note.empty()) row.note += "; ";
                row.note += "rounded from a non-optimal relaxation";
            }
        } else {
            throw ValidationError("unknown method '" + cell.method + "'");
        }
    } catch (const std::exception& e) {
        row.status = "error";
        row.note = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

json row_to_json(const ResultRow& r) {
    json j;
    j["scenario"] = r.scenario;
    j["n_s"] = r.n_s;
    j["objective"] = r.objective;
    j["target"] = r.target;
    j["seed"] = r.seed;
    j["method"] = r.method;
    j["status"] = r.status;
    if (r.value) j["value"] = *r.value;
    if (r.raw_value) j["raw_value"] = *r.raw_value;
    if (r.sigma) j["sigma"] = *r.sigma;
    if (r.eff_rank) j["effective_rank"] = *r.eff_rank;
    if (r.evaluations >= 0) j["evaluations"] = r.evaluations;
    if (!r.best_v.empty()) j["best_v"] = r.best_v;
    j["wall_ms"] = r.wall_ms;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// group -> n_s -> method -> values; group is "" for frobenius, else target
using SeriesData =
    std::map<std::string, std::map<int, std::map<std::string, std::vector<double>>>>;

const std::vector<std::string> kMethodOrder = {
    "frob_sdr", "frob_ni", "frob_nio", "fid_sdr", "fid_bisection",
    "es",       "cd",      "ga",       "p-sdr"};

}  // namespace

int run_sweep(const std::string& config_path, const std::string& out_dir,
              const SweepFlags& flags) {
    SweepConfig cfg = load_sweep_config(config_path);
    if (flags.tol_feas) cfg.solver.tol_feas = *flags.tol_feas;
    if (flags.tol_gap) cfg.solver.tol_gap = *flags.tol_gap;
    if (flags.seed) cfg.seeds = {*flags.seed};

    const ScenarioModel scenario = cfg.inline_spec
                                       ? generate(*cfg.inline_spec)
                                       : load_scenario(cfg.scenario_file);
    cfg.validate(scenario);
    const std::string hash = scenario_hash(scenario);

    std::map<int, ScenarioModel> reduced;
    for (int k : cfg.n_s_values) {
        if (reduced.count(k)) continue;
        if (k == scenario.n_s) {
            reduced.emplace(k, scenario);
        } else {
            std::vector<int> used(static_cast<std::size_t>(k));
            std::iota(used.begin(), used.end(), 0);
            reduced.emplace(k, reduce_fixed(scenario, used));
        }
    }
    std::map<std::string, TransferMatrix> target_ops;
    for (TargetKind t : cfg.targets)
        target_ops.emplace(to_string(t),
                           target_operator(t, scenario.n_t, cfg.target_seed));

    std::vector<Cell> cells;
    auto add_cells = [&](int ns, const std::string& obj,
                         const std::string& tname, TargetKind tk) {
        const bool fid = obj == "fidelity";
        for (const auto& b : cfg.bounds) {
            if (is_fidelity_method(b) != fid) continue;
            cells.push_back({ns, obj, tname, tk, 0, b});
        }
        for (const auto& o : cfg.optimizers) {
            if (o == "cd" || o == "ga") {
                for (std::uint64_t s : cfg.seeds)
                    cells.push_back({ns, obj, tname, tk, s, o});
            } else {
                cells.push_back({ns, obj, tname, tk, 0, o});
            }
        }
    };
    for (int ns : cfg.n_s_values) {
        add_cells(ns, "frobenius", "", TargetKind::identity);
        for (TargetKind t : cfg.targets)
            add_cells(ns, "fidelity", to_string(t), t);
    }

    fs::create_directories(out_dir);
    const fs::path csv_path = fs::path(out_dir) / "results.csv";
    const fs::path json_path = fs::path(out_dir) / "report.json";

    std::vector<ResultRow> existing;
    if (fs::exists(csv_path)) existing = parse_results_csv(csv_path.string());
    std::set<std::string> done;
    for (const auto& r : existing) done.insert(r.key());

    std::vector<Cell> todo;
    int skipped = 0;
    for (const auto& c : cells) {
        ResultRow probe;
        probe.scenario = hash;
        probe.n_s = c.n_s;
        probe.target = c.target;
        probe.seed = c.seed;
        probe.method = c.method;
        if (done.count(probe.key())) {
            ++skipped;
        } else {
            todo.push_back(c);
        }
    }
    {
        std::ostringstream os;
        os << "sweep: " << cells.size() << " cells, " << skipped
           << " already present, " << todo.size() << " to compute";
        log(LogLevel::info, os.str());
    }

    const bool fresh_file = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv)
        throw ValidationError("cannot open '" + csv_path.string() +
                              "' for writing");
    if (fresh_file) csv << kCsvHeader << "\n" << std::flush;

    std::vector<ResultRow> fresh;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    int nthreads = flags.threads > 0
                       ? flags.threads
                       : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min<int>(nthreads,
                                         static_cast<int>(todo.size() ? todo.size() : 1)));

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const Cell& c = todo[i];
            const TransferMatrix* h_des =
                c.objective == "fidelity" ? &target_ops.at(c.target) : nullptr;
            ResultRow row =
                compute_cell(reduced.at(c.n_s), c, h_des, cfg.solver, hash);
            {
                std::lock_guard<std::mutex> lock(mu);
                csv << row.to_csv() << "\n" << std::flush;
                fresh.push_back(row);
                std::ostringstream os;
                os << "cell " << row.key() << " -> " << row.status << " ("
                   << fmt_double(row.wall_ms) << " ms)";
                log(row.status == "error" ? LogLevel::warn : LogLevel::debug,
                    os.str());
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<ResultRow> all = existing;
    all.insert(all.end(), fresh.begin(), fresh.end());

    int n_ok = 0, n_invalid = 0, n_error = 0;
    for (const auto& r : fresh) {
        if (r.status == "ok") ++n_ok;
        else if (r.status == "invalid") ++n_invalid;
        else ++n_error;
    }

    json report;
    report["version"] = kReportVersion;
    report["scenario"] = hash;
    if (!cfg.scenario_file.empty()) report["scenario_file"] = cfg.scenario_file;
    report["rows"] = json::array();
    for (const auto& r : all) report["rows"].push_back(row_to_json(r));

    // bound-to-best-optimizer ratios per slice, a quick tightness summary
    SeriesData data;
    for (const auto& r : all) {
        if (r.status != "ok" || !r.value || !std::isfinite(*r.value)) continue;
        data[r.target][r.n_s][r.method].push_back(*r.value);
    }
    json ratios = json::array();
    for (const auto& [group, by_ns] : data) {
        const std::string bound_m = group.empty() ? "frob_sdr" : "fid_sdr";
        for (const auto& [ns, by_method] : by_ns) {
            if (!by_method.count(bound_m)) continue;
            double best_opt = -1;
            for (const auto& o : kOptimizerMethods)
                if (by_method.count(o))
                    best_opt = std::max(best_opt, median(by_method.at(o)));
            if (best_opt <= 0) continue;
            json e;
            e["target"] = group;
            e["n_s"] = ns;
            e["ratio"] = median(by_method.at(bound_m)) / best_opt;
            ratios.push_back(e);
        }
    }
    report["bound_over_best_optimizer"] = ratios;

    std::ofstream jf(json_path);
    jf << report.dump(2) << "\n";

    std::cout << "computed " << fresh.size() << " cells (" << n_ok << " ok, "
              << n_invalid << " invalid, " << n_error << " failed), skipped "
              << skipped << " already-present cells\n"
              << "results: " << csv_path.string() << "\n"
              << "report:  " << json_path.string() << "\n";
    return n_error > 0 ? 2 : 0;
}

int run_plotdata(const std::string& report_dir) {
    const fs::path csv_path = fs::path(report_dir) / "results.csv";
    if (!fs::exists(csv_path))
        throw ValidationError("no results.csv in '" + report_dir + "'");
    const std::vector<ResultRow> rows = parse_results_csv(csv_path.string());

    SeriesData data;
    std::map<std::string, std::set<std::string>> methods_present;
    for (const auto& r : rows) {
        if (r.status != "ok" || !r.value || !std::isfinite(*r.value)) continue;
        const std::string group = r.objective == "fidelity" ? r.target : "";
        data[group][r.n_s][r.method].push_back(*r.value);
        methods_present[group].insert(r.method);
    }
    if (data.empty())
        throw ValidationError("report is empty: no usable rows to plot");

    std::vector<std::string> written;
    for (const auto& [group, by_ns] : data) {
        std::vector<std::string> cols;
        for (const auto& m : kMethodOrder)
            if (methods_present[group].count(m)) cols.push_back(m);

        const std::string name = group.empty()
                                     ? std::string("series_frobenius.csv")
                                     : "series_fidelity_" + group + ".csv";
        const fs::path out = fs::path(report_dir) / name;
        std::ofstream f(out);
        f << "n_s";
        for (const auto& c : cols) f << "," << c;
        f << "\n";
        for (const auto& [ns, by_method] : by_ns) {
            f << ns;
            for (const auto& c : cols) {
                f << ",";
                if (by_method.count(c)) f << fmt_double(median(by_method.at(c)));
            }
            f << "\n";
        }
        written.push_back(out.string());
    }
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
    return 0;
}

}  // namespace embounds::tools
