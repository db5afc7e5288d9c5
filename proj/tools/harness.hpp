#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embounds/scenario.hpp"
#include "embounds/scenario_gen.hpp"
#include "embounds/sdp.hpp"

namespace embounds::tools {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

// Threshold comes from EM_BOUNDS_LOG (debug|info|warn|error), default info.
void log(LogLevel level, const std::string& msg);

// One batch description: which scenario, which slice sizes, which targets,
// which bounds and optimizers, which seeds.
struct SweepConfig {
    std::string scenario_file;               // exclusive with inline_spec
    std::optional<ScenarioSpec> inline_spec;
    std::vector<int> n_s_values;
    std::vector<TargetKind> targets;
    std::vector<std::string> bounds;
    std::vector<std::string> optimizers;
    std::vector<std::uint64_t> seeds;
    std::uint64_t target_seed = 0;
    SdpOptions solver;

    void validate(const ScenarioModel& scenario) const;
};

SweepConfig load_sweep_config(const std::string& path);

inline constexpr int kReportVersion = 1;
inline constexpr const char* kCsvHeader =
    "version,scenario,n_s,objective,target,seed,method,status,value,"
    "raw_value,sigma,effective_rank,evaluations,best_v,wall_ms,note";

// One sweep cell outcome; maps 1:1 onto a CSV row.
struct ResultRow {
    std::string scenario;  // content hash of the unreduced scenario
    int n_s = 0;
    std::string objective;  // "frobenius" or "fidelity"
    std::string target;     // empty on frobenius rows
    std::uint64_t seed = 0;
    std::string method;
    std::string status;     // ok | invalid | error
    std::optional<double> value;
    std::optional<double> raw_value;
    std::optional<double> sigma;
    std::optional<double> eff_rank;
    long long evaluations = -1;  // negative = not applicable
    std::string best_v;
    double wall_ms = 0.0;
    std::string note;

    std::string key() const;  // resume identity: scenario|n_s|target|seed|method
    std::string to_csv() const;
};

std::vector<ResultRow> parse_results_csv(const std::string& path);

struct SweepFlags {
    int threads = 0;  // 0 = hardware concurrency
    std::optional<double> tol_feas;
    std::optional<double> tol_gap;
    std::optional<std::uint64_t> seed;  // replaces the config seed list
};

int run_gen(const std::string& spec_path, const std::string& out_path,
            std::optional<std::uint64_t> seed_override);
int run_sweep(const std::string& config_path, const std::string& out_dir,
              const SweepFlags& flags);
int run_plotdata(const std::string& report_dir);

}  // namespace embounds::tools
