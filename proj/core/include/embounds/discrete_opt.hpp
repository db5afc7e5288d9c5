#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "embounds/common.hpp"
#include "embounds/scenario.hpp"
#include "embounds/sdp.hpp"

namespace embounds {

/// Figure of merit over transfer matrices; larger is better.
struct Objective {
    std::string name;
    std::function<double(const CMatrix&)> score;
};

Objective frobenius_objective();
Objective fidelity_objective(const TransferMatrix& h_des);

struct OptResult {
    ControlVector best;
    double value = 0.0;
    long long evaluations = 0;  ///< objective calls during the search
    int iterations = 0;         ///< commits (descent) or generations (GA)
    bool fallback_used = false; ///< incremental updater had to rebuild
    std::string note;
};

struct EsOptions {
    int max_ports = 20;  ///< refuse enumerations beyond 2^max_ports
};

/// Gray-code walk over every configuration; one single-port flip per step,
/// exactly 2^n_s objective evaluations. The reported best is re-evaluated
/// from scratch so accumulated update error cannot leak into the result.
OptResult exhaustive_search(const ScenarioModel& model, const Objective& obj,
                            const EsOptions& opts = {});

struct CdOptions {
    int init_samples = 100;  ///< random configurations scored to pick the start
};

/// Cyclic single-flip ascent from the best of `init_samples` random
/// configurations, keeping strictly improving flips; terminates after a full
/// cycle without improvement.
OptResult coordinate_descent(const ScenarioModel& model, const Objective& obj,
                             std::uint64_t seed, const CdOptions& opts = {});

struct GaOptions {
    int population = 200;
    int max_generations = 0;     ///< 0 means 100 * n_s
    int tournament = 3;
    double crossover_rate = 0.9;
    double mutation_rate = -1.0; ///< negative means 1 / n_s
    int elite = 2;
    int stall_limit = 50;        ///< generations without any improvement
    double improvement_tol = 1e-6;  ///< positive gain below this ends the run
};

OptResult genetic_algorithm(const ScenarioModel& model, const Objective& obj,
                            std::uint64_t seed, const GaOptions& opts = {});

/// Round a relaxation solution to a control vector: rebuild the response
/// block, then pick per port whichever load explains its row with smaller
/// residual. Ties (within 1e-12 relative) go to the first load. The result
/// carries the true objective value of the rounded configuration.
OptResult project_sdr(const ScenarioModel& model, const ComplexBlocks& blocks,
                      const Objective& obj);

}  // namespace embounds
