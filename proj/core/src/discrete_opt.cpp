#include "embounds/discrete_opt.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "embounds/flip_evaluator.hpp"
#include "embounds/rng.hpp"

namespace embounds {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Objective frobenius_objective() {
    Objective obj;
    obj.name = "total transfer power";
    obj.score = [](const CMatrix& h) { return h.squaredNorm(); };
    return obj;
}

Objective fidelity_objective(const TransferMatrix& h_des) {
    if (h_des.h.norm() <= 0.0)
        throw ValidationError("target matrix must be nonzero");
    Objective obj;
    obj.name = "target fidelity";
    obj.score = [target = h_des](const CMatrix& h) {
        if (h.norm() <= 0.0) return 0.0;
        return fidelity(TransferMatrix{h}, target);
    };
    return obj;
}

OptResult exhaustive_search(const ScenarioModel& model, const Objective& obj,
                            const EsOptions& opts) {
    model.validate();
    if (model.n_s > opts.max_ports) {
        std::ostringstream os;
        os << "enumeration over " << model.n_s
           << " ports exceeds the configured cap of " << opts.max_ports;
        throw ValidationError(os.str());
    }

    OptResult res;
    ControlVector cur = ControlVector::zeros(model.n_s);
    FlipEvaluator ev(model, encode(cur, model));
    res.best = cur;
    res.value = obj.score(ev.h());
    res.evaluations = 1;

    const std::uint64_t total = std::uint64_t{1} << model.n_s;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int i = std::countr_zero(k);
        ev.commit(i);
        cur.bits[static_cast<std::size_t>(i)] ^= 1;
        const double val = obj.score(ev.h());
        ++res.evaluations;
        if (val > res.value) {
            res.value = val;
            res.best = cur;
        }
    }

    res.iterations = static_cast<int>(ev.commits() > 0x7fffffff
                                          ? 0x7fffffff
                                          : ev.commits());
    res.fallback_used = ev.fallback_used();
    // drift guard: score the winner from a fresh solve
    res.value = obj.score(transfer(model, encode(res.best, model)).h);
    return res;
}

OptResult coordinate_descent(const ScenarioModel& model, const Objective& obj,
                             std::uint64_t seed, const CdOptions& opts) {
    model.validate();
    if (opts.init_samples < 1)
        throw ValidationError("descent needs at least one initial sample");

    Rng rng(seed);
    OptResult res;

    // Seed the walk with the best of a batch of random configurations.
    ControlVector v;
    double init_val = kNegInf;
    int failed_inits = 0;
    for (int k = 0; k < opts.init_samples; ++k) {
        ControlVector cand = ControlVector::zeros(model.n_s);
        for (int i = 0; i < model.n_s; ++i)
            cand.bits[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.integer(2));
        try {
            const double val =
                obj.score(transfer(model, encode(cand, model)).h);
            ++res.evaluations;
            if (val > init_val) {
                init_val = val;
                v = cand;
            }
        } catch (const NumericalError&) {
            ++failed_inits;
        }
    }
    if (!(init_val > kNegInf))
        throw NumericalError(
            "every initial sample hit a resonant configuration; descent "
            "cannot proceed");
    if (failed_inits > 0) {
        std::ostringstream os;
        os << failed_inits << " of " << opts.init_samples
           << " initial samples hit resonant configurations and were skipped";
        res.note = os.str();
    }

    FlipEvaluator ev(model, encode(v, model));
    double val = obj.score(ev.h());
    ++res.evaluations;
    int commits = 0;
    int since = 0, i = 0;
    while (since < model.n_s && model.n_s > 0) {
        const double cand = obj.score(ev.flipped_h(i));
        ++res.evaluations;
        if (cand > val) {
            ev.commit(i);
            v.bits[static_cast<std::size_t>(i)] ^= 1;
            val = cand;
            since = 0;
            ++commits;
        } else {
            ++since;
        }
        i = (i + 1) % model.n_s;
    }
    res.fallback_used = ev.fallback_used();
    res.best = v;
    res.iterations = commits;
    res.value = obj.score(transfer(model, encode(res.best, model)).h);
    return res;
}

OptResult genetic_algorithm(const ScenarioModel& model, const Objective& obj,
                            std::uint64_t seed, const GaOptions& opts) {
    model.validate();
    if (opts.population < 2 || opts.elite < 0 ||
        opts.elite >= opts.population || opts.tournament < 1)
        throw ValidationError("population settings are inconsistent");

    const int n = model.n_s;
    const int max_gen =
        opts.max_generations > 0 ? opts.max_generations : 100 * std::max(1, n);
    const double mut =
        opts.mutation_rate >= 0 ? opts.mutation_rate : 1.0 / std::max(1, n);

    Rng rng(seed);
    OptResult res;

    auto safe_score = [&](const ControlVector& v) -> double {
        try {
            return obj.score(transfer(model, encode(v, model)).h);
        } catch (const NumericalError&) {
            return kNegInf;
        }
    };

    std::vector<ControlVector> pop(static_cast<std::size_t>(opts.population));
    std::vector<double> fit(pop.size());
    for (auto& v : pop) {
        v = ControlVector::zeros(n);
        for (int i = 0; i < n; ++i)
            v.bits[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.integer(2));
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
        fit[i] = safe_score(pop[i]);
        ++res.evaluations;
    }

    auto best_index = [&]() {
        return static_cast<std::size_t>(
            std::max_element(fit.begin(), fit.end()) - fit.begin());
    };
    std::size_t bi = best_index();
    res.best = pop[bi];
    res.value = fit[bi];

    auto tournament = [&]() -> const ControlVector& {
        std::size_t winner = static_cast<std::size_t>(rng.integer(
            static_cast<std::uint64_t>(pop.size())));
        for (int t = 1; t < opts.tournament; ++t) {
            const std::size_t c = static_cast<std::size_t>(
                rng.integer(static_cast<std::uint64_t>(pop.size())));
            if (fit[c] > fit[winner]) winner = c;
        }
        return pop[winner];
    };

    int stall = 0;
    int gen = 0;
    for (gen = 1; gen <= max_gen; ++gen) {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(),
                          order.begin() + std::min<std::size_t>(
                                              pop.size(),
                                              static_cast<std::size_t>(
                                                  opts.elite)),
                          order.end(), [&](std::size_t a, std::size_t b) {
                              return fit[a] > fit[b];
                          });

        std::vector<ControlVector> next;
        next.reserve(pop.size());
        for (int e = 0; e < opts.elite; ++e)
            next.push_back(pop[order[static_cast<std::size_t>(e)]]);
        while (next.size() < pop.size()) {
            ControlVector child = tournament();
            if (rng.uniform() < opts.crossover_rate) {
                const ControlVector& other = tournament();
                for (int i = 0; i < n; ++i)
                    if (rng.bernoulli(0.5))
                        child.bits[static_cast<std::size_t>(i)] =
                            other.bits[static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < n; ++i)
                if (rng.uniform() < mut)
                    child.bits[static_cast<std::size_t>(i)] ^= 1;
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            fit[i] = safe_score(pop[i]);
            ++res.evaluations;
        }
        bi = best_index();
        const double improvement = fit[bi] - res.value;
        if (improvement > 0) {
            res.best = pop[bi];
            res.value = fit[bi];
            if (improvement < opts.improvement_tol) break;
            stall = 0;
        } else if (++stall >= opts.stall_limit) {
            break;
        }
    }

    res.iterations = std::min(gen, max_gen);
    if (!(res.value > kNegInf))
        throw NumericalError(
            "every sampled configuration is resonant; search cannot proceed");
    return res;
}

OptResult project_sdr(const ScenarioModel& model, const ComplexBlocks& blocks,
                      const Objective& obj) {
    model.validate();
    if (blocks.sigma <= 0.0)
        throw NumericalError("relaxation corner is nonpositive; nothing to "
                             "round");
    if (blocks.y_vec.size() != model.n_s * model.n_t)
        throw DimensionError("relaxation vector does not match the layout");

    const CMatrix x = Eigen::Map<const CMatrix>(blocks.y_vec.data(), model.n_s,
                                                model.n_t) /
                      blocks.sigma;
    const CMatrix z = model.b + model.gamma * x;

    ControlVector v = ControlVector::zeros(model.n_s);
    for (int s = 0; s < model.n_s; ++s) {
        const double r_alpha =
            (x.row(s) - model.alpha * z.row(s)).norm();
        const double r_beta =
            (x.row(s) - model.beta * z.row(s)).norm();
        const double scale = 1.0 + std::max(r_alpha, r_beta);
        if (r_beta < r_alpha && r_alpha - r_beta > 1e-12 * scale)
            v.bits[static_cast<std::size_t>(s)] = 1;
    }

    OptResult res;
    res.best = std::move(v);
    res.value = obj.score(transfer(model, encode(res.best, model)).h);
    res.evaluations = 1;
    return res;
}

}  // namespace embounds
