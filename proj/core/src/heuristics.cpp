#include "cqns/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cqns/error.hpp"
#include "cqns/rng.hpp"

namespace cqns {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BudgetMeter {
    std::chrono::steady_clock::time_point start;
    double max_seconds;
    std::optional<std::uint64_t> max_evaluations;
    std::uint64_t evaluations = 0;

    explicit BudgetMeter(const SolverBudget& b)
        : start(std::chrono::steady_clock::now()),
          max_seconds(b.max_seconds),
          max_evaluations(b.max_evaluations) {
        if (!(b.max_seconds > 0.0))
            raise(ErrorCode::InvalidArgument, "budget max_seconds must be positive");
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    // The evaluation cap is the reproducible contract; the wall clock is a
    // safety net for open-ended runs.
    bool exhausted() const {
        if (max_evaluations && evaluations >= *max_evaluations) return true;
        return elapsed() >= max_seconds;
    }
};

// Scores like cqns_final but maps the negative-mean / fractional-power
// domain error to +inf so samplers can treat such subsets as maximally
// unattractive instead of aborting the run.
double guarded_cqns(const Universe& u, const Portfolio& p, CqnsPower w) {
    double mean = portfolio_mean(u, p);
    bool integer_power = std::isfinite(w.w) && w.w == std::floor(w.w);
    if (mean < 0.0 && !integer_power) return kInf;
    return cqns_final(u, p, w);
}

std::optional<double> trace_sharpe(const Universe& u, const Portfolio& p) {
    double var = portfolio_variance(u, p);
    if (!(var > 0.0)) return std::nullopt;
    return portfolio_mean(u, p) / std::sqrt(var);
}

void record(ScoreTrace* trace, const Universe& u, const Portfolio& p, double score) {
    if (!trace) return;
    trace->push_back(
        {score, std::isfinite(score) ? trace_sharpe(u, p) : std::nullopt, p.cardinality()});
}

// Uniform k-subset via partial Fisher-Yates over a scratch index vector.
Portfolio draw_k_subset(std::size_t n, std::size_t k, Rng& rng, std::vector<std::size_t>& scratch) {
    scratch.resize(n);
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
    Portfolio p(n);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(scratch[i], scratch[pick(rng)]);
        p.set(scratch[i]);
    }
    return p;
}

struct BestSeen {
    Portfolio selection;
    double score = kInf;
    bool valid = false;

    void consider(const Portfolio& p, double s) {
        if (!std::isfinite(s)) return;
        if (!valid || more_attractive(s, score)) {
            selection = p;
            score = s;
            valid = true;
        }
    }
};

// Membership bookkeeping for swap moves: selected / unselected index lists
// with O(1) random pick and O(1) swap.
struct SwapState {
    std::vector<std::size_t> selected;
    std::vector<std::size_t> unselected;
    std::vector<std::size_t> position;  // index into the list currently holding i
    std::vector<char> in;               // 1 if selected

    void reset(const Portfolio& p) {
        std::size_t n = p.size();
        selected.clear();
        unselected.clear();
        position.assign(n, 0);
        in.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (p.test(i)) {
                position[i] = selected.size();
                selected.push_back(i);
                in[i] = 1;
            } else {
                position[i] = unselected.size();
                unselected.push_back(i);
            }
        }
    }

    // Exchange membership of a selected index and an unselected index.
    void swap_members(std::size_t sel_slot, std::size_t unsel_slot) {
        std::size_t out_idx = selected[sel_slot];
        std::size_t in_idx = unselected[unsel_slot];
        selected[sel_slot] = in_idx;
        unselected[unsel_slot] = out_idx;
        position[in_idx] = sel_slot;
        position[out_idx] = unsel_slot;
        in[in_idx] = 1;
        in[out_idx] = 0;
    }
};

Portfolio portfolio_of(std::size_t n, const std::vector<std::size_t>& selected) {
    return Portfolio::from_indices(n, selected);
}

}  // namespace

SolutionPool::SolutionPool(std::size_t universe_size, std::optional<std::size_t> capacity)
    : n_(universe_size), capacity_(capacity) {
    if (capacity_ && *capacity_ == 0)
        raise(ErrorCode::InvalidArgument, "pool capacity must be positive when set");
}

SolutionPool::SolutionPool(const SolutionPool& other) {
    std::lock_guard<std::mutex> lock(other.mutex_);
    n_ = other.n_;
    capacity_ = other.capacity_;
    entries_ = other.entries_;
    next_sequence_ = other.next_sequence_;
}

SolutionPool& SolutionPool::operator=(const SolutionPool& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    n_ = other.n_;
    capacity_ = other.capacity_;
    entries_ = other.entries_;
    next_sequence_ = other.next_sequence_;
    return *this;
}

SolutionPool::SolutionPool(SolutionPool&& other) noexcept {
    std::lock_guard<std::mutex> lock(other.mutex_);
    n_ = other.n_;
    capacity_ = other.capacity_;
    entries_ = std::move(other.entries_);
    next_sequence_ = other.next_sequence_;
}

SolutionPool& SolutionPool::operator=(SolutionPool&& other) noexcept {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    n_ = other.n_;
    capacity_ = other.capacity_;
    entries_ = std::move(other.entries_);
    next_sequence_ = other.next_sequence_;
    return *this;
}

bool SolutionPool::store(const Portfolio& selection, double score, const std::string& source) {
    if (selection.size() != n_)
        raise(ErrorCode::UniverseMismatch,
              "selection is over " + std::to_string(selection.size()) +
                  " assets, pool expects " + std::to_string(n_));
    if (!std::isfinite(score))
        raise(ErrorCode::InvalidEntry, "pool scores must be finite");
    for (const PoolEntry& e : entries_)
        if (e.selection == selection) return false;  // first-seen entry wins
    entries_.push_back({selection, score, source, next_sequence_++});
    if (capacity_ && entries_.size() > *capacity_) {
        // Evict the worst entry; among equals the most recent goes first.
        auto worst = std::max_element(entries_.begin(), entries_.end(),
                                      [](const PoolEntry& a, const PoolEntry& b) {
                                          if (a.score != b.score) return a.score < b.score;
                                          return a.sequence < b.sequence;
                                      });
        bool evicted_new = worst->sequence == entries_.back().sequence;
        entries_.erase(worst);
        return !evicted_new;
    }
    return true;
}

bool SolutionPool::offer(const Portfolio& selection, double score, const std::string& source) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!entries_.empty()) {
        double best_score = entries_.front().score;
        for (const PoolEntry& e : entries_) best_score = std::min(best_score, e.score);
        if (!more_attractive(score, best_score)) return false;
    }
    return store(selection, score, source);
}

bool SolutionPool::insert(const Portfolio& selection, double score, const std::string& source) {
    std::lock_guard<std::mutex> lock(mutex_);
    return store(selection, score, source);
}

bool SolutionPool::contains(const Portfolio& selection) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const PoolEntry& e : entries_)
        if (e.selection == selection) return true;
    return false;
}

std::optional<PoolEntry> SolutionPool::best() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.empty()) return std::nullopt;
    const PoolEntry* best = &entries_.front();
    for (const PoolEntry& e : entries_) {
        if (more_attractive(e.score, best->score)) best = &e;
    }
    return *best;
}

std::size_t SolutionPool::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::vector<PoolEntry> SolutionPool::entries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_;
}

std::vector<PoolEntry> SolutionPool::ranked() const {
    std::vector<PoolEntry> out = entries();
    std::stable_sort(out.begin(), out.end(),
                     [](const PoolEntry& a, const PoolEntry& b) { return a.score < b.score; });
    return out;
}

std::string SolutionPool::to_jsonl() const {
    std::string out;
    for (const PoolEntry& e : ranked()) {
        nlohmann::json j;
        j["selection"] = e.selection.to_hex();
        j["score"] = e.score;
        j["source"] = e.source;
        j["k"] = e.selection.cardinality();
        out += j.dump();
        out += '\n';
    }
    return out;
}

SolutionPool SolutionPool::from_jsonl(std::size_t universe_size, const std::string& text) {
    SolutionPool pool(universe_size);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::InvalidEntry,
                  "pool line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("selection") || !j.contains("score") ||
            !j.contains("source") || !j["selection"].is_string() || !j["score"].is_number() ||
            !j["source"].is_string())
            raise(ErrorCode::InvalidEntry,
                  "pool line " + std::to_string(line_no) + ": malformed entry");
        Portfolio p = Portfolio::from_hex(universe_size, j["selection"].get<std::string>());
        if (j.contains("k") && j["k"].get<std::size_t>() != p.cardinality())
            raise(ErrorCode::InvalidEntry,
                  "pool line " + std::to_string(line_no) + ": k does not match selection");
        pool.insert(p, j["score"].get<double>(), j["source"].get<std::string>());
    }
    return pool;
}

SolutionPool pool_merge(const std::vector<SolutionPool>& pools) {
    if (pools.empty()) return SolutionPool();
    std::size_t n = pools.front().universe_size();
    for (const SolutionPool& p : pools)
        if (p.universe_size() != n)
            raise(ErrorCode::UniverseMismatch, "pools span different universe sizes");

    std::vector<PoolEntry> all;
    for (const SolutionPool& p : pools) {
        std::vector<PoolEntry> snap = p.entries();
        all.insert(all.end(), snap.begin(), snap.end());
    }
    // Stable sort keeps the traversal order among equal scores, so the
    // first-seen entry also wins the tie for rank.
    std::stable_sort(all.begin(), all.end(),
                     [](const PoolEntry& a, const PoolEntry& b) { return a.score < b.score; });
    SolutionPool out(n);
    for (const PoolEntry& e : all) out.insert(e.selection, e.score, e.source);
    return out;
}

SolutionPool monte_carlo(const Universe& u, CqnsPower w, const McConfig& mode,
                         const SolverBudget& budget, ScoreTrace* trace) {
    std::size_t n = u.size();
    if (mode.mode == McMode::fixed_k && (mode.k < 1 || mode.k > n))
        raise(ErrorCode::InvalidK,
              "fixed_k requires 1 <= k <= " + std::to_string(n) + ", got " +
                  std::to_string(mode.k));

    Rng rng(derive_seed(budget.seed, "mc"));
    BudgetMeter meter(budget);
    SolutionPool pool(n);
    BestSeen best;
    std::vector<std::size_t> scratch;
    std::bernoulli_distribution coin(0.5);

    // Empty Bernoulli draws are skipped without consuming evaluations; cap
    // total attempts so a pathological stream cannot spin forever.
    std::uint64_t attempts = 0;
    std::uint64_t attempt_cap = meter.max_evaluations
                                    ? 10000 + 100 * *meter.max_evaluations
                                    : std::numeric_limits<std::uint64_t>::max();

    while (!meter.exhausted() && attempts < attempt_cap) {
        ++attempts;
        Portfolio p(n);
        if (mode.mode == McMode::around_half) {
            for (std::size_t i = 0; i < n; ++i)
                if (coin(rng)) p.set(i);
            if (p.cardinality() == 0) continue;
        } else {
            p = draw_k_subset(n, mode.k, rng, scratch);
        }
        double s = guarded_cqns(u, p, w);
        ++meter.evaluations;
        record(trace, u, p, s);
        if (std::isfinite(s)) pool.offer(p, s, "mc");
        best.consider(p, s);
    }
    if (best.valid) pool.insert(best.selection, best.score, "mc");
    if (meter.evaluations == 0)
        std::cerr << "warning: monte_carlo produced no scorable samples within budget\n";
    return pool;
}

SolutionPool simulated_annealing(const Universe& u, CqnsPower w, std::size_t k,
                                 const SaSchedule& schedule, const SolverBudget& budget,
                                 ScoreTrace* trace) {
    std::size_t n = u.size();
    if (k < 1 || k > n)
        raise(ErrorCode::InvalidK,
              "simulated annealing requires 1 <= k <= " + std::to_string(n) + ", got " +
                  std::to_string(k));
    if (!(schedule.cooling_ratio > 0.0) || schedule.cooling_ratio > 1.0)
        raise(ErrorCode::InvalidArgument, "cooling ratio must lie in (0, 1]");

    Rng rng(derive_seed(budget.seed, "sa"));
    BudgetMeter meter(budget);
    SolutionPool pool(n);
    BestSeen best;
    std::vector<std::size_t> scratch;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto sample = [&](const Portfolio& p) {
        double s = guarded_cqns(u, p, w);
        ++meter.evaluations;
        record(trace, u, p, s);
        if (std::isfinite(s)) pool.offer(p, s, "sa");
        best.consider(p, s);
        return s;
    };

    // Initial temperature from the spread of the objective over random
    // k-subsets; those probes count against the budget and feed the pool.
    double t = 0.0;
    if (schedule.initial_temperature) {
        t = *schedule.initial_temperature;
        if (t < 0.0) raise(ErrorCode::InvalidArgument, "initial temperature must be >= 0");
    } else {
        std::vector<double> probes;
        probes.reserve(schedule.calibration_samples);
        for (std::size_t i = 0; i < schedule.calibration_samples && !meter.exhausted(); ++i) {
            double s = sample(draw_k_subset(n, k, rng, scratch));
            if (std::isfinite(s)) probes.push_back(s);
        }
        if (probes.size() >= 2) {
            double mean = std::accumulate(probes.begin(), probes.end(), 0.0) /
                          static_cast<double>(probes.size());
            double ss = 0.0;
            for (double s : probes) ss += (s - mean) * (s - mean);
            t = std::sqrt(ss / static_cast<double>(probes.size() - 1));
        }
    }

    if (meter.exhausted()) {
        if (best.valid) pool.insert(best.selection, best.score, "sa");
        return pool;
    }

    Portfolio current = draw_k_subset(n, k, rng, scratch);
    double current_score = sample(current);
    SwapState state;
    state.reset(current);

    // k == n leaves no swap move; the lone feasible state is already scored.
    while (k < n && !meter.exhausted()) {
        std::uniform_int_distribution<std::size_t> pick_sel(0, state.selected.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_unsel(0, state.unselected.size() - 1);
        std::size_t sel_slot = pick_sel(rng);
        std::size_t unsel_slot = pick_unsel(rng);

        Portfolio proposal = current;
        proposal.flip(state.selected[sel_slot]);
        proposal.flip(state.unselected[unsel_slot]);
        double proposal_score = sample(proposal);

        double delta = proposal_score - current_score;
        bool accept;
        if (delta < 0.0) {
            accept = true;
        } else if (t > 0.0) {
            accept = unit(rng) < std::exp(-delta / t);
        } else {
            accept = false;
        }
        if (accept) {
            state.swap_members(sel_slot, unsel_slot);
            current = proposal;
            current_score = proposal_score;
        }
        t *= schedule.cooling_ratio;
    }

    if (best.valid) pool.insert(best.selection, best.score, "sa");
    return pool;
}

SolutionPool genetic(const Universe& u, CqnsPower w, std::size_t k, const GaConfig& cfg,
                     const SolverBudget& budget, ScoreTrace* trace) {
    std::size_t n = u.size();
    if (k < 1 || k > n)
        raise(ErrorCode::InvalidK,
              "genetic search requires 1 <= k <= " + std::to_string(n) + ", got " +
                  std::to_string(k));
    if (cfg.population_size < 2)
        raise(ErrorCode::InvalidArgument, "population_size must be at least 2");
    if (cfg.elitism_count >= cfg.population_size)
        raise(ErrorCode::InvalidArgument, "elitism_count must be smaller than population_size");
    if (cfg.crossover_rate < 0.0 || cfg.crossover_rate > 1.0 || cfg.mutation_rate < 0.0 ||
        cfg.mutation_rate > 1.0)
        raise(ErrorCode::InvalidArgument, "rates must lie in [0, 1]");
    for (const Portfolio& seed : cfg.seeds)
        if (seed.size() != n)
            raise(ErrorCode::SeedDimensionMismatch,
                  "seed is over " + std::to_string(seed.size()) + " assets, universe has " +
                      std::to_string(n));

    Rng rng(derive_seed(budget.seed, "ga"));
    BudgetMeter meter(budget);
    SolutionPool pool(n);
    BestSeen best;
    std::vector<std::size_t> scratch;

    auto evaluate = [&](const Portfolio& p) {
        double s = guarded_cqns(u, p, w);
        ++meter.evaluations;
        record(trace, u, p, s);
        if (std::isfinite(s)) pool.offer(p, s, "ga");
        best.consider(p, s);
        return s;
    };

    // Random add/drop repair keeps every individual on the k-subset slice.
    auto repair = [&](Portfolio p) {
        SwapState state;
        state.reset(p);
        while (state.selected.size() > k) {
            std::uniform_int_distribution<std::size_t> pick(0, state.selected.size() - 1);
            std::size_t slot = pick(rng);
            std::size_t idx = state.selected[slot];
            p.set(idx, false);
            state.selected[slot] = state.selected.back();
            state.position[state.selected[slot]] = slot;
            state.selected.pop_back();
            state.position[idx] = state.unselected.size();
            state.unselected.push_back(idx);
            state.in[idx] = 0;
        }
        while (state.selected.size() < k) {
            std::uniform_int_distribution<std::size_t> pick(0, state.unselected.size() - 1);
            std::size_t slot = pick(rng);
            std::size_t idx = state.unselected[slot];
            p.set(idx, true);
            state.unselected[slot] = state.unselected.back();
            state.position[state.unselected[slot]] = slot;
            state.unselected.pop_back();
            state.position[idx] = state.selected.size();
            state.selected.push_back(idx);
            state.in[idx] = 1;
        }
        return p;
    };

    auto mutate = [&](Portfolio p) {
        SwapState state;
        state.reset(p);
        if (state.unselected.empty()) return p;
        std::bernoulli_distribution flip(cfg.mutation_rate);
        for (std::size_t slot = 0; slot < state.selected.size(); ++slot) {
            if (!flip(rng)) continue;
            std::uniform_int_distribution<std::size_t> pick(0, state.unselected.size() - 1);
            std::size_t unsel_slot = pick(rng);
            p.flip(state.selected[slot]);
            p.flip(state.unselected[unsel_slot]);
            state.swap_members(slot, unsel_slot);
        }
        return p;
    };

    struct Individual {
        Portfolio genome;
        double score;
    };
    std::vector<Individual> population;
    population.reserve(cfg.population_size);

    // Seeds enter first (deduplicated after repair), best-ranked, then the
    // population is topped up with random k-subsets.
    std::vector<Individual> seeded;
    for (const Portfolio& s : cfg.seeds) {
        if (meter.exhausted()) break;
        Portfolio repaired = repair(s);
        bool dup = false;
        for (const Individual& ind : seeded)
            if (ind.genome == repaired) {
                dup = true;
                break;
            }
        if (dup) continue;
        seeded.push_back({repaired, evaluate(repaired)});
    }
    std::stable_sort(seeded.begin(), seeded.end(),
                     [](const Individual& a, const Individual& b) { return a.score < b.score; });
    if (seeded.size() > cfg.population_size) seeded.resize(cfg.population_size);
    population = std::move(seeded);
    while (population.size() < cfg.population_size && !meter.exhausted()) {
        Portfolio p = draw_k_subset(n, k, rng, scratch);
        population.push_back({p, evaluate(p)});
    }

    std::bernoulli_distribution cross_coin(cfg.crossover_rate);
    std::bernoulli_distribution half(0.5);

    auto tournament = [&]() -> const Individual& {
        std::uniform_int_distribution<std::size_t> pick_ind(0, population.size() - 1);
        const Individual* winner = &population[pick_ind(rng)];
        for (int i = 0; i < 2; ++i) {
            const Individual& challenger = population[pick_ind(rng)];
            if (challenger.score < winner->score) winner = &challenger;
        }
        return *winner;
    };

    for (std::size_t gen = 0; gen < cfg.generations && !meter.exhausted(); ++gen) {
        if (population.size() < cfg.population_size) break;  // budget ran dry during init
        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return population[a].score < population[b].score;
        });

        std::vector<Individual> next;
        next.reserve(cfg.population_size);
        for (std::size_t e = 0; e < cfg.elitism_count; ++e)
            next.push_back(population[order[e]]);

        while (next.size() < cfg.population_size && !meter.exhausted()) {
            const Individual& a = tournament();
            const Individual& b = tournament();
            Portfolio child(n);
            if (cross_coin(rng)) {
                for (std::size_t i = 0; i < n; ++i) {
                    bool bit = half(rng) ? a.genome.test(i) : b.genome.test(i);
                    if (bit) child.set(i);
                }
                child = repair(std::move(child));
            } else {
                child = a.genome;
            }
            child = mutate(std::move(child));
            next.push_back({child, evaluate(child)});
        }
        if (next.size() < cfg.population_size) break;  // partial generation: keep previous
        population = std::move(next);
    }

    if (best.valid) pool.insert(best.selection, best.score, "ga");
    return pool;
}

SolutionPool tabu_search(const Qubo& q, const TabuParams& params, const SolverBudget& budget,
                         ScoreTrace* trace) {
    const auto n = static_cast<std::size_t>(q.size());
    if (n == 0) raise(ErrorCode::InvalidArgument, "tabu search needs a non-empty model");
    if (q.A.rows() != q.A.cols() || static_cast<std::size_t>(q.A.rows()) != n)
        raise(ErrorCode::DimensionMismatch, "quadratic and linear parts disagree on size");
    std::size_t tenure = params.tenure.value_or((n + 9) / 10);

    Rng rng(derive_seed(budget.seed, "tabu"));
    BudgetMeter meter(budget);
    SolutionPool pool(n);
    std::bernoulli_distribution coin(0.5);

    std::vector<int> x(n, 0);
    Eigen::VectorXd g;
    double energy = 0.0;

    std::vector<int> best_x;
    double best_energy = kInf;

    auto to_portfolio = [&](const std::vector<int>& bits) { return portfolio_from_bits(bits); };

    auto sync = [&]() {
        Eigen::VectorXd xv(n);
        for (std::size_t i = 0; i < n; ++i) xv[static_cast<Eigen::Index>(i)] = x[i];
        g = q.A * xv;
        energy = qubo_energy(q, x);
    };

    auto visit = [&]() {
        ++meter.evaluations;
        if (trace) {
            auto ones = static_cast<std::size_t>(std::count(x.begin(), x.end(), 1));
            trace->push_back({energy, std::nullopt, ones});
        }
        if (energy < best_energy) {
            // Re-anchor on the exact energy before recording a new best so
            // incremental drift never reaches the pool.
            energy = qubo_energy(q, x);
            if (energy < best_energy) {
                best_energy = energy;
                best_x = x;
                pool.offer(to_portfolio(x), energy, "tabu");
                return true;
            }
        }
        return false;
    };

    auto restart = [&]() {
        for (std::size_t i = 0; i < n; ++i) x[i] = coin(rng) ? 1 : 0;
        sync();
    };

    std::vector<std::uint64_t> tabu_until(n, 0);
    std::uint64_t move = 0;
    std::uint64_t non_improving = 0;

    if (!meter.exhausted()) {
        restart();
        visit();
    }

    while (!meter.exhausted()) {
        ++move;
        // Pick the admissible flip with the lowest resulting energy;
        // aspiration admits a tabu flip that would beat the global best.
        std::size_t chosen = n;
        double chosen_delta = kInf;
        bool have_admissible = false;
        std::size_t fallback = n;
        double fallback_delta = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            double d = 1.0 - 2.0 * x[i];
            double delta = 2.0 * d * g[static_cast<Eigen::Index>(i)] +
                           q.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +
                           d * q.B[static_cast<Eigen::Index>(i)];
            bool is_tabu = tabu_until[i] >= move;
            bool aspirated = energy + delta < best_energy;
            if (!is_tabu || aspirated) {
                if (!have_admissible || delta < chosen_delta) {
                    chosen = i;
                    chosen_delta = delta;
                    have_admissible = true;
                }
            } else if (delta < fallback_delta) {
                fallback = i;
                fallback_delta = delta;
            }
        }
        if (!have_admissible) {
            chosen = fallback;
            chosen_delta = fallback_delta;
        }

        double d = 1.0 - 2.0 * x[chosen];
        x[chosen] = 1 - x[chosen];
        energy += chosen_delta;
        g += d * q.A.col(static_cast<Eigen::Index>(chosen));
        tabu_until[chosen] = move + tenure;
        if ((move & 0xFFF) == 0) sync();  // periodic exact refresh

        if (visit()) {
            non_improving = 0;
        } else {
            ++non_improving;
            // Gate restarts on the move count alone so eval-budgeted runs
            // follow the same trajectory regardless of machine speed.
            if (non_improving >= params.restart_after) {
                restart();
                std::fill(tabu_until.begin(), tabu_until.end(), 0);
                non_improving = 0;
                visit();
            }
        }
    }

    if (std::isfinite(best_energy)) pool.insert(to_portfolio(best_x), best_energy, "tabu");
    return pool;
}

}  // namespace cqns
