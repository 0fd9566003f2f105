#include "advfold/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <functional>
#include <thread>
#include <tuple>
#include <utility>

namespace advfold {

double objective_value(const CandidateRecord& record, Objective objective) {
    return objective == Objective::rmsd ? record.rmsd_all : -record.gdt_ts;
}

namespace {

std::pair<double, double> mean_and_population_sigma(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    return {mean, std::sqrt(variance / n)};
}

}  // namespace

ConfidenceStats confidence_stats(const Eigen::VectorXd& plddt,
                                 std::span<const int> changed_positions) {
    if (plddt.size() == 0) throw Error("confidence_stats: empty plddt");
    for (int pos : changed_positions)
        if (pos < 0 || pos >= plddt.size())
            throw Error("confidence_stats: position " + std::to_string(pos) + " out of range");

    ConfidenceStats stats;
    std::vector<double> all(plddt.data(), plddt.data() + plddt.size());
    std::tie(stats.mu_all, stats.sigma_all) = mean_and_population_sigma(all);

    if (!changed_positions.empty()) {
        std::vector<double> changed;
        changed.reserve(changed_positions.size());
        for (int pos : changed_positions) changed.push_back(plddt(pos));
        const auto [mu, sigma] = mean_and_population_sigma(changed);
        stats.mu_diff = mu;
        stats.sigma_diff = sigma;
    }
    return stats;
}

double similarity_percent(int n, int d_ham) {
    if (n < 1) throw Error("similarity_percent: n must be positive");
    if (d_ham < 0 || d_ham > n)
        throw Error("similarity_percent: d_ham must lie in [0, n]");
    return 100.0 * static_cast<double>(n - d_ham) / static_cast<double>(n);
}

namespace {

std::vector<int> changed_positions_of(const Sequence& original, const Sequence& candidate) {
    std::vector<int> changed;
    for (int i = 0; i < original.size(); ++i)
        if (original[i] != candidate[i]) changed.push_back(i);
    return changed;
}

struct EvaluationContext {
    const Structure* original = nullptr;
    double align_cutoff = 2.0;
    int align_max_cycles = 5;
    OutlierRule align_rule = OutlierRule::relative_to_rmsd;
};

CandidateRecord evaluate_candidate(const Sequence& original_sequence, Sequence candidate_sequence,
                                   const Structure& candidate_structure,
                                   const EvaluationContext& ctx, double fold_seconds) {
    std::vector<int> changed = changed_positions_of(original_sequence, candidate_sequence);
    CandidateRecord record{std::move(candidate_sequence)};
    record.changed_positions = std::move(changed);
    record.fold_wall_seconds = fold_seconds;

    // the original is always the target frame, never the reverse
    const Superposition sup = superpose(*ctx.original, candidate_structure, ctx.align_cutoff,
                                        ctx.align_max_cycles, ctx.align_rule);
    record.rmsd_all = sup.rmsd_all;
    record.rmsd_kept = sup.rmsd_kept;

    Structure aligned = candidate_structure;
    aligned.ca = sup.apply(candidate_structure.ca);
    record.gdt_ts = gdt(*ctx.original, aligned, GdtMode::ts());
    record.gdt_ha = gdt(*ctx.original, aligned, GdtMode::ha());
    return record;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Structure checked_fold(const FoldingOracle& oracle, const Sequence& s, const std::string& role) {
    Structure folded;
    try {
        folded = oracle.fold(s);
    } catch (const std::exception& e) {
        throw Error("attack: oracle failed on " + role + " '" + s.id() + "': " + e.what());
    }
    if (folded.size() != s.size())
        throw Error("attack: oracle returned " + std::to_string(folded.size()) +
                    " residues for " + role + " of length " + std::to_string(s.size()));
    if (!folded.plddt)
        throw Error("attack: oracle returned no confidence values for " + role);
    return folded;
}

AttackResult finalize_result(
    Sequence original_sequence, Structure original_structure,
    std::vector<CandidateRecord> candidates,
    const std::function<Structure(std::size_t, const CandidateRecord&)>& structure_of,
    Objective objective, double align_cutoff, int align_max_cycles, OutlierRule align_rule,
    double total_fold_seconds) {
    if (candidates.empty()) throw Error("attack: no candidates were evaluated");

    AttackResult result{std::move(original_sequence), std::move(original_structure)};
    result.candidates = std::move(candidates);
    result.total_fold_seconds = total_fold_seconds;

    result.best_index = 0;
    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        if (objective_value(result.candidates[i], objective) >
            objective_value(result.candidates[result.best_index], objective))
            result.best_index = i;
    }

    const CandidateRecord& best = result.candidates[result.best_index];
    result.similarity_percent = similarity_percent(
        result.original_sequence.size(), static_cast<int>(best.changed_positions.size()));

    result.confidence_original =
        confidence_stats(*result.original_structure.plddt, best.changed_positions);
    const Structure best_structure = structure_of(result.best_index, best);
    result.confidence_adversarial = confidence_stats(*best_structure.plddt, best.changed_positions);

    const Superposition sup = superpose(result.original_structure, best_structure, align_cutoff,
                                        align_max_cycles, align_rule);
    Structure best_aligned = best_structure;
    best_aligned.ca = sup.apply(best_structure.ca);
    result.gdt_regions =
        gdt_by_confidence_region(result.original_structure, best_aligned, GdtMode::ts());

    double sum_rmsd = 0.0, sum_ts = 0.0, sum_ha = 0.0;
    for (const CandidateRecord& c : result.candidates) {
        sum_rmsd += c.rmsd_all;
        sum_ts += c.gdt_ts;
        sum_ha += c.gdt_ha;
    }
    const double count = static_cast<double>(result.candidates.size());
    result.avg_rmsd_all = sum_rmsd / count;
    result.avg_gdt_ts = sum_ts / count;
    result.avg_gdt_ha = sum_ha / count;
    return result;
}

}  // namespace

AttackResult run_attack(const Sequence& s, const FoldingOracle& oracle,
                        const AttackConfig& config) {
    if (config.samples < 1) throw Error("attack: samples must be positive");
    if (config.jobs < 1) throw Error("attack: jobs must be positive");

    const auto start_original = std::chrono::steady_clock::now();
    Structure original = checked_fold(oracle, s, "original sequence");
    double total_fold_seconds = seconds_since(start_original);

    NeighborhoodSpec spec = config.spec;
    if (config.position_strategy == PositionStrategy::confidence) {
        spec.position_pool = select_positions_by_confidence(
            *original.plddt, config.confidence_category, spec.hamming_budget);
    }

    SplitMix64 rng(config.seed);
    const std::vector<Sequence> neighbors = sample_batch(s, spec, config.samples, rng);

    // fold candidates, optionally in parallel; slots keep sampling order so the
    // outcome is independent of the worker count
    std::vector<Structure> structures(neighbors.size());
    std::vector<double> fold_seconds(neighbors.size(), 0.0);
    std::vector<std::string> failures(neighbors.size());

    const int workers = oracle.reentrant() ? std::min<int>(config.jobs, static_cast<int>(neighbors.size())) : 1;
    auto fold_range = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < neighbors.size(); i += stride) {
            try {
                const auto start = std::chrono::steady_clock::now();
                structures[i] = checked_fold(oracle, neighbors[i],
                                             "candidate " + std::to_string(i + 1) + "/" +
                                                 std::to_string(neighbors.size()));
                fold_seconds[i] = seconds_since(start);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    if (workers <= 1) {
        fold_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(fold_range, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(workers));
        for (std::thread& t : pool) t.join();
    }
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty()) throw Error(failures[i]);  // no partial best

    EvaluationContext ctx{&original, config.align_cutoff, config.align_max_cycles,
                          config.align_rule};
    std::vector<CandidateRecord> records;
    records.reserve(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        records.push_back(evaluate_candidate(s, neighbors[i], structures[i], ctx, fold_seconds[i]));
        total_fold_seconds += fold_seconds[i];
    }

    auto structure_of = [&](std::size_t index, const CandidateRecord&) {
        return structures[index];
    };
    return finalize_result(s, std::move(original), std::move(records), structure_of,
                           config.objective, config.align_cutoff, config.align_max_cycles,
                           config.align_rule, total_fold_seconds);
}

AttackResult exhaustive_attack(const Sequence& s, const FoldingOracle& oracle,
                               const NeighborhoodSpec& spec, Objective objective,
                               double align_cutoff, int align_max_cycles, std::uint64_t cap,
                               OutlierRule align_rule) {
    const auto start_original = std::chrono::steady_clock::now();
    Structure original = checked_fold(oracle, s, "original sequence");
    double total_fold_seconds = seconds_since(start_original);

    EvaluationContext ctx{&original, align_cutoff, align_max_cycles, align_rule};
    std::vector<CandidateRecord> records;

    // candidate structures are not retained: the best one is refolded below
    // (the oracle is deterministic by contract)
    for_each_neighbor(
        s, spec,
        [&](const Sequence& member) {
            const auto start = std::chrono::steady_clock::now();
            Structure folded = checked_fold(oracle, member, "neighborhood member");
            const double fold_sec = seconds_since(start);
            total_fold_seconds += fold_sec;
            records.push_back(evaluate_candidate(s, member, folded, ctx, fold_sec));
        },
        cap);

    if (records.empty())
        throw Error("attack: the neighborhood is empty under the given spec");

    auto structure_of = [&](std::size_t, const CandidateRecord& record) {
        return oracle.fold(record.sequence);
    };
    return finalize_result(s, std::move(original), std::move(records), structure_of, objective,
                           align_cutoff, align_max_cycles, align_rule, total_fold_seconds);
}

AttackSummary aggregate_results(std::span<const AttackResult> results) {
    if (results.empty()) throw Error("aggregate_results: empty result list");

    auto collect = [&](auto&& get) {
        std::vector<double> values;
        values.reserve(results.size());
        for (const AttackResult& r : results) values.push_back(get(r));
        return mean_and_population_sigma(values);
    };

    AttackSummary summary;
    summary.count = results.size();
    std::tie(summary.avg_n, summary.std_n) = collect(
        [](const AttackResult& r) { return static_cast<double>(r.original_sequence.size()); });
    std::tie(summary.avg_mu_all, summary.std_mu_all) =
        collect([](const AttackResult& r) { return r.confidence_original.mu_all; });
    std::tie(summary.avg_rmsd, summary.std_rmsd) =
        collect([](const AttackResult& r) { return r.best().rmsd_all; });
    std::tie(summary.avg_gdt_ts, summary.std_gdt_ts) =
        collect([](const AttackResult& r) { return r.best().gdt_ts; });
    std::tie(summary.avg_runtime_seconds, summary.std_runtime_seconds) =
        collect([](const AttackResult& r) { return r.total_fold_seconds; });
    return summary;
}

}  // namespace advfold
