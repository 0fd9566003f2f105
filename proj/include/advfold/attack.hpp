#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "advfold/neighborhood.hpp"
#include "advfold/oracle.hpp"
#include "advfold/structures.hpp"

namespace advfold {

/// What the attack maximizes: structural RMSD, or negated GDT-TS (so that a
/// larger objective always means a worse prediction match).
enum class Objective { rmsd, gdt_ts_negated };

enum class PositionStrategy { uniform, confidence };

struct AttackConfig {
    NeighborhoodSpec spec;  // defaults: L=20, H=5, at_most
    int samples = 20;
    Objective objective = Objective::rmsd;
    std::uint64_t seed = 0;
    PositionStrategy position_strategy = PositionStrategy::uniform;
    ConfidenceCategory confidence_category = ConfidenceCategory::min;
    double align_cutoff = 2.0;
    int align_max_cycles = 5;
    OutlierRule align_rule = OutlierRule::relative_to_rmsd;
    int jobs = 1;  // parallel candidate folding, honored only for reentrant oracles
};

struct CandidateRecord {
    explicit CandidateRecord(Sequence candidate) : sequence(std::move(candidate)) {}

    Sequence sequence;
    double rmsd_all = 0.0;
    double rmsd_kept = 0.0;
    double gdt_ts = 0.0;  // fraction in [0,1]
    double gdt_ha = 0.0;
    std::vector<int> changed_positions;
    double fold_wall_seconds = 0.0;  // telemetry; excluded from determinism comparisons
};

double objective_value(const CandidateRecord& record, Objective objective);

/// Mean and population standard deviation of a confidence vector, overall and
/// restricted to the changed positions (absent when nothing changed).
struct ConfidenceStats {
    double mu_all = 0.0;
    double sigma_all = 0.0;
    std::optional<double> mu_diff;
    std::optional<double> sigma_diff;
};

ConfidenceStats confidence_stats(const Eigen::VectorXd& plddt,
                                 std::span<const int> changed_positions);

/// 100 * (n - d_ham) / n.
double similarity_percent(int n, int d_ham);

struct AttackResult {
    AttackResult(Sequence sequence, Structure structure)
        : original_sequence(std::move(sequence)), original_structure(std::move(structure)) {}

    Sequence original_sequence;
    Structure original_structure;
    std::vector<CandidateRecord> candidates;
    std::size_t best_index = 0;  // argmax of the objective, first hit on ties
    double similarity_percent = 0.0;
    ConfidenceStats confidence_original;     // original structure's pLDDT
    ConfidenceStats confidence_adversarial;  // best candidate structure's pLDDT
    std::array<std::optional<RegionGdt>, 4> gdt_regions{};  // best vs original, TS thresholds
    double avg_rmsd_all = 0.0;
    double avg_gdt_ts = 0.0;
    double avg_gdt_ha = 0.0;
    double total_fold_seconds = 0.0;  // telemetry; excluded from determinism comparisons

    const CandidateRecord& best() const { return candidates.at(best_index); }
};

/// Folds the original once, draws `samples` distinct neighbors, folds each,
/// superposes every candidate structure onto the original (the original is
/// always the target frame), and returns the objective maximizer with full
/// per-candidate records and statistics. Deterministic given (sequence, seed,
/// config, oracle) regardless of job count; any oracle failure aborts the
/// attack naming the candidate.
AttackResult run_attack(const Sequence& s, const FoldingOracle& oracle, const AttackConfig& config);

/// Evaluates every member of the neighborhood (cap-guarded) and returns the
/// true argmax; the sampled attack can never beat it.
AttackResult exhaustive_attack(const Sequence& s, const FoldingOracle& oracle,
                               const NeighborhoodSpec& spec, Objective objective = Objective::rmsd,
                               double align_cutoff = 2.0, int align_max_cycles = 5,
                               std::uint64_t cap = 1'000'000,
                               OutlierRule align_rule = OutlierRule::relative_to_rmsd);

/// Column-wise means and population standard deviations across attack results.
struct AttackSummary {
    double avg_n = 0.0, std_n = 0.0;
    double avg_mu_all = 0.0, std_mu_all = 0.0;
    double avg_rmsd = 0.0, std_rmsd = 0.0;
    double avg_gdt_ts = 0.0, std_gdt_ts = 0.0;
    double avg_runtime_seconds = 0.0, std_runtime_seconds = 0.0;
    std::size_t count = 0;
};

AttackSummary aggregate_results(std::span<const AttackResult> results);

}  // namespace advfold
