#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "advfold/rng.hpp"
#include "advfold/sequences.hpp"

namespace advfold {

/// Whether the substitution-score budget L is an upper bound or must be met
/// exactly. The Hamming budget H is always an upper bound.
enum class DistanceMode { at_most, exact };

enum class ConfidenceCategory { min, avg, max };

/// Parameters of the biologically-similar sequence space around a reference:
/// substitution-score budget L, Hamming budget H, and an optional explicit
/// pool of mutable positions (0-based).
struct NeighborhoodSpec {
    int blosum_budget = 20;  // L
    int hamming_budget = 5;  // H
    DistanceMode mode = DistanceMode::at_most;
    BlosumMatrix matrix = BlosumMatrix::blosum62();
    std::optional<std::vector<int>> position_pool;
    int retry_budget = 10000;  // rejection-sampling attempts per requested sequence
};

/// Throws unless the spec is well-formed for `s`: budgets non-negative,
/// H <= n, pool (when present) non-empty with distinct in-range indices and
/// at least H entries.
void validate_spec(const NeighborhoodSpec& spec, const Sequence& s);

/// Draws one member of the space by rejection sampling. In at_most mode the
/// number of changed positions is uniform on [1,H]; in exact mode exactly H
/// positions change and the score budget must be met exactly. H = 0 returns
/// the reference itself (at_most) or is infeasible for L > 0 (exact).
Sequence sample_neighbor(const Sequence& s, const NeighborhoodSpec& spec, SplitMix64& rng);

/// `count` pairwise-distinct members, deterministic given the rng seed.
/// Distinctness is by full residue equality.
std::vector<Sequence> sample_batch(const Sequence& s, const NeighborhoodSpec& spec, int count,
                                   SplitMix64& rng);

/// Upper bound on the neighborhood size (sum over h <= H of C(pool, h) * 19^h),
/// saturating at 2^64-1.
std::uint64_t neighborhood_size_bound(const Sequence& s, const NeighborhoodSpec& spec);

/// Streams every member exactly once in a deterministic order: changed-position
/// sets lexicographic, substitutions alphabetic by residue code. The reference
/// itself appears when its distance satisfies the mode (always, in at_most).
/// Throws before any work when the size bound exceeds `cap`.
void for_each_neighbor(const Sequence& s, const NeighborhoodSpec& spec,
                       const std::function<void(const Sequence&)>& visit,
                       std::uint64_t cap = 1'000'000);

/// Materialized enumeration, same order and cap as for_each_neighbor.
std::vector<Sequence> enumerate_neighborhood(const Sequence& s, const NeighborhoodSpec& spec,
                                             std::uint64_t cap = 1'000'000);

/// The `count` positions whose confidence is closest to the category's target
/// (the minimum, mean, or maximum of plddt), ties broken by lower index;
/// result sorted ascending.
std::vector<int> select_positions_by_confidence(const Eigen::VectorXd& plddt,
                                                ConfidenceCategory category, int count);

}  // namespace advfold
