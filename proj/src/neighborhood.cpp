#include "advfold/neighborhood.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace advfold {

void validate_spec(const NeighborhoodSpec& spec, const Sequence& s) {
    if (spec.blosum_budget < 0) throw Error("neighborhood: L must be non-negative");
    if (spec.hamming_budget < 0) throw Error("neighborhood: H must be non-negative");
    if (spec.hamming_budget > s.size())
        throw Error("neighborhood: H=" + std::to_string(spec.hamming_budget) +
                    " exceeds sequence length " + std::to_string(s.size()));
    if (spec.retry_budget < 1) throw Error("neighborhood: retry budget must be positive");
    if (spec.position_pool) {
        const auto& pool = *spec.position_pool;
        if (pool.empty()) throw Error("neighborhood: empty position pool");
        std::set<int> distinct(pool.begin(), pool.end());
        if (distinct.size() != pool.size()) throw Error("neighborhood: duplicate pool positions");
        if (*distinct.begin() < 0 || *distinct.rbegin() >= s.size())
            throw Error("neighborhood: pool position out of range");
        if (static_cast<int>(pool.size()) < spec.hamming_budget)
            throw Error("neighborhood: pool smaller than H");
    }
}

namespace {

std::vector<int> effective_pool(const NeighborhoodSpec& spec, const Sequence& s) {
    if (spec.position_pool) {
        std::vector<int> pool = *spec.position_pool;
        std::sort(pool.begin(), pool.end());
        return pool;
    }
    std::vector<int> pool(static_cast<std::size_t>(s.size()));
    std::iota(pool.begin(), pool.end(), 0);
    return pool;
}

bool distance_ok(int d, const NeighborhoodSpec& spec) {
    return spec.mode == DistanceMode::at_most ? d <= spec.blosum_budget
                                              : d == spec.blosum_budget;
}

std::string spec_text(const NeighborhoodSpec& spec) {
    return "L=" + std::to_string(spec.blosum_budget) + " H=" + std::to_string(spec.hamming_budget) +
           (spec.mode == DistanceMode::exact ? " (exact)" : " (at_most)");
}

}  // namespace

Sequence sample_neighbor(const Sequence& s, const NeighborhoodSpec& spec, SplitMix64& rng) {
    validate_spec(spec, s);

    if (spec.hamming_budget == 0) {
        if (spec.mode == DistanceMode::exact && spec.blosum_budget > 0)
            throw Error("neighborhood: H=0 with exact L>0 is infeasible by construction");
        return s;
    }

    const std::vector<int> pool = effective_pool(spec, s);

    for (int attempt = 0; attempt < spec.retry_budget; ++attempt) {
        // exact mode changes exactly H residues; at_most draws h uniformly in [1,H]
        const int h = spec.mode == DistanceMode::exact
                          ? spec.hamming_budget
                          : 1 + static_cast<int>(rng.below(
                                    static_cast<std::uint64_t>(spec.hamming_budget)));
        const std::vector<int> positions = rng.distinct_from(pool, h);

        std::vector<AminoAcid> residues(s.residues().begin(), s.residues().end());
        int distance = 0;
        for (int pos : positions) {
            const AminoAcid original = s[pos];
            // one of the 19 residues different from the original
            int pick = static_cast<int>(rng.below(AminoAcid::kCount - 1));
            if (pick >= original.index()) ++pick;
            const AminoAcid replacement =
                AminoAcid::from_char(AminoAcid::alphabet()[static_cast<std::size_t>(pick)]);
            residues[static_cast<std::size_t>(pos)] = replacement;
            distance += spec.matrix.substitution_cost(original, replacement);
        }
        if (distance_ok(distance, spec)) return Sequence(s.id(), std::move(residues));
    }
    throw Error("neighborhood: no sample satisfying " + spec_text(spec) + " within " +
                std::to_string(spec.retry_budget) + " attempts");
}

std::vector<Sequence> sample_batch(const Sequence& s, const NeighborhoodSpec& spec, int count,
                                   SplitMix64& rng) {
    if (count < 1) throw Error("sample_batch: count must be positive");
    validate_spec(spec, s);

    std::vector<Sequence> batch;
    std::set<std::string> seen;
    const long long attempt_budget =
        static_cast<long long>(spec.retry_budget) * static_cast<long long>(count);
    long long attempts = 0;
    while (static_cast<int>(batch.size()) < count) {
        if (attempts++ >= attempt_budget)
            throw Error("sample_batch: could not find " + std::to_string(count) +
                        " distinct members of " + spec_text(spec) + " (neighborhood too small?)");
        Sequence candidate = sample_neighbor(s, spec, rng);
        if (seen.insert(candidate.to_string()).second) batch.push_back(std::move(candidate));
    }
    return batch;
}

std::uint64_t neighborhood_size_bound(const Sequence& s, const NeighborhoodSpec& spec) {
    validate_spec(spec, s);
    const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t p = static_cast<std::uint64_t>(effective_pool(spec, s).size());

    std::uint64_t total = 1;  // h = 0
    std::uint64_t combinations = 1;
    std::uint64_t substitutions = 1;
    for (std::uint64_t h = 1; h <= static_cast<std::uint64_t>(spec.hamming_budget); ++h) {
        // C(p, h) incrementally; saturate on overflow
        if (combinations > kMax / (p - h + 1)) return kMax;
        combinations = combinations * (p - h + 1) / h;
        if (substitutions > kMax / 19) return kMax;
        substitutions *= 19;
        if (combinations > kMax / substitutions) return kMax;
        const std::uint64_t layer = combinations * substitutions;
        if (total > kMax - layer) return kMax;
        total += layer;
    }
    return total;
}

void for_each_neighbor(const Sequence& s, const NeighborhoodSpec& spec,
                       const std::function<void(const Sequence&)>& visit, std::uint64_t cap) {
    validate_spec(spec, s);
    const std::uint64_t bound = neighborhood_size_bound(s, spec);
    if (bound > cap)
        throw Error("enumerate: size bound " + std::to_string(bound) + " exceeds cap " +
                    std::to_string(cap));

    const std::vector<int> pool = effective_pool(spec, s);
    const int p = static_cast<int>(pool.size());
    const auto residues_by_code = AminoAcid::all_by_code();

    // the reference itself (h = 0) has distance 0
    if (distance_ok(0, spec)) visit(s);

    std::vector<AminoAcid> work(s.residues().begin(), s.residues().end());

    // substitution odometer over the chosen positions, alphabetic per slot,
    // rightmost slot fastest
    auto emit_for_positions = [&](const std::vector<int>& positions) {
        const int h = static_cast<int>(positions.size());
        std::vector<int> digits(static_cast<std::size_t>(h), 0);  // index into the 19 alternatives
        std::vector<std::vector<AminoAcid>> alternatives(static_cast<std::size_t>(h));
        for (int i = 0; i < h; ++i) {
            for (AminoAcid aa : residues_by_code)
                if (aa != s[positions[static_cast<std::size_t>(i)]])
                    alternatives[static_cast<std::size_t>(i)].push_back(aa);
        }
        while (true) {
            int distance = 0;
            for (int i = 0; i < h; ++i) {
                const int pos = positions[static_cast<std::size_t>(i)];
                const AminoAcid replacement =
                    alternatives[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
                work[static_cast<std::size_t>(pos)] = replacement;
                distance += spec.matrix.substitution_cost(s[pos], replacement);
            }
            if (distance_ok(distance, spec)) visit(Sequence(s.id(), work));
            for (int pos : positions) work[static_cast<std::size_t>(pos)] = s[pos];

            int slot = h - 1;
            while (slot >= 0 && digits[static_cast<std::size_t>(slot)] == AminoAcid::kCount - 2) {
                digits[static_cast<std::size_t>(slot)] = 0;
                --slot;
            }
            if (slot < 0) break;
            ++digits[static_cast<std::size_t>(slot)];
        }
    };

    // position subsets in lexicographic order, per subset size 1..H
    for (int h = 1; h <= spec.hamming_budget; ++h) {
        std::vector<int> choice(static_cast<std::size_t>(h));
        std::iota(choice.begin(), choice.end(), 0);
        while (true) {
            std::vector<int> positions(static_cast<std::size_t>(h));
            for (int i = 0; i < h; ++i)
                positions[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(
                    choice[static_cast<std::size_t>(i)])];
            emit_for_positions(positions);

            int slot = h - 1;
            while (slot >= 0 && choice[static_cast<std::size_t>(slot)] == p - h + slot) --slot;
            if (slot < 0) break;
            ++choice[static_cast<std::size_t>(slot)];
            for (int i = slot + 1; i < h; ++i)
                choice[static_cast<std::size_t>(i)] = choice[static_cast<std::size_t>(i - 1)] + 1;
        }
    }
}

std::vector<Sequence> enumerate_neighborhood(const Sequence& s, const NeighborhoodSpec& spec,
                                             std::uint64_t cap) {
    std::vector<Sequence> members;
    for_each_neighbor(s, spec, [&](const Sequence& member) { members.push_back(member); }, cap);
    return members;
}

std::vector<int> select_positions_by_confidence(const Eigen::VectorXd& plddt,
                                                ConfidenceCategory category, int count) {
    if (plddt.size() == 0) throw Error("select_positions_by_confidence: empty plddt");
    if (count < 1) throw Error("select_positions_by_confidence: count must be positive");
    if (count > plddt.size())
        throw Error("select_positions_by_confidence: count " + std::to_string(count) +
                    " exceeds length " + std::to_string(plddt.size()));

    double target = 0.0;
    switch (category) {
        case ConfidenceCategory::min: target = plddt.minCoeff(); break;
        case ConfidenceCategory::avg: target = plddt.mean(); break;
        case ConfidenceCategory::max: target = plddt.maxCoeff(); break;
    }

    std::vector<int> indices(static_cast<std::size_t>(plddt.size()));
    std::iota(indices.begin(), indices.end(), 0);
    std::stable_sort(indices.begin(), indices.end(), [&](int a, int b) {
        return std::abs(plddt(a) - target) < std::abs(plddt(b) - target);
    });
    indices.resize(static_cast<std::size_t>(count));
    std::sort(indices.begin(), indices.end());
    return indices;
}

}  // namespace advfold
