#include "doctest.h"

#include <atomic>
#include <cmath>

#include "advfold/attack.hpp"
#include "reference_oracles.hpp"
#include "test_support.hpp"

using namespace advfold;

namespace {

AttackConfig toy_config(int L, int H, int samples, std::uint64_t seed) {
    AttackConfig config;
    config.spec.blosum_budget = L;
    config.spec.hamming_budget = H;
    config.samples = samples;
    config.seed = seed;
    return config;
}

bool same_records(const CandidateRecord& a, const CandidateRecord& b) {
    return a.sequence == b.sequence && a.rmsd_all == b.rmsd_all && a.rmsd_kept == b.rmsd_kept &&
           a.gdt_ts == b.gdt_ts && a.gdt_ha == b.gdt_ha &&
           a.changed_positions == b.changed_positions;
}

/// Everything except wall-clock telemetry.
bool same_results(const AttackResult& a, const AttackResult& b) {
    if (!(a.original_sequence == b.original_sequence)) return false;
    if (a.original_structure.ca != b.original_structure.ca) return false;
    if (a.best_index != b.best_index) return false;
    if (a.similarity_percent != b.similarity_percent) return false;
    if (a.candidates.size() != b.candidates.size()) return false;
    for (std::size_t i = 0; i < a.candidates.size(); ++i)
        if (!same_records(a.candidates[i], b.candidates[i])) return false;
    return a.avg_rmsd_all == b.avg_rmsd_all && a.avg_gdt_ts == b.avg_gdt_ts &&
           a.avg_gdt_ha == b.avg_gdt_ha;
}

/// Mock wrapper that fails on one specific residue string.
class FailingOracle final : public FoldingOracle {
public:
    explicit FailingOracle(std::string poison) : poison_(std::move(poison)) {}
    Structure fold(const Sequence& s) const override {
        if (s.to_string() == poison_) throw Error("poisoned fold");
        return inner_.fold(s);
    }
    bool reentrant() const override { return true; }
    std::string tag() const override { return "failing"; }

private:
    MockFolder inner_;
    std::string poison_;
};

AttackResult make_synthetic_result(int n, double mu_all, double rmsd_value, double gdt_ts,
                                   double runtime) {
    SplitMix64 rng(9999);
    const Sequence s = testsup::random_sequence("synthetic", n, rng);
    AttackResult result{s, mock_fold(s)};
    CandidateRecord record{s};
    record.rmsd_all = rmsd_value;
    record.gdt_ts = gdt_ts;
    result.candidates.push_back(record);
    result.best_index = 0;
    result.confidence_original.mu_all = mu_all;
    result.total_fold_seconds = runtime;
    return result;
}

}  // namespace

TEST_SUITE("confidence_stats") {
    TEST_CASE("uniform vector has zero sigma") {
        const Eigen::VectorXd plddt = Eigen::VectorXd::Constant(10, 80.0);
        const ConfidenceStats stats = confidence_stats(plddt, std::vector<int>{});
        CHECK(stats.mu_all == 80.0);
        CHECK(stats.sigma_all == 0.0);
        CHECK(!stats.mu_diff.has_value());
        CHECK(!stats.sigma_diff.has_value());
    }

    TEST_CASE("two-point vector with one changed position") {
        Eigen::VectorXd plddt(2);
        plddt << 100.0, 0.0;
        const std::vector<int> changed{0};
        const ConfidenceStats stats = confidence_stats(plddt, changed);
        CHECK(stats.mu_all == 50.0);
        CHECK(stats.sigma_all == 50.0);
        REQUIRE(stats.mu_diff.has_value());
        CHECK(*stats.mu_diff == 100.0);
        CHECK(*stats.sigma_diff == 0.0);
    }

    TEST_CASE("313-value fixture matches the two-pass oracle to 1e-9") {
        SplitMix64 rng(401);
        Eigen::VectorXd plddt(313);
        std::vector<double> values;
        for (int i = 0; i < 313; ++i) {
            plddt(i) = rng.unit() * 100.0;
            values.push_back(plddt(i));
        }
        std::vector<int> changed;
        for (int i = 0; i < 313; i += 31) changed.push_back(i);
        std::vector<double> changed_values;
        for (int pos : changed) changed_values.push_back(plddt(pos));

        const ConfidenceStats stats = confidence_stats(plddt, changed);
        const auto [mu_all, sigma_all] = oracles::two_pass_stats(values);
        const auto [mu_diff, sigma_diff] = oracles::two_pass_stats(changed_values);
        CHECK(stats.mu_all == doctest::Approx(mu_all).epsilon(1e-9));
        CHECK(stats.sigma_all == doctest::Approx(sigma_all).epsilon(1e-9));
        CHECK(*stats.mu_diff == doctest::Approx(mu_diff).epsilon(1e-9));
        CHECK(*stats.sigma_diff == doctest::Approx(sigma_diff).epsilon(1e-9));
    }

    TEST_CASE("out-of-range positions are an error") {
        const Eigen::VectorXd plddt = Eigen::VectorXd::Constant(5, 50.0);
        CHECK_THROWS_AS(confidence_stats(plddt, std::vector<int>{5}), Error);
        CHECK_THROWS_AS(confidence_stats(plddt, std::vector<int>{-1}), Error);
    }
}

TEST_SUITE("similarity_percent") {
    TEST_CASE("table values at 4 decimal places") {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", similarity_percent(313, 5));
        CHECK(std::string(buf) == "98.4026");
        std::snprintf(buf, sizeof(buf), "%.4f", similarity_percent(365, 5));
        CHECK(std::string(buf) == "98.6301");
    }

    TEST_CASE("no changes means 100 percent") {
        CHECK(similarity_percent(17, 0) == 100.0);
        CHECK(similarity_percent(1, 0) == 100.0);
    }

    TEST_CASE("preconditions") {
        CHECK_THROWS_AS(similarity_percent(0, 0), Error);
        CHECK_THROWS_AS(similarity_percent(5, 6), Error);
    }
}

TEST_SUITE("run_attack") {
    TEST_CASE("degenerate budget returns the original with zero divergence") {
        SplitMix64 rng(409);
        const Sequence s = testsup::random_sequence("s", 20, rng);
        const MockFolder oracle;
        const AttackResult result = run_attack(s, oracle, toy_config(0, 0, 1, 1));
        CHECK(result.best().sequence == s);
        CHECK(result.best().rmsd_all < 1e-9);
        CHECK(result.best().gdt_ts == 1.0);
        CHECK(result.best().gdt_ha == 1.0);
        CHECK(result.similarity_percent == 100.0);
        CHECK(result.best().changed_positions.empty());
        CHECK(!result.confidence_original.mu_diff.has_value());
    }

    TEST_CASE("pinned seed: best rmsd equals an independent second-pass recomputation") {
        SplitMix64 rng(419);
        const Sequence s = testsup::random_sequence("s", 40, rng);
        const MockFolder oracle;
        const AttackConfig config = toy_config(20, 5, 20, 20250808);
        const AttackResult result = run_attack(s, oracle, config);
        REQUIRE(result.candidates.size() == 20);

        const Structure original = oracle.fold(s);
        double best_recomputed = -1.0;
        for (const CandidateRecord& record : result.candidates) {
            const Structure folded = oracle.fold(record.sequence);
            const Superposition sup = superpose(original, folded, 2.0, 5);
            best_recomputed = std::max(best_recomputed, sup.rmsd_all);
            CHECK(sup.rmsd_all == record.rmsd_all);
        }
        CHECK(result.best().rmsd_all == best_recomputed);
    }

    TEST_CASE("argmax is first-hit on the maximum and avg fields are true means") {
        SplitMix64 rng(421);
        const Sequence s = testsup::random_sequence("s", 25, rng);
        const AttackResult result = run_attack(s, MockFolder{}, toy_config(25, 4, 12, 7));
        double best = -1.0;
        std::size_t best_index = 0;
        double sum_rmsd = 0, sum_ts = 0, sum_ha = 0;
        for (std::size_t i = 0; i < result.candidates.size(); ++i) {
            const CandidateRecord& record = result.candidates[i];
            if (record.rmsd_all > best) {
                best = record.rmsd_all;
                best_index = i;
            }
            sum_rmsd += record.rmsd_all;
            sum_ts += record.gdt_ts;
            sum_ha += record.gdt_ha;
        }
        CHECK(result.best_index == best_index);
        CHECK(result.avg_rmsd_all == doctest::Approx(sum_rmsd / 12.0).epsilon(1e-15));
        CHECK(result.avg_gdt_ts == doctest::Approx(sum_ts / 12.0).epsilon(1e-15));
        CHECK(result.avg_gdt_ha == doctest::Approx(sum_ha / 12.0).epsilon(1e-15));
    }

    TEST_CASE("every candidate satisfies the neighborhood spec post hoc") {
        SplitMix64 rng(431);
        const Sequence s = testsup::random_sequence("s", 60, rng);
        const AttackConfig config = toy_config(20, 5, 20, 99);
        const AttackResult result = run_attack(s, MockFolder{}, config);
        for (const CandidateRecord& record : result.candidates) {
            CHECK(seq_distance(s, record.sequence, config.spec.matrix) <= 20);
            CHECK(hamming(s, record.sequence) <= 5);
            CHECK(static_cast<int>(record.changed_positions.size()) ==
                  hamming(s, record.sequence));
        }
    }

    TEST_CASE("deterministic across runs and worker counts") {
        SplitMix64 rng(433);
        const Sequence s = testsup::random_sequence("s", 50, rng);
        AttackConfig config = toy_config(20, 5, 16, 123456);
        config.jobs = 1;
        const AttackResult serial = run_attack(s, MockFolder{}, config);
        config.jobs = 8;
        const AttackResult parallel = run_attack(s, MockFolder{}, config);
        const AttackResult repeat = run_attack(s, MockFolder{}, config);
        CHECK(same_results(serial, parallel));
        CHECK(same_results(serial, repeat));
    }

    TEST_CASE("confidence-guided strategy restricts changes to the selected positions") {
        SplitMix64 rng(439);
        const Sequence s = testsup::random_sequence("s", 48, rng);
        const MockFolder oracle;
        for (ConfidenceCategory category :
             {ConfidenceCategory::min, ConfidenceCategory::avg, ConfidenceCategory::max}) {
            AttackConfig config = toy_config(60, 5, 8, 31);
            config.position_strategy = PositionStrategy::confidence;
            config.confidence_category = category;
            const AttackResult result = run_attack(s, oracle, config);

            const Structure original = oracle.fold(s);
            const std::vector<int> pool =
                select_positions_by_confidence(*original.plddt, category, 5);
            for (const CandidateRecord& record : result.candidates)
                for (int pos : record.changed_positions)
                    CHECK(std::find(pool.begin(), pool.end(), pos) != pool.end());
        }
    }

    TEST_CASE("objective gdt_ts_negated picks the lowest gdt-ts candidate") {
        SplitMix64 rng(443);
        const Sequence s = testsup::random_sequence("s", 30, rng);
        AttackConfig config = toy_config(30, 5, 10, 17);
        config.objective = Objective::gdt_ts_negated;
        const AttackResult result = run_attack(s, MockFolder{}, config);
        for (const CandidateRecord& record : result.candidates)
            CHECK(result.best().gdt_ts <= record.gdt_ts);
    }

    TEST_CASE("an oracle failure aborts the attack naming the candidate") {
        SplitMix64 rng(449);
        const Sequence s = testsup::random_sequence("s", 22, rng);
        // find out which candidate the sampler will produce, then poison it
        AttackConfig config = toy_config(25, 3, 6, 555);
        const AttackResult clean = run_attack(s, MockFolder{}, config);
        const std::string poison = clean.candidates[3].sequence.to_string();
        try {
            run_attack(s, FailingOracle{poison}, config);
            FAIL("expected an error");
        } catch (const Error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("candidate 4/6") != std::string::npos);
            CHECK(msg.find("poisoned fold") != std::string::npos);
        }
    }

    TEST_CASE("sampler infeasibility propagates") {
        const Sequence s = Sequence::from_string("w", std::string(8, 'W'));
        AttackConfig config = toy_config(2, 1, 3, 1);  // W substitutions all cost > 2
        config.spec.retry_budget = 30;
        CHECK_THROWS_AS(run_attack(s, MockFolder{}, config), Error);
    }
}

TEST_SUITE("exhaustive_attack") {
    TEST_CASE("sampled best never beats the exhaustive best") {
        SplitMix64 rng(457);
        for (int trial = 0; trial < 3; ++trial) {
            const Sequence s = testsup::random_sequence("s" + std::to_string(trial), 10, rng);
            const MockFolder oracle;
            NeighborhoodSpec spec;
            spec.blosum_budget = 12;
            spec.hamming_budget = 1;
            const AttackResult exhaustive = exhaustive_attack(s, oracle, spec);
            AttackConfig config;
            config.spec = spec;
            config.samples = 10;
            config.seed = 1000 + static_cast<std::uint64_t>(trial);
            const AttackResult sampled = run_attack(s, oracle, config);
            CHECK(sampled.best().rmsd_all <= exhaustive.best().rmsd_all);
        }
    }

    TEST_CASE("exhaustive best is non-decreasing in L") {
        SplitMix64 rng(461);
        const Sequence s = testsup::random_sequence("s", 9, rng);
        const MockFolder oracle;
        double previous = -1.0;
        for (int L : {2, 6, 12, 20}) {
            NeighborhoodSpec spec;
            spec.blosum_budget = L;
            spec.hamming_budget = 1;
            const AttackResult result = exhaustive_attack(s, oracle, spec);
            CHECK(result.best().rmsd_all >= previous);
            previous = result.best().rmsd_all;
        }
    }

    TEST_CASE("argmax agrees with a flat re-enumeration oracle") {
        SplitMix64 rng(463);
        const Sequence s = testsup::random_sequence("s", 8, rng);
        const MockFolder oracle;
        NeighborhoodSpec spec;
        spec.blosum_budget = 14;
        spec.hamming_budget = 2;
        const AttackResult result = exhaustive_attack(s, oracle, spec);

        const Structure original = oracle.fold(s);
        double best = -1.0;
        std::string best_residues;
        for (const Sequence& member : enumerate_neighborhood(s, spec)) {
            const Superposition sup = superpose(original, oracle.fold(member), 2.0, 5);
            if (sup.rmsd_all > best) {
                best = sup.rmsd_all;
                best_residues = member.to_string();
            }
        }
        CHECK(result.best().rmsd_all == best);
        CHECK(result.best().sequence.to_string() == best_residues);
    }

    TEST_CASE("cap exceeded is an error") {
        SplitMix64 rng(467);
        const Sequence s = testsup::random_sequence("s", 100, rng);
        NeighborhoodSpec spec;
        spec.blosum_budget = 100;
        spec.hamming_budget = 4;
        CHECK_THROWS_AS(exhaustive_attack(s, MockFolder{}, spec, Objective::rmsd, 2.0, 5, 1000),
                        Error);
    }
}

TEST_SUITE("aggregate_results") {
    TEST_CASE("single result aggregates to itself with zero std") {
        std::vector<AttackResult> results;
        results.push_back(make_synthetic_result(100, 80.0, 12.5, 0.4, 3.0));
        const AttackSummary summary = aggregate_results(results);
        CHECK(summary.count == 1);
        CHECK(summary.avg_n == 100.0);
        CHECK(summary.std_n == 0.0);
        CHECK(summary.avg_rmsd == 12.5);
        CHECK(summary.std_rmsd == 0.0);
        CHECK(summary.avg_mu_all == 80.0);
    }

    TEST_CASE("two synthetic results with rmsd 10 and 20 give avg 15 std 5") {
        std::vector<AttackResult> results;
        results.push_back(make_synthetic_result(100, 70.0, 10.0, 0.5, 1.0));
        results.push_back(make_synthetic_result(200, 90.0, 20.0, 0.3, 3.0));
        const AttackSummary summary = aggregate_results(results);
        CHECK(summary.avg_rmsd == 15.0);
        CHECK(summary.std_rmsd == 5.0);
        CHECK(summary.avg_n == 150.0);
        CHECK(summary.std_n == 50.0);
        CHECK(summary.avg_mu_all == 80.0);
        CHECK(summary.avg_runtime_seconds == 2.0);
    }

    TEST_CASE("ten mock attacks aggregate to an independent recomputation") {
        SplitMix64 rng(479);
        std::vector<AttackResult> results;
        for (int i = 0; i < 10; ++i) {
            const Sequence s =
                testsup::random_sequence("s" + std::to_string(i), 15 + 3 * i, rng);
            results.push_back(run_attack(s, MockFolder{}, toy_config(25, 3, 5, 42 + i)));
        }
        const AttackSummary summary = aggregate_results(results);

        std::vector<double> ns, rmsds;
        for (const AttackResult& r : results) {
            ns.push_back(r.original_sequence.size());
            rmsds.push_back(r.best().rmsd_all);
        }
        const auto [avg_n, std_n] = oracles::two_pass_stats(ns);
        const auto [avg_rmsd, std_rmsd] = oracles::two_pass_stats(rmsds);
        CHECK(summary.avg_n == doctest::Approx(avg_n).epsilon(1e-12));
        CHECK(summary.std_n == doctest::Approx(std_n).epsilon(1e-12));
        CHECK(summary.avg_rmsd == doctest::Approx(avg_rmsd).epsilon(1e-12));
        CHECK(summary.std_rmsd == doctest::Approx(std_rmsd).epsilon(1e-12));
    }

    TEST_CASE("empty list is an error") {
        CHECK_THROWS_AS(aggregate_results(std::vector<AttackResult>{}), Error);
    }
}
