#include "doctest.h"

#include <atomic>
#include <fstream>
#include <sstream>

#include "advfold/oracle.hpp"
#include "test_support.hpp"

using namespace advfold;

namespace {

/// Contract every oracle implementation must satisfy: determinism to the bit,
/// length preservation, and populated confidence in [0,100].
void check_oracle_conformance(const FoldingOracle& oracle, const Sequence& s) {
    const Structure first = oracle.fold(s);
    const Structure second = oracle.fold(s);
    REQUIRE(first.size() == s.size());
    CHECK(first.ca == second.ca);
    REQUIRE(first.plddt.has_value());
    REQUIRE(second.plddt.has_value());
    CHECK(*first.plddt == *second.plddt);
    CHECK((first.plddt->array() >= 0.0).all());
    CHECK((first.plddt->array() <= 100.0).all());
}

class CountingOracle final : public FoldingOracle {
public:
    explicit CountingOracle(MockFolderParams params = {}) : inner_(params) {}
    Structure fold(const Sequence& s) const override {
        ++folds;
        return inner_.fold(s);
    }
    bool reentrant() const override { return true; }
    std::string tag() const override { return inner_.tag(); }
    mutable std::atomic<int> folds{0};

private:
    MockFolder inner_;
};

/// Stub folder script: emits one CA per input residue, deterministically.
std::filesystem::path write_length_stub(const std::filesystem::path& dir) {
    const std::filesystem::path script = dir / "stub_fold.sh";
    testsup::write_file(script,
                        "#!/bin/sh\n"
                        "fasta=\"$1\"; out=\"$2\"\n"
                        "len=$(grep -v '^>' \"$fasta\" | tr -d ' \\n\\r' | wc -c)\n"
                        "i=1\n"
                        ": > \"$out\"\n"
                        "while [ \"$i\" -le \"$len\" ]; do\n"
                        "  printf 'ATOM  %5d  CA  GLY A%4d    %8.3f%8.3f%8.3f  1.00 50.00"
                        "           C\\n' \"$i\" \"$i\" \"$i\" 0 0 >> \"$out\"\n"
                        "  i=$((i+1))\n"
                        "done\n");
    return script;
}

}  // namespace

TEST_SUITE("mock folder") {
    TEST_CASE("same sequence folds to an identical structure") {
        SplitMix64 rng(301);
        const Sequence s = testsup::random_sequence("s", 80, rng);
        check_oracle_conformance(MockFolder{}, s);
    }

    TEST_CASE("a substitution only moves coordinates inside the window") {
        SplitMix64 rng(307);
        const MockFolderParams params;  // window radius 4
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 12 + static_cast<int>(rng.below(60));
            const Sequence s = testsup::random_sequence("s", n, rng);
            const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            int pick = static_cast<int>(rng.below(AminoAcid::kCount - 1));
            if (pick >= s[j].index()) ++pick;
            const Sequence mutated = s.with_residue(
                j, AminoAcid::from_char(AminoAcid::alphabet()[static_cast<std::size_t>(pick)]));

            const Structure a = mock_fold(s, params);
            const Structure b = mock_fold(mutated, params);
            for (int i = 0; i < n; ++i) {
                if (std::abs(i - j) > params.window_radius) {
                    CHECK(a.ca.col(i) == b.ca.col(i));
                    CHECK((*a.plddt)(i) == (*b.plddt)(i));
                }
            }
            CHECK(a.ca.col(j) != b.ca.col(j));  // the changed residue itself moves
        }
    }

    TEST_CASE("pinned 8-residue sequence matches the committed golden output") {
        const Sequence s = Sequence::from_string("golden8", "ARNDCQEG");
        const Structure folded = mock_fold(s);

        std::ifstream golden(testsup::fixture("mock_fold_golden8.txt"));
        REQUIRE(golden.good());
        for (int i = 0; i < 8; ++i) {
            double x, y, z, p;
            REQUIRE((golden >> x >> y >> z >> p));
            CHECK(folded.ca(0, i) == x);
            CHECK(folded.ca(1, i) == y);
            CHECK(folded.ca(2, i) == z);
            CHECK((*folded.plddt)(i) == p);
        }
    }

    TEST_CASE("plddt never drops below the floor of 30") {
        SplitMix64 rng(311);
        for (int trial = 0; trial < 10; ++trial) {
            const Structure folded =
                mock_fold(testsup::random_sequence("s", 50 + static_cast<int>(rng.below(100)), rng));
            CHECK(folded.plddt->minCoeff() >= 30.0);
        }
    }

    TEST_CASE("outputs survive a PDB round trip bit-exactly") {
        SplitMix64 rng(313);
        const Sequence s = testsup::random_sequence("s", 40, rng);
        const Structure folded = mock_fold(s);
        std::ostringstream out;
        write_pdb_ca(folded, out, &s);
        std::istringstream in(out.str());
        const Structure reparsed = parse_pdb_ca(in, s.id());
        CHECK(reparsed.ca == folded.ca);
        CHECK(*reparsed.plddt == *folded.plddt);
    }
}

TEST_SUITE("subprocess folder") {
    TEST_CASE("stub echoing a PDB round-trips through the protocol") {
        testsup::TempDir dir("subproc");
        const auto script = write_length_stub(dir.path());
        const Sequence s = Sequence::from_string("x", "NKAV");
        const std::string tmpl = "/bin/sh " + script.string() + " {fasta} {out}";
        const Structure folded = subprocess_fold(s, tmpl, dir.path());
        REQUIRE(folded.size() == 4);
        CHECK(folded.ca(0, 0) == 1.0);
        CHECK(folded.ca(0, 3) == 4.0);
        CHECK((*folded.plddt)(0) == 50.0);

        SUBCASE("and the oracle wrapper passes conformance") {
            check_oracle_conformance(SubprocessFolder(tmpl, dir.path()), s);
        }
    }

    TEST_CASE("nonzero exit carries the stub's output") {
        testsup::TempDir dir("subproc_fail");
        const std::filesystem::path script = dir.path() / "fail.sh";
        testsup::write_file(script, "#!/bin/sh\necho 'mock predictor exploded' >&2\nexit 1\n");
        const Sequence s = Sequence::from_string("x", "NK");
        try {
            subprocess_fold(s, "/bin/sh " + script.string() + " {fasta} {out}", dir.path());
            FAIL("expected an error");
        } catch (const Error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("exit code 1") != std::string::npos);
            CHECK(msg.find("mock predictor exploded") != std::string::npos);
        }
    }

    TEST_CASE("emitting n-1 residues is a length-mismatch error") {
        testsup::TempDir dir("subproc_short");
        const std::filesystem::path script = dir.path() / "short.sh";
        testsup::write_file(
            script,
            "#!/bin/sh\n"
            "printf 'ATOM      1  CA  GLY A   1       1.000   0.000   0.000  1.00 50.00"
            "           C\\n' > \"$2\"\n");
        const Sequence s = Sequence::from_string("x", "NK");
        CHECK_THROWS_AS(
            subprocess_fold(s, "/bin/sh " + script.string() + " {fasta} {out}", dir.path()), Error);
    }

    TEST_CASE("template without placeholders is rejected") {
        testsup::TempDir dir("subproc_tmpl");
        const Sequence s = Sequence::from_string("x", "NK");
        CHECK_THROWS_AS(subprocess_fold(s, "echo hello", dir.path()), Error);
        CHECK_THROWS_AS(SubprocessFolder("echo {fasta}", dir.path()), Error);
    }

    TEST_CASE("timeout kills a hung folder") {
        testsup::TempDir dir("subproc_hang");
        const std::filesystem::path script = dir.path() / "hang.sh";
        testsup::write_file(script, "#!/bin/sh\nsleep 30\n");
        const Sequence s = Sequence::from_string("x", "NK");
        try {
            subprocess_fold(s, "/bin/sh " + script.string() + " {fasta} {out}", dir.path(), 0.3);
            FAIL("expected a timeout error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("timed out") != std::string::npos);
        }
    }
}

TEST_SUITE("cached folder") {
    TEST_CASE("two folds of the same sequence invoke the inner oracle once") {
        testsup::TempDir dir("cache_once");
        auto counting = std::make_shared<CountingOracle>();
        CachedFolder cached(counting, dir.path());
        const Sequence s = Sequence::from_string("x", "ARNDARND");
        const Structure a = cached.fold(s);
        const Structure b = cached.fold(s);
        CHECK(counting->folds == 1);
        CHECK(a.ca == b.ca);
        CHECK(*a.plddt == *b.plddt);
    }

    TEST_CASE("cache entries persist across instances") {
        testsup::TempDir dir("cache_persist");
        const Sequence s = Sequence::from_string("x", "GGGGVVVV");
        {
            CachedFolder first(std::make_shared<MockFolder>(), dir.path());
            first.fold(s);
        }
        auto counting = std::make_shared<CountingOracle>();
        CachedFolder second(counting, dir.path());
        const Structure cached_hit = second.fold(s);
        CHECK(counting->folds == 0);  // served from disk, never folded
        CHECK(cached_hit.ca == MockFolder{}.fold(s).ca);
    }

    TEST_CASE("cached results are observationally identical to the inner oracle") {
        testsup::TempDir dir("cache_identity");
        SplitMix64 rng(331);
        const MockFolder raw;
        CachedFolder cached(std::make_shared<MockFolder>(), dir.path());
        for (int i = 0; i < 5; ++i) {
            const Sequence s = testsup::random_sequence("s" + std::to_string(i),
                                                        5 + static_cast<int>(rng.below(60)), rng);
            const Structure direct = raw.fold(s);
            const Structure miss_result = cached.fold(s);
            const Structure hit_result = cached.fold(s);
            CHECK(direct.ca == miss_result.ca);
            CHECK(direct.ca == hit_result.ca);
            CHECK(*direct.plddt == *hit_result.plddt);
        }
    }

    TEST_CASE("a corrupt entry is refolded and overwritten") {
        testsup::TempDir dir("cache_corrupt");
        auto counting = std::make_shared<CountingOracle>();
        CachedFolder cached(counting, dir.path());
        const Sequence s = Sequence::from_string("x", "MKVLAW");
        const Structure good = cached.fold(s);
        CHECK(counting->folds == 1);

        testsup::write_file(cached.entry_path(s), "this is not a pdb\n");
        const Structure refolded = cached.fold(s);
        CHECK(counting->folds == 2);
        CHECK(refolded.ca == good.ca);
        const Structure repaired = cached.fold(s);
        CHECK(counting->folds == 2);  // entry is healthy again
        CHECK(repaired.ca == good.ca);
    }

    TEST_CASE("an unusable cache directory fails at construction") {
        testsup::TempDir dir("cache_bad");
        const std::filesystem::path blocker = dir.path() / "file_not_dir";
        testsup::write_file(blocker, "occupied\n");
        CHECK_THROWS_AS(CachedFolder(std::make_shared<MockFolder>(), blocker), Error);
    }

    TEST_CASE("cache keys separate different oracle tags") {
        testsup::TempDir dir("cache_tags");
        const Sequence s = Sequence::from_string("x", "AAAA");
        MockFolderParams other;
        other.displacement_amplitude = 1.0;
        CachedFolder a(std::make_shared<MockFolder>(), dir.path());
        CachedFolder b(std::make_shared<MockFolder>(other), dir.path());
        CHECK(a.entry_path(s) != b.entry_path(s));
        CHECK(a.fold(s).ca != b.fold(s).ca);
    }

    TEST_CASE("cached folder passes oracle conformance") {
        testsup::TempDir dir("cache_conf");
        SplitMix64 rng(337);
        CachedFolder cached(std::make_shared<MockFolder>(), dir.path());
        check_oracle_conformance(cached, testsup::random_sequence("s", 33, rng));
    }
}
