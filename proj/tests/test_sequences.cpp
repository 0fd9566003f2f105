#include "doctest.h"

#include <fstream>
#include <sstream>

#include "advfold/sequences.hpp"
#include "test_support.hpp"

using namespace advfold;

TEST_SUITE("amino acids") {
    TEST_CASE("only the 20 canonical codes are representable") {
        CHECK(AminoAcid::from_char('A').code() == 'A');
        CHECK(AminoAcid::from_char('v').code() == 'V');  // lowercase accepted
        CHECK(!AminoAcid::try_from_char('B'));
        CHECK(!AminoAcid::try_from_char('Z'));
        CHECK(!AminoAcid::try_from_char('X'));
        CHECK(!AminoAcid::try_from_char('U'));
        CHECK(!AminoAcid::try_from_char('O'));
        CHECK(!AminoAcid::try_from_char('-'));
        CHECK(!AminoAcid::try_from_char('*'));
        CHECK_THROWS_AS(AminoAcid::from_char('J'), Error);
    }

    TEST_CASE("all_by_code is the sorted alphabet") {
        auto all = AminoAcid::all_by_code();
        REQUIRE(all.size() == 20);
        for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].code() < all[i].code());
    }
}

TEST_SUITE("fasta") {
    TEST_CASE("minimal record") {
        auto seqs = parse_fasta(">x\nNK\n");
        REQUIRE(seqs.size() == 1);
        CHECK(seqs[0].id() == "x");
        CHECK(seqs[0].to_string() == "NK");
    }

    TEST_CASE("records keep file order") {
        auto seqs = parse_fasta(">a\nMA\n>b\nGG\n");
        REQUIRE(seqs.size() == 2);
        CHECK(seqs[0].id() == "a");
        CHECK(seqs[0].to_string() == "MA");
        CHECK(seqs[1].id() == "b");
        CHECK(seqs[1].to_string() == "GG");
    }

    TEST_CASE("residues are uppercased and whitespace ignored") {
        auto seqs = parse_fasta(">x desc here\nma g\n\tgv\n");
        CHECK(seqs[0].id() == "x desc here");
        CHECK(seqs[0].to_string() == "MAGGV");
    }

    TEST_CASE("crlf accepted") {
        auto seqs = parse_fasta(">x\r\nNK\r\n");
        CHECK(seqs[0].to_string() == "NK");
    }

    TEST_CASE("alphabet violation names the record, line and character") {
        try {
            parse_fasta(">x\nMB\n");
            FAIL("expected an error");
        } catch (const Error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("invalid residue 'B'") != std::string::npos);
            CHECK(msg.find("'x'") != std::string::npos);
            CHECK(msg.find("line 2") != std::string::npos);
        }
    }

    TEST_CASE("empty file is an error") { CHECK_THROWS_AS(parse_fasta(""), Error); }

    TEST_CASE("header with empty body is an error") {
        CHECK_THROWS_AS(parse_fasta(">x\n"), Error);
        CHECK_THROWS_AS(parse_fasta(">x\n>y\nMA\n"), Error);
    }

    TEST_CASE("body before header is an error") { CHECK_THROWS_AS(parse_fasta("MA\n"), Error); }

    TEST_CASE("parse after serialize is the identity") {
        SplitMix64 rng(41);
        std::vector<Sequence> original;
        for (int i = 0; i < 8; ++i)
            original.push_back(
                testsup::random_sequence("seq" + std::to_string(i), 1 + static_cast<int>(rng.below(200)), rng));
        const std::string text = serialize_fasta(original);
        const std::vector<Sequence> reparsed = parse_fasta(text);
        REQUIRE(reparsed.size() == original.size());
        for (std::size_t i = 0; i < original.size(); ++i) CHECK(reparsed[i] == original[i]);
    }
}

TEST_SUITE("blosum") {
    TEST_CASE("standard file: N self-score 6, N-K score 0") {
        auto m = load_blosum_file(testsup::fixture("BLOSUM62.txt"));
        const AminoAcid n = AminoAcid::from_char('N');
        const AminoAcid k = AminoAcid::from_char('K');
        CHECK(m.score(n, n) == 6);
        CHECK(m.score(n, k) == 0);
        CHECK(m.substitution_cost(n, k) == 6);
    }

    TEST_CASE("loaded file equals the embedded default on every canonical cell") {
        auto loaded = load_blosum_file(testsup::fixture("BLOSUM62.txt"));
        CHECK(loaded.scores() == BlosumMatrix::blosum62().scores());
    }

    TEST_CASE("symmetry holds for all pairs") {
        const auto& m = BlosumMatrix::blosum62();
        for (char a : AminoAcid::alphabet())
            for (char b : AminoAcid::alphabet())
                CHECK(m.score(AminoAcid::from_char(a), AminoAcid::from_char(b)) ==
                      m.score(AminoAcid::from_char(b), AminoAcid::from_char(a)));
    }

    TEST_CASE("missing residue row is an error") {
        std::ifstream in(testsup::fixture("BLOSUM62.txt"));
        std::stringstream filtered;
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("W ", 0) != 0) filtered << line << '\n';
        CHECK_THROWS_AS(load_blosum(filtered), Error);
    }

    TEST_CASE("asymmetry is an error") {
        BlosumMatrix::Scores scores = BlosumMatrix::blosum62().scores();
        scores(0, 1) += 1;
        CHECK_THROWS_AS(BlosumMatrix("broken", scores), Error);
    }

    TEST_CASE("diagonal dominance violation is an error") {
        BlosumMatrix::Scores scores = BlosumMatrix::blosum62().scores();
        scores(0, 1) = scores(0, 0);  // tie with the diagonal
        scores(1, 0) = scores(0, 0);
        CHECK_THROWS_AS(BlosumMatrix("flat", scores), Error);
    }
}

TEST_SUITE("seq_distance") {
    TEST_CASE("identity distance is zero") {
        SplitMix64 rng(7);
        for (int i = 0; i < 20; ++i) {
            const Sequence s = testsup::random_sequence("s", 1 + static_cast<int>(rng.below(50)), rng);
            CHECK(seq_distance(s, s, BlosumMatrix::blosum62()) == 0);
            CHECK(hamming(s, s) == 0);
        }
    }

    TEST_CASE("all-N with k positions changed to K costs 6k") {
        for (int k = 1; k <= 5; ++k) {
            const Sequence base = Sequence::from_string("base", std::string(12, 'N'));
            std::string mutated(12, 'N');
            for (int i = 0; i < k; ++i) mutated[static_cast<std::size_t>(2 * i)] = 'K';
            const Sequence other = Sequence::from_string("other", mutated);
            CHECK(seq_distance(base, other, BlosumMatrix::blosum62()) == 6 * k);
        }
    }

    TEST_CASE("10-residue sequence with 3 substitutions matches the per-position oracle") {
        const Sequence s = Sequence::from_string("s", "ARNDCQEGHI");
        const Sequence t = Sequence::from_string("t", "AWNDCQKGHV");
        const auto& m = BlosumMatrix::blosum62();
        // independent one-line oracle: per-position self minus substitution
        int expected = 0;
        for (int i = 0; i < s.size(); ++i)
            expected += m.score(s[i], s[i]) - m.score(s[i], t[i]);
        CHECK(seq_distance(s, t, m) == expected);
        CHECK(expected == 13);  // frozen: (R->W)=8, (E->K)=4, (I->V)=1
    }

    TEST_CASE("positivity and identity-of-indiscernibles under BLOSUM62") {
        SplitMix64 rng(11);
        const auto& m = BlosumMatrix::blosum62();
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + static_cast<int>(rng.below(30));
            const Sequence a = testsup::random_sequence("a", n, rng);
            const Sequence b = testsup::random_sequence("b", n, rng);
            const int d = seq_distance(a, b, m);
            CHECK(d >= 0);
            CHECK((d == 0) == (a.to_string() == b.to_string()));
        }
    }

    TEST_CASE("distance decomposes per position") {
        SplitMix64 rng(13);
        const auto& m = BlosumMatrix::blosum62();
        const Sequence s = testsup::random_sequence("s", 25, rng);
        Sequence multi = s;
        int sum_of_singles = 0;
        for (int pos : {3, 11, 19}) {
            const AminoAcid replacement =
                s[pos].code() == 'C' ? AminoAcid::from_char('D') : AminoAcid::from_char('C');
            sum_of_singles += seq_distance(s, s.with_residue(pos, replacement), m);
            multi = multi.with_residue(pos, replacement);
        }
        CHECK(seq_distance(s, multi, m) == sum_of_singles);
    }

    TEST_CASE("length mismatch is an error") {
        const Sequence a = Sequence::from_string("a", "MA");
        const Sequence b = Sequence::from_string("b", "MAG");
        CHECK_THROWS_AS(seq_distance(a, b, BlosumMatrix::blosum62()), Error);
        CHECK_THROWS_AS(hamming(a, b), Error);
    }
}

TEST_SUITE("hamming") {
    TEST_CASE("direct count") {
        const Sequence a = Sequence::from_string("a", "NNNN");
        const Sequence b = Sequence::from_string("b", "NKNK");
        CHECK(hamming(a, b) == 2);
    }

    TEST_CASE("perturbations changing 4/5/6/7 residues have that exact hamming") {
        SplitMix64 rng(17);
        const Sequence s = testsup::random_sequence("s", 40, rng);
        for (int changes : {4, 5, 6, 7}) {
            const std::vector<int> positions = rng.distinct_below(s.size(), changes);
            Sequence mutated = s;
            for (int pos : positions) {
                int pick = static_cast<int>(rng.below(AminoAcid::kCount - 1));
                if (pick >= s[pos].index()) ++pick;
                mutated = mutated.with_residue(
                    pos, AminoAcid::from_char(AminoAcid::alphabet()[static_cast<std::size_t>(pick)]));
            }
            CHECK(hamming(s, mutated) == changes);
        }
    }
}
