#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advfold/error.hpp"

namespace advfold {

/// One of the 20 canonical amino acids. Construction from any other character
/// fails; ambiguity codes (B, Z, X, U, O) and gaps are rejected outright.
class AminoAcid {
public:
    static constexpr int kCount = 20;

    /// Canonical alphabet in classic substitution-matrix row order.
    static constexpr std::string_view alphabet() { return "ARNDCQEGHILKMFPSTWYV"; }

    static std::optional<AminoAcid> try_from_char(char c) noexcept;

    /// Throws Error for anything outside the 20-letter alphabet.
    static AminoAcid from_char(char c);

    char code() const noexcept { return alphabet()[idx_]; }
    int index() const noexcept { return idx_; }

    /// All residues ordered by single-letter code (A < C < D < ...).
    static std::span<const AminoAcid> all_by_code();

    bool operator==(const AminoAcid&) const = default;
    auto operator<=>(const AminoAcid&) const = default;

private:
    constexpr explicit AminoAcid(std::uint8_t idx) noexcept : idx_(idx) {}
    std::uint8_t idx_;
};

/// Immutable residue string with an identifier. Always non-empty.
class Sequence {
public:
    Sequence(std::string id, std::vector<AminoAcid> residues);

    /// Throws naming the offending character on anything outside the alphabet.
    static Sequence from_string(std::string id, std::string_view residues);

    const std::string& id() const noexcept { return id_; }
    std::span<const AminoAcid> residues() const noexcept { return residues_; }
    int size() const noexcept { return static_cast<int>(residues_.size()); }
    AminoAcid operator[](int i) const noexcept { return residues_[static_cast<std::size_t>(i)]; }

    std::string to_string() const;

    /// Copy with one residue replaced; id is preserved.
    Sequence with_residue(int position, AminoAcid replacement) const;

    bool operator==(const Sequence& other) const noexcept {
        return id_ == other.id_ && residues_ == other.residues_;
    }

private:
    std::string id_;
    std::vector<AminoAcid> residues_;
};

/// 20x20 integer substitution scores. Symmetry and strict diagonal dominance
/// (score(a,a) > score(a,b) for a != b) are enforced at construction; the
/// latter is what makes the sequence distance vanish only on identical
/// sequences.
class BlosumMatrix {
public:
    using Scores = Eigen::Matrix<int, AminoAcid::kCount, AminoAcid::kCount>;

    BlosumMatrix(std::string name, const Scores& scores);

    int score(AminoAcid a, AminoAcid b) const noexcept {
        return scores_(a.index(), b.index());
    }

    /// Per-position term of the sequence distance: score(from,from) - score(from,to).
    int substitution_cost(AminoAcid from, AminoAcid to) const noexcept {
        return score(from, from) - score(from, to);
    }

    const Scores& scores() const noexcept { return scores_; }
    const std::string& name() const noexcept { return name_; }

    /// The standard published BLOSUM62 values, embedded as the default matrix.
    static const BlosumMatrix& blosum62();

private:
    std::string name_;
    Scores scores_;
};

/// FASTA ingestion. One Sequence per '>' header; body lines are concatenated,
/// whitespace ignored, lowercase residues uppercased. CRLF and LF both accepted.
std::vector<Sequence> parse_fasta(std::istream& in);
std::vector<Sequence> parse_fasta(std::string_view text);
std::vector<Sequence> parse_fasta_file(const std::filesystem::path& path);

/// Inverse of parse_fasta; bodies wrapped at `wrap` columns.
std::string serialize_fasta(std::span<const Sequence> sequences, int wrap = 60);

/// Whitespace-separated matrix format used by the standard substitution-matrix
/// distributions: '#' comments, a header row of residue letters, then one row
/// per residue beginning with its letter. Extra rows/columns (B, Z, X, *) are
/// ignored; a missing canonical residue, asymmetry, or a diagonal-dominance
/// violation is an error.
BlosumMatrix load_blosum(std::istream& in, std::string name = "custom");
BlosumMatrix load_blosum_file(const std::filesystem::path& path);

/// Sum over positions of score(r,r) - score(r,r') where r runs over the
/// reference sequence. Deliberately asymmetric in its arguments: pass the
/// original sequence first.
int seq_distance(const Sequence& reference, const Sequence& other, const BlosumMatrix& matrix);

/// Count of differing positions between equal-length sequences.
int hamming(const Sequence& a, const Sequence& b);

}  // namespace advfold
