#include "advfold/sequences.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

namespace advfold {

std::optional<AminoAcid> AminoAcid::try_from_char(char c) noexcept {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto pos = alphabet().find(upper);
    if (pos == std::string_view::npos) return std::nullopt;
    return AminoAcid(static_cast<std::uint8_t>(pos));
}

AminoAcid AminoAcid::from_char(char c) {
    auto aa = try_from_char(c);
    if (!aa) throw Error(std::string("invalid residue '") + c + "'");
    return *aa;
}

std::span<const AminoAcid> AminoAcid::all_by_code() {
    static const std::vector<AminoAcid> sorted = [] {
        std::vector<AminoAcid> v;
        for (char c : alphabet()) v.push_back(from_char(c));
        std::sort(v.begin(), v.end(),
                  [](AminoAcid a, AminoAcid b) { return a.code() < b.code(); });
        return v;
    }();
    return sorted;
}

Sequence::Sequence(std::string id, std::vector<AminoAcid> residues)
    : id_(std::move(id)), residues_(std::move(residues)) {
    if (residues_.empty()) throw Error("sequence '" + id_ + "' has no residues");
}

Sequence Sequence::from_string(std::string id, std::string_view residues) {
    std::vector<AminoAcid> parsed;
    parsed.reserve(residues.size());
    for (char c : residues) parsed.push_back(AminoAcid::from_char(c));
    return Sequence(std::move(id), std::move(parsed));
}

std::string Sequence::to_string() const {
    std::string out;
    out.reserve(residues_.size());
    for (AminoAcid aa : residues_) out.push_back(aa.code());
    return out;
}

Sequence Sequence::with_residue(int position, AminoAcid replacement) const {
    std::vector<AminoAcid> copy = residues_;
    copy.at(static_cast<std::size_t>(position)) = replacement;
    return Sequence(id_, std::move(copy));
}

BlosumMatrix::BlosumMatrix(std::string name, const Scores& scores)
    : name_(std::move(name)), scores_(scores) {
    for (int i = 0; i < AminoAcid::kCount; ++i) {
        for (int j = 0; j < AminoAcid::kCount; ++j) {
            if (scores_(i, j) != scores_(j, i)) {
                throw Error("matrix '" + name_ + "' is not symmetric at (" +
                            std::string(1, AminoAcid::alphabet()[i]) + "," +
                            std::string(1, AminoAcid::alphabet()[j]) + ")");
            }
            if (i != j && scores_(i, i) <= scores_(i, j)) {
                throw Error("matrix '" + name_ + "' violates diagonal dominance: score(" +
                            std::string(1, AminoAcid::alphabet()[i]) + "," +
                            std::string(1, AminoAcid::alphabet()[i]) + ") <= score(" +
                            std::string(1, AminoAcid::alphabet()[i]) + "," +
                            std::string(1, AminoAcid::alphabet()[j]) + ")");
            }
        }
    }
}

namespace {

// Standard published BLOSUM62 over ARNDCQEGHILKMFPSTWYV.
constexpr int kBlosum62[20][20] = {
    // A   R   N   D   C   Q   E   G   H   I   L   K   M   F   P   S   T   W   Y   V
    {4, -1, -2, -2, 0, -1, -1, 0, -2, -1, -1, -1, -1, -2, -1, 1, 0, -3, -2, 0},      // A
    {-1, 5, 0, -2, -3, 1, 0, -2, 0, -3, -2, 2, -1, -3, -2, -1, -1, -3, -2, -3},      // R
    {-2, 0, 6, 1, -3, 0, 0, 0, 1, -3, -3, 0, -2, -3, -2, 1, 0, -4, -2, -3},          // N
    {-2, -2, 1, 6, -3, 0, 2, -1, -1, -3, -4, -1, -3, -3, -1, 0, -1, -4, -3, -3},     // D
    {0, -3, -3, -3, 9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1},  // C
    {-1, 1, 0, 0, -3, 5, 2, -2, 0, -3, -2, 1, 0, -3, -1, 0, -1, -2, -1, -2},         // Q
    {-1, 0, 0, 2, -4, 2, 5, -2, 0, -3, -3, 1, -2, -3, -1, 0, -1, -3, -2, -2},        // E
    {0, -2, 0, -1, -3, -2, -2, 6, -2, -4, -4, -2, -3, -3, -2, 0, -2, -2, -3, -3},    // G
    {-2, 0, 1, -1, -3, 0, 0, -2, 8, -3, -3, -1, -2, -1, -2, -1, -2, -2, 2, -3},      // H
    {-1, -3, -3, -3, -1, -3, -3, -4, -3, 4, 2, -3, 1, 0, -3, -2, -1, -3, -1, 3},     // I
    {-1, -2, -3, -4, -1, -2, -3, -4, -3, 2, 4, -2, 2, 0, -3, -2, -1, -2, -1, 1},     // L
    {-1, 2, 0, -1, -3, 1, 1, -2, -1, -3, -2, 5, -1, -3, -1, 0, -1, -3, -2, -2},      // K
    {-1, -1, -2, -3, -1, 0, -2, -3, -2, 1, 2, -1, 5, 0, -2, -1, -1, -1, -1, 1},      // M
    {-2, -3, -3, -3, -2, -3, -3, -3, -1, 0, 0, -3, 0, 6, -4, -2, -2, 1, 3, -1},      // F
    {-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4, 7, -1, -1, -4, -3, -2}, // P
    {1, -1, 1, 0, -1, 0, 0, 0, -1, -2, -2, 0, -1, -2, -1, 4, 1, -3, -2, -2},         // S
    {0, -1, 0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1, 1, 5, -2, -2, 0},     // T
    {-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1, 1, -4, -3, -2, 11, 2, -3},  // W
    {-2, -2, -2, -3, -2, -1, -2, -3, 2, -1, -1, -2, -1, 3, -3, -2, -2, 2, 7, -2},    // Y
    {0, -3, -3, -3, -1, -2, -2, -3, -3, 3, 1, -2, 1, -1, -2, -2, 0, -3, -2, 4},      // V
};

}  // namespace

const BlosumMatrix& BlosumMatrix::blosum62() {
    static const BlosumMatrix matrix = [] {
        Scores scores;
        for (int i = 0; i < AminoAcid::kCount; ++i)
            for (int j = 0; j < AminoAcid::kCount; ++j) scores(i, j) = kBlosum62[i][j];
        return BlosumMatrix("BLOSUM62", scores);
    }();
    return matrix;
}

namespace {

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<Sequence> parse_fasta(std::istream& in) {
    std::vector<Sequence> sequences;
    std::string line;
    std::string current_id;
    std::vector<AminoAcid> current_residues;
    bool in_record = false;
    int line_number = 0;

    auto flush = [&] {
        if (!in_record) return;
        if (current_residues.empty())
            throw Error("fasta: record '" + current_id + "' has an empty body");
        sequences.emplace_back(current_id, std::move(current_residues));
        current_residues = {};
    };

    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        if (line[0] == '>') {
            flush();
            current_id = line.substr(1);
            while (!current_id.empty() && std::isspace(static_cast<unsigned char>(current_id.back())))
                current_id.pop_back();
            while (!current_id.empty() && std::isspace(static_cast<unsigned char>(current_id.front())))
                current_id.erase(current_id.begin());
            in_record = true;
            continue;
        }
        if (!in_record) throw Error("fasta: residue data before any '>' header (line " +
                                    std::to_string(line_number) + ")");
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            auto aa = AminoAcid::try_from_char(c);
            if (!aa)
                throw Error("fasta: invalid residue '" + std::string(1, c) + "' in record '" +
                            current_id + "' (line " + std::to_string(line_number) + ")");
            current_residues.push_back(*aa);
        }
    }
    flush();
    if (sequences.empty()) throw Error("fasta: no records found");
    return sequences;
}

std::vector<Sequence> parse_fasta(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_fasta(in);
}

std::vector<Sequence> parse_fasta_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open fasta file: " + path.string());
    return parse_fasta(in);
}

std::string serialize_fasta(std::span<const Sequence> sequences, int wrap) {
    if (wrap < 1) wrap = 60;
    std::string out;
    for (const Sequence& s : sequences) {
        out += '>';
        out += s.id();
        out += '\n';
        const std::string body = s.to_string();
        for (std::size_t i = 0; i < body.size(); i += static_cast<std::size_t>(wrap)) {
            out += body.substr(i, static_cast<std::size_t>(wrap));
            out += '\n';
        }
    }
    return out;
}

BlosumMatrix load_blosum(std::istream& in, std::string name) {
    std::string line;
    std::vector<char> header;
    // column index in the file for each canonical residue, -1 = not seen
    std::array<int, AminoAcid::kCount> column_of;
    column_of.fill(-1);
    std::array<std::array<std::optional<int>, AminoAcid::kCount>, AminoAcid::kCount> cells{};

    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || is_blank(line)) continue;
        std::istringstream row(line);
        if (!header_seen) {
            std::string token;
            int column = 0;
            while (row >> token) {
                if (token.size() != 1)
                    throw Error("blosum: malformed header token '" + token + "'");
                header.push_back(token[0]);
                if (auto aa = AminoAcid::try_from_char(token[0]))
                    column_of[static_cast<std::size_t>(aa->index())] = column;
                ++column;
            }
            header_seen = true;
            continue;
        }
        std::string row_label;
        row >> row_label;
        if (row_label.size() != 1)
            throw Error("blosum: malformed row label '" + row_label + "'");
        auto row_aa = AminoAcid::try_from_char(row_label[0]);
        std::vector<int> values;
        int v;
        while (row >> v) values.push_back(v);
        if (values.size() != header.size())
            throw Error("blosum: row '" + row_label + "' has " + std::to_string(values.size()) +
                        " values, header has " + std::to_string(header.size()));
        if (!row_aa) continue;  // B, Z, X, * rows are ignored
        for (int j = 0; j < AminoAcid::kCount; ++j) {
            const int col = column_of[static_cast<std::size_t>(j)];
            if (col >= 0)
                cells[static_cast<std::size_t>(row_aa->index())][static_cast<std::size_t>(j)] =
                    values[static_cast<std::size_t>(col)];
        }
    }
    if (!header_seen) throw Error("blosum: empty input");

    BlosumMatrix::Scores scores;
    for (int i = 0; i < AminoAcid::kCount; ++i) {
        for (int j = 0; j < AminoAcid::kCount; ++j) {
            const auto& cell = cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!cell)
                throw Error(std::string("blosum: missing entry for residue pair (") +
                            AminoAcid::alphabet()[i] + "," + AminoAcid::alphabet()[j] + ")");
            scores(i, j) = *cell;
        }
    }
    return BlosumMatrix(std::move(name), scores);  // symmetry + dominance checked here
}

BlosumMatrix load_blosum_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open matrix file: " + path.string());
    return load_blosum(in, path.filename().string());
}

int seq_distance(const Sequence& reference, const Sequence& other, const BlosumMatrix& matrix) {
    if (reference.size() != other.size())
        throw Error("seq_distance: length mismatch (" + std::to_string(reference.size()) + " vs " +
                    std::to_string(other.size()) + ")");
    int total = 0;
    for (int i = 0; i < reference.size(); ++i)
        total += matrix.substitution_cost(reference[i], other[i]);
    return total;
}

int hamming(const Sequence& a, const Sequence& b) {
    if (a.size() != b.size())
        throw Error("hamming: length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    int count = 0;
    for (int i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++count;
    return count;
}

}  // namespace advfold
