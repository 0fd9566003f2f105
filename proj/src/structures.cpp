#include "advfold/structures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

namespace advfold {

void validate_structure(const Structure& s) {
    if (s.size() < 1) throw Error("structure '" + s.id + "' has no residues");
    if (!s.ca.allFinite()) throw Error("structure '" + s.id + "' has non-finite coordinates");
    if (s.plddt) {
        if (s.plddt->size() != s.size())
            throw Error("structure '" + s.id + "': plddt length " +
                        std::to_string(s.plddt->size()) + " != " + std::to_string(s.size()));
        if ((s.plddt->array() < 0.0).any() || (s.plddt->array() > 100.0).any())
            throw Error("structure '" + s.id + "': plddt outside [0,100]");
    }
}

const GdtMode& GdtMode::ts() {
    static const GdtMode mode{{1.0, 2.0, 4.0, 8.0}};
    return mode;
}

const GdtMode& GdtMode::ha() {
    static const GdtMode mode{{0.5, 1.0, 2.0, 4.0}};
    return mode;
}

namespace {

// fixed PDB columns, 0-based [begin, end)
std::string field(const std::string& line, std::size_t begin, std::size_t end) {
    if (line.size() <= begin) return "";
    return line.substr(begin, std::min(end, line.size()) - begin);
}

std::string trimmed(std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    return s;
}

double parse_coord(const std::string& text, int line_number, const char* what) {
    const std::string t = trimmed(text);
    if (t.empty())
        throw Error(std::string("pdb: missing ") + what + " field (line " +
                    std::to_string(line_number) + ")");
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &consumed);
    } catch (const std::exception&) {
        throw Error(std::string("pdb: malformed ") + what + " field '" + t + "' (line " +
                    std::to_string(line_number) + ")");
    }
    if (consumed != t.size())
        throw Error(std::string("pdb: malformed ") + what + " field '" + t + "' (line " +
                    std::to_string(line_number) + ")");
    return value;
}

}  // namespace

Structure parse_pdb_ca(std::istream& in, std::string id) {
    std::vector<Eigen::Vector3d> coords;
    std::vector<double> bfactors;
    bool any_bfactor = false;
    // residue identity = (chain, resSeq, iCode); guards duplicate CA records
    std::set<std::tuple<char, std::string, char>> seen;

    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string record = field(line, 0, 6);
        if (record.rfind("ENDMDL", 0) == 0) break;  // first MODEL only
        if (record != "ATOM  ") continue;

        const std::string atom_name = trimmed(field(line, 12, 16));
        if (atom_name != "CA") continue;

        const char alt_loc = line.size() > 16 ? line[16] : ' ';
        if (alt_loc != ' ' && alt_loc != 'A') continue;

        const char chain = line.size() > 21 ? line[21] : ' ';
        const std::string res_seq = trimmed(field(line, 22, 26));
        const char i_code = line.size() > 26 ? line[26] : ' ';
        if (!seen.insert({chain, res_seq, i_code}).second)
            throw Error("pdb: duplicate CA for residue " + std::string(1, chain) + res_seq +
                        " (line " + std::to_string(line_number) + ")");

        coords.emplace_back(parse_coord(field(line, 30, 38), line_number, "x"),
                            parse_coord(field(line, 38, 46), line_number, "y"),
                            parse_coord(field(line, 46, 54), line_number, "z"));

        const std::string b = trimmed(field(line, 60, 66));
        if (b.empty()) {
            bfactors.push_back(0.0);
        } else {
            bfactors.push_back(parse_coord(b, line_number, "B-factor"));
            any_bfactor = true;
        }
    }

    if (coords.empty()) throw Error("pdb: no CA atoms found" + (id.empty() ? "" : " in " + id));

    Structure s;
    s.id = std::move(id);
    s.ca.resize(3, static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) s.ca.col(static_cast<Eigen::Index>(i)) = coords[i];
    if (any_bfactor) {
        Eigen::VectorXd plddt(static_cast<Eigen::Index>(bfactors.size()));
        for (std::size_t i = 0; i < bfactors.size(); ++i)
            plddt(static_cast<Eigen::Index>(i)) = bfactors[i];
        s.plddt = std::move(plddt);
    }
    validate_structure(s);
    return s;
}

Structure parse_pdb_ca_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pdb file: " + path.string());
    return parse_pdb_ca(in, path.stem().string());
}

namespace {

const char* three_letter(AminoAcid aa) {
    switch (aa.code()) {
        case 'A': return "ALA";
        case 'R': return "ARG";
        case 'N': return "ASN";
        case 'D': return "ASP";
        case 'C': return "CYS";
        case 'Q': return "GLN";
        case 'E': return "GLU";
        case 'G': return "GLY";
        case 'H': return "HIS";
        case 'I': return "ILE";
        case 'L': return "LEU";
        case 'K': return "LYS";
        case 'M': return "MET";
        case 'F': return "PHE";
        case 'P': return "PRO";
        case 'S': return "SER";
        case 'T': return "THR";
        case 'W': return "TRP";
        case 'Y': return "TYR";
        case 'V': return "VAL";
    }
    return "UNK";
}

}  // namespace

void write_pdb_ca(const Structure& s, std::ostream& out, const Sequence* sequence) {
    if (sequence && sequence->size() != s.size())
        throw Error("write_pdb_ca: sequence length != structure length");
    char buf[96];
    char bfactor[8];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const char* res_name = sequence ? three_letter((*sequence)[static_cast<int>(i)]) : "GLY";
        if (s.plddt)
            std::snprintf(bfactor, sizeof(bfactor), "%6.2f", (*s.plddt)(i));
        else
            std::snprintf(bfactor, sizeof(bfactor), "      ");  // absence survives a round trip
        std::snprintf(buf, sizeof(buf),
                      "ATOM  %5d  CA  %3s A%4d    %8.3f%8.3f%8.3f  1.00%s           C",
                      static_cast<int>(i + 1) % 100000, res_name, static_cast<int>(i + 1) % 10000,
                      s.ca(0, i), s.ca(1, i), s.ca(2, i), bfactor);
        out << buf << '\n';
    }
    out << "TER\nEND\n";
}

void write_pdb_ca_file(const Structure& s, const std::filesystem::path& path,
                       const Sequence* sequence) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write pdb file: " + path.string());
    write_pdb_ca(s, out, sequence);
}

namespace {

Eigen::Matrix3Xd select_columns(const Eigen::Matrix3Xd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
    return out;
}

}  // namespace

Superposition superpose(const Structure& target, const Structure& mobile, double cutoff,
                        int max_cycles, OutlierRule rule) {
    const Eigen::Index n = target.size();
    if (mobile.size() != n)
        throw Error("superpose: length mismatch (" + std::to_string(n) + " vs " +
                    std::to_string(mobile.size()) + ")");
    if (n < 3) throw Error("superpose: need at least 3 residues for a well-posed rotation");
    if (cutoff <= 0.0) throw Error("superpose: cutoff must be positive");
    if (max_cycles < 0) throw Error("superpose: max_cycles must be non-negative");

    std::vector<Eigen::Index> kept(static_cast<std::size_t>(n));
    std::iota(kept.begin(), kept.end(), Eigen::Index{0});

    RigidTransformd fit = kabsch_fit(target.ca, mobile.ca);
    Eigen::Matrix3Xd moved_kept = fit.apply(mobile.ca);
    Eigen::Matrix3Xd target_kept = target.ca;
    double rmsd_kept = rmsd_between(target_kept, moved_kept);

    // deviations below this are numerical noise, never real outliers
    constexpr double kNoiseFloor = 1e-8;

    int cycles = 0;
    while (cycles < max_cycles) {
        const double threshold = rule == OutlierRule::relative_to_rmsd
                                     ? std::max(cutoff * rmsd_kept, kNoiseFloor)
                                     : cutoff;
        const Eigen::VectorXd deviations = (target_kept - moved_kept).colwise().norm();
        std::vector<Eigen::Index> survivors;
        survivors.reserve(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (deviations(static_cast<Eigen::Index>(i)) <= threshold) survivors.push_back(kept[i]);
        if (survivors.size() == kept.size()) break;
        if (survivors.size() < 3)
            throw Error("superpose: fewer than 3 pairs kept after outlier rejection");
        kept = std::move(survivors);
        target_kept = select_columns(target.ca, kept);
        fit = kabsch_fit(target_kept, select_columns(mobile.ca, kept));
        moved_kept = fit.apply(select_columns(mobile.ca, kept));
        rmsd_kept = rmsd_between(target_kept, moved_kept);
        ++cycles;
    }

    Superposition result;
    result.rotation = fit.rotation;
    result.translation = fit.translation;
    result.kept = std::move(kept);
    result.cycles_used = cycles;
    result.rmsd_kept = rmsd_kept;
    result.rmsd_all = rmsd_between(target.ca, fit.apply(mobile.ca));
    return result;
}

double rmsd(const Structure& target, const Structure& mobile_aligned) {
    if (target.size() != mobile_aligned.size())
        throw Error("rmsd: length mismatch (" + std::to_string(target.size()) + " vs " +
                    std::to_string(mobile_aligned.size()) + ")");
    return rmsd_between(target.ca, mobile_aligned.ca);
}

double gdt(const Structure& target, const Structure& mobile_aligned, const GdtMode& mode) {
    if (target.size() != mobile_aligned.size())
        throw Error("gdt: length mismatch (" + std::to_string(target.size()) + " vs " +
                    std::to_string(mobile_aligned.size()) + ")");
    return gdt_between(target.ca, mobile_aligned.ca, mode.thresholds);
}

std::array<std::optional<RegionGdt>, 4> gdt_by_confidence_region(const Structure& target,
                                                                 const Structure& mobile_aligned,
                                                                 const GdtMode& mode) {
    if (!target.plddt) throw Error("gdt_by_confidence_region: target has no plddt");
    if (target.size() != mobile_aligned.size())
        throw Error("gdt_by_confidence_region: length mismatch");

    const Eigen::VectorXd& plddt = *target.plddt;
    const Eigen::Index n = target.size();

    auto region_of = [](double v) {
        if (v > 90.0) return 0;  // R1 (90,100]
        if (v > 70.0) return 1;  // R2 (70,90]
        if (v > 50.0) return 2;  // R3 (50,70]
        return 3;                // R4 [0,50]
    };

    std::array<std::vector<Eigen::Index>, 4> members;
    for (Eigen::Index i = 0; i < n; ++i)
        members[static_cast<std::size_t>(region_of(plddt(i)))].push_back(i);

    std::array<std::optional<RegionGdt>, 4> result;
    for (std::size_t r = 0; r < 4; ++r) {
        if (members[r].empty()) continue;
        const Eigen::Matrix3Xd t = select_columns(target.ca, members[r]);
        const Eigen::Matrix3Xd m = select_columns(mobile_aligned.ca, members[r]);
        RegionGdt region;
        region.gdt = gdt_between(t, m, mode.thresholds);
        region.residues = static_cast<Eigen::Index>(members[r].size());
        region.weight = static_cast<double>(region.residues) / static_cast<double>(n);
        result[r] = region;
    }
    return result;
}

}  // namespace advfold
