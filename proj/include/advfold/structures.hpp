#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "advfold/error.hpp"
#include "advfold/geometry.hpp"
#include "advfold/sequences.hpp"

namespace advfold {

/// Ordered C-alpha trace in Angstroms (one column per residue) plus optional
/// per-residue confidence in [0,100].
struct Structure {
    std::string id;
    Eigen::Matrix3Xd ca;
    std::optional<Eigen::VectorXd> plddt;

    Eigen::Index size() const noexcept { return ca.cols(); }
};

/// Throws unless n >= 1, every coordinate is finite, and plddt (when present)
/// has one value per residue within [0,100].
void validate_structure(const Structure& s);

/// The four distance cutoffs of the global distance test, in Angstroms.
struct GdtMode {
    std::array<double, 4> thresholds;

    static const GdtMode& ts();  // 1, 2, 4, 8
    static const GdtMode& ha();  // 0.5, 1, 2, 4
};

/// Result of superposing a mobile structure onto a target, with the set of
/// residue pairs that survived outlier rejection.
struct Superposition {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::vector<Eigen::Index> kept;   // sorted residue indices used by the final fit
    int cycles_used = 0;              // rejection cycles actually performed
    double rmsd_kept = 0.0;           // over kept pairs
    double rmsd_all = 0.0;            // over all pairs under the same transform

    Eigen::Matrix3Xd apply(const Eigen::Matrix3Xd& points) const {
        return (rotation * points).colwise() + translation;
    }
};

/// How a pair counts as an outlier: deviation > cutoff * current kept-RMSD, or
/// deviation > cutoff Angstroms.
enum class OutlierRule { relative_to_rmsd, absolute_angstrom };

/// Reads one C-alpha per residue from fixed-column ATOM records (first MODEL,
/// all chains in file order). altLoc other than blank or 'A' is skipped; the
/// B-factor column is read into plddt when present anywhere in the file.
Structure parse_pdb_ca(std::istream& in, std::string id = "");
Structure parse_pdb_ca_file(const std::filesystem::path& path);

/// Minimal PDB emission, coordinates at 3 decimals, pLDDT in the B-factor
/// column at 2 decimals. Residue names come from `sequence` when given, GLY
/// otherwise.
void write_pdb_ca(const Structure& s, std::ostream& out, const Sequence* sequence = nullptr);
void write_pdb_ca_file(const Structure& s, const std::filesystem::path& path,
                       const Sequence* sequence = nullptr);

/// Kabsch superposition of `mobile` onto `target` with bounded outlier
/// rejection cycles. Cycle 0 fits all pairs; each later cycle drops pairs
/// whose deviation exceeds the rule's threshold, then refits; stops when
/// nothing is dropped or max_cycles is reached. max_cycles = 0 disables
/// rejection entirely.
Superposition superpose(const Structure& target, const Structure& mobile, double cutoff = 2.0,
                        int max_cycles = 5, OutlierRule rule = OutlierRule::relative_to_rmsd);

/// RMSD over all residues; `mobile_aligned` must already be in the target frame.
double rmsd(const Structure& target, const Structure& mobile_aligned);

/// Global distance test over all residues, strict '<' per threshold.
double gdt(const Structure& target, const Structure& mobile_aligned, const GdtMode& mode);

struct RegionGdt {
    double gdt = 0.0;
    double weight = 0.0;        // region size / n
    Eigen::Index residues = 0;  // region size
};

/// GDT restricted to the four confidence regions of the target's pLDDT:
/// R1 (90,100], R2 (70,90], R3 (50,70], R4 [0,50]. Empty regions are absent.
std::array<std::optional<RegionGdt>, 4> gdt_by_confidence_region(const Structure& target,
                                                                 const Structure& mobile_aligned,
                                                                 const GdtMode& mode);

}  // namespace advfold
