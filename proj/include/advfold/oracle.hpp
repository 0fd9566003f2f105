#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "advfold/sequences.hpp"
#include "advfold/structures.hpp"

namespace advfold {

/// Black-box folding oracle: sequence in, C-alpha structure with pLDDT out.
/// Implementations must be deterministic (fold(S) twice yields bit-identical
/// Structures) and length-preserving (output has one residue per input
/// residue). reentrant() declares whether concurrent fold calls are permitted.
class FoldingOracle {
public:
    virtual ~FoldingOracle() = default;

    virtual Structure fold(const Sequence& s) const = 0;
    virtual bool reentrant() const = 0;

    /// Stable identity string; part of the persistent cache key.
    virtual std::string tag() const = 0;
};

/// Mock folder parameters. The displacement amplitude is tuned so single
/// substitutions move the trace by fractions of an Angstrom to a few
/// Angstroms on realistic lengths; the exact constants are arbitrary.
struct MockFolderParams {
    int window_radius = 4;                // residues on each side that influence a coordinate
    double displacement_amplitude = 3.0;  // Angstroms
    double helix_rise = 1.5;              // Angstroms per residue
    double helix_radius = 2.3;            // Angstroms
    double helix_turn_deg = 100.0;        // degrees per residue
};

/// Deterministic stand-in for a real predictor. Residue i sits on an ideal
/// helix plus a displacement derived from a seeded 64-bit FNV-1a hash of
/// (i, the residue window around i); pLDDT comes from another slice of the
/// same hash, floored at 30 so every confidence region stays populated.
/// Changing residue j therefore only moves coordinates within the window
/// |i-j| <= window_radius. Outputs are quantized to PDB precision (1e-3 A
/// coordinates, 1e-2 pLDDT) so they survive a PDB round trip bit-exactly.
Structure mock_fold(const Sequence& s, const MockFolderParams& params = {});

class MockFolder final : public FoldingOracle {
public:
    explicit MockFolder(MockFolderParams params = {}) : params_(params) {}

    Structure fold(const Sequence& s) const override { return mock_fold(s, params_); }
    bool reentrant() const override { return true; }
    std::string tag() const override;

    const MockFolderParams& params() const noexcept { return params_; }

private:
    MockFolderParams params_;
};

/// Runs one external folding command. The template must contain {fasta} and
/// {out}; the sequence is written as FASTA, the command run with the
/// placeholders substituted, and {out} parsed as PDB with pLDDT taken from
/// B-factors. Nonzero exit, a length mismatch, or exceeding timeout_sec
/// (0 = no limit) is an error carrying the captured process output.
Structure subprocess_fold(const Sequence& s, const std::string& command_template,
                          const std::filesystem::path& workdir, double timeout_sec = 0.0);

class SubprocessFolder final : public FoldingOracle {
public:
    SubprocessFolder(std::string command_template, std::filesystem::path workdir,
                     double timeout_sec = 0.0);

    Structure fold(const Sequence& s) const override {
        return subprocess_fold(s, command_template_, workdir_, timeout_sec_);
    }
    bool reentrant() const override { return false; }
    std::string tag() const override { return "cmd:" + command_template_; }

private:
    std::string command_template_;
    std::filesystem::path workdir_;
    double timeout_sec_;
};

/// Persistent memoization of another oracle. Key = FNV-1a of (inner tag,
/// residue string); one minimal-PDB file per key under cache_dir. A corrupt
/// entry is treated as a miss and overwritten; an unwritable directory is an
/// error at construction. Because conforming oracles emit PDB-precision
/// values, a hit is bit-identical to the original fold.
class CachedFolder final : public FoldingOracle {
public:
    CachedFolder(std::shared_ptr<const FoldingOracle> inner, std::filesystem::path cache_dir);

    Structure fold(const Sequence& s) const override;
    bool reentrant() const override { return inner_->reentrant(); }
    std::string tag() const override { return inner_->tag(); }

    std::filesystem::path entry_path(const Sequence& s) const;

private:
    std::shared_ptr<const FoldingOracle> inner_;
    std::filesystem::path cache_dir_;
};

}  // namespace advfold
