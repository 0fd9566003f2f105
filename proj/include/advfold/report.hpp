#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advfold/attack.hpp"

namespace advfold {

/// Everything needed to re-run an attack bit-identically, persisted as flat
/// key=value text next to the CSVs.
struct RunManifest {
    std::string toolkit_version;
    std::string created_utc;  // informational; not part of the replay contract
    std::string fasta_path;
    std::string fasta_hash;  // FNV-1a of the input bytes, hex
    std::string oracle_spec; // "mock" or "cmd:<template>"
    std::string cache_dir;
    int blosum_budget = 20;
    int hamming_budget = 5;
    bool exact = false;
    int samples = 20;
    std::uint64_t seed = 0;
    std::string position_strategy = "uniform";  // uniform | min | avg | max
    std::string objective = "rmsd";             // rmsd | gdt_ts_negated
    double align_cutoff = 2.0;
    int align_cycles = 5;
    std::string align_rule = "relative";  // relative | absolute
    int jobs = 1;
    std::string timing = "off";  // off | wall
    double fold_timeout_sec = 0.0;

    void write(std::ostream& out) const;
    static RunManifest read(std::istream& in);
    static RunManifest read_file(const std::filesystem::path& path);
};

struct AttackCmdOptions {
    std::filesystem::path fasta;
    std::filesystem::path out_dir;
    std::string oracle_spec = "mock";
    std::string cache_dir;  // empty = no cache
    int blosum_budget = 20;
    int hamming_budget = 5;
    bool exact = false;
    int samples = 20;
    std::uint64_t seed = 0;
    std::optional<ConfidenceCategory> confidence_strategy;  // nullopt = uniform positions
    Objective objective = Objective::rmsd;
    double align_cutoff = 2.0;
    int align_cycles = 5;
    bool align_absolute = false;  // absolute-Angstrom outlier rule instead of relative
    int jobs = 1;
    bool wall_timing = false;  // when false every run-time cell is 0.0000 (byte-stable output)
    double fold_timeout_sec = 0.0;
    bool dump_pdb = false;  // write original + best structures per sequence
    std::optional<std::filesystem::path> replay_manifest;
};

/// Runs the attack over every FASTA record and writes results.csv,
/// confidence.csv, regions.csv, summary.csv and run.manifest into out_dir.
/// A per-sequence failure marks its row failed and the final exit is nonzero.
int cmd_attack(AttackCmdOptions options, std::ostream& log);

struct MetricsCmdOptions {
    std::filesystem::path target_pdb;
    std::filesystem::path mobile_pdb;
    double align_cutoff = 2.0;
    int align_cycles = 5;
    bool align_absolute = false;
    bool key_value_output = false;  // machine-readable key=value lines
};

/// Superposes mobile onto target and prints RMSD (all/kept), GDT-TS, GDT-HA,
/// cycles used and kept count.
int cmd_metrics(const MetricsCmdOptions& options, std::ostream& out, std::ostream& err);

struct ReduceCmdOptions {
    std::filesystem::path graph_file;
    int k = 1;
};

/// Builds the reduced instance, decides feasibility exhaustively, and checks
/// it against the independent clique brute force. Exit 0 when the verdicts
/// agree, 2 when they disagree (an implementation bug), 1 on input errors.
int cmd_reduce(const ReduceCmdOptions& options, std::ostream& out, std::ostream& err);

struct NeighborhoodCmdOptions {
    std::filesystem::path fasta;
    int blosum_budget = 20;
    int hamming_budget = 5;
    bool exact = false;
    int count = 10;
    std::uint64_t seed = 0;
};

/// Emits FASTA of sampled neighbors with the sequence and Hamming distances
/// annotated in each header.
int cmd_neighborhood(const NeighborhoodCmdOptions& options, std::ostream& out, std::ostream& err);

/// 4-decimal fixed-point text of v ("-0.0000" normalized to "0.0000").
std::string fmt4(double v);

}  // namespace advfold
