#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "advfold/report.hpp"
#include "advfold/version.hpp"

namespace {

advfold::Objective parse_objective(const std::string& name) {
    if (name == "rmsd") return advfold::Objective::rmsd;
    if (name == "gdt_ts_negated") return advfold::Objective::gdt_ts_negated;
    throw CLI::ValidationError("--objective", "expected rmsd or gdt_ts_negated");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial-robustness toolkit for protein folding predictors"};
    app.set_version_flag("--version", advfold::kVersion);
    app.require_subcommand(1);

    // ---- attack ----
    advfold::AttackCmdOptions attack;
    std::string attack_objective = "rmsd";
    std::string confidence_strategy;
    std::string manifest_path;
    std::string timing = "off";
    auto* attack_cmd = app.add_subcommand(
        "attack", "Generate adversarial sequences against a folding oracle and report the metrics");
    attack_cmd->add_option("--fasta", attack.fasta, "Input FASTA file");
    attack_cmd->add_option("--out-dir", attack.out_dir, "Output directory for CSVs and manifest")
        ->required();
    attack_cmd->add_option("--oracle", attack.oracle_spec,
                           "Folding oracle: mock or cmd:<template with {fasta} and {out}>");
    attack_cmd->add_option("--cache-dir", attack.cache_dir, "Persistent fold cache directory");
    attack_cmd->add_option("--L", attack.blosum_budget, "Substitution-score budget");
    attack_cmd->add_option("--H", attack.hamming_budget, "Hamming budget");
    attack_cmd->add_flag("--exact", attack.exact, "Require the score budget to be met exactly");
    attack_cmd->add_option("--samples", attack.samples, "Candidates per sequence");
    attack_cmd->add_option("--seed", attack.seed, "Random seed");
    attack_cmd->add_option("--confidence-strategy", confidence_strategy,
                           "Pick changed positions by confidence: min, avg or max");
    attack_cmd->add_option("--objective", attack_objective, "rmsd or gdt_ts_negated");
    attack_cmd->add_option("--align-cutoff", attack.align_cutoff, "Outlier rejection cutoff");
    attack_cmd->add_option("--align-cycles", attack.align_cycles,
                           "Maximum outlier rejection cycles (0 disables rejection)");
    attack_cmd->add_flag("--align-absolute", attack.align_absolute,
                         "Treat the cutoff as absolute Angstroms instead of relative to the RMSD");
    attack_cmd->add_option("--jobs", attack.jobs, "Parallel workers (reentrant oracles only)");
    attack_cmd->add_option("--timing", timing, "off (default, byte-stable outputs) or wall")
        ->check(CLI::IsMember({"off", "wall"}));
    attack_cmd->add_option("--fold-timeout", attack.fold_timeout_sec,
                           "Subprocess fold timeout in seconds (0 = none)");
    attack_cmd->add_flag("--dump-pdb", attack.dump_pdb,
                         "Write original/adversarial structures as PDB");
    attack_cmd->add_option("--manifest", manifest_path,
                           "Replay a previous run from its manifest");

    // ---- metrics ----
    advfold::MetricsCmdOptions metrics;
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Superpose two C-alpha PDB files and print RMSD/GDT");
    metrics_cmd->add_option("target", metrics.target_pdb, "Target (reference) PDB")->required();
    metrics_cmd->add_option("mobile", metrics.mobile_pdb, "Mobile PDB, aligned onto the target")
        ->required();
    metrics_cmd->add_option("--align-cutoff", metrics.align_cutoff, "Outlier rejection cutoff");
    metrics_cmd->add_option("--align-cycles", metrics.align_cycles,
                            "Maximum outlier rejection cycles (0 disables rejection)");
    metrics_cmd->add_flag("--align-absolute", metrics.align_absolute,
                          "Treat the cutoff as absolute Angstroms instead of relative to the RMSD");
    metrics_cmd->add_flag("--json-lines-style", metrics.key_value_output,
                          "Machine-readable flat key=value output");

    // ---- reduce ----
    advfold::ReduceCmdOptions reduce;
    auto* reduce_cmd = app.add_subcommand(
        "reduce", "Build the clique-reduction instance and verify feasibility equivalence");
    reduce_cmd->add_option("graph", reduce.graph_file, "Edge-list graph file: 'n m' then 'u v' lines")
        ->required();
    reduce_cmd->add_option("--k", reduce.k, "Clique size")->required();

    // ---- neighborhood ----
    advfold::NeighborhoodCmdOptions neighborhood;
    auto* neighborhood_cmd = app.add_subcommand(
        "neighborhood", "Sample biologically-similar sequences and emit annotated FASTA");
    neighborhood_cmd->add_option("--fasta", neighborhood.fasta, "Input FASTA file")->required();
    neighborhood_cmd->add_option("--L", neighborhood.blosum_budget, "Substitution-score budget");
    neighborhood_cmd->add_option("--H", neighborhood.hamming_budget, "Hamming budget");
    neighborhood_cmd->add_flag("--exact", neighborhood.exact,
                               "Require the score budget to be met exactly");
    neighborhood_cmd->add_option("--count", neighborhood.count, "Samples per input sequence");
    neighborhood_cmd->add_option("--seed", neighborhood.seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (attack_cmd->parsed()) {
            attack.objective = parse_objective(attack_objective);
            if (!confidence_strategy.empty()) {
                if (confidence_strategy == "min")
                    attack.confidence_strategy = advfold::ConfidenceCategory::min;
                else if (confidence_strategy == "avg")
                    attack.confidence_strategy = advfold::ConfidenceCategory::avg;
                else if (confidence_strategy == "max")
                    attack.confidence_strategy = advfold::ConfidenceCategory::max;
                else
                    throw advfold::Error("--confidence-strategy must be min, avg or max");
            }
            attack.wall_timing = timing == "wall";
            if (!manifest_path.empty()) attack.replay_manifest = manifest_path;
            if (manifest_path.empty() && attack.fasta.empty())
                throw advfold::Error("attack: provide --fasta or --manifest");
            return advfold::cmd_attack(attack, std::cerr);
        }
        if (metrics_cmd->parsed()) return advfold::cmd_metrics(metrics, std::cout, std::cerr);
        if (reduce_cmd->parsed()) return advfold::cmd_reduce(reduce, std::cout, std::cerr);
        if (neighborhood_cmd->parsed())
            return advfold::cmd_neighborhood(neighborhood, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
