#include "advfold/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "advfold/reduction.hpp"
#include "advfold/rng.hpp"
#include "advfold/version.hpp"

namespace advfold {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    std::string out(buf);
    if (out == "-0.0000") out = "0.0000";
    return out;
}

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hash_file_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open: " + path.string());
    Fnv1a64 hash;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        hash.absorb(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash.value()));
    return hex;
}

}  // namespace

void RunManifest::write(std::ostream& out) const {
    out << "toolkit_version=" << toolkit_version << '\n'
        << "created_utc=" << created_utc << '\n'
        << "command=attack\n"
        << "fasta=" << fasta_path << '\n'
        << "fasta_hash=" << fasta_hash << '\n'
        << "oracle=" << oracle_spec << '\n'
        << "cache_dir=" << cache_dir << '\n'
        << "L=" << blosum_budget << '\n'
        << "H=" << hamming_budget << '\n'
        << "exact=" << (exact ? 1 : 0) << '\n'
        << "samples=" << samples << '\n'
        << "seed=" << seed << '\n'
        << "position_strategy=" << position_strategy << '\n'
        << "objective=" << objective << '\n'
        << "align_cutoff=" << fmt4(align_cutoff) << '\n'
        << "align_cycles=" << align_cycles << '\n'
        << "align_rule=" << align_rule << '\n'
        << "jobs=" << jobs << '\n'
        << "timing=" << timing << '\n'
        << "fold_timeout_sec=" << fmt4(fold_timeout_sec) << '\n';
}

RunManifest RunManifest::read(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("manifest: malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error("manifest: missing key '" + key + "'");
        return it->second;
    };

    RunManifest m;
    m.toolkit_version = require("toolkit_version");
    m.created_utc = kv.count("created_utc") ? kv["created_utc"] : "";
    m.fasta_path = require("fasta");
    m.fasta_hash = kv.count("fasta_hash") ? kv["fasta_hash"] : "";
    m.oracle_spec = require("oracle");
    m.cache_dir = kv.count("cache_dir") ? kv["cache_dir"] : "";
    m.blosum_budget = std::stoi(require("L"));
    m.hamming_budget = std::stoi(require("H"));
    m.exact = std::stoi(require("exact")) != 0;
    m.samples = std::stoi(require("samples"));
    m.seed = std::stoull(require("seed"));
    m.position_strategy = require("position_strategy");
    m.objective = require("objective");
    m.align_cutoff = std::stod(require("align_cutoff"));
    m.align_cycles = std::stoi(require("align_cycles"));
    m.align_rule = kv.count("align_rule") ? kv["align_rule"] : "relative";
    m.jobs = std::stoi(require("jobs"));
    m.timing = require("timing");
    m.fold_timeout_sec = kv.count("fold_timeout_sec") ? std::stod(kv["fold_timeout_sec"]) : 0.0;
    return m;
}

RunManifest RunManifest::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path.string());
    return read(in);
}

namespace {

std::shared_ptr<const FoldingOracle> build_oracle(const std::string& spec,
                                                  const std::string& cache_dir,
                                                  const std::filesystem::path& workdir,
                                                  double timeout_sec) {
    std::shared_ptr<const FoldingOracle> oracle;
    if (spec == "mock") {
        oracle = std::make_shared<MockFolder>();
    } else if (spec.rfind("cmd:", 0) == 0) {
        oracle = std::make_shared<SubprocessFolder>(spec.substr(4), workdir, timeout_sec);
    } else {
        throw Error("unknown oracle '" + spec + "' (expected mock or cmd:<template>)");
    }
    if (!cache_dir.empty()) oracle = std::make_shared<CachedFolder>(oracle, cache_dir);
    return oracle;
}

std::string strategy_name(const std::optional<ConfidenceCategory>& strategy) {
    if (!strategy) return "uniform";
    switch (*strategy) {
        case ConfidenceCategory::min: return "min";
        case ConfidenceCategory::avg: return "avg";
        case ConfidenceCategory::max: return "max";
    }
    return "uniform";
}

std::optional<ConfidenceCategory> strategy_from_name(const std::string& name) {
    if (name == "uniform" || name.empty()) return std::nullopt;
    if (name == "min") return ConfidenceCategory::min;
    if (name == "avg") return ConfidenceCategory::avg;
    if (name == "max") return ConfidenceCategory::max;
    throw Error("unknown position strategy '" + name + "'");
}

std::string objective_name(Objective objective) {
    return objective == Objective::rmsd ? "rmsd" : "gdt_ts_negated";
}

Objective objective_from_name(const std::string& name) {
    if (name == "rmsd") return Objective::rmsd;
    if (name == "gdt_ts_negated") return Objective::gdt_ts_negated;
    throw Error("unknown objective '" + name + "'");
}

struct SequenceOutcome {
    std::optional<AttackResult> result;
    std::string error;
    int n = 0;
    std::string id;
};

std::string optional4(const std::optional<double>& v) { return v ? fmt4(*v) : "N/A"; }

}  // namespace

int cmd_attack(AttackCmdOptions options, std::ostream& log) {
    if (options.replay_manifest) {
        const RunManifest m = RunManifest::read_file(*options.replay_manifest);
        options.fasta = m.fasta_path;
        options.oracle_spec = m.oracle_spec;
        options.cache_dir = m.cache_dir;
        options.blosum_budget = m.blosum_budget;
        options.hamming_budget = m.hamming_budget;
        options.exact = m.exact;
        options.samples = m.samples;
        options.seed = m.seed;
        options.confidence_strategy = strategy_from_name(m.position_strategy);
        options.objective = objective_from_name(m.objective);
        options.align_cutoff = m.align_cutoff;
        options.align_cycles = m.align_cycles;
        options.align_absolute = m.align_rule == "absolute";
        options.wall_timing = m.timing == "wall";
        options.fold_timeout_sec = m.fold_timeout_sec;
        // out_dir and jobs stay as given: neither changes the results
        if (!m.fasta_hash.empty()) {
            const std::string current = hash_file_hex(options.fasta);
            if (current != m.fasta_hash)
                log << "warning: fasta content changed since the manifest was written\n";
        }
    }

    std::filesystem::create_directories(options.out_dir);
    const std::vector<Sequence> sequences = parse_fasta_file(options.fasta);
    const auto oracle = build_oracle(options.oracle_spec, options.cache_dir,
                                     options.out_dir / "work", options.fold_timeout_sec);

    AttackConfig base_config;
    base_config.spec.blosum_budget = options.blosum_budget;
    base_config.spec.hamming_budget = options.hamming_budget;
    base_config.spec.mode = options.exact ? DistanceMode::exact : DistanceMode::at_most;
    base_config.samples = options.samples;
    base_config.objective = options.objective;
    base_config.position_strategy = options.confidence_strategy ? PositionStrategy::confidence
                                                                : PositionStrategy::uniform;
    if (options.confidence_strategy) base_config.confidence_category = *options.confidence_strategy;
    base_config.align_cutoff = options.align_cutoff;
    base_config.align_max_cycles = options.align_cycles;
    base_config.align_rule = options.align_absolute ? OutlierRule::absolute_angstrom
                                                    : OutlierRule::relative_to_rmsd;
    base_config.jobs = options.jobs;

    auto seed_for = [&](std::size_t index) {
        return Fnv1a64().absorb(options.seed).absorb(static_cast<std::uint64_t>(index)).value();
    };

    std::vector<SequenceOutcome> outcomes(sequences.size());
    std::mutex log_mutex;
    auto attack_one = [&](std::size_t i) {
        SequenceOutcome& outcome = outcomes[i];
        outcome.id = sequences[i].id();
        outcome.n = sequences[i].size();
        try {
            AttackConfig config = base_config;
            config.seed = seed_for(i);
            outcome.result = run_attack(sequences[i], *oracle, config);
            std::lock_guard<std::mutex> guard(log_mutex);
            log << sequences[i].id() << ": best rmsd " << fmt4(outcome.result->best().rmsd_all)
                << " over " << outcome.result->candidates.size() << " candidates\n";
        } catch (const std::exception& e) {
            outcome.error = e.what();
            std::lock_guard<std::mutex> guard(log_mutex);
            log << sequences[i].id() << ": FAILED: " << e.what() << '\n';
        }
    };

    // cross-sequence parallelism is gated on the oracle's reentrancy just like
    // candidate folding inside one attack
    const int workers = oracle->reentrant()
                            ? std::min<int>(options.jobs, static_cast<int>(sequences.size()))
                            : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < sequences.size(); ++i) attack_one(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < sequences.size();
                     i += static_cast<std::size_t>(workers))
                    attack_one(i);
            });
        }
        for (std::thread& t : pool) t.join();
    }

    const auto runtime_cell = [&](const AttackResult& r) {
        return options.wall_timing ? r.total_fold_seconds : 0.0;
    };

    // results.csv mirrors the per-protein table layout
    {
        std::ofstream csv(options.out_dir / "results.csv");
        csv << "id,n,similarity_pct,rmsd,avg_rmsd,gdt_ts_pct,avg_gdt_ts_pct,gdt_ha_pct,"
               "avg_gdt_ha_pct,run_time_s,status\n";
        for (const SequenceOutcome& o : outcomes) {
            if (o.result) {
                const AttackResult& r = *o.result;
                const CandidateRecord& best = r.best();
                csv << csv_field(o.id) << ',' << o.n << ',' << fmt4(r.similarity_percent) << ','
                    << fmt4(best.rmsd_all) << ',' << fmt4(r.avg_rmsd_all) << ','
                    << fmt4(best.gdt_ts * 100.0) << ',' << fmt4(r.avg_gdt_ts * 100.0) << ','
                    << fmt4(best.gdt_ha * 100.0) << ',' << fmt4(r.avg_gdt_ha * 100.0) << ','
                    << fmt4(runtime_cell(r)) << ",ok\n";
            } else {
                csv << csv_field(o.id) << ',' << o.n << ",N/A,N/A,N/A,N/A,N/A,N/A,N/A,N/A,failed\n";
            }
        }
    }

    // confidence.csv mirrors the prediction-confidence table
    {
        std::ofstream csv(options.out_dir / "confidence.csv");
        csv << "id,n,rmsd,mu_all,sigma_all,mu_diff,sigma_diff,adv_mu_all,adv_sigma_all,"
               "adv_mu_diff,adv_sigma_diff,status\n";
        for (const SequenceOutcome& o : outcomes) {
            if (o.result) {
                const AttackResult& r = *o.result;
                csv << csv_field(o.id) << ',' << o.n << ',' << fmt4(r.best().rmsd_all) << ','
                    << fmt4(r.confidence_original.mu_all) << ','
                    << fmt4(r.confidence_original.sigma_all) << ','
                    << optional4(r.confidence_original.mu_diff) << ','
                    << optional4(r.confidence_original.sigma_diff) << ','
                    << fmt4(r.confidence_adversarial.mu_all) << ','
                    << fmt4(r.confidence_adversarial.sigma_all) << ','
                    << optional4(r.confidence_adversarial.mu_diff) << ','
                    << optional4(r.confidence_adversarial.sigma_diff) << ",ok\n";
            } else {
                csv << csv_field(o.id) << ',' << o.n
                    << ",N/A,N/A,N/A,N/A,N/A,N/A,N/A,N/A,N/A,failed\n";
            }
        }
    }

    // regions.csv: GDT-TS of the best candidate split by target confidence region
    {
        std::ofstream csv(options.out_dir / "regions.csv");
        csv << "id,n,gdt_ts_r1_pct,weight_r1,gdt_ts_r2_pct,weight_r2,gdt_ts_r3_pct,weight_r3,"
               "gdt_ts_r4_pct,weight_r4,status\n";
        for (const SequenceOutcome& o : outcomes) {
            if (o.result) {
                csv << csv_field(o.id) << ',' << o.n;
                for (const auto& region : o.result->gdt_regions) {
                    if (region)
                        csv << ',' << fmt4(region->gdt * 100.0) << ',' << fmt4(region->weight);
                    else
                        csv << ",N/A,N/A";
                }
                csv << ",ok\n";
            } else {
                csv << csv_field(o.id) << ',' << o.n << ",N/A,N/A,N/A,N/A,N/A,N/A,N/A,N/A,failed\n";
            }
        }
    }

    // summary.csv: column means and population stds over the successful runs
    {
        std::vector<AttackResult> succeeded;
        for (SequenceOutcome& o : outcomes)
            if (o.result) succeeded.push_back(*o.result);
        std::ofstream csv(options.out_dir / "summary.csv");
        csv << "count,avg_n,std_n,avg_mu_all,std_mu_all,avg_rmsd,std_rmsd,avg_gdt_ts_pct,"
               "std_gdt_ts_pct,avg_run_time_s,std_run_time_s\n";
        if (!succeeded.empty()) {
            if (!options.wall_timing)
                for (AttackResult& r : succeeded) r.total_fold_seconds = 0.0;
            const AttackSummary s = aggregate_results(succeeded);
            csv << s.count << ',' << fmt4(s.avg_n) << ',' << fmt4(s.std_n) << ','
                << fmt4(s.avg_mu_all) << ',' << fmt4(s.std_mu_all) << ',' << fmt4(s.avg_rmsd) << ','
                << fmt4(s.std_rmsd) << ',' << fmt4(s.avg_gdt_ts * 100.0) << ','
                << fmt4(s.std_gdt_ts * 100.0) << ',' << fmt4(s.avg_runtime_seconds) << ','
                << fmt4(s.std_runtime_seconds) << '\n';
        }
    }

    if (options.dump_pdb) {
        const std::filesystem::path dir = options.out_dir / "structures";
        std::filesystem::create_directories(dir);
        for (const SequenceOutcome& o : outcomes) {
            if (!o.result) continue;
            const AttackResult& r = *o.result;
            std::string stem = o.id.substr(0, o.id.find_first_of(" \t"));
            std::replace_if(stem.begin(), stem.end(),
                            [](char c) { return c == '/' || c == '\\'; }, '_');
            write_pdb_ca_file(r.original_structure, dir / (stem + "_original.pdb"),
                              &r.original_sequence);
            const Structure best_structure = oracle->fold(r.best().sequence);
            write_pdb_ca_file(best_structure, dir / (stem + "_adversarial.pdb"),
                              &r.best().sequence);
            const Superposition sup =
                superpose(r.original_structure, best_structure, options.align_cutoff,
                          options.align_cycles,
                          options.align_absolute ? OutlierRule::absolute_angstrom
                                                 : OutlierRule::relative_to_rmsd);
            Structure aligned = best_structure;
            aligned.ca = sup.apply(best_structure.ca);
            write_pdb_ca_file(aligned, dir / (stem + "_adversarial_aligned.pdb"),
                              &r.best().sequence);
        }
    }

    {
        RunManifest manifest;
        manifest.toolkit_version = kVersion;
        manifest.created_utc = utc_now();
        manifest.fasta_path = std::filesystem::absolute(options.fasta).string();
        manifest.fasta_hash = hash_file_hex(options.fasta);
        manifest.oracle_spec = options.oracle_spec;
        manifest.cache_dir = options.cache_dir;
        manifest.blosum_budget = options.blosum_budget;
        manifest.hamming_budget = options.hamming_budget;
        manifest.exact = options.exact;
        manifest.samples = options.samples;
        manifest.seed = options.seed;
        manifest.position_strategy = strategy_name(options.confidence_strategy);
        manifest.objective = objective_name(options.objective);
        manifest.align_cutoff = options.align_cutoff;
        manifest.align_cycles = options.align_cycles;
        manifest.align_rule = options.align_absolute ? "absolute" : "relative";
        manifest.jobs = options.jobs;
        manifest.timing = options.wall_timing ? "wall" : "off";
        manifest.fold_timeout_sec = options.fold_timeout_sec;
        std::ofstream out(options.out_dir / "run.manifest");
        manifest.write(out);
    }

    const bool any_failed = std::any_of(outcomes.begin(), outcomes.end(),
                                        [](const SequenceOutcome& o) { return !o.result; });
    return any_failed ? 1 : 0;
}

int cmd_metrics(const MetricsCmdOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Structure target = parse_pdb_ca_file(options.target_pdb);
        const Structure mobile = parse_pdb_ca_file(options.mobile_pdb);
        const Superposition sup =
            superpose(target, mobile, options.align_cutoff, options.align_cycles,
                      options.align_absolute ? OutlierRule::absolute_angstrom
                                             : OutlierRule::relative_to_rmsd);
        Structure aligned = mobile;
        aligned.ca = sup.apply(mobile.ca);
        const double ts = gdt(target, aligned, GdtMode::ts());
        const double ha = gdt(target, aligned, GdtMode::ha());

        if (options.key_value_output) {
            out << "n=" << target.size() << '\n'
                << "rmsd_all=" << fmt4(sup.rmsd_all) << '\n'
                << "rmsd_kept=" << fmt4(sup.rmsd_kept) << '\n'
                << "gdt_ts=" << fmt4(ts) << '\n'
                << "gdt_ha=" << fmt4(ha) << '\n'
                << "cycles_used=" << sup.cycles_used << '\n'
                << "kept=" << sup.kept.size() << '\n';
        } else {
            out << "residues          : " << target.size() << '\n'
                << "RMSD (all pairs)  : " << fmt4(sup.rmsd_all) << " A\n"
                << "RMSD (kept pairs) : " << fmt4(sup.rmsd_kept) << " A\n"
                << "GDT-TS            : " << fmt4(ts) << '\n'
                << "GDT-HA            : " << fmt4(ha) << '\n'
                << "rejection cycles  : " << sup.cycles_used << '\n'
                << "pairs kept        : " << sup.kept.size() << " / " << target.size() << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        err << "metrics: " << e.what() << '\n';
        return 1;
    }
}

int cmd_reduce(const ReduceCmdOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Graph g = parse_edge_list_file(options.graph_file);
        const PaaInstance instance = reduce_clique_to_paa(g, options.k);
        const PaaFeasibility feasibility = paa_feasible_exhaustive(instance);
        const auto clique = clique_exists_bruteforce(g, options.k);

        out << "n=" << g.n_vertices << " m=" << g.edges.size() << " k=" << options.k << '\n';
        out << "L=" << instance.l_bound << '\n';
        char u_text[40];
        std::snprintf(u_text, sizeof(u_text), "%.12f", instance.u_bound);
        out << "U=" << u_text << '\n';
        out << "paa_feasible=" << (feasibility.feasible ? "yes" : "no") << '\n';
        if (feasibility.witness) {
            out << "witness=" << feasibility.witness->to_string() << '\n';
            out << "witness_d_seq=" << paa_seq_distance(instance, *feasibility.witness) << '\n';
            std::snprintf(u_text, sizeof(u_text), "%.12f",
                          paa_structural_distance(instance, *feasibility.witness));
            out << "witness_d_str=" << u_text << '\n';
        }
        out << "clique_bruteforce=" << (clique ? "yes" : "no") << '\n';
        const bool agree = feasibility.feasible == clique.has_value();
        out << "verdict=" << (agree ? "agree" : "DISAGREE") << '\n';
        return agree ? 0 : 2;
    } catch (const std::exception& e) {
        err << "reduce: " << e.what() << '\n';
        return 1;
    }
}

int cmd_neighborhood(const NeighborhoodCmdOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const std::vector<Sequence> sequences = parse_fasta_file(options.fasta);
        NeighborhoodSpec spec;
        spec.blosum_budget = options.blosum_budget;
        spec.hamming_budget = options.hamming_budget;
        spec.mode = options.exact ? DistanceMode::exact : DistanceMode::at_most;

        SplitMix64 rng(options.seed);
        for (const Sequence& s : sequences) {
            const std::vector<Sequence> batch = sample_batch(s, spec, options.count, rng);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Sequence& neighbor = batch[i];
                out << '>' << s.id() << " sample=" << (i + 1)
                    << " d_seq=" << seq_distance(s, neighbor, spec.matrix)
                    << " d_ham=" << hamming(s, neighbor) << '\n';
                const std::string body = neighbor.to_string();
                for (std::size_t j = 0; j < body.size(); j += 60) out << body.substr(j, 60) << '\n';
            }
        }
        return 0;
    } catch (const std::exception& e) {
        err << "neighborhood: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace advfold
