#include "advfold/oracle.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "advfold/rng.hpp"

namespace advfold {

namespace {

constexpr std::uint64_t kMockHashSeed = 0x5d1f00d5eedULL;
constexpr double kPi = 3.14159265358979323846;

// scale must be a power of ten; the correctly-rounded division makes the
// result bit-identical to parsing the same value back from %.*f text
double round_decimals(double v, double scale) { return std::round(v * scale) / scale; }

}  // namespace

Structure mock_fold(const Sequence& s, const MockFolderParams& params) {
    if (params.window_radius < 0) throw Error("mock_fold: window radius must be non-negative");
    if (params.displacement_amplitude < 0.0)
        throw Error("mock_fold: displacement amplitude must be non-negative");

    const int n = s.size();
    const double omega = params.helix_turn_deg * kPi / 180.0;
    const std::string residues = s.to_string();

    Structure out;
    out.id = s.id();
    out.ca.resize(3, n);
    Eigen::VectorXd plddt(n);

    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - params.window_radius);
        const int hi = std::min(n - 1, i + params.window_radius);

        Fnv1a64 hash;
        hash.absorb(kMockHashSeed);
        hash.absorb(static_cast<std::uint64_t>(i));
        hash.absorb(std::string_view(residues).substr(static_cast<std::size_t>(lo),
                                                      static_cast<std::size_t>(hi - lo + 1)));
        const std::uint64_t h = hash.value();

        auto slice = [&](int k) {
            return static_cast<double>((h >> (16 * k)) & 0xffffULL) / 65535.0;
        };
        const double a = params.displacement_amplitude;
        const Eigen::Vector3d displacement(slice(0) * 2.0 * a - a, slice(1) * 2.0 * a - a,
                                           slice(2) * 2.0 * a - a);
        const double angle = omega * i;
        const Eigen::Vector3d helix(params.helix_radius * std::cos(angle),
                                    params.helix_radius * std::sin(angle),
                                    params.helix_rise * i);

        // quantize to PDB precision so a cache round trip is bit-exact
        const Eigen::Vector3d point = helix + displacement;
        out.ca(0, i) = round_decimals(point.x(), 1000.0);
        out.ca(1, i) = round_decimals(point.y(), 1000.0);
        out.ca(2, i) = round_decimals(point.z(), 1000.0);
        plddt(i) = round_decimals(30.0 + 70.0 * slice(3), 100.0);
    }
    out.plddt = std::move(plddt);
    validate_structure(out);
    return out;
}

std::string MockFolder::tag() const {
    std::ostringstream tag;
    tag << "mock(w=" << params_.window_radius << ",amp=" << params_.displacement_amplitude
        << ",rise=" << params_.helix_rise << ",radius=" << params_.helix_radius
        << ",turn=" << params_.helix_turn_deg << ")";
    return tag.str();
}

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;  // combined stdout + stderr
    bool timed_out = false;
};

CommandResult run_command(const std::string& command, double timeout_sec) {
    int fds[2];
    if (pipe(fds) != 0) throw Error("subprocess: pipe() failed");

    const pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw Error("subprocess: fork() failed");
    }
    if (pid == 0) {
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[0]);
        close(fds[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(fds[1]);
    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_sec));
    char buf[4096];
    while (true) {
        int wait_ms = -1;
        if (timeout_sec > 0.0) {
            const auto remaining = deadline - std::chrono::steady_clock::now();
            wait_ms = static_cast<int>(
                std::max<long long>(0, std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count()));
            if (wait_ms == 0) {
                result.timed_out = true;
                kill(pid, SIGKILL);
            }
        }
        struct pollfd pfd{fds[0], POLLIN, 0};
        const int ready = poll(&pfd, 1, result.timed_out ? 100 : wait_ms);
        if (ready > 0) {
            const ssize_t got = read(fds[0], buf, sizeof(buf));
            if (got > 0) {
                result.output.append(buf, static_cast<std::size_t>(got));
                continue;
            }
            break;  // EOF
        }
        if (ready == 0 && timeout_sec > 0.0 && !result.timed_out) continue;  // poll tick
        if (ready == 0 && result.timed_out) break;
        if (ready < 0 && errno == EINTR) continue;
        if (ready < 0) break;
    }
    close(fds[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    return result;
}

std::string substitute_placeholder(std::string text, const std::string& key,
                                   const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::atomic<unsigned> g_fold_counter{0};

}  // namespace

Structure subprocess_fold(const Sequence& s, const std::string& command_template,
                          const std::filesystem::path& workdir, double timeout_sec) {
    if (command_template.find("{fasta}") == std::string::npos ||
        command_template.find("{out}") == std::string::npos)
        throw Error("subprocess: command template must contain {fasta} and {out}");

    std::filesystem::create_directories(workdir);
    const unsigned serial = g_fold_counter.fetch_add(1);
    const std::string stem =
        "fold_" + std::to_string(::getpid()) + "_" + std::to_string(serial);
    const std::filesystem::path fasta_path = workdir / (stem + ".fasta");
    const std::filesystem::path out_path = workdir / (stem + ".pdb");

    {
        std::ofstream fasta(fasta_path);
        if (!fasta) throw Error("subprocess: cannot write " + fasta_path.string());
        const Sequence seqs[] = {s};
        fasta << serialize_fasta(seqs);
    }

    std::string command = substitute_placeholder(command_template, "{fasta}", fasta_path.string());
    command = substitute_placeholder(command, "{out}", out_path.string());

    const CommandResult run = run_command(command, timeout_sec);

    auto cleanup = [&] {
        std::error_code ec;
        std::filesystem::remove(fasta_path, ec);
        std::filesystem::remove(out_path, ec);
    };

    if (run.timed_out) {
        cleanup();
        throw Error("subprocess: timed out after " + std::to_string(timeout_sec) +
                    "s running: " + command);
    }
    if (run.exit_code != 0) {
        cleanup();
        throw Error("subprocess: exit code " + std::to_string(run.exit_code) + " from: " + command +
                    "\n--- captured output ---\n" + run.output);
    }

    Structure folded;
    try {
        std::ifstream pdb(out_path);
        if (!pdb) throw Error("subprocess: command produced no output file " + out_path.string());
        folded = parse_pdb_ca(pdb, s.id());
    } catch (...) {
        cleanup();
        throw;
    }
    cleanup();

    if (folded.size() != s.size())
        throw Error("subprocess: output has " + std::to_string(folded.size()) + " residues, input has " +
                    std::to_string(s.size()));
    return folded;
}

SubprocessFolder::SubprocessFolder(std::string command_template, std::filesystem::path workdir,
                                   double timeout_sec)
    : command_template_(std::move(command_template)),
      workdir_(std::move(workdir)),
      timeout_sec_(timeout_sec) {
    if (command_template_.find("{fasta}") == std::string::npos ||
        command_template_.find("{out}") == std::string::npos)
        throw Error("subprocess: command template must contain {fasta} and {out}");
}

CachedFolder::CachedFolder(std::shared_ptr<const FoldingOracle> inner,
                           std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    if (!inner_) throw Error("cache: inner oracle is null");
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
    // probe writability now rather than on the first miss
    const std::filesystem::path probe = cache_dir_ / ".write_probe";
    std::ofstream test(probe);
    if (!test) throw Error("cache: directory not writable: " + cache_dir_.string());
    test.close();
    std::filesystem::remove(probe, ec);
}

std::filesystem::path CachedFolder::entry_path(const Sequence& s) const {
    Fnv1a64 hash;
    hash.absorb(inner_->tag());
    hash.absorb("\n");
    hash.absorb(s.to_string());
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.pdb",
                  static_cast<unsigned long long>(hash.value()));
    return cache_dir_ / name;
}

Structure CachedFolder::fold(const Sequence& s) const {
    const std::filesystem::path entry = entry_path(s);
    if (std::filesystem::exists(entry)) {
        try {
            std::ifstream in(entry);
            Structure cached = parse_pdb_ca(in, s.id());
            if (cached.size() == s.size()) return cached;
            // wrong length = corrupt entry; fall through to refold
        } catch (const Error&) {
            // corrupt entry: treated as a miss and overwritten below
        }
        std::fprintf(stderr, "cache: corrupt entry %s, refolding\n", entry.string().c_str());
    }
    Structure folded = inner_->fold(s);
    // unique temp name: concurrent misses on one key may both fold; the
    // rename makes the last write win, and determinism makes that idempotent
    const std::filesystem::path tmp =
        entry.string() + ".tmp" + std::to_string(::getpid()) + "_" +
        std::to_string(g_fold_counter.fetch_add(1));
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cache: cannot write " + tmp.string());
        write_pdb_ca(folded, out, &s);
    }
    std::filesystem::rename(tmp, entry);
    return folded;
}

}  // namespace advfold
