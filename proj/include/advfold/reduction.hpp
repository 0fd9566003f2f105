#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "advfold/sequences.hpp"

namespace advfold {

/// Simple undirected graph: no self-loops, endpoints in range, edges distinct.
struct Graph {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges;  // normalized u < v, sorted
};

Graph make_graph(int n_vertices, std::vector<std::pair<int, int>> edges);

/// Edge-list text format: first line "n m", then m lines "u v" (0-based).
Graph parse_edge_list(std::istream& in);
Graph parse_edge_list_file(const std::filesystem::path& path);

/// The decision-problem instance produced by the clique reduction: an all-N
/// base sequence, the idealized two-letter scoring where every N->K flip
/// costs exactly 6, and the bounds L = 6k, U = (k(k-1)/2) * sqrt(3/n).
struct PaaInstance {
    Graph graph;
    int k = 0;
    Sequence base_sequence;
    int l_bound = 0;
    double u_bound = 0.0;
};

PaaInstance reduce_clique_to_paa(const Graph& g, int k);

/// Sequence distance under the instance's idealized scoring: 6 per selected
/// (K) position. The assignment must be over {N,K} only.
int paa_seq_distance(const PaaInstance& instance, const Sequence& assignment);

/// First output coordinate triple of the reduced network: (e,e,e) where e is
/// the number of graph edges whose both endpoints are selected (residue K).
/// Every other output coordinate is identically zero by construction.
Eigen::Vector3d eval_network(const PaaInstance& instance, const Sequence& assignment);

/// Structural distance of the proof: RMSD with no alignment step between the
/// all-zero reference outputs and the network outputs, i.e. e * sqrt(3/n).
double paa_structural_distance(const PaaInstance& instance, const Sequence& assignment);

struct PaaFeasibility {
    bool feasible = false;
    std::optional<Sequence> witness;  // smallest selected-vertex bitmask when feasible
};

/// Checks all {N,K}^n assignments. n is capped (default 20 selection bits).
PaaFeasibility paa_feasible_exhaustive(const PaaInstance& instance, int cap_bits = 20);

/// All C(n,k) subsets; returns the first k-subset (lexicographic by vertex
/// index) inducing k(k-1)/2 edges, or nullopt. Independent of the reduction
/// path on purpose: it is the oracle the equivalence sweep checks against.
std::optional<std::vector<int>> clique_exists_bruteforce(const Graph& g, int k, int cap_bits = 20);

/// Assignment sequence selecting exactly `vertices` (K at those positions, N
/// elsewhere).
Sequence selection_sequence(int n_vertices, std::span<const int> vertices);

}  // namespace advfold
