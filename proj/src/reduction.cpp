#include "advfold/reduction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace advfold {

Graph make_graph(int n_vertices, std::vector<std::pair<int, int>> edges) {
    if (n_vertices < 1) throw Error("graph: need at least one vertex");
    std::set<std::pair<int, int>> normalized;
    for (auto [u, v] : edges) {
        if (u == v) throw Error("graph: self-loop at vertex " + std::to_string(u));
        if (u < 0 || v < 0 || u >= n_vertices || v >= n_vertices)
            throw Error("graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") out of range");
        if (u > v) std::swap(u, v);
        if (!normalized.insert({u, v}).second)
            throw Error("graph: duplicate edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ")");
    }
    Graph g;
    g.n_vertices = n_vertices;
    g.edges.assign(normalized.begin(), normalized.end());
    return g;
}

Graph parse_edge_list(std::istream& in) {
    int n = 0, m = 0;
    if (!(in >> n >> m)) throw Error("graph: expected 'n m' on the first line");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(std::max(0, m)));
    for (int i = 0; i < m; ++i) {
        int u = 0, v = 0;
        if (!(in >> u >> v))
            throw Error("graph: expected edge " + std::to_string(i + 1) + " of " +
                        std::to_string(m));
        edges.emplace_back(u, v);
    }
    return make_graph(n, std::move(edges));
}

Graph parse_edge_list_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file: " + path.string());
    return parse_edge_list(in);
}

PaaInstance reduce_clique_to_paa(const Graph& g, int k) {
    if (k < 1) throw Error("reduction: k must be positive");
    if (k > g.n_vertices)
        throw Error("reduction: k=" + std::to_string(k) + " exceeds vertex count " +
                    std::to_string(g.n_vertices));

    PaaInstance instance{
        g, k,
        Sequence::from_string("base", std::string(static_cast<std::size_t>(g.n_vertices), 'N')),
        6 * k,
        (static_cast<double>(k) * (k - 1) / 2.0) * std::sqrt(3.0 / g.n_vertices)};
    return instance;
}

namespace {

const AminoAcid kSelected = AminoAcid::from_char('K');
const AminoAcid kUnselected = AminoAcid::from_char('N');

int selected_count(const PaaInstance& instance, const Sequence& assignment) {
    if (assignment.size() != instance.graph.n_vertices)
        throw Error("reduction: assignment length " + std::to_string(assignment.size()) +
                    " != vertex count " + std::to_string(instance.graph.n_vertices));
    int count = 0;
    for (int i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == kSelected) ++count;
        else if (assignment[i] != kUnselected)
            throw Error("reduction: assignment must be over {N,K} only");
    }
    return count;
}

int induced_edges(const Graph& g, const Sequence& assignment) {
    int e = 0;
    for (auto [u, v] : g.edges)
        if (assignment[u] == kSelected && assignment[v] == kSelected) ++e;
    return e;
}

}  // namespace

int paa_seq_distance(const PaaInstance& instance, const Sequence& assignment) {
    // idealized two-letter scoring 6*I: each selected position costs exactly 6
    return 6 * selected_count(instance, assignment);
}

Eigen::Vector3d eval_network(const PaaInstance& instance, const Sequence& assignment) {
    selected_count(instance, assignment);  // validates the {N,K} domain
    const double e = static_cast<double>(induced_edges(instance.graph, assignment));
    return Eigen::Vector3d(e, e, e);
}

double paa_structural_distance(const PaaInstance& instance, const Sequence& assignment) {
    // RMSD with the alignment step omitted: the one nonzero output triple is
    // (e,e,e) against an all-zero reference, so sqrt(3e^2/n) = e*sqrt(3/n).
    // Written in the same form as u_bound so the boundary compares exactly.
    const double e = eval_network(instance, assignment)(0);
    return e * std::sqrt(3.0 / instance.graph.n_vertices);
}

Sequence selection_sequence(int n_vertices, std::span<const int> vertices) {
    std::string residues(static_cast<std::size_t>(n_vertices), 'N');
    for (int v : vertices) {
        if (v < 0 || v >= n_vertices)
            throw Error("reduction: vertex " + std::to_string(v) + " out of range");
        residues[static_cast<std::size_t>(v)] = 'K';
    }
    return Sequence::from_string("selection", residues);
}

PaaFeasibility paa_feasible_exhaustive(const PaaInstance& instance, int cap_bits) {
    const int n = instance.graph.n_vertices;
    if (n > cap_bits)
        throw Error("reduction: n=" + std::to_string(n) + " exceeds the exhaustive cap of " +
                    std::to_string(cap_bits) + " selection bits");

    // smallest selected-vertex bitmask first (bit i = vertex i selected)
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        if (6 * std::popcount(mask) > instance.l_bound) continue;
        std::vector<int> vertices;
        for (int v = 0; v < n; ++v)
            if (mask & (std::uint64_t{1} << v)) vertices.push_back(v);
        const Sequence assignment = selection_sequence(n, vertices);
        if (paa_structural_distance(instance, assignment) >= instance.u_bound)
            return {true, assignment};
    }
    return {false, std::nullopt};
}

std::optional<std::vector<int>> clique_exists_bruteforce(const Graph& g, int k, int cap_bits) {
    if (k < 1) throw Error("clique: k must be positive");
    if (k > g.n_vertices) return std::nullopt;
    if (g.n_vertices > cap_bits)
        throw Error("clique: n=" + std::to_string(g.n_vertices) + " exceeds the cap of " +
                    std::to_string(cap_bits));

    std::set<std::pair<int, int>> edge_set(g.edges.begin(), g.edges.end());
    const int required = k * (k - 1) / 2;

    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
        int induced = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (edge_set.count({subset[static_cast<std::size_t>(i)],
                                    subset[static_cast<std::size_t>(j)]}))
                    ++induced;
        if (induced == required) return subset;

        int slot = k - 1;
        while (slot >= 0 && subset[static_cast<std::size_t>(slot)] == g.n_vertices - k + slot)
            --slot;
        if (slot < 0) break;
        ++subset[static_cast<std::size_t>(slot)];
        for (int i = slot + 1; i < k; ++i)
            subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
    }
    return std::nullopt;
}

}  // namespace advfold
