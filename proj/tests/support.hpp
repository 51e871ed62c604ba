#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// They favour obviousness over speed and share no code with the library beyond
// its data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"
#include "whatif/inference.hpp"
#include "whatif/layout.hpp"
#include "whatif/scoring.hpp"

namespace testing {

using namespace whatif;

inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
    return out.str();
}

inline Dataset make_dataset(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    return ingest_text(csv(header, rows), {});
}

inline std::vector<std::string> column_names(std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
    return names;
}

/// Random binary table where each column copies a random earlier column with
/// probability `p_copy`, otherwise draws a fair coin; gives discovery something to find.
inline Dataset random_binary_dataset(std::mt19937_64& rng, std::size_t k, std::size_t n, double p_copy = 0.7) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(k));
    std::vector<std::size_t> source(k);
    for (std::size_t c = 1; c < k; ++c) source[c] = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
    const double strength = 0.5 + 0.5 * u(rng);
    for (auto& r : rows) {
        for (std::size_t c = 0; c < k; ++c) {
            if (c > 0 && u(rng) < p_copy * strength) {
                r[c] = r[source[c]];
            } else {
                r[c] = u(rng) < 0.5 ? "0" : "1";
            }
        }
    }
    return make_dataset(column_names(k), rows);
}

/// S_local from first principles: counts via std::map over raw codes.
inline double oracle_local_score(const Dataset& ds, ColumnId child, const std::vector<ColumnId>& parents,
                                 double penalty) {
    std::map<std::vector<Code>, std::map<Code, double>> counts;
    const auto n = ds.sample_size();
    for (std::size_t row = 0; row < n; ++row) {
        std::vector<Code> key;
        for (auto p : parents) key.push_back(ds.column(p)[row]);
        counts[key][ds.column(child)[row]] += 1.0;
    }
    double ll = 0.0;
    for (const auto& [key, by_value] : counts) {
        double total = 0.0;
        for (const auto& [v, c] : by_value) total += c;
        for (const auto& [v, c] : by_value) ll += c * std::log(c / total);
    }
    double q = 1.0;
    for (auto p : parents) q *= static_cast<double>(ds.cardinality(p));
    const double k = q * static_cast<double>(ds.cardinality(child) - 1);
    return 2.0 * ll - penalty * std::log(static_cast<double>(n)) * k;
}

/// Adjacency-matrix DAG used by the brute-force search.
struct MatrixGraph {
    std::size_t n;
    std::vector<std::vector<bool>> adj;

    explicit MatrixGraph(std::size_t size) : n(size), adj(size, std::vector<bool>(size, false)) {}

    std::vector<ColumnId> parents(std::size_t v) const {
        std::vector<ColumnId> out;
        for (std::size_t u = 0; u < n; ++u)
            if (adj[u][v]) out.push_back(u);
        return out;
    }

    bool acyclic() const {
        // Warshall closure; a cycle shows up on the diagonal.
        auto reach = adj;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][i]) return false;
        return true;
    }

    double score(const Dataset& ds, double penalty) const {
        double total = 0.0;
        for (std::size_t v = 0; v < n; ++v) total += oracle_local_score(ds, v, parents(v), penalty);
        return total;
    }
};

struct OracleMove {
    bool insert;
    std::size_t source, target;
    double delta;
};

/// Greedy forward/backward search that rescores the whole graph for every
/// candidate. Ties within `tie` go to the first (source, target) in row-major order.
inline std::vector<OracleMove> oracle_greedy(const Dataset& ds, double penalty, std::size_t max_parents,
                                             double tie = 1e-7) {
    const auto k = ds.column_count();
    MatrixGraph g(k);
    std::vector<OracleMove> moves;
    for (bool insert : {true, false}) {
        while (true) {
            const double base = g.score(ds, penalty);
            std::vector<OracleMove> candidates;
            for (std::size_t s = 0; s < k; ++s) {
                for (std::size_t t = 0; t < k; ++t) {
                    if (s == t) continue;
                    if (insert) {
                        if (g.adj[s][t] || g.adj[t][s] || g.parents(t).size() >= max_parents) continue;
                        g.adj[s][t] = true;
                        if (g.acyclic()) candidates.push_back({true, s, t, g.score(ds, penalty) - base});
                        g.adj[s][t] = false;
                    } else {
                        if (!g.adj[s][t]) continue;
                        g.adj[s][t] = false;
                        candidates.push_back({false, s, t, g.score(ds, penalty) - base});
                        g.adj[s][t] = true;
                    }
                }
            }
            double best = 0.0;
            for (const auto& c : candidates) best = std::max(best, c.delta);
            if (best <= 0.0) break;
            for (const auto& c : candidates) {
                if (c.delta > 0.0 && c.delta >= best - tie) {
                    g.adj[c.source][c.target] = insert;
                    moves.push_back(c);
                    break;
                }
            }
        }
    }
    return moves;
}

/// Marginal of every node by summing the full joint over all value
/// combinations. Overrides replace a node's CPD row, as in the library.
inline std::vector<std::vector<double>> oracle_enumerate(const CpdModel& model, const Overrides& overrides) {
    const auto& nodes = model.graph().nodes();
    const auto n = nodes.size();
    std::vector<std::vector<double>> marg(n);
    for (std::size_t i = 0; i < n; ++i) marg[i].assign(model.cardinality(nodes[i].id), 0.0);
    std::vector<Code> values(n, 0);
    while (true) {
        double p = 1.0;
        for (std::size_t i = 0; i < n && p > 0.0; ++i) {
            const auto id = nodes[i].id;
            if (i < overrides.size() && overrides[i]) {
                p *= (*overrides[i])[values[i]];
                continue;
            }
            const auto& cpd = model.cpd(id);
            std::uint64_t key = 0;
            for (std::size_t j = 0; j < cpd.parents.size(); ++j)
                key = key * cpd.parent_cardinalities[j] + values[model.position(cpd.parents[j])];
            p *= cpd.row(key)[values[i]];
        }
        for (std::size_t i = 0; i < n; ++i) marg[i][values[i]] += p;
        std::size_t i = 0;
        while (i < n && ++values[i] == model.cardinality(nodes[i].id)) values[i++] = 0;
        if (i == n) break;
    }
    return marg;
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

/// Pairwise check of every two drawn edges leaving the same layer.
inline std::size_t oracle_crossings(const LayoutGraph& layout) {
    std::map<NodeId, std::pair<int, int>> place;
    for (const auto& n : layout.nodes) place[n.id] = {n.layer, n.order_in_layer};
    std::size_t c = 0;
    const auto& e = layout.drawn_edges;
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            const auto [li, si] = place[e[i].source];
            const auto [lj, sj] = place[e[j].source];
            if (li != lj) continue;
            const int ti = place[e[i].target].second, tj = place[e[j].target].second;
            if ((si < sj && ti > tj) || (si > sj && ti < tj)) ++c;
        }
    }
    return c;
}

/// Random DAG: edges only go from lower to higher index of a shuffled order.
inline CausalGraph random_dag(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::vector<GraphNode> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back({i, "n" + std::to_string(i)});
    CausalGraph g(nodes);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (n < 2) return g;
    const std::size_t max_edges = n * (n - 1) / 2;
    m = std::min(m, max_edges);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> unc(0.1, 50.0);
    while (g.edge_count() < m) {
        auto a = pick(rng), b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!g.has_edge(perm[a], perm[b])) g.add_edge(perm[a], perm[b], unc(rng));
    }
    return g;
}

}  // namespace testing
