#include "whatif/discovery.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <thread>

namespace whatif {

namespace {

struct Candidate {
    NodeId source;
    NodeId target;
};

constexpr double kIneligible = -std::numeric_limits<double>::infinity();

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
std::vector<double> evaluate(const std::vector<Candidate>& candidates, unsigned threads, Fn&& fn) {
    std::vector<double> deltas(candidates.size(), kIneligible);
    const std::size_t workers = std::min<std::size_t>(threads, candidates.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) deltas[i] = fn(candidates[i]);
        return deltas;
    }
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (candidates.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const auto begin = w * chunk;
            const auto end = std::min(candidates.size(), begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) deltas[i] = fn(candidates[i]);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    pool.clear();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return deltas;
}

/// Index of the move to apply, or -1 when no delta is positive. Candidates
/// arrive in lexicographic (source, target) order.
std::ptrdiff_t select_best(const std::vector<double>& deltas) {
    double best = 0.0;
    bool any = false;
    for (double d : deltas) {
        if (d > 0.0 && (!any || d > best)) {
            best = d;
            any = true;
        }
    }
    if (!any) return -1;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        if (deltas[i] > 0.0 && deltas[i] >= best - kTieTolerance) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

void validate_seed(const Dataset& ds, const CausalGraph& seed, const ScoreParams& params) {
    if (seed.node_count() != ds.column_count())
        throw Error(ErrorCode::InvalidSeedGraph, "seed graph must contain every dataset column");
    for (ColumnId c = 0; c < ds.column_count(); ++c) {
        if (!seed.contains(c))
            throw Error(ErrorCode::InvalidSeedGraph, "seed graph lacks column '" + ds.name(c) + "'");
        if (seed.parents(c).size() > params.max_parents)
            throw Error(ErrorCode::InvalidSeedGraph, "seed graph node '" + ds.name(c) + "' exceeds maxParents");
    }
    if (!seed.is_acyclic()) throw Error(ErrorCode::InvalidSeedGraph, "seed graph contains a cycle");
}

}  // namespace

CausalGraph empty_graph(const Dataset& ds) {
    std::vector<GraphNode> nodes;
    nodes.reserve(ds.column_count());
    for (ColumnId c = 0; c < ds.column_count(); ++c) nodes.push_back({c, ds.name(c)});
    return CausalGraph(std::move(nodes));
}

double edge_uncertainty(const Scorer& scorer, const CausalGraph& graph, NodeId source, NodeId target) {
    return -scorer.delta_delete(graph, source, target);
}

double edge_uncertainty(const Dataset& ds, const CausalGraph& graph, NodeId source, NodeId target,
                        const ScoreParams& params) {
    Scorer scorer(ds, params, false);
    return edge_uncertainty(scorer, graph, source, target);
}

CausalGraph discover(const Dataset& ds, const ScoreParams& params, const std::optional<CausalGraph>& seed,
                     const DiscoveryOptions& options) {
    params.validate();
    if (ds.column_count() < 2)
        throw Error(ErrorCode::TooFewColumns, "discovery needs at least 2 columns, got " +
                                                  std::to_string(ds.column_count()));
    CausalGraph graph = empty_graph(ds);
    if (seed) {
        validate_seed(ds, *seed, params);
        for (const auto& e : seed->edges()) graph.add_edge(e.source, e.target);
    }

    const Scorer scorer(ds, params);
    const unsigned threads = resolve_threads(options.threads);
    const auto m = ds.column_count();

    // Forward phase.
    for (;;) {
        std::vector<Candidate> candidates;
        for (NodeId x = 0; x < m; ++x)
            for (NodeId y = 0; y < m; ++y)
                if (x != y && !graph.adjacent(x, y)) candidates.push_back({x, y});
        const auto deltas = evaluate(candidates, threads, [&](const Candidate& c) {
            if (graph.reaches(c.target, c.source)) return kIneligible;
            return scorer.delta_insert(graph, c.source, c.target).value_or(kIneligible);
        });
        const auto best = select_best(deltas);
        if (best < 0) break;
        const auto& c = candidates[best];
        graph.add_edge(c.source, c.target);
        graph.trace.push_back({MoveKind::Insert, c.source, c.target, deltas[best]});
    }

    // Backward phase.
    for (;;) {
        std::vector<Candidate> candidates;
        for (const auto& e : graph.edges()) candidates.push_back({e.source, e.target});
        const auto deltas = evaluate(candidates, threads, [&](const Candidate& c) {
            return scorer.delta_delete(graph, c.source, c.target);
        });
        const auto best = select_best(deltas);
        if (best < 0) break;
        const auto& c = candidates[best];
        graph.remove_edge(c.source, c.target);
        graph.trace.push_back({MoveKind::Delete, c.source, c.target, deltas[best]});
    }

    for (const auto& e : graph.edges())
        graph.set_uncertainty(e.source, e.target, edge_uncertainty(scorer, graph, e.source, e.target));
    graph.score = scorer.graph_score(graph);
    return graph;
}

}  // namespace whatif
