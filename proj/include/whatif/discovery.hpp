#pragma once

#include <optional>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"
#include "whatif/scoring.hpp"

namespace whatif {

/// Deltas within this distance of the best one are ties, broken by the
/// lexicographically smallest (source, target).
inline constexpr double kTieTolerance = 1e-7;

struct DiscoveryOptions {
    /// Worker threads for candidate scoring; 0 picks hardware concurrency.
    unsigned threads = 0;
};

/// Graph with every dataset column as a node and no edges.
CausalGraph empty_graph(const Dataset& ds);

/// Greedy forward (single-edge insertion) then backward (single-edge
/// deletion) search over DAGs, followed by per-edge uncertainty.
CausalGraph discover(const Dataset& ds, const ScoreParams& params,
                     const std::optional<CausalGraph>& seed = std::nullopt,
                     const DiscoveryOptions& options = {});

/// Score lost by deleting the edge: S(G) - S(G without e). Throws EdgeAbsent.
double edge_uncertainty(const Scorer& scorer, const CausalGraph& graph, NodeId source, NodeId target);
double edge_uncertainty(const Dataset& ds, const CausalGraph& graph, NodeId source, NodeId target,
                        const ScoreParams& params);

}  // namespace whatif
