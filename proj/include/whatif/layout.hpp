#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "whatif/graph.hpp"

namespace whatif {

enum class NodeKind { Plain, Aggregate };

/// Leaf takes precedence for isolated nodes (in- and out-degree 0).
enum class NodeRole { Root, Leaf, Internal };

std::string_view to_string(NodeKind kind);
std::string_view to_string(NodeRole role);

struct LayoutNode {
    NodeId id = 0;
    std::string label;
    NodeKind kind = NodeKind::Plain;
    std::vector<NodeId> members;       // aggregate only, in chain order
    std::vector<Edge> internal_edges;  // aggregate only
    int layer = 0;
    int order_in_layer = 0;
    NodeRole role = NodeRole::Internal;
    std::vector<NodeId> hidden_causes;  // sources of hidden cross-layer edges
};

struct LayoutGraph {
    std::vector<LayoutNode> nodes;  // sorted by (layer, order_in_layer)
    std::vector<Edge> drawn_edges;
    std::vector<Edge> hidden_edges;
    int layers = 0;
    std::size_t crossings = 0;
    std::size_t initial_crossings = 0;

    const LayoutNode& node(NodeId id) const;
};

/// Graph with chains contracted. Aggregate ids follow the largest plain id.
struct ContractedGraph {
    CausalGraph graph;
    std::vector<GraphNode> original_nodes;
    std::map<NodeId, std::vector<NodeId>> members;
    std::map<NodeId, std::vector<Edge>> internal_edges;
    /// Original endpoint behind each aggregate-incident edge of `graph`.
    std::map<std::pair<NodeId, NodeId>, std::pair<NodeId, NodeId>> original_edge;
};

/// Contracts every maximal run of two or more nodes that each have exactly
/// one incoming and one outgoing edge into a single aggregate node.
ContractedGraph aggregate_chains(const CausalGraph& graph);

/// Inverse of aggregate_chains.
CausalGraph expand_aggregates(const ContractedGraph& contracted);

/// Roots get layer 0; every other node sits one below its deepest cause.
/// Throws CycleDetected.
std::map<NodeId, int> assign_layers(const CausalGraph& graph);

struct CrossLayerSplit {
    std::vector<Edge> drawn;
    std::vector<Edge> hidden;
    std::map<NodeId, std::vector<NodeId>> hidden_causes;
};

CrossLayerSplit extract_cross_layer_edges(const CausalGraph& graph, const std::map<NodeId, int>& layers);

struct LayoutOptions {
    bool aggregate = true;
    int sweep_cap = 20;
};

/// Barycenter initial order (leaves first), then greedy adjacent swaps that
/// strictly reduce crossings and keep leaves left.
void order_layers(LayoutGraph& layout, int sweep_cap = 20);

/// Crossings between drawn edges of consecutive layers.
std::size_t count_crossings(const LayoutGraph& layout);

LayoutGraph build_layout(const CausalGraph& graph, const LayoutOptions& options = {});

}  // namespace whatif
