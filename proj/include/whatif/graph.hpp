#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "whatif/error.hpp"

namespace whatif {

using NodeId = std::size_t;

struct GraphNode {
    NodeId id = 0;
    std::string name;
};

struct Edge {
    NodeId source = 0;
    NodeId target = 0;
    double uncertainty = 0.0;
};

enum class MoveKind { Insert, Delete };

struct ScoreMove {
    MoveKind kind = MoveKind::Insert;
    NodeId source = 0;
    NodeId target = 0;
    double delta = 0.0;
};

/// Directed acyclic graph over dataset columns. Node ids are column ids;
/// adjacency lists are kept sorted so iteration order is deterministic.
class CausalGraph {
public:
    CausalGraph() = default;
    explicit CausalGraph(std::vector<GraphNode> nodes);

    const std::vector<GraphNode>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool contains(NodeId id) const { return index_.count(id) != 0; }
    /// Position of a node in nodes(); throws UnknownNode.
    std::size_t index_of(NodeId id) const;
    const GraphNode& node(NodeId id) const { return nodes_[index_of(id)]; }
    std::optional<NodeId> find_by_name(const std::string& name) const;

    bool has_edge(NodeId source, NodeId target) const { return edges_.count({source, target}) != 0; }
    bool adjacent(NodeId a, NodeId b) const { return has_edge(a, b) || has_edge(b, a); }
    const std::vector<NodeId>& parents(NodeId id) const { return parents_[index_of(id)]; }
    const std::vector<NodeId>& children(NodeId id) const { return children_[index_of(id)]; }

    /// Edges in (source, target) order.
    std::vector<Edge> edges() const;
    double uncertainty(NodeId source, NodeId target) const;
    void set_uncertainty(NodeId source, NodeId target, double value);

    /// Throws EdgeExists / UnknownNode. Does not check acyclicity.
    void add_edge(NodeId source, NodeId target, double uncertainty = 0.0);
    /// Throws EdgeAbsent.
    void remove_edge(NodeId source, NodeId target);

    /// True when a directed path from -> ... -> to exists (from == to counts).
    bool reaches(NodeId from, NodeId to) const;
    bool is_acyclic() const;
    /// Kahn order, ties by node position; throws CycleDetected.
    std::vector<NodeId> topological_order() const;

    std::vector<NodeId> ancestors(NodeId id) const;
    std::vector<NodeId> descendants(NodeId id) const;

    std::vector<ScoreMove> trace;
    double score = 0.0;

private:
    std::vector<GraphNode> nodes_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
    std::map<std::pair<NodeId, NodeId>, double> edges_;
};

/// Induced subgraph on the ancestors and descendants of `node` plus the node itself.
CausalGraph causal_subgraph(const CausalGraph& graph, NodeId node);

}  // namespace whatif
