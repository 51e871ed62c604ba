#include "whatif/graph.hpp"

#include <algorithm>
#include <queue>

namespace whatif {

namespace {

void insert_sorted(std::vector<NodeId>& v, NodeId x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }

void erase_sorted(std::vector<NodeId>& v, NodeId x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
}

std::string edge_name(const CausalGraph& g, NodeId s, NodeId t) {
    return g.node(s).name + " -> " + g.node(t).name;
}

}  // namespace

CausalGraph::CausalGraph(std::vector<GraphNode> nodes) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second)
            throw Error(ErrorCode::InvalidDocument, "duplicate node id " + std::to_string(nodes_[i].id));
    }
    parents_.resize(nodes_.size());
    children_.resize(nodes_.size());
}

std::size_t CausalGraph::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "unknown node id " + std::to_string(id));
    return it->second;
}

std::optional<NodeId> CausalGraph::find_by_name(const std::string& name) const {
    for (const auto& n : nodes_)
        if (n.name == name) return n.id;
    return std::nullopt;
}

std::vector<Edge> CausalGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& [key, u] : edges_) out.push_back({key.first, key.second, u});
    return out;
}

double CausalGraph::uncertainty(NodeId source, NodeId target) const {
    auto it = edges_.find({source, target});
    if (it == edges_.end()) throw Error(ErrorCode::EdgeAbsent, "edge " + edge_name(*this, source, target) + " absent");
    return it->second;
}

void CausalGraph::set_uncertainty(NodeId source, NodeId target, double value) {
    auto it = edges_.find({source, target});
    if (it == edges_.end()) throw Error(ErrorCode::EdgeAbsent, "edge " + edge_name(*this, source, target) + " absent");
    it->second = value;
}

void CausalGraph::add_edge(NodeId source, NodeId target, double uncertainty) {
    const auto si = index_of(source);
    const auto ti = index_of(target);
    if (source == target) throw Error(ErrorCode::EdgeExists, "self-loop on " + nodes_[si].name);
    if (!edges_.emplace(std::make_pair(source, target), uncertainty).second)
        throw Error(ErrorCode::EdgeExists, "edge " + edge_name(*this, source, target) + " already present");
    insert_sorted(children_[si], target);
    insert_sorted(parents_[ti], source);
}

void CausalGraph::remove_edge(NodeId source, NodeId target) {
    if (edges_.erase({source, target}) == 0)
        throw Error(ErrorCode::EdgeAbsent, "edge " + edge_name(*this, source, target) + " absent");
    erase_sorted(children_[index_of(source)], target);
    erase_sorted(parents_[index_of(target)], source);
}

bool CausalGraph::reaches(NodeId from, NodeId to) const {
    if (from == to) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{from};
    seen[index_of(from)] = 1;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (NodeId v : children(u)) {
            if (v == to) return true;
            auto& s = seen[index_of(v)];
            if (!s) {
                s = 1;
                stack.push_back(v);
            }
        }
    }
    return false;
}

std::vector<NodeId> CausalGraph::topological_order() const {
    std::vector<std::size_t> indegree(nodes_.size());
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        indegree[i] = parents_[i].size();
        if (indegree[i] == 0) ready.push(i);
    }
    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        const auto i = ready.top();
        ready.pop();
        order.push_back(nodes_[i].id);
        for (NodeId c : children_[i]) {
            const auto ci = index_of(c);
            if (--indegree[ci] == 0) ready.push(ci);
        }
    }
    if (order.size() != nodes_.size()) throw Error(ErrorCode::CycleDetected, "graph contains a directed cycle");
    return order;
}

bool CausalGraph::is_acyclic() const {
    try {
        topological_order();
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::vector<NodeId> CausalGraph::ancestors(NodeId id) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{id}, out;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (NodeId p : parents(u)) {
            auto& s = seen[index_of(p)];
            if (!s) {
                s = 1;
                out.push_back(p);
                stack.push_back(p);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> CausalGraph::descendants(NodeId id) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{id}, out;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (NodeId c : children(u)) {
            auto& s = seen[index_of(c)];
            if (!s) {
                s = 1;
                out.push_back(c);
                stack.push_back(c);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

CausalGraph causal_subgraph(const CausalGraph& graph, NodeId node) {
    graph.index_of(node);
    auto keep = graph.ancestors(node);
    const auto desc = graph.descendants(node);
    keep.insert(keep.end(), desc.begin(), desc.end());
    keep.push_back(node);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

    std::vector<GraphNode> nodes;
    for (const auto& n : graph.nodes())
        if (std::binary_search(keep.begin(), keep.end(), n.id)) nodes.push_back(n);
    CausalGraph sub(std::move(nodes));
    for (const auto& e : graph.edges())
        if (sub.contains(e.source) && sub.contains(e.target)) sub.add_edge(e.source, e.target, e.uncertainty);
    sub.score = graph.score;
    return sub;
}

}  // namespace whatif
