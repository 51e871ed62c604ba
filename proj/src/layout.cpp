#include "whatif/layout.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <unordered_map>

namespace whatif {

namespace {

std::uint64_t merge_count(std::vector<int>& v, std::vector<int>& tmp, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const auto mid = lo + (hi - lo) / 2;
    auto inversions = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inversions += mid - i;
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
    return inversions;
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kind == NodeKind::Plain ? "plain" : "aggregate"; }

std::string_view to_string(NodeRole role) {
    switch (role) {
        case NodeRole::Root: return "root";
        case NodeRole::Leaf: return "leaf";
        case NodeRole::Internal: return "internal";
    }
    return "internal";
}

const LayoutNode& LayoutGraph::node(NodeId id) const {
    for (const auto& n : nodes)
        if (n.id == id) return n;
    throw Error(ErrorCode::UnknownNode, "layout has no node " + std::to_string(id));
}

ContractedGraph aggregate_chains(const CausalGraph& graph) {
    auto eligible = [&](NodeId v) { return graph.parents(v).size() == 1 && graph.children(v).size() == 1; };

    std::vector<std::vector<NodeId>> runs;
    for (const auto& n : graph.nodes()) {
        if (!eligible(n.id) || eligible(graph.parents(n.id).front())) continue;
        std::vector<NodeId> run{n.id};
        while (eligible(graph.children(run.back()).front())) run.push_back(graph.children(run.back()).front());
        if (run.size() >= 2) runs.push_back(std::move(run));
    }

    ContractedGraph out;
    out.original_nodes = graph.nodes();
    NodeId next_id = 0;
    for (const auto& n : graph.nodes()) next_id = std::max(next_id, n.id + 1);

    std::unordered_map<NodeId, NodeId> owner;  // member -> aggregate id
    std::vector<GraphNode> nodes;
    std::vector<std::pair<NodeId, std::vector<NodeId>>> aggregates;
    for (const auto& run : runs) {
        const NodeId agg = next_id++;
        for (NodeId m : run) owner[m] = agg;
        aggregates.emplace_back(agg, run);
    }
    for (const auto& n : graph.nodes())
        if (!owner.count(n.id)) nodes.push_back(n);
    for (const auto& [agg, run] : aggregates) {
        std::string label;
        for (std::size_t i = 0; i < run.size(); ++i) label += (i ? " -> " : "") + graph.node(run[i]).name;
        nodes.push_back({agg, label});
        out.members[agg] = run;
    }
    out.graph = CausalGraph(std::move(nodes));

    auto mapped = [&](NodeId v) {
        auto it = owner.find(v);
        return it == owner.end() ? v : it->second;
    };
    for (const auto& e : graph.edges()) {
        const auto s = mapped(e.source), t = mapped(e.target);
        if (s == t) {
            out.internal_edges[s].push_back(e);
            continue;
        }
        out.graph.add_edge(s, t, e.uncertainty);
        if (s != e.source || t != e.target) out.original_edge[{s, t}] = {e.source, e.target};
    }
    out.graph.score = graph.score;
    return out;
}

CausalGraph expand_aggregates(const ContractedGraph& contracted) {
    std::vector<GraphNode> nodes = contracted.original_nodes;
    if (nodes.empty()) nodes = contracted.graph.nodes();
    CausalGraph out(std::move(nodes));
    for (const auto& e : contracted.graph.edges()) {
        auto it = contracted.original_edge.find({e.source, e.target});
        if (it == contracted.original_edge.end()) {
            out.add_edge(e.source, e.target, e.uncertainty);
        } else {
            out.add_edge(it->second.first, it->second.second, e.uncertainty);
        }
    }
    for (const auto& [agg, internal] : contracted.internal_edges)
        for (const auto& e : internal) out.add_edge(e.source, e.target, e.uncertainty);
    out.score = contracted.graph.score;
    return out;
}

std::map<NodeId, int> assign_layers(const CausalGraph& graph) {
    std::map<NodeId, int> layers;
    for (NodeId v : graph.topological_order()) {
        int layer = 0;
        for (NodeId p : graph.parents(v)) layer = std::max(layer, layers.at(p) + 1);
        layers[v] = layer;
    }
    return layers;
}

CrossLayerSplit extract_cross_layer_edges(const CausalGraph& graph, const std::map<NodeId, int>& layers) {
    CrossLayerSplit split;
    for (const auto& e : graph.edges()) {
        const int gap = layers.at(e.target) - layers.at(e.source);
        if (gap == 1) {
            split.drawn.push_back(e);
        } else {
            split.hidden.push_back(e);
            split.hidden_causes[e.target].push_back(e.source);
        }
    }
    for (auto& [node, causes] : split.hidden_causes) std::sort(causes.begin(), causes.end());
    return split;
}

std::size_t count_crossings(const LayoutGraph& layout) {
    std::unordered_map<NodeId, std::pair<int, int>> place;
    for (const auto& n : layout.nodes) place[n.id] = {n.layer, n.order_in_layer};
    std::map<int, std::vector<std::pair<int, int>>> by_layer;
    for (const auto& e : layout.drawn_edges) {
        const auto [ls, os] = place.at(e.source);
        const auto [lt, ot] = place.at(e.target);
        (void)lt;
        by_layer[ls].emplace_back(os, ot);
    }
    std::uint64_t total = 0;
    for (auto& [layer, pairs] : by_layer) {
        std::sort(pairs.begin(), pairs.end());
        std::vector<int> targets, tmp(pairs.size());
        targets.reserve(pairs.size());
        for (const auto& p : pairs) targets.push_back(p.second);
        total += merge_count(targets, tmp, 0, targets.size());
    }
    return static_cast<std::size_t>(total);
}

void order_layers(LayoutGraph& layout, int sweep_cap) {
    const auto n = layout.nodes.size();
    std::unordered_map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[layout.nodes[i].id] = i;

    std::vector<std::vector<std::size_t>> up(n), down(n);
    for (const auto& e : layout.drawn_edges) {
        const auto s = index.at(e.source), t = index.at(e.target);
        up[t].push_back(s);
        down[s].push_back(t);
    }
    int layer_count = 0;
    for (const auto& node : layout.nodes) layer_count = std::max(layer_count, node.layer + 1);
    layout.layers = layer_count;

    std::vector<std::vector<std::size_t>> layers(layer_count);
    for (std::size_t i = 0; i < n; ++i) layers[layout.nodes[i].layer].push_back(i);
    std::vector<int> pos(n, 0);
    auto is_leaf = [&](std::size_t i) { return layout.nodes[i].role == NodeRole::Leaf; };

    for (auto& layer : layers) {
        std::vector<std::tuple<int, double, NodeId, std::size_t>> keyed;
        for (auto i : layer) {
            double bary = std::numeric_limits<double>::infinity();
            if (!up[i].empty()) {
                double sum = 0.0;
                for (auto u : up[i]) sum += pos[u];
                bary = sum / static_cast<double>(up[i].size());
            }
            keyed.emplace_back(is_leaf(i) ? 0 : 1, bary, layout.nodes[i].id, i);
        }
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t k = 0; k < keyed.size(); ++k) {
            layer[k] = std::get<3>(keyed[k]);
            pos[layer[k]] = static_cast<int>(k);
        }
    }
    auto sync = [&] {
        for (std::size_t i = 0; i < n; ++i) layout.nodes[i].order_in_layer = pos[i];
    };
    sync();
    layout.initial_crossings = count_crossings(layout);

    // Crossings among edges of a and b (same layer) when a sits left of b.
    auto pair_crossings = [&](std::size_t a, std::size_t b) {
        std::size_t c = 0;
        for (auto x : up[a])
            for (auto y : up[b]) c += pos[x] > pos[y];
        for (auto x : down[a])
            for (auto y : down[b]) c += pos[x] > pos[y];
        return c;
    };
    auto sweep_layer = [&](std::vector<std::size_t>& layer) {
        bool improved = false;
        for (std::size_t k = 0; k + 1 < layer.size(); ++k) {
            const auto a = layer[k], b = layer[k + 1];
            if (is_leaf(a) != is_leaf(b)) continue;
            if (pair_crossings(b, a) < pair_crossings(a, b)) {
                std::swap(layer[k], layer[k + 1]);
                pos[layer[k]] = static_cast<int>(k);
                pos[layer[k + 1]] = static_cast<int>(k + 1);
                improved = true;
            }
        }
        return improved;
    };
    for (int sweep = 0; sweep < sweep_cap; ++sweep) {
        bool improved = false;
        for (int l = 0; l < layer_count; ++l) improved = sweep_layer(layers[l]) || improved;
        for (int l = layer_count - 1; l >= 0; --l) improved = sweep_layer(layers[l]) || improved;
        if (!improved) break;
    }
    sync();
    layout.crossings = count_crossings(layout);
    std::sort(layout.nodes.begin(), layout.nodes.end(), [](const LayoutNode& a, const LayoutNode& b) {
        return std::tie(a.layer, a.order_in_layer) < std::tie(b.layer, b.order_in_layer);
    });
}

LayoutGraph build_layout(const CausalGraph& graph, const LayoutOptions& options) {
    ContractedGraph contracted;
    if (options.aggregate) {
        contracted = aggregate_chains(graph);
    } else {
        contracted.graph = graph;
    }
    const auto& g = contracted.graph;
    const auto layers = assign_layers(g);
    auto split = extract_cross_layer_edges(g, layers);

    LayoutGraph layout;
    for (const auto& n : g.nodes()) {
        LayoutNode node;
        node.id = n.id;
        node.label = n.name;
        if (auto it = contracted.members.find(n.id); it != contracted.members.end()) {
            node.kind = NodeKind::Aggregate;
            node.members = it->second;
            node.internal_edges = contracted.internal_edges[n.id];
        }
        node.layer = layers.at(n.id);
        if (g.children(n.id).empty()) {
            node.role = NodeRole::Leaf;
        } else if (g.parents(n.id).empty()) {
            node.role = NodeRole::Root;
        }
        if (auto it = split.hidden_causes.find(n.id); it != split.hidden_causes.end()) node.hidden_causes = it->second;
        layout.nodes.push_back(std::move(node));
    }
    layout.drawn_edges = std::move(split.drawn);
    layout.hidden_edges = std::move(split.hidden);
    order_layers(layout, options.sweep_cap);
    return layout;
}

}  // namespace whatif
