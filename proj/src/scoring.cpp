#include "whatif/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace whatif {

void ScoreParams::validate() const {
    if (!(penalty_discount > 0.0) || !std::isfinite(penalty_discount))
        throw Error(ErrorCode::InvalidScoreParams, "penaltyDiscount must be a positive finite number");
    if (max_parents < 1) throw Error(ErrorCode::InvalidScoreParams, "maxParents must be at least 1");
}

LocalScoreKey LocalScoreKey::make(ColumnId child, std::span<const ColumnId> parents) {
    LocalScoreKey key{child, std::vector<ColumnId>(parents.begin(), parents.end())};
    std::sort(key.parents.begin(), key.parents.end());
    if (std::adjacent_find(key.parents.begin(), key.parents.end()) != key.parents.end())
        throw Error(ErrorCode::InvalidParentSet, "duplicate parent in local score key");
    if (std::binary_search(key.parents.begin(), key.parents.end(), child))
        throw Error(ErrorCode::InvalidParentSet, "child listed among its own parents");
    return key;
}

std::size_t LocalScoreKeyHash::operator()(const LocalScoreKey& key) const noexcept {
    std::size_t h = std::hash<std::size_t>{}(key.child) + 0x9e3779b97f4a7c15ULL;
    for (auto p : key.parents) h ^= std::hash<std::size_t>{}(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

double log_likelihood(const ContingencyTable& table) {
    double ll = 0.0;
    for (const auto& config : table.configurations) {
        const double total = config.total;
        for (auto count : config.child_counts) {
            if (count == 0) continue;
            ll += count * std::log(count / total);
        }
    }
    return ll;
}

double parameter_count(const Dataset& ds, const LocalScoreKey& key) {
    double q = 1.0;
    for (auto p : key.parents) q *= static_cast<double>(ds.cardinality(p));
    return q * (static_cast<double>(ds.cardinality(key.child)) - 1.0);
}

double local_score(const Dataset& ds, const LocalScoreKey& key, const ScoreParams& params) {
    if (key.parents.size() > params.max_parents)
        throw Error(ErrorCode::ParentCapExceeded, "parent set of size " + std::to_string(key.parents.size()) +
                                                      " exceeds maxParents " + std::to_string(params.max_parents));
    const auto table = joint_counts(ds, key.child, key.parents, params.max_parents);
    const double ll = log_likelihood(table);
    const double k = parameter_count(ds, key);
    if (k == 0.0) return 2.0 * ll;
    return 2.0 * ll - params.penalty_discount * std::log(static_cast<double>(ds.sample_size())) * k;
}

Scorer::Scorer(const Dataset& ds, ScoreParams params, bool use_cache)
    : ds_(ds), params_(params), use_cache_(use_cache) {
    params_.validate();
}

double Scorer::local(ColumnId child, std::span<const ColumnId> parents) const {
    return local(LocalScoreKey::make(child, parents));
}

double Scorer::local(const LocalScoreKey& key) const {
    if (!use_cache_) return local_score(ds_, key, params_);
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            hits_.fetch_add(1, std::memory_order_relaxed);
            return it->second;
        }
    }
    const double value = local_score(ds_, key, params_);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(key, value).first->second;
}

std::optional<double> Scorer::delta_insert(const CausalGraph& graph, NodeId source, NodeId target) const {
    if (graph.has_edge(source, target))
        throw Error(ErrorCode::EdgeExists, "edge " + graph.node(source).name + " -> " + graph.node(target).name +
                                               " already present");
    const auto& pa = graph.parents(target);
    if (pa.size() + 1 > params_.max_parents) return std::nullopt;
    std::vector<ColumnId> with(pa.begin(), pa.end());
    with.push_back(source);
    return local(target, with) - local(target, pa);
}

double Scorer::delta_delete(const CausalGraph& graph, NodeId source, NodeId target) const {
    if (!graph.has_edge(source, target))
        throw Error(ErrorCode::EdgeAbsent,
                    "edge " + graph.node(source).name + " -> " + graph.node(target).name + " absent");
    const auto& pa = graph.parents(target);
    std::vector<ColumnId> without;
    without.reserve(pa.size());
    for (auto p : pa)
        if (p != source) without.push_back(p);
    return local(target, without) - local(target, pa);
}

double Scorer::graph_score(const CausalGraph& graph) const {
    double total = 0.0;
    for (const auto& n : graph.nodes()) total += local(n.id, graph.parents(n.id));
    return total;
}

std::size_t Scorer::cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

}  // namespace whatif
