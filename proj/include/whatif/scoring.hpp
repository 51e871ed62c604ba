#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"

namespace whatif {

struct ScoreParams {
    double penalty_discount = 1.0;
    std::size_t max_parents = 8;

    /// Throws InvalidScoreParams.
    void validate() const;
};

/// Child plus canonically ordered (ascending) parent set.
struct LocalScoreKey {
    ColumnId child = 0;
    std::vector<ColumnId> parents;

    /// Sorts the parents; throws InvalidParentSet on child-in-parents or duplicates.
    static LocalScoreKey make(ColumnId child, std::span<const ColumnId> parents);

    bool operator==(const LocalScoreKey&) const = default;
};

struct LocalScoreKeyHash {
    std::size_t operator()(const LocalScoreKey& key) const noexcept;
};

/// Maximised log-likelihood sum_jk N_ijk ln(N_ijk / N_ij); 0 ln 0 = 0.
double log_likelihood(const ContingencyTable& table);

/// Number of free parameters q_i (r_i - 1) of a categorical CPD.
double parameter_count(const Dataset& ds, const LocalScoreKey& key);

/// 2 LL - penaltyDiscount ln(n) k for one node. Larger is better; the graph
/// score is the sum over nodes, i.e. the negated BIC. Throws ParentCapExceeded.
double local_score(const Dataset& ds, const LocalScoreKey& key, const ScoreParams& params);

/// Memoising local scorer. Safe for concurrent use.
class Scorer {
public:
    Scorer(const Dataset& ds, ScoreParams params, bool use_cache = true);

    const Dataset& dataset() const { return ds_; }
    const ScoreParams& params() const { return params_; }

    double local(ColumnId child, std::span<const ColumnId> parents) const;
    double local(const LocalScoreKey& key) const;

    /// Score change from adding source -> target. std::nullopt marks the move
    /// ineligible (parent cap). Throws EdgeExists if the edge is present.
    std::optional<double> delta_insert(const CausalGraph& graph, NodeId source, NodeId target) const;
    /// Score change from removing source -> target. Throws EdgeAbsent.
    double delta_delete(const CausalGraph& graph, NodeId source, NodeId target) const;

    double graph_score(const CausalGraph& graph) const;

    std::size_t cache_size() const;
    std::size_t cache_hits() const { return hits_.load(); }

private:
    const Dataset& ds_;
    ScoreParams params_;
    bool use_cache_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<LocalScoreKey, double, LocalScoreKeyHash> cache_;
    mutable std::atomic<std::size_t> hits_{0};
};

}  // namespace whatif
