#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"

namespace whatif {

/// Conditional probability table of one node. Rows are keyed by the
/// mixed-radix index of the parent values (first parent most significant).
struct NodeCpd {
    NodeId node = 0;
    std::size_t cardinality = 0;
    std::vector<NodeId> parents;  // ascending, as in CausalGraph::parents
    std::vector<std::size_t> parent_cardinalities;
    std::unordered_map<std::uint64_t, std::vector<double>> rows;

    /// Row for a parent configuration, or the uniform fallback when unseen.
    const std::vector<double>& row(std::uint64_t key) const;
    std::vector<double> uniform;
};

class CpdModel {
public:
    /// `observed` are the observational marginals and `labels` the value labels,
    /// both indexed like graph.nodes().
    CpdModel(CausalGraph graph, std::vector<NodeCpd> cpds, std::vector<std::vector<double>> observed,
             std::vector<std::vector<std::string>> labels, double smoothing);

    const CausalGraph& graph() const { return graph_; }
    double smoothing() const { return smoothing_; }
    std::size_t position(NodeId id) const { return graph_.index_of(id); }
    const NodeCpd& cpd(NodeId id) const { return cpds_[position(id)]; }
    const std::vector<double>& observed(NodeId id) const { return observed_[position(id)]; }
    const std::vector<std::string>& labels(NodeId id) const { return labels_[position(id)]; }
    std::size_t cardinality(NodeId id) const { return cpds_[position(id)].cardinality; }
    /// Node positions in topological order.
    const std::vector<std::size_t>& order() const { return order_; }

    /// Parent-configuration key of `node` given values indexed by node position.
    std::uint64_t config_key(std::size_t node_position, const std::vector<Code>& values) const;

private:
    CausalGraph graph_;
    std::vector<NodeCpd> cpds_;
    std::vector<std::vector<double>> observed_;
    std::vector<std::vector<std::string>> labels_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> parent_positions_;
    double smoothing_ = 1.0;
};

/// Fits (N_ijk + alpha) / (N_ij + alpha r_i) tables; unseen parent
/// configurations fall back to the uniform row.
CpdModel fit_cpds(const Dataset& ds, const CausalGraph& graph, double alpha = 1.0);

struct InterventionSpec {
    std::vector<std::pair<NodeId, Code>> assignments;
    std::size_t sample_count = 10000;
    std::uint64_t seed = 0;
};

/// Replacement distribution for a node's CPD, indexed by node position.
/// A point mass is the do-operator; any other distribution is a randomised
/// intervention.
using Overrides = std::vector<std::optional<std::vector<double>>>;

struct Samples {
    std::size_t count = 0;
    std::vector<std::vector<Code>> values;  // [node position][sample]
};

/// Throws InvalidAssignment.
void validate_spec(const CpdModel& model, const InterventionSpec& spec);

/// Ancestral sampling with intervened nodes clamped. Samples are produced in
/// fixed-size chunks with per-chunk seeds, so the stream does not depend on
/// the thread count.
Samples sample_graph(const CpdModel& model, const InterventionSpec& spec, unsigned threads = 0);
Samples sample_with_overrides(const CpdModel& model, const Overrides& overrides, std::size_t sample_count,
                              std::uint64_t seed, unsigned threads = 0);

struct DimensionResult {
    NodeId column = 0;
    std::vector<double> original;   // d1: observational
    std::vector<double> estimated;  // d2: after intervention
};

struct InterventionResult {
    std::vector<DimensionResult> dimensions;  // graph node order
    InterventionSpec spec;
};

InterventionResult intervene(const CpdModel& model, const InterventionSpec& spec, unsigned threads = 0);

/// P(node = value) under the overrides, by exhaustive enumeration over the
/// node's ancestors. std::nullopt when their joint state space exceeds `limit`.
std::optional<double> exact_probability(const CpdModel& model, const Overrides& overrides, NodeId node, Code value,
                                        double limit = 1e6);

struct AttributionOptions {
    std::size_t sample_count = 10000;
    std::uint64_t seed = 0;
    double exact_state_limit = 1e6;
    unsigned threads = 0;
};

struct NodeEffect {
    NodeId node = 0;
    bool on_path = false;
    double effect = 0.0;             // max over values of value_effects
    std::optional<Code> top_value;   // argmax value, on-path nodes only
    std::vector<double> value_effects;
};

struct AttributionResult {
    NodeId target = 0;
    Code value = 0;
    bool exact = true;
    std::vector<NodeEffect> effects;  // graph node order, target excluded
    std::vector<NodeId> out_of_path;
};

/// Effect of each ancestor V of the target on P(target = value):
/// max over v of |P(t | do(V = v)) - P(t | do(V != v))|, where do(V != v)
/// draws V from its observational marginal restricted to the other values.
AttributionResult attribute(const CpdModel& model, NodeId target, Code value, const AttributionOptions& options = {});

}  // namespace whatif
