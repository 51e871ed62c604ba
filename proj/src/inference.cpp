#include "whatif/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace whatif {

namespace {

constexpr std::size_t kChunkSize = 2048;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Code draw(const std::vector<double>& p, double u) {
    double acc = 0.0;
    Code last = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        acc += p[k];
        last = static_cast<Code>(k);
        if (u < acc) return last;
    }
    return last;
}

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> point_mass(std::size_t r, Code v) {
    std::vector<double> p(r, 0.0);
    p[v] = 1.0;
    return p;
}

std::vector<double> complement_marginal(const std::vector<double>& observed, Code v) {
    std::vector<double> p = observed;
    p[v] = 0.0;
    double total = 0.0;
    for (double x : p) total += x;
    if (total <= 0.0) {
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = k == v ? 0.0 : 1.0;
        total = static_cast<double>(p.size() - 1);
    }
    for (double& x : p) x /= total;
    return p;
}

/// Positions (topological order) of `node` and every node it depends on,
/// not looking past overridden nodes.
std::vector<std::size_t> relevant_positions(const CpdModel& model, const Overrides& overrides, NodeId node) {
    const auto& g = model.graph();
    std::vector<char> keep(g.node_count(), 0);
    std::vector<NodeId> stack{node};
    keep[g.index_of(node)] = 1;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        if (overrides[g.index_of(u)]) continue;
        for (NodeId p : g.parents(u)) {
            auto& k = keep[g.index_of(p)];
            if (!k) {
                k = 1;
                stack.push_back(p);
            }
        }
    }
    std::vector<std::size_t> out;
    for (auto pos : model.order())
        if (keep[pos]) out.push_back(pos);
    return out;
}

Samples sample_positions(const CpdModel& model, const Overrides& overrides, const std::vector<std::size_t>& positions,
                         std::size_t count, std::uint64_t seed, unsigned threads) {
    const auto n_nodes = model.graph().node_count();
    Samples out;
    out.count = count;
    out.values.assign(n_nodes, {});
    for (auto pos : positions) out.values[pos].assign(count, 0);

    const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
    auto run_chunk = [&](std::size_t chunk) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(chunk)));
        std::vector<Code> current(n_nodes, 0);
        const auto begin = chunk * kChunkSize;
        const auto end = std::min(count, begin + kChunkSize);
        for (std::size_t i = begin; i < end; ++i) {
            for (auto pos : positions) {
                const auto& dist =
                    overrides[pos] ? *overrides[pos]
                                   : model.cpd(model.graph().nodes()[pos].id).row(model.config_key(pos, current));
                current[pos] = draw(dist, uniform01(rng));
                out.values[pos][i] = current[pos];
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
        return out;
    }
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return out;
}

double fraction(const std::vector<Code>& values, Code v) {
    if (values.empty()) return 0.0;
    std::size_t hits = 0;
    for (Code x : values) hits += x == v;
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

}  // namespace

const std::vector<double>& NodeCpd::row(std::uint64_t key) const {
    auto it = rows.find(key);
    return it == rows.end() ? uniform : it->second;
}

CpdModel::CpdModel(CausalGraph graph, std::vector<NodeCpd> cpds, std::vector<std::vector<double>> observed,
                   std::vector<std::vector<std::string>> labels, double smoothing)
    : graph_(std::move(graph)),
      cpds_(std::move(cpds)),
      observed_(std::move(observed)),
      labels_(std::move(labels)),
      smoothing_(smoothing) {
    const auto n = graph_.node_count();
    if (cpds_.size() != n || observed_.size() != n || labels_.size() != n)
        throw Error(ErrorCode::Internal, "model parts disagree on node count");
    for (std::size_t i = 0; i < n; ++i) {
        auto& cpd = cpds_[i];
        const auto id = graph_.nodes()[i].id;
        if (cpd.node != id || cpd.parents != graph_.parents(id) ||
            cpd.parent_cardinalities.size() != cpd.parents.size())
            throw Error(ErrorCode::Internal, "CPD of '" + graph_.nodes()[i].name + "' does not match the graph");
        if (cpd.cardinality == 0 || observed_[i].size() != cpd.cardinality || labels_[i].size() != cpd.cardinality)
            throw Error(ErrorCode::Internal, "cardinality mismatch for '" + graph_.nodes()[i].name + "'");
        for (const auto& [key, row] : cpd.rows)
            if (row.size() != cpd.cardinality)
                throw Error(ErrorCode::Internal, "CPD row width mismatch for '" + graph_.nodes()[i].name + "'");
        cpd.uniform.assign(cpd.cardinality, 1.0 / static_cast<double>(cpd.cardinality));
    }
    for (NodeId id : graph_.topological_order()) order_.push_back(graph_.index_of(id));
    parent_positions_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (NodeId p : cpds_[i].parents) parent_positions_[i].push_back(graph_.index_of(p));
}

std::uint64_t CpdModel::config_key(std::size_t node_position, const std::vector<Code>& values) const {
    const auto& cpd = cpds_[node_position];
    const auto& pp = parent_positions_[node_position];
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < pp.size(); ++i) key = key * cpd.parent_cardinalities[i] + values[pp[i]];
    return key;
}

CpdModel fit_cpds(const Dataset& ds, const CausalGraph& graph, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::InvalidConfig, "smoothing must be a non-negative finite number");
    for (const auto& n : graph.nodes()) {
        if (n.id >= ds.column_count() || ds.name(n.id) != n.name)
            throw Error(ErrorCode::NodeMissingFromDataset, "graph node '" + n.name + "' is not a dataset column");
    }
    std::vector<NodeCpd> cpds;
    std::vector<std::vector<double>> observed;
    std::vector<std::vector<std::string>> labels;
    for (const auto& n : graph.nodes()) {
        NodeCpd cpd;
        cpd.node = n.id;
        cpd.cardinality = ds.cardinality(n.id);
        cpd.parents = graph.parents(n.id);
        double space = 1.0;
        for (NodeId p : cpd.parents) {
            cpd.parent_cardinalities.push_back(ds.cardinality(p));
            space *= static_cast<double>(ds.cardinality(p));
        }
        if (space > 1.8e19)
            throw Error(ErrorCode::ParentSpaceTooLarge, "parent configurations of '" + n.name + "' overflow 64 bits");
        const auto table = joint_counts(ds, n.id, cpd.parents, cpd.parents.size());
        const double r = static_cast<double>(cpd.cardinality);
        for (const auto& config : table.configurations) {
            std::uint64_t key = 0;
            for (std::size_t i = 0; i < cpd.parents.size(); ++i)
                key = key * cpd.parent_cardinalities[i] + config.parent_values[i];
            std::vector<double> row(cpd.cardinality);
            const double denom = config.total + alpha * r;
            for (std::size_t k = 0; k < cpd.cardinality; ++k) row[k] = (config.child_counts[k] + alpha) / denom;
            cpd.rows.emplace(key, std::move(row));
        }
        cpds.push_back(std::move(cpd));
        observed.push_back(marginal(ds, n.id).proportions);
        labels.push_back(ds.dictionary(n.id).labels());
    }
    return CpdModel(graph, std::move(cpds), std::move(observed), std::move(labels), alpha);
}

void validate_spec(const CpdModel& model, const InterventionSpec& spec) {
    if (spec.sample_count == 0) throw Error(ErrorCode::InvalidAssignment, "sampleCount must be positive");
    std::set<NodeId> seen;
    for (const auto& [node, value] : spec.assignments) {
        if (!model.graph().contains(node))
            throw Error(ErrorCode::InvalidAssignment, "intervention on unknown node id " + std::to_string(node));
        const auto& name = model.graph().node(node).name;
        if (!seen.insert(node).second)
            throw Error(ErrorCode::InvalidAssignment, "column '" + name + "' assigned more than once");
        if (value >= model.cardinality(node))
            throw Error(ErrorCode::InvalidAssignment,
                        "value code " + std::to_string(value) + " out of range for column '" + name + "'");
    }
}

Samples sample_with_overrides(const CpdModel& model, const Overrides& overrides, std::size_t sample_count,
                              std::uint64_t seed, unsigned threads) {
    if (overrides.size() != model.graph().node_count())
        throw Error(ErrorCode::Internal, "override vector does not match node count");
    return sample_positions(model, overrides, model.order(), sample_count, seed, threads);
}

Samples sample_graph(const CpdModel& model, const InterventionSpec& spec, unsigned threads) {
    validate_spec(model, spec);
    Overrides overrides(model.graph().node_count());
    for (const auto& [node, value] : spec.assignments)
        overrides[model.position(node)] = point_mass(model.cardinality(node), value);
    return sample_with_overrides(model, overrides, spec.sample_count, spec.seed, threads);
}

InterventionResult intervene(const CpdModel& model, const InterventionSpec& spec, unsigned threads) {
    const auto samples = sample_graph(model, spec, threads);
    InterventionResult result;
    result.spec = spec;
    for (std::size_t pos = 0; pos < model.graph().node_count(); ++pos) {
        const auto id = model.graph().nodes()[pos].id;
        DimensionResult dim;
        dim.column = id;
        dim.original = model.observed(id);
        dim.estimated.assign(model.cardinality(id), 0.0);
        for (Code v : samples.values[pos]) dim.estimated[v] += 1.0;
        for (double& x : dim.estimated) x /= static_cast<double>(samples.count);
        for (const auto& [node, value] : spec.assignments)
            if (node == id) dim.estimated = point_mass(model.cardinality(id), value);
        result.dimensions.push_back(std::move(dim));
    }
    return result;
}

std::optional<double> exact_probability(const CpdModel& model, const Overrides& overrides, NodeId node, Code value,
                                        double limit) {
    const auto positions = relevant_positions(model, overrides, node);
    double space = 1.0;
    for (auto pos : positions) space *= static_cast<double>(model.cpd(model.graph().nodes()[pos].id).cardinality);
    if (space > limit) return std::nullopt;

    const auto target_pos = model.position(node);
    std::vector<Code> current(model.graph().node_count(), 0);
    auto dist_of = [&](std::size_t pos) -> const std::vector<double>& {
        if (overrides[pos]) return *overrides[pos];
        return model.cpd(model.graph().nodes()[pos].id).row(model.config_key(pos, current));
    };
    double total = 0.0;
    auto recurse = [&](auto&& self, std::size_t depth, double prob) -> void {
        const auto pos = positions[depth];
        const auto& dist = dist_of(pos);
        if (pos == target_pos) {
            total += prob * dist[value];
            return;
        }
        for (std::size_t k = 0; k < dist.size(); ++k) {
            if (dist[k] <= 0.0) continue;
            current[pos] = static_cast<Code>(k);
            self(self, depth + 1, prob * dist[k]);
        }
    };
    recurse(recurse, 0, 1.0);
    return total;
}

AttributionResult attribute(const CpdModel& model, NodeId target, Code value, const AttributionOptions& options) {
    const auto& g = model.graph();
    if (!g.contains(target)) throw Error(ErrorCode::InvalidTarget, "attribution target node is not in the graph");
    if (value >= model.cardinality(target))
        throw Error(ErrorCode::InvalidTarget, "value code " + std::to_string(value) + " out of range for column '" +
                                                  g.node(target).name + "'");

    AttributionResult result;
    result.target = target;
    result.value = value;
    const auto on_path = g.ancestors(target);

    const Overrides none(g.node_count());
    const auto relevant = relevant_positions(model, none, target);
    double space = 1.0;
    for (auto pos : relevant) space *= static_cast<double>(model.cpd(g.nodes()[pos].id).cardinality);
    result.exact = space <= options.exact_state_limit;

    auto probability = [&](const Overrides& overrides, std::uint64_t stream) {
        if (result.exact) {
            if (auto p = exact_probability(model, overrides, target, value, options.exact_state_limit)) return *p;
        }
        const auto positions = relevant_positions(model, overrides, target);
        const auto samples = sample_positions(model, overrides, positions, options.sample_count,
                                              splitmix64(options.seed ^ splitmix64(stream)), options.threads);
        return fraction(samples.values[model.position(target)], value);
    };

    for (const auto& n : g.nodes()) {
        if (n.id == target) continue;
        NodeEffect effect;
        effect.node = n.id;
        effect.on_path = std::binary_search(on_path.begin(), on_path.end(), n.id);
        if (!effect.on_path) {
            result.out_of_path.push_back(n.id);
            result.effects.push_back(std::move(effect));
            continue;
        }
        const auto pos = model.position(n.id);
        const auto r = model.cardinality(n.id);
        effect.value_effects.assign(r, 0.0);
        if (r > 1) {
            for (Code v = 0; v < r; ++v) {
                Overrides clamp(g.node_count()), other(g.node_count());
                clamp[pos] = point_mass(r, v);
                other[pos] = complement_marginal(model.observed(n.id), v);
                const std::uint64_t stream = (static_cast<std::uint64_t>(pos) << 32) ^ (static_cast<std::uint64_t>(v) << 1);
                const double p_set = probability(clamp, stream);
                const double p_other = probability(other, stream | 1);
                effect.value_effects[v] = std::clamp(std::abs(p_set - p_other), 0.0, 1.0);
            }
        }
        const auto best = std::max_element(effect.value_effects.begin(), effect.value_effects.end());
        effect.effect = *best;
        effect.top_value = static_cast<Code>(best - effect.value_effects.begin());
        result.effects.push_back(std::move(effect));
    }
    return result;
}

}  // namespace whatif
