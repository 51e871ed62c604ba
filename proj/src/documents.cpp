#include "whatif/documents.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace whatif {

namespace {

Json edge_json(const Edge& e) { return Json{{"source", e.source}, {"target", e.target}, {"uncertainty", e.uncertainty}}; }

Json distribution_json(const std::vector<std::string>& labels, const std::vector<double>& p) {
    Json values = Json::array();
    for (std::size_t v = 0; v < p.size(); ++v) values.push_back(Json{{"value", labels[v]}, {"proportion", p[v]}});
    return values;
}

template <class T>
T require(const Json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidDocument, std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

std::string render(const Json& doc) { return doc.dump(2) + "\n"; }

Json dataset_summary_document(const Dataset& ds) {
    Json columns = Json::array();
    for (ColumnId c = 0; c < ds.column_count(); ++c) {
        columns.push_back(Json{{"id", c},
                               {"name", ds.name(c)},
                               {"kind", ds.spec(c).kind == ColumnKind::Categorical ? "categorical" : "numeric-binned"},
                               {"cardinality", ds.cardinality(c)},
                               {"maxDisplayedValues", ds.spec(c).max_displayed_values},
                               {"marginal", distribution_json(ds.dictionary(c).labels(), marginal(ds, c).proportions)}});
    }
    return Json{{"schemaVersion", kSchemaVersion},
                {"sampleSize", ds.sample_size()},
                {"columnCount", ds.column_count()},
                {"columns", std::move(columns)}};
}

Json graph_document(const CausalGraph& graph, const ScoreParams& params) {
    Json nodes = Json::array();
    for (const auto& n : graph.nodes()) nodes.push_back(Json{{"id", n.id}, {"name", n.name}});
    Json edges = Json::array();
    for (const auto& e : graph.edges()) edges.push_back(edge_json(e));
    Json trace = Json::array();
    for (const auto& m : graph.trace)
        trace.push_back(Json{{"move", m.kind == MoveKind::Insert ? "insert" : "delete"},
                             {"source", m.source},
                             {"target", m.target},
                             {"delta", m.delta}});
    return Json{{"schemaVersion", kSchemaVersion},
                {"nodes", std::move(nodes)},
                {"edges", std::move(edges)},
                {"score", graph.score},
                {"params", Json{{"penaltyDiscount", params.penalty_discount}, {"maxParents", params.max_parents}}},
                {"trace", std::move(trace)}};
}

GraphFile graph_from_document(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidDocument, "graph document must be a JSON object");
    std::vector<GraphNode> nodes;
    for (const auto& n : require<Json>(doc, "nodes"))
        nodes.push_back({require<NodeId>(n, "id"), require<std::string>(n, "name")});
    GraphFile file{CausalGraph(std::move(nodes)), {}};
    try {
        for (const auto& e : require<Json>(doc, "edges"))
            file.graph.add_edge(require<NodeId>(e, "source"), require<NodeId>(e, "target"),
                                e.value("uncertainty", 0.0));
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidDocument, std::string("bad edge list: ") + e.what());
    }
    if (!file.graph.is_acyclic()) throw Error(ErrorCode::CycleDetected, "graph document contains a directed cycle");
    file.graph.score = doc.value("score", 0.0);
    if (doc.contains("params")) file.params = score_params_from_document(doc.at("params"));
    if (doc.contains("trace")) {
        for (const auto& m : doc.at("trace")) {
            const auto kind = require<std::string>(m, "move");
            file.graph.trace.push_back({kind == "delete" ? MoveKind::Delete : MoveKind::Insert,
                                        require<NodeId>(m, "source"), require<NodeId>(m, "target"),
                                        require<double>(m, "delta")});
        }
    }
    return file;
}

CausalGraph bind_to_dataset(const CausalGraph& graph, const Dataset& ds) {
    std::unordered_map<NodeId, NodeId> remap;
    std::vector<GraphNode> nodes;
    for (const auto& n : graph.nodes()) {
        auto c = ds.find_column(n.name);
        if (!c) throw Error(ErrorCode::NodeMissingFromDataset, "graph node '" + n.name + "' is not a dataset column");
        remap[n.id] = *c;
        nodes.push_back({*c, n.name});
    }
    std::sort(nodes.begin(), nodes.end(), [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    CausalGraph out(std::move(nodes));
    for (const auto& e : graph.edges()) out.add_edge(remap.at(e.source), remap.at(e.target), e.uncertainty);
    for (auto m : graph.trace) {
        m.source = remap.at(m.source);
        m.target = remap.at(m.target);
        out.trace.push_back(m);
    }
    out.score = graph.score;
    return out;
}

Json layout_document(const LayoutGraph& layout, const Dataset* ds, const AttributionResult* attribution) {
    std::unordered_map<NodeId, double> effects;
    if (attribution)
        for (const auto& e : attribution->effects) effects[e.node] = e.effect;

    Json nodes = Json::array();
    for (const auto& n : layout.nodes) {
        Json members = Json::array();
        for (auto m : n.members) members.push_back(m);
        Json internal = Json::array();
        for (const auto& e : n.internal_edges) internal.push_back(edge_json(e));
        Json node{{"id", n.id},
                  {"label", n.label},
                  {"kind", to_string(n.kind)},
                  {"members", std::move(members)},
                  {"internalEdges", std::move(internal)},
                  {"layer", n.layer},
                  {"orderInLayer", n.order_in_layer},
                  {"role", to_string(n.role)},
                  {"hiddenCauses", n.hidden_causes},
                  {"glyphs", Json{{"shown", std::min(n.hidden_causes.size(), kGlyphCap)},
                                  {"overflow", n.hidden_causes.size() > kGlyphCap ? n.hidden_causes.size() - kGlyphCap
                                                                                  : 0}}}};
        if (ds && n.kind == NodeKind::Plain && n.id < ds->column_count()) {
            node["valueDistribution"] = distribution_json(ds->dictionary(n.id).labels(), marginal(*ds, n.id).proportions);
            node["maxDisplayedValues"] = ds->spec(n.id).max_displayed_values;
        }
        if (attribution) {
            double score = 0.0;
            if (n.kind == NodeKind::Plain) {
                if (auto it = effects.find(n.id); it != effects.end()) score = it->second;
            } else {
                for (auto m : n.members)
                    if (auto it = effects.find(m); it != effects.end()) score = std::max(score, it->second);
            }
            node["attributionScore"] = score;
        }
        nodes.push_back(std::move(node));
    }
    Json drawn = Json::array();
    for (const auto& e : layout.drawn_edges) drawn.push_back(edge_json(e));
    Json hidden = Json::array();
    for (const auto& e : layout.hidden_edges) hidden.push_back(edge_json(e));
    return Json{{"schemaVersion", kSchemaVersion},
                {"layers", layout.layers},
                {"crossings", layout.crossings},
                {"initialCrossings", layout.initial_crossings},
                {"glyphCap", kGlyphCap},
                {"nodes", std::move(nodes)},
                {"drawnEdges", std::move(drawn)},
                {"hiddenEdges", std::move(hidden)}};
}

Json intervention_document(const CpdModel& model, const InterventionResult& result) {
    Json assignments = Json::array();
    for (const auto& [node, value] : result.spec.assignments)
        assignments.push_back(Json{{"column", model.graph().node(node).name}, {"value", model.labels(node)[value]}});
    Json dims = Json::array();
    for (const auto& d : result.dimensions) {
        const auto& labels = model.labels(d.column);
        Json values = Json::array();
        double l1 = 0.0;
        for (std::size_t v = 0; v < labels.size(); ++v) {
            values.push_back(Json{{"value", labels[v]}, {"original", d.original[v]}, {"estimated", d.estimated[v]}});
            l1 += std::abs(d.estimated[v] - d.original[v]);
        }
        const bool intervened =
            std::any_of(result.spec.assignments.begin(), result.spec.assignments.end(),
                        [&](const auto& a) { return a.first == d.column; });
        dims.push_back(Json{{"id", d.column},
                            {"column", model.graph().node(d.column).name},
                            {"intervened", intervened},
                            {"l1Change", l1},
                            {"values", std::move(values)}});
    }
    return Json{{"schemaVersion", kSchemaVersion},
                {"intervention", Json{{"assignments", std::move(assignments)},
                                      {"sampleCount", result.spec.sample_count},
                                      {"seed", result.spec.seed}}},
                {"dimensions", std::move(dims)}};
}

Json attribution_document(const CpdModel& model, const AttributionResult& result, const LayoutGraph* layout) {
    std::unordered_map<NodeId, NodeId> layout_node;
    if (layout) {
        for (const auto& n : layout->nodes) {
            if (n.kind == NodeKind::Plain) layout_node[n.id] = n.id;
            for (auto m : n.members) layout_node[m] = n.id;
        }
    }
    const auto& g = model.graph();
    Json effects = Json::array();
    for (const auto& e : result.effects) {
        const auto& labels = model.labels(e.node);
        Json per_value = Json::array();
        for (std::size_t v = 0; v < e.value_effects.size(); ++v)
            per_value.push_back(Json{{"value", labels[v]}, {"effect", e.value_effects[v]}});
        Json item{{"id", e.node},
                  {"column", g.node(e.node).name},
                  {"onPath", e.on_path},
                  {"effect", e.effect},
                  {"topValue", e.top_value ? Json(labels[*e.top_value]) : Json(nullptr)},
                  {"valueEffects", std::move(per_value)}};
        if (layout) {
            auto it = layout_node.find(e.node);
            item["layoutNode"] = it == layout_node.end() ? Json(nullptr) : Json(it->second);
        }
        effects.push_back(std::move(item));
    }
    std::vector<const NodeEffect*> ranked;
    for (const auto& e : result.effects)
        if (e.on_path) ranked.push_back(&e);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const NodeEffect* a, const NodeEffect* b) { return a->effect > b->effect; });
    Json ranking = Json::array();
    for (const auto* e : ranked) ranking.push_back(g.node(e->node).name);
    Json out_of_path = Json::array();
    for (auto id : result.out_of_path) out_of_path.push_back(g.node(id).name);
    return Json{{"schemaVersion", kSchemaVersion},
                {"target", Json{{"column", g.node(result.target).name},
                                {"value", model.labels(result.target)[result.value]}}},
                {"method", result.exact ? "exact" : "monte-carlo"},
                {"effects", std::move(effects)},
                {"ranking", std::move(ranking)},
                {"outOfPath", std::move(out_of_path)}};
}

std::pair<NodeId, Code> resolve_assignment(const CpdModel& model, std::string_view column, std::string_view value) {
    auto node = model.graph().find_by_name(std::string(column));
    if (!node) throw Error(ErrorCode::InvalidAssignment, "unknown column '" + std::string(column) + "'");
    const auto& labels = model.labels(*node);
    auto it = std::find(labels.begin(), labels.end(), value);
    if (it == labels.end())
        throw Error(ErrorCode::InvalidAssignment,
                    "column '" + std::string(column) + "' has no value '" + std::string(value) + "'");
    return {*node, static_cast<Code>(it - labels.begin())};
}

std::vector<std::pair<std::string, std::string>> parse_assignment_list(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        const auto item = text.substr(start, end - start);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw Error(ErrorCode::InvalidAssignment, "expected col=value, got '" + std::string(item) + "'");
            out.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        }
        start = end + 1;
    }
    return out;
}

InterventionSpec intervention_spec_from_document(const CpdModel& model, const Json& body) {
    InterventionSpec spec;
    if (!body.is_object()) throw Error(ErrorCode::InvalidAssignment, "intervention body must be a JSON object");
    try {
        if (body.contains("assignments")) {
            for (const auto& a : body.at("assignments"))
                spec.assignments.push_back(
                    resolve_assignment(model, a.at("column").get<std::string>(), a.at("value").get<std::string>()));
        }
        spec.sample_count = body.value("sampleCount", spec.sample_count);
        spec.seed = body.value("seed", spec.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidAssignment, std::string("malformed intervention: ") + e.what());
    }
    validate_spec(model, spec);
    return spec;
}

ScoreParams score_params_from_document(const Json& body) {
    ScoreParams params;
    if (body.is_null()) return params;
    if (!body.is_object()) throw Error(ErrorCode::InvalidScoreParams, "score params must be a JSON object");
    if (body.contains("penaltyDiscount")) {
        const auto& p = body.at("penaltyDiscount");
        if (!p.is_number()) throw Error(ErrorCode::InvalidScoreParams, "penaltyDiscount must be a number");
        params.penalty_discount = p.get<double>();
    }
    if (body.contains("maxParents")) {
        const auto& m = body.at("maxParents");
        if (!m.is_number_integer() || m.get<long long>() < 1)
            throw Error(ErrorCode::InvalidScoreParams, "maxParents must be a positive integer");
        params.max_parents = m.get<std::size_t>();
    }
    params.validate();
    return params;
}

Json error_document(ErrorCode code, std::string_view message) {
    return Json{{"schemaVersion", kSchemaVersion},
                {"error", Json{{"code", error_code_name(code)},
                               {"module", error_module(code)},
                               {"message", std::string(message)}}}};
}

}  // namespace whatif
