#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "whatif/dataset.hpp"
#include "whatif/discovery.hpp"
#include "whatif/inference.hpp"
#include "whatif/layout.hpp"
#include "whatif/scoring.hpp"

namespace whatif {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
/// Glyphs drawn beside a node before collapsing the rest into "+n".
inline constexpr std::size_t kGlyphCap = 5;

/// Canonical text form shared by the CLI and the service.
std::string render(const Json& doc);

Json dataset_summary_document(const Dataset& ds);

Json graph_document(const CausalGraph& graph, const ScoreParams& params);
struct GraphFile {
    CausalGraph graph;
    ScoreParams params;
};
/// Throws InvalidDocument.
GraphFile graph_from_document(const Json& doc);

/// Re-keys graph nodes to the dataset's column ids by name.
/// Throws NodeMissingFromDataset.
CausalGraph bind_to_dataset(const CausalGraph& graph, const Dataset& ds);

/// `ds` adds per-node value distributions, `attribution` adds attributionScore.
Json layout_document(const LayoutGraph& layout, const Dataset* ds = nullptr,
                     const AttributionResult* attribution = nullptr);

Json intervention_document(const CpdModel& model, const InterventionResult& result);
Json attribution_document(const CpdModel& model, const AttributionResult& result,
                          const LayoutGraph* layout = nullptr);

/// Resolves a column name and value label against the model. Throws InvalidAssignment.
std::pair<NodeId, Code> resolve_assignment(const CpdModel& model, std::string_view column, std::string_view value);
/// Parses "col=value[,col=value]".
std::vector<std::pair<std::string, std::string>> parse_assignment_list(std::string_view text);

/// Body: {assignments:[{column,value}], sampleCount, seed}.
InterventionSpec intervention_spec_from_document(const CpdModel& model, const Json& body);
ScoreParams score_params_from_document(const Json& body);

Json error_document(ErrorCode code, std::string_view message);

}  // namespace whatif
