#include "whatif/error.hpp"

namespace whatif {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "missing_column";
        case ErrorCode::EmptyTable: return "empty_table";
        case ErrorCode::MalformedRow: return "malformed_row";
        case ErrorCode::UnparsableNumeric: return "unparsable_numeric";
        case ErrorCode::UnknownColumn: return "unknown_column";
        case ErrorCode::InvalidColumnSpec: return "invalid_column_spec";
        case ErrorCode::InvalidConfig: return "invalid_config";
        case ErrorCode::InvalidParentSet: return "invalid_parent_set";
        case ErrorCode::ParentCapExceeded: return "parent_cap_exceeded";
        case ErrorCode::InvalidScoreParams: return "invalid_score_params";
        case ErrorCode::EdgeAbsent: return "edge_absent";
        case ErrorCode::EdgeExists: return "edge_exists";
        case ErrorCode::TooFewColumns: return "too_few_columns";
        case ErrorCode::InvalidSeedGraph: return "invalid_seed_graph";
        case ErrorCode::UnknownNode: return "unknown_node";
        case ErrorCode::CycleDetected: return "cycle_detected";
        case ErrorCode::InvalidAssignment: return "invalid_assignment";
        case ErrorCode::InvalidTarget: return "invalid_target";
        case ErrorCode::NodeMissingFromDataset: return "node_missing_from_dataset";
        case ErrorCode::ParentSpaceTooLarge: return "parent_space_too_large";
        case ErrorCode::InvalidDocument: return "invalid_document";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

std::string_view error_module(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn:
        case ErrorCode::EmptyTable:
        case ErrorCode::MalformedRow:
        case ErrorCode::UnparsableNumeric:
        case ErrorCode::UnknownColumn:
        case ErrorCode::InvalidColumnSpec:
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidParentSet:
            return "dataset";
        case ErrorCode::ParentCapExceeded:
        case ErrorCode::InvalidScoreParams:
            return "scoring";
        case ErrorCode::EdgeAbsent:
        case ErrorCode::EdgeExists:
        case ErrorCode::TooFewColumns:
        case ErrorCode::InvalidSeedGraph:
        case ErrorCode::UnknownNode:
            return "discovery";
        case ErrorCode::CycleDetected:
            return "layout";
        case ErrorCode::InvalidAssignment:
        case ErrorCode::InvalidTarget:
        case ErrorCode::NodeMissingFromDataset:
        case ErrorCode::ParentSpaceTooLarge:
            return "inference";
        case ErrorCode::InvalidDocument:
        case ErrorCode::NotFound:
            return "server";
        case ErrorCode::Internal:
            return "internal";
    }
    return "internal";
}

}  // namespace whatif
