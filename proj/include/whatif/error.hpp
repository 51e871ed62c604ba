#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace whatif {

enum class ErrorCode {
    MissingColumn,
    EmptyTable,
    MalformedRow,
    UnparsableNumeric,
    UnknownColumn,
    InvalidColumnSpec,
    InvalidConfig,
    InvalidParentSet,
    ParentCapExceeded,
    InvalidScoreParams,
    EdgeAbsent,
    EdgeExists,
    TooFewColumns,
    InvalidSeedGraph,
    UnknownNode,
    CycleDetected,
    InvalidAssignment,
    InvalidTarget,
    NodeMissingFromDataset,
    ParentSpaceTooLarge,
    InvalidDocument,
    NotFound,
    Internal,
};

std::string_view error_code_name(ErrorCode code);

/// Module that raised an error; surfaced in service error documents.
std::string_view error_module(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace whatif
