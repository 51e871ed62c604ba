#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "whatif/error.hpp"

namespace whatif {

using ColumnId = std::size_t;
using Code = std::uint32_t;

/// Label given to missing cells; it becomes an ordinary category.
inline constexpr std::string_view kMissingLabel = "⟨missing⟩";

enum class ColumnKind { Categorical, NumericBinned };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Categorical;
    int bins = 4;
    int max_displayed_values = 10;
};

struct IngestOptions {
    char delimiter = ',';
    std::vector<std::string> missing_tokens = {"", "?"};
};

/// Column specs plus ingest options, as read from a JSON config document.
struct DatasetConfig {
    std::vector<ColumnSpec> columns;
    IngestOptions options;
};

DatasetConfig parse_dataset_config(std::string_view json_text);

class Dataset;

class ValueDictionary {
public:
    Code intern(std::string_view label);
    std::optional<Code> find(std::string_view label) const;
    const std::string& label(Code code) const { return labels_.at(code); }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Code> codes_;
};

/// Column-major categorical table. Immutable once built.
class Dataset {
public:
    Dataset(std::vector<ColumnSpec> specs, std::vector<ValueDictionary> dictionaries,
            std::vector<std::vector<Code>> columns);

    std::size_t sample_size() const { return sample_size_; }
    std::size_t column_count() const { return specs_.size(); }

    const ColumnSpec& spec(ColumnId c) const { return specs_.at(c); }
    const std::string& name(ColumnId c) const { return specs_.at(c).name; }
    std::size_t cardinality(ColumnId c) const { return dictionaries_.at(c).size(); }
    const ValueDictionary& dictionary(ColumnId c) const { return dictionaries_.at(c); }
    std::span<const Code> column(ColumnId c) const { return columns_.at(c); }

    std::optional<ColumnId> find_column(std::string_view name) const;
    /// Throws UnknownColumn.
    ColumnId column_id(std::string_view name) const;

private:
    std::vector<ColumnSpec> specs_;
    std::vector<ValueDictionary> dictionaries_;
    std::vector<std::vector<Code>> columns_;
    std::size_t sample_size_ = 0;
};

struct ValueDistribution {
    ColumnId column = 0;
    std::vector<double> proportions;  // indexed by value code
};

/// Reads delimited text with a header row. Columns without a spec are categorical.
Dataset ingest(std::istream& raw, const std::vector<ColumnSpec>& specs,
               const IngestOptions& options = {});
Dataset ingest_text(std::string_view raw, const std::vector<ColumnSpec>& specs,
                    const IngestOptions& options = {});

/// Splits delimited text into records; handles double-quoted fields.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter);

/// Equal-frequency bin index per value (ties share the bin of their first rank).
std::vector<int> equal_frequency_bins(std::span<const double> values, int bins);

ValueDistribution marginal(const Dataset& ds, ColumnId column);

struct ParentConfiguration {
    std::vector<Code> parent_values;          // aligned with ContingencyTable::parents
    std::vector<std::uint32_t> child_counts;  // N_ijk, size r_child
    std::uint32_t total = 0;                  // N_ij
};

/// Sparse contingency table: only parent configurations seen in the data,
/// sorted lexicographically by parent values.
struct ContingencyTable {
    ColumnId child = 0;
    std::vector<ColumnId> parents;
    std::vector<ParentConfiguration> configurations;
};

inline constexpr std::size_t kDefaultParentCap = 8;

ContingencyTable joint_counts(const Dataset& ds, ColumnId child, std::span<const ColumnId> parents,
                              std::size_t parent_cap = kDefaultParentCap);

}  // namespace whatif
