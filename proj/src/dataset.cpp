#include "whatif/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace whatif {

namespace {

constexpr std::size_t kDenseCountLimit = std::size_t{1} << 22;

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, end);
}

std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return false;
    out = a * b;
    return true;
}

void validate_specs(const std::vector<ColumnSpec>& specs) {
    std::unordered_set<std::string> seen;
    for (const auto& s : specs) {
        if (!seen.insert(s.name).second)
            throw Error(ErrorCode::InvalidColumnSpec, "duplicate column spec '" + s.name + "'");
        if (s.kind == ColumnKind::NumericBinned && s.bins < 2)
            throw Error(ErrorCode::InvalidColumnSpec,
                        "column '" + s.name + "': bins must be >= 2 for numeric-binned columns");
        if (s.max_displayed_values < 1)
            throw Error(ErrorCode::InvalidColumnSpec,
                        "column '" + s.name + "': maxDisplayedValues must be positive");
    }
}

}  // namespace

Code ValueDictionary::intern(std::string_view label) {
    std::string key(label);
    auto it = codes_.find(key);
    if (it != codes_.end()) return it->second;
    const auto code = static_cast<Code>(labels_.size());
    labels_.push_back(key);
    codes_.emplace(std::move(key), code);
    return code;
}

std::optional<Code> ValueDictionary::find(std::string_view label) const {
    auto it = codes_.find(std::string(label));
    if (it == codes_.end()) return std::nullopt;
    return it->second;
}

Dataset::Dataset(std::vector<ColumnSpec> specs, std::vector<ValueDictionary> dictionaries,
                 std::vector<std::vector<Code>> columns)
    : specs_(std::move(specs)), dictionaries_(std::move(dictionaries)), columns_(std::move(columns)) {
    if (specs_.size() != dictionaries_.size() || specs_.size() != columns_.size())
        throw Error(ErrorCode::Internal, "dataset parts disagree on column count");
    if (columns_.empty()) throw Error(ErrorCode::EmptyTable, "dataset has no columns");
    sample_size_ = columns_.front().size();
    if (sample_size_ == 0) throw Error(ErrorCode::EmptyTable, "dataset has no rows");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != sample_size_)
            throw Error(ErrorCode::Internal, "ragged column '" + specs_[c].name + "'");
        const auto r = dictionaries_[c].size();
        for (Code v : columns_[c])
            if (v >= r) throw Error(ErrorCode::Internal, "code out of range in '" + specs_[c].name + "'");
    }
}

std::optional<ColumnId> Dataset::find_column(std::string_view name) const {
    for (std::size_t c = 0; c < specs_.size(); ++c)
        if (specs_[c].name == name) return c;
    return std::nullopt;
}

ColumnId Dataset::column_id(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
}

DatasetConfig parse_dataset_config(std::string_view json_text) {
    DatasetConfig cfg;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("column config is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "column config must be a JSON object");
        if (doc.contains("delimiter")) {
            const auto d = doc.at("delimiter").get<std::string>();
            if (d.size() != 1) throw Error(ErrorCode::InvalidConfig, "delimiter must be a single character");
            cfg.options.delimiter = d.front();
        }
        if (doc.contains("missingTokens"))
            cfg.options.missing_tokens = doc.at("missingTokens").get<std::vector<std::string>>();
        if (doc.contains("columns")) {
            for (const auto& col : doc.at("columns")) {
                ColumnSpec spec;
                spec.name = col.at("name").get<std::string>();
                const auto kind = col.value("kind", std::string("categorical"));
                if (kind == "categorical") {
                    spec.kind = ColumnKind::Categorical;
                } else if (kind == "numeric-binned") {
                    spec.kind = ColumnKind::NumericBinned;
                } else {
                    throw Error(ErrorCode::InvalidConfig, "column '" + spec.name + "': unknown kind '" + kind + "'");
                }
                spec.bins = col.value("bins", 4);
                spec.max_displayed_values = col.value("maxDisplayedValues", 10);
                cfg.columns.push_back(std::move(spec));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed column config: ") + e.what());
    }
    validate_specs(cfg.columns);
    return cfg;
}

std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        // Blank lines carry no data.
        if (!(record.size() == 1 && record.front().empty() && !record_has_content))
            records.push_back(std::move(record));
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
        } else if (ch == delimiter) {
            end_field();
            record_has_content = true;
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_record();
        } else {
            field.push_back(ch);
            if (ch != '\r') record_has_content = true;
        }
    }
    if (!field.empty() || !record.empty() || field_was_quoted) {
        field = std::string(trim_cr(field));
        end_record();
    }
    return records;
}

std::vector<int> equal_frequency_bins(std::span<const double> values, int bins) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> result(n, 0);
    int group_bin = 0;
    for (std::size_t rank = 0; rank < n; ++rank) {
        const auto idx = order[rank];
        if (rank == 0 || values[idx] != values[order[rank - 1]])
            group_bin = static_cast<int>((rank * static_cast<std::size_t>(bins)) / n);
        result[idx] = group_bin;
    }
    return result;
}

Dataset ingest_text(std::string_view raw, const std::vector<ColumnSpec>& specs, const IngestOptions& options) {
    validate_specs(specs);
    auto records = parse_delimited(raw, options.delimiter);
    if (records.empty()) throw Error(ErrorCode::EmptyTable, "table is empty: no header row");
    const auto& header = records.front();
    if (records.size() < 2) throw Error(ErrorCode::EmptyTable, "table has a header but no data rows");

    {
        std::unordered_set<std::string> seen;
        for (const auto& h : header)
            if (!seen.insert(h).second)
                throw Error(ErrorCode::MalformedRow, "duplicate header column '" + h + "'");
    }
    for (const auto& s : specs) {
        if (std::find(header.begin(), header.end(), s.name) == header.end())
            throw Error(ErrorCode::MissingColumn, "column '" + s.name + "' not found in header");
    }

    const std::size_t width = header.size();
    const std::size_t n = records.size() - 1;
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width)
            throw Error(ErrorCode::MalformedRow, "row " + std::to_string(r - 1) + " has " +
                                                     std::to_string(records[r].size()) + " fields, expected " +
                                                     std::to_string(width));
    }

    auto is_missing = [&](const std::string& cell) {
        return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), cell) !=
               options.missing_tokens.end();
    };

    std::vector<ColumnSpec> out_specs;
    std::vector<ValueDictionary> dicts(width);
    std::vector<std::vector<Code>> columns(width, std::vector<Code>(n));

    for (std::size_t c = 0; c < width; ++c) {
        ColumnSpec spec;
        spec.name = header[c];
        for (const auto& s : specs)
            if (s.name == header[c]) spec = s;
        out_specs.push_back(spec);

        if (spec.kind == ColumnKind::Categorical) {
            for (std::size_t r = 0; r < n; ++r) {
                const auto& cell = records[r + 1][c];
                columns[c][r] = dicts[c].intern(is_missing(cell) ? std::string(kMissingLabel) : cell);
            }
            continue;
        }

        std::vector<double> values;
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < n; ++r) {
            const auto& cell = records[r + 1][c];
            if (is_missing(cell)) continue;
            auto v = parse_double(cell);
            if (!v)
                throw Error(ErrorCode::UnparsableNumeric, "column '" + spec.name + "': unparsable numeric cell '" +
                                                              cell + "' at row " + std::to_string(r));
            values.push_back(*v);
            rows.push_back(r);
        }
        const auto bin_of = equal_frequency_bins(values, spec.bins);
        std::vector<double> lo(spec.bins, std::numeric_limits<double>::infinity());
        std::vector<double> hi(spec.bins, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < values.size(); ++i) {
            lo[bin_of[i]] = std::min(lo[bin_of[i]], values[i]);
            hi[bin_of[i]] = std::max(hi[bin_of[i]], values[i]);
        }
        std::vector<Code> bin_code(spec.bins, 0);
        for (int b = 0; b < spec.bins; ++b) {
            if (lo[b] > hi[b]) continue;  // empty bin from ties
            bin_code[b] = dicts[c].intern("[" + format_number(lo[b]) + ", " + format_number(hi[b]) + "]");
        }
        std::vector<bool> assigned(n, false);
        for (std::size_t i = 0; i < values.size(); ++i) {
            columns[c][rows[i]] = bin_code[bin_of[i]];
            assigned[rows[i]] = true;
        }
        for (std::size_t r = 0; r < n; ++r)
            if (!assigned[r]) columns[c][r] = dicts[c].intern(kMissingLabel);
    }
    return Dataset(std::move(out_specs), std::move(dicts), std::move(columns));
}

Dataset ingest(std::istream& raw, const std::vector<ColumnSpec>& specs, const IngestOptions& options) {
    std::ostringstream buffer;
    buffer << raw.rdbuf();
    return ingest_text(buffer.str(), specs, options);
}

ValueDistribution marginal(const Dataset& ds, ColumnId column) {
    if (column >= ds.column_count())
        throw Error(ErrorCode::UnknownColumn, "unknown column id " + std::to_string(column));
    std::vector<std::size_t> counts(ds.cardinality(column), 0);
    for (Code v : ds.column(column)) ++counts[v];
    ValueDistribution dist{column, std::vector<double>(counts.size())};
    const auto n = static_cast<double>(ds.sample_size());
    for (std::size_t v = 0; v < counts.size(); ++v) dist.proportions[v] = static_cast<double>(counts[v]) / n;
    return dist;
}

ContingencyTable joint_counts(const Dataset& ds, ColumnId child, std::span<const ColumnId> parents,
                              std::size_t parent_cap) {
    if (parents.size() > parent_cap)
        throw Error(ErrorCode::ParentCapExceeded, "parent set of size " + std::to_string(parents.size()) +
                                                      " exceeds cap " + std::to_string(parent_cap));
    if (child >= ds.column_count())
        throw Error(ErrorCode::UnknownColumn, "unknown column id " + std::to_string(child));
    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (parents[i] >= ds.column_count())
            throw Error(ErrorCode::UnknownColumn, "unknown column id " + std::to_string(parents[i]));
        if (parents[i] == child)
            throw Error(ErrorCode::InvalidParentSet, "column '" + ds.name(child) + "' cannot be its own parent");
        for (std::size_t j = 0; j < i; ++j)
            if (parents[j] == parents[i])
                throw Error(ErrorCode::InvalidParentSet, "duplicate parent '" + ds.name(parents[i]) + "'");
    }

    ContingencyTable table;
    table.child = child;
    table.parents.assign(parents.begin(), parents.end());

    const std::size_t n = ds.sample_size();
    const std::size_t r = ds.cardinality(child);
    const auto child_col = ds.column(child);

    std::uint64_t q = 1;
    bool fits = true;
    for (ColumnId p : parents) fits = fits && checked_mul(q, ds.cardinality(p), q);

    auto decode = [&](std::uint64_t key) {
        std::vector<Code> values(parents.size());
        for (std::size_t i = parents.size(); i-- > 0;) {
            const auto rp = ds.cardinality(parents[i]);
            values[i] = static_cast<Code>(key % rp);
            key /= rp;
        }
        return values;
    };
    auto row_key = [&](std::size_t row) {
        std::uint64_t key = 0;
        for (ColumnId p : parents) key = key * ds.cardinality(p) + ds.column(p)[row];
        return key;
    };

    const std::uint64_t dense_limit = std::min<std::uint64_t>(kDenseCountLimit, std::max<std::uint64_t>(4 * n, 4096));
    if (fits && q <= dense_limit / std::max<std::size_t>(r, 1)) {
        std::vector<std::uint32_t> counts(static_cast<std::size_t>(q) * r, 0);
        for (std::size_t row = 0; row < n; ++row) ++counts[row_key(row) * r + child_col[row]];
        for (std::uint64_t key = 0; key < q; ++key) {
            const auto* cell = counts.data() + key * r;
            std::uint32_t total = 0;
            for (std::size_t k = 0; k < r; ++k) total += cell[k];
            if (total == 0) continue;
            table.configurations.push_back({decode(key), std::vector<std::uint32_t>(cell, cell + r), total});
        }
    } else if (fits) {
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> sparse;
        for (std::size_t row = 0; row < n; ++row) {
            auto& cell = sparse[row_key(row)];
            if (cell.empty()) cell.assign(r, 0);
            ++cell[child_col[row]];
        }
        std::vector<std::uint64_t> keys;
        keys.reserve(sparse.size());
        for (const auto& kv : sparse) keys.push_back(kv.first);
        std::sort(keys.begin(), keys.end());
        for (auto key : keys) {
            auto& cell = sparse[key];
            const auto total = std::accumulate(cell.begin(), cell.end(), std::uint32_t{0});
            table.configurations.push_back({decode(key), std::move(cell), total});
        }
    } else {
        std::map<std::vector<Code>, std::vector<std::uint32_t>> sparse;
        std::vector<Code> key(parents.size());
        for (std::size_t row = 0; row < n; ++row) {
            for (std::size_t i = 0; i < parents.size(); ++i) key[i] = ds.column(parents[i])[row];
            auto& cell = sparse[key];
            if (cell.empty()) cell.assign(r, 0);
            ++cell[child_col[row]];
        }
        for (auto& [values, cell] : sparse) {
            const auto total = std::accumulate(cell.begin(), cell.end(), std::uint32_t{0});
            table.configurations.push_back({values, std::move(cell), total});
        }
    }
    return table;
}

}  // namespace whatif
