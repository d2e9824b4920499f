#pragma once

#include "gridlight/gridfile.hpp"
#include "gridlight/timeutil.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gridlight {

enum class ColumnType { Float64, Int64, Timestamp, Text };

const char* column_type_name(ColumnType t);
ColumnType column_type_from_string(const std::string& s);

enum class ColumnRole {
    File,        // originating file name, read-only
    SpanningDim, // value column of a dimension that spans files
    Dim,         // value column of a non-spanning dimension
    DimPosition, // <dim>Pos companion of a non-spanning dimension
    Variable,
    TabularField,
};

struct RowColumn {
    std::string name;
    ColumnType type = ColumnType::Float64;
    ColumnRole role = ColumnRole::Variable;
    int dim_index = -1;
    int var_index = -1;
    int field_index = -1;
};

/// Exposed row-wise column model: file, spanning dims, non-spanning dims
/// each followed by its position column, then one column per variable.
struct RowSchema {
    std::vector<RowColumn> columns;

    int find(const std::string& name) const;
};

struct DimInfo {
    std::string name;
    std::int64_t length = 0; // per file, inferred from the first file
    bool spanning = false;
    std::optional<TimeUnits> time_units;
};

struct DatasetSchema {
    std::vector<DimInfo> dims;
    std::vector<std::string> variables;

    int find_dim(const std::string& name) const;
};

struct TabularColumn {
    std::string name;
    ColumnType type = ColumnType::Float64;
};

/// Per-file tight value bounds over selected dimension columns. Files that
/// yielded no rows are absent from per_file.
struct EnvelopeSet {
    std::vector<std::string> dims;
    std::map<std::string, std::vector<std::pair<double, double>>> per_file;
};

enum class DatasetKind { Grid, Tabular };

struct DatasetDescriptor {
    std::string name;
    DatasetKind kind = DatasetKind::Grid;
    std::vector<std::string> files;
    std::vector<std::string> spanning_dims;
    DatasetSchema schema;               // grid
    std::vector<TabularColumn> columns; // tabular
    char delimiter = ',';
    std::optional<EnvelopeSet> envelopes;
    RowSchema row_schema;
};

/// Registration is serialized; descriptors are immutable once registered.
class Catalog {
public:
    Catalog() = default;
    Catalog(const Catalog& other);
    Catalog& operator=(const Catalog& other);

    const DatasetDescriptor& register_grid_dataset(const std::string& name,
                                                   std::vector<std::string> files,
                                                   std::vector<std::string> spanning_dims);

    const DatasetDescriptor& register_tabular_dataset(const std::string& name,
                                                      std::vector<std::string> files,
                                                      std::vector<TabularColumn> columns,
                                                      char delimiter = ',');

    const DatasetDescriptor& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    void set_envelopes(const std::string& name, EnvelopeSet envelopes);
    std::vector<std::string> names() const;

    static Catalog load_manifest(const std::string& path);
    void save_manifest(const std::string& path) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, DatasetDescriptor> datasets_;
};

RowSchema derive_row_schema(const DatasetDescriptor& ds);

} // namespace gridlight
