#include "gridlight/catalog.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace gridlight {

const char* column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Float64: return "f64";
        case ColumnType::Int64: return "i64";
        case ColumnType::Timestamp: return "timestamp";
        case ColumnType::Text: return "text";
    }
    return "?";
}

ColumnType column_type_from_string(const std::string& s) {
    if (s == "f64" || s == "double" || s == "float") return ColumnType::Float64;
    if (s == "i64" || s == "int") return ColumnType::Int64;
    if (s == "timestamp") return ColumnType::Timestamp;
    if (s == "text" || s == "string") return ColumnType::Text;
    fail(Errc::InvalidParams, "unknown column type '" + s + "'");
}

int RowSchema::find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

int DatasetSchema::find_dim(const std::string& name) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (dims[i].name == name) return static_cast<int>(i);
    return -1;
}

RowSchema derive_row_schema(const DatasetDescriptor& ds) {
    RowSchema rs;
    if (ds.kind == DatasetKind::Tabular) {
        for (std::size_t i = 0; i < ds.columns.size(); ++i) {
            RowColumn c;
            c.name = ds.columns[i].name;
            c.type = ds.columns[i].type;
            c.role = ColumnRole::TabularField;
            c.field_index = static_cast<int>(i);
            rs.columns.push_back(std::move(c));
        }
        return rs;
    }

    rs.columns.push_back({"file", ColumnType::Text, ColumnRole::File, -1, -1, -1});
    for (std::size_t i = 0; i < ds.schema.dims.size(); ++i) {
        const DimInfo& d = ds.schema.dims[i];
        if (!d.spanning) continue;
        RowColumn c;
        c.name = d.name;
        c.type = d.time_units ? ColumnType::Timestamp : ColumnType::Float64;
        c.role = ColumnRole::SpanningDim;
        c.dim_index = static_cast<int>(i);
        rs.columns.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < ds.schema.dims.size(); ++i) {
        const DimInfo& d = ds.schema.dims[i];
        if (d.spanning) continue;
        RowColumn value;
        value.name = d.name;
        value.type = d.time_units ? ColumnType::Timestamp : ColumnType::Float64;
        value.role = ColumnRole::Dim;
        value.dim_index = static_cast<int>(i);
        rs.columns.push_back(std::move(value));
        RowColumn pos;
        pos.name = d.name + "Pos";
        pos.type = ColumnType::Int64;
        pos.role = ColumnRole::DimPosition;
        pos.dim_index = static_cast<int>(i);
        rs.columns.push_back(std::move(pos));
    }
    for (std::size_t i = 0; i < ds.schema.variables.size(); ++i) {
        RowColumn c;
        c.name = ds.schema.variables[i];
        c.type = ColumnType::Float64;
        c.role = ColumnRole::Variable;
        c.var_index = static_cast<int>(i);
        rs.columns.push_back(std::move(c));
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : rs.columns)
        if (!seen.insert(c.name).second)
            fail(Errc::SchemaInferenceFailure, "duplicate column name '" + c.name + "' in the row model");
    return rs;
}

Catalog::Catalog(const Catalog& other) {
    std::lock_guard lk(other.mu_);
    datasets_ = other.datasets_;
}

Catalog& Catalog::operator=(const Catalog& other) {
    if (this == &other) return *this;
    std::scoped_lock lk(mu_, other.mu_);
    datasets_ = other.datasets_;
    return *this;
}

const DatasetDescriptor& Catalog::register_grid_dataset(const std::string& name,
                                                        std::vector<std::string> files,
                                                        std::vector<std::string> spanning_dims) {
    if (files.empty()) fail(Errc::EmptyFileList, "dataset '" + name + "' has no files");

    DatasetDescriptor ds;
    ds.name = name;
    ds.kind = DatasetKind::Grid;
    ds.files = std::move(files);
    ds.spanning_dims = std::move(spanning_dims);

    FileSchema first;
    std::uint32_t numrec = 0;
    try {
        GridFileHandle h = open_grid_file(ds.files.front());
        first = h.header();
        numrec = h.numrec();
    } catch (const Error& e) {
        fail(Errc::SchemaInferenceFailure, "cannot infer schema of '" + name + "': " + e.what());
    }
    if (first.dimensions.empty())
        fail(Errc::SchemaInferenceFailure, "dataset '" + name + "' has no dimensions");

    for (const auto& d : first.dimensions) {
        DimInfo info;
        info.name = d.name;
        info.length = d.length == 0 ? static_cast<std::int64_t>(numrec) : static_cast<std::int64_t>(d.length);
        int vi = first.find_var(d.name);
        if (vi >= 0) {
            const AttrValue* units = first.variables[static_cast<std::size_t>(vi)].find_attr("units");
            if (units && units->type == ElemType::Char) info.time_units = try_parse_time_units(units->text);
        }
        ds.schema.dims.push_back(std::move(info));
    }
    for (const auto& span : ds.spanning_dims) {
        int di = ds.schema.find_dim(span);
        if (di < 0) fail(Errc::UnknownSpanningDim, "no dimension '" + span + "' in dataset '" + name + "'");
        ds.schema.dims[static_cast<std::size_t>(di)].spanning = true;
    }

    std::vector<std::string> all_dims;
    for (const auto& d : ds.schema.dims) all_dims.push_back(d.name);
    for (const auto& v : first.variables) {
        if (first.find_dim(v.name) >= 0) continue; // coordinate variable
        if (v.dims != all_dims)
            fail(Errc::SchemaInferenceFailure, "variable '" + v.name +
                                                   "' does not span the full dimension grid of dataset '" + name + "'");
        ds.schema.variables.push_back(v.name);
    }

    ds.row_schema = derive_row_schema(ds);

    std::lock_guard lk(mu_);
    auto [it, inserted] = datasets_.insert_or_assign(name, std::move(ds));
    return it->second;
}

const DatasetDescriptor& Catalog::register_tabular_dataset(const std::string& name,
                                                           std::vector<std::string> files,
                                                           std::vector<TabularColumn> columns,
                                                           char delimiter) {
    if (files.empty()) fail(Errc::EmptyFileList, "dataset '" + name + "' has no files");
    if (columns.empty()) fail(Errc::InvalidParams, "dataset '" + name + "' declares no columns");
    std::unordered_set<std::string> seen;
    for (const auto& c : columns)
        if (!seen.insert(c.name).second) fail(Errc::InvalidParams, "duplicate column '" + c.name + "'");

    DatasetDescriptor ds;
    ds.name = name;
    ds.kind = DatasetKind::Tabular;
    ds.files = std::move(files);
    ds.columns = std::move(columns);
    ds.delimiter = delimiter;
    ds.row_schema = derive_row_schema(ds);

    std::lock_guard lk(mu_);
    auto [it, inserted] = datasets_.insert_or_assign(name, std::move(ds));
    return it->second;
}

const DatasetDescriptor& Catalog::get(const std::string& name) const {
    std::lock_guard lk(mu_);
    auto it = datasets_.find(name);
    if (it == datasets_.end()) fail(Errc::UnknownDataset, "no dataset '" + name + "' is registered");
    return it->second;
}

bool Catalog::contains(const std::string& name) const {
    std::lock_guard lk(mu_);
    return datasets_.count(name) != 0;
}

void Catalog::set_envelopes(const std::string& name, EnvelopeSet envelopes) {
    std::lock_guard lk(mu_);
    auto it = datasets_.find(name);
    if (it == datasets_.end()) fail(Errc::UnknownDataset, "no dataset '" + name + "' is registered");
    it->second.envelopes = std::move(envelopes);
}

std::vector<std::string> Catalog::names() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    out.reserve(datasets_.size());
    for (const auto& [name, ds] : datasets_) out.push_back(name);
    return out;
}

Catalog Catalog::load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoFailure, "cannot open manifest '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseFailure, "manifest '" + path + "': " + e.what());
    }

    Catalog cat;
    for (const auto& entry : doc.value("datasets", nlohmann::json::array())) {
        std::string name = entry.at("name").get<std::string>();
        std::string kind = entry.at("kind").get<std::string>();
        std::vector<std::string> files = entry.at("files").get<std::vector<std::string>>();
        if (kind == "grid") {
            auto spanning = entry.value("spanning", std::vector<std::string>{});
            cat.register_grid_dataset(name, std::move(files), std::move(spanning));
        } else if (kind == "tabular") {
            std::vector<TabularColumn> cols;
            for (const auto& c : entry.at("columns")) {
                cols.push_back({c.at("name").get<std::string>(),
                                column_type_from_string(c.at("type").get<std::string>())});
            }
            std::string delim = entry.value("delimiter", ",");
            cat.register_tabular_dataset(name, std::move(files), std::move(cols),
                                         delim.empty() ? ',' : delim[0]);
        } else {
            fail(Errc::ParseFailure, "manifest '" + path + "': unknown dataset kind '" + kind + "'");
        }
    }
    return cat;
}

void Catalog::save_manifest(const std::string& path) const {
    nlohmann::json doc;
    doc["datasets"] = nlohmann::json::array();
    std::lock_guard lk(mu_);
    for (const auto& [name, ds] : datasets_) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["files"] = ds.files;
        if (ds.kind == DatasetKind::Grid) {
            entry["kind"] = "grid";
            entry["spanning"] = ds.spanning_dims;
        } else {
            entry["kind"] = "tabular";
            entry["delimiter"] = std::string(1, ds.delimiter);
            nlohmann::json cols = nlohmann::json::array();
            for (const auto& c : ds.columns)
                cols.push_back({{"name", c.name}, {"type", column_type_name(c.type)}});
            entry["columns"] = std::move(cols);
        }
        doc["datasets"].push_back(std::move(entry));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(Errc::IoFailure, "cannot write manifest '" + path + "'");
    out << doc.dump(2) << "\n";
}

} // namespace gridlight
