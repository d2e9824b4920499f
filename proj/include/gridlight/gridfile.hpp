#pragma once

#include "gridlight/block.hpp"
#include "gridlight/error.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gridlight {

/// Element types of the classic format, values equal the on-disk type tags.
enum class ElemType : std::uint32_t {
    Byte = 1,   // i8
    Char = 2,
    Short = 3,  // i16
    Int = 4,    // i32
    Float = 5,  // f32
    Double = 6, // f64
};

std::size_t elem_size(ElemType t);
const char* elem_type_name(ElemType t);

struct AttrValue {
    ElemType type = ElemType::Char;
    std::string text;            // Char attributes
    std::vector<double> numbers; // numeric attributes, widened

    static AttrValue of_text(std::string s) {
        AttrValue v;
        v.type = ElemType::Char;
        v.text = std::move(s);
        return v;
    }
    static AttrValue of_numbers(ElemType t, std::vector<double> n) {
        AttrValue v;
        v.type = t;
        v.numbers = std::move(n);
        return v;
    }

    bool operator==(const AttrValue&) const = default;
};

using AttrList = std::vector<std::pair<std::string, AttrValue>>;

/// length 0 marks the record (unlimited) dimension.
struct DimDef {
    std::string name;
    std::uint32_t length = 0;

    bool operator==(const DimDef&) const = default;
};

struct VarDef {
    std::string name;
    ElemType type = ElemType::Double;
    std::vector<std::string> dims;
    AttrList attrs;

    const AttrValue* find_attr(const std::string& attr_name) const;

    bool operator==(const VarDef&) const = default;
};

struct FileSchema {
    std::vector<DimDef> dimensions;
    std::vector<VarDef> variables;
    AttrList global_attrs;

    int find_dim(const std::string& name) const;
    int find_var(const std::string& name) const;

    /// Throws Errc::InvalidSchema on duplicate names, unknown dimension
    /// references, multiple record dimensions, a record dimension that is
    /// not a record variable's first dimension, or a variable that shares
    /// a dimension name without being that dimension's 1-D coordinate.
    void validate() const;

    bool operator==(const FileSchema&) const = default;
};

/// Strictly monotonic coordinate values for one dimension of one file.
struct CoordinateAxis {
    std::string dim_name;
    std::vector<double> values;
    bool ascending = true;

    std::size_t size() const { return values.size(); }
};

/// Row-major: the last listed dimension varies fastest.
struct NdArray {
    std::vector<std::int64_t> shape;
    std::vector<double> elements;

    std::int64_t size() const { return static_cast<std::int64_t>(elements.size()); }
};

/// Counts variable data actually fetched from disk.
struct IoCounter {
    std::atomic<std::uint64_t> bytes{0};
    std::atomic<std::uint64_t> reads{0};
};

struct VarLayout {
    std::uint64_t begin = 0;
    std::uint64_t vsize = 0; // padded; per-record slab size for record variables
    bool record = false;
};

/// Data section layout for a schema. header_size and recsize are optional
/// out-parameters; recsize is the byte stride between consecutive records.
std::vector<VarLayout> compute_layout(const FileSchema& schema, int version,
                                      std::uint64_t* header_size = nullptr,
                                      std::uint64_t* recsize = nullptr);

/// Immutable after open; concurrent reads through one handle are safe
/// (each read opens its own stream).
class GridFileHandle {
public:
    const std::string& path() const { return path_; }
    const FileSchema& header() const { return schema_; }
    int version() const { return version_; }
    std::uint32_t numrec() const { return numrec_; }
    const std::vector<VarLayout>& layout() const { return layout_; }

    /// Dimension length with the record dimension resolved to numrec.
    std::int64_t dim_length(int dim_index) const;

    /// Full coordinate array, validated strictly monotonic.
    CoordinateAxis read_axis(const std::string& dim) const;

    /// Inclusive positional block; the result's shape[k] == end[k]-start[k]+1.
    NdArray read_subarray(const std::string& var, const Block& block, IoCounter* io = nullptr) const;

private:
    friend GridFileHandle open_grid_file(const std::string& path);

    std::string path_;
    FileSchema schema_;
    int version_ = 1;
    std::uint32_t numrec_ = 0;
    std::vector<VarLayout> layout_;
    std::uint64_t recsize_ = 0;
    int record_dim_ = -1;
};

GridFileHandle open_grid_file(const std::string& path);

/// Deterministic value function: coordinate values (one per variable
/// dimension, in dimension order) to the stored value.
using FillFn = std::function<double(std::span<const double>)>;

/// Writes a fixed-size-variable classic file. Coordinate variables take
/// their values from `axes`; data variables from `fills` (absent: 0.0).
void write_grid_file(const std::string& path, const FileSchema& schema,
                     const std::vector<CoordinateAxis>& axes,
                     const std::map<std::string, FillFn>& fills, int version = 1);

} // namespace gridlight
