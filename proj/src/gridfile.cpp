#include "gridlight/gridfile.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace gridlight {

namespace {

constexpr std::uint32_t kTagDimension = 0x0A;
constexpr std::uint32_t kTagVariable = 0x0B;
constexpr std::uint32_t kTagAttribute = 0x0C;
constexpr std::uint32_t kStreamingNumrecs = 0xFFFFFFFF;

std::uint64_t pad4(std::uint64_t n) { return (n + 3) & ~std::uint64_t{3}; }

std::uint32_t load_u32be(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

std::uint64_t load_u64be(const unsigned char* p) {
    return (std::uint64_t(load_u32be(p)) << 32) | load_u32be(p + 4);
}

void store_u32be(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v >> 24);
    p[1] = static_cast<unsigned char>(v >> 16);
    p[2] = static_cast<unsigned char>(v >> 8);
    p[3] = static_cast<unsigned char>(v);
}

void store_u64be(unsigned char* p, std::uint64_t v) {
    store_u32be(p, static_cast<std::uint32_t>(v >> 32));
    store_u32be(p + 4, static_cast<std::uint32_t>(v));
}

double decode_elem(ElemType t, const unsigned char* p) {
    switch (t) {
        case ElemType::Byte: return static_cast<double>(static_cast<std::int8_t>(p[0]));
        case ElemType::Char: return static_cast<double>(p[0]);
        case ElemType::Short: return static_cast<double>(static_cast<std::int16_t>((p[0] << 8) | p[1]));
        case ElemType::Int: return static_cast<double>(static_cast<std::int32_t>(load_u32be(p)));
        case ElemType::Float: return static_cast<double>(std::bit_cast<float>(load_u32be(p)));
        case ElemType::Double: return std::bit_cast<double>(load_u64be(p));
    }
    fail(Errc::UnsupportedFeature, "unknown element type");
}

void encode_elem(ElemType t, double v, unsigned char* p) {
    switch (t) {
        case ElemType::Byte: p[0] = static_cast<unsigned char>(static_cast<std::int8_t>(v)); return;
        case ElemType::Char: p[0] = static_cast<unsigned char>(v); return;
        case ElemType::Short: {
            auto s = static_cast<std::int16_t>(v);
            p[0] = static_cast<unsigned char>(static_cast<std::uint16_t>(s) >> 8);
            p[1] = static_cast<unsigned char>(s);
            return;
        }
        case ElemType::Int: store_u32be(p, static_cast<std::uint32_t>(static_cast<std::int32_t>(v))); return;
        case ElemType::Float: store_u32be(p, std::bit_cast<std::uint32_t>(static_cast<float>(v))); return;
        case ElemType::Double: store_u64be(p, std::bit_cast<std::uint64_t>(v)); return;
    }
    fail(Errc::UnsupportedFeature, "unknown element type");
}

class ByteReader {
public:
    explicit ByteReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) fail(Errc::IoFailure, "cannot open '" + path + "'");
    }

    void read_exact(unsigned char* dst, std::size_t n) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            fail(Errc::TruncatedHeader, "unexpected end of file in header");
    }

    std::uint32_t u32() {
        unsigned char b[4];
        read_exact(b, 4);
        return load_u32be(b);
    }

    std::uint64_t u64() {
        unsigned char b[8];
        read_exact(b, 8);
        return load_u64be(b);
    }

    std::string bytes_padded(std::size_t n) {
        std::string s(n, '\0');
        if (n > 0) read_exact(reinterpret_cast<unsigned char*>(s.data()), n);
        std::size_t pad = pad4(n) - n;
        unsigned char junk[4];
        if (pad > 0) read_exact(junk, pad);
        return s;
    }

private:
    std::ifstream in_;
};

std::string read_name(ByteReader& r) {
    std::uint32_t len = r.u32();
    if (len > (1u << 20)) fail(Errc::TruncatedHeader, "implausible name length");
    return r.bytes_padded(len);
}

ElemType check_elem_type(std::uint32_t tag) {
    if (tag < 1 || tag > 6) fail(Errc::UnsupportedFeature, "unknown element type tag " + std::to_string(tag));
    return static_cast<ElemType>(tag);
}

AttrList read_attr_list(ByteReader& r) {
    std::uint32_t tag = r.u32();
    std::uint32_t count = r.u32();
    if (tag == 0 && count == 0) return {};
    if (tag != kTagAttribute) fail(Errc::UnsupportedFeature, "expected attribute tag");
    AttrList attrs;
    attrs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = read_name(r);
        ElemType type = check_elem_type(r.u32());
        std::uint32_t nelems = r.u32();
        AttrValue value;
        value.type = type;
        if (type == ElemType::Char) {
            value.text = r.bytes_padded(nelems);
        } else {
            std::size_t esz = elem_size(type);
            std::string raw = r.bytes_padded(static_cast<std::size_t>(nelems) * esz);
            value.numbers.reserve(nelems);
            for (std::uint32_t k = 0; k < nelems; ++k)
                value.numbers.push_back(decode_elem(type, reinterpret_cast<const unsigned char*>(raw.data()) + k * esz));
        }
        attrs.emplace_back(std::move(name), std::move(value));
    }
    return attrs;
}

struct ByteWriter {
    std::vector<unsigned char> buf;

    void u32(std::uint32_t v) {
        unsigned char b[4];
        store_u32be(b, v);
        buf.insert(buf.end(), b, b + 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        store_u64be(b, v);
        buf.insert(buf.end(), b, b + 8);
    }
    void bytes_padded(const void* p, std::size_t n) {
        auto* c = static_cast<const unsigned char*>(p);
        buf.insert(buf.end(), c, c + n);
        for (std::size_t k = n; k < pad4(n); ++k) buf.push_back(0);
    }
    void name(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_padded(s.data(), s.size());
    }
};

void write_attr_list(ByteWriter& w, const AttrList& attrs) {
    if (attrs.empty()) {
        w.u32(0);
        w.u32(0);
        return;
    }
    w.u32(kTagAttribute);
    w.u32(static_cast<std::uint32_t>(attrs.size()));
    for (const auto& [name, value] : attrs) {
        w.name(name);
        w.u32(static_cast<std::uint32_t>(value.type));
        if (value.type == ElemType::Char) {
            w.u32(static_cast<std::uint32_t>(value.text.size()));
            w.bytes_padded(value.text.data(), value.text.size());
        } else {
            std::size_t esz = elem_size(value.type);
            w.u32(static_cast<std::uint32_t>(value.numbers.size()));
            std::vector<unsigned char> raw(value.numbers.size() * esz);
            for (std::size_t k = 0; k < value.numbers.size(); ++k)
                encode_elem(value.type, value.numbers[k], raw.data() + k * esz);
            w.bytes_padded(raw.data(), raw.size());
        }
    }
}

std::uint64_t attr_list_bytes(const AttrList& attrs) {
    std::uint64_t sz = 8;
    for (const auto& [name, value] : attrs) {
        sz += 4 + pad4(name.size()) + 8;
        if (value.type == ElemType::Char)
            sz += pad4(value.text.size());
        else
            sz += pad4(value.numbers.size() * elem_size(value.type));
    }
    return sz;
}

} // namespace

std::size_t elem_size(ElemType t) {
    switch (t) {
        case ElemType::Byte:
        case ElemType::Char: return 1;
        case ElemType::Short: return 2;
        case ElemType::Int:
        case ElemType::Float: return 4;
        case ElemType::Double: return 8;
    }
    return 0;
}

const char* elem_type_name(ElemType t) {
    switch (t) {
        case ElemType::Byte: return "i8";
        case ElemType::Char: return "char";
        case ElemType::Short: return "i16";
        case ElemType::Int: return "i32";
        case ElemType::Float: return "f32";
        case ElemType::Double: return "f64";
    }
    return "?";
}

std::string to_string(const Block& b) {
    std::string s = "[";
    for (std::size_t k = 0; k < b.dims.size(); ++k) {
        if (k > 0) s += ", ";
        s += b.dims[k] + " " + std::to_string(b.start[k]) + ".." + std::to_string(b.end[k]);
    }
    return s + "]";
}

const AttrValue* VarDef::find_attr(const std::string& attr_name) const {
    for (const auto& [n, v] : attrs)
        if (n == attr_name) return &v;
    return nullptr;
}

int FileSchema::find_dim(const std::string& name) const {
    for (std::size_t i = 0; i < dimensions.size(); ++i)
        if (dimensions[i].name == name) return static_cast<int>(i);
    return -1;
}

int FileSchema::find_var(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return static_cast<int>(i);
    return -1;
}

void FileSchema::validate() const {
    std::unordered_set<std::string> seen;
    int record_dims = 0;
    for (const auto& d : dimensions) {
        if (!seen.insert(d.name).second) fail(Errc::InvalidSchema, "duplicate dimension '" + d.name + "'");
        if (d.length == 0) ++record_dims;
    }
    if (record_dims > 1) fail(Errc::InvalidSchema, "more than one record dimension");
    seen.clear();
    for (const auto& v : variables) {
        if (!seen.insert(v.name).second) fail(Errc::InvalidSchema, "duplicate variable '" + v.name + "'");
        for (std::size_t k = 0; k < v.dims.size(); ++k) {
            int di = find_dim(v.dims[k]);
            if (di < 0) fail(Errc::InvalidSchema, "variable '" + v.name + "' references unknown dimension '" + v.dims[k] + "'");
            if (dimensions[di].length == 0 && k != 0)
                fail(Errc::InvalidSchema, "record dimension must be the first dimension of '" + v.name + "'");
        }
        if (find_dim(v.name) >= 0) {
            // name shared with a dimension: must be that dimension's coordinate
            if (v.dims.size() != 1 || v.dims[0] != v.name)
                fail(Errc::InvalidSchema, "variable '" + v.name + "' shadows a dimension without being its coordinate");
        }
    }
}

std::vector<VarLayout> compute_layout(const FileSchema& schema, int version,
                                      std::uint64_t* header_size, std::uint64_t* recsize_out) {
    std::uint64_t begin_width = version == 1 ? 4 : 8;
    std::uint64_t sz = 8; // magic + numrecs
    sz += 8;
    for (const auto& d : schema.dimensions) sz += 4 + pad4(d.name.size()) + 4;
    sz += attr_list_bytes(schema.global_attrs);
    if (schema.variables.empty()) {
        sz += 8;
    } else {
        sz += 8;
        for (const auto& v : schema.variables)
            sz += 4 + pad4(v.name.size()) + 4 + 4 * v.dims.size() + attr_list_bytes(v.attrs) + 4 + 4 + begin_width;
    }

    std::vector<VarLayout> layout(schema.variables.size());
    std::vector<std::uint64_t> slab(schema.variables.size());
    int record_vars = 0;
    for (std::size_t i = 0; i < schema.variables.size(); ++i) {
        const auto& v = schema.variables[i];
        std::uint64_t elems = 1;
        bool record = false;
        for (const auto& dn : v.dims) {
            const auto& d = schema.dimensions[static_cast<std::size_t>(schema.find_dim(dn))];
            if (d.length == 0)
                record = true;
            else
                elems *= d.length;
        }
        slab[i] = elems * elem_size(v.type);
        layout[i].record = record;
        layout[i].vsize = pad4(slab[i]);
        if (record) ++record_vars;
    }

    std::uint64_t cursor = sz;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].record) continue;
        layout[i].begin = cursor;
        cursor += layout[i].vsize;
    }
    std::uint64_t recsize = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (!layout[i].record) continue;
        layout[i].begin = cursor + recsize;
        recsize += layout[i].vsize;
    }
    if (record_vars == 1) {
        // single record variable: records are packed without padding
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (layout[i].record) recsize = slab[i];
    }

    if (header_size) *header_size = sz;
    if (recsize_out) *recsize_out = recsize;
    return layout;
}

std::int64_t GridFileHandle::dim_length(int dim_index) const {
    const auto& d = schema_.dimensions[static_cast<std::size_t>(dim_index)];
    return d.length == 0 ? static_cast<std::int64_t>(numrec_) : static_cast<std::int64_t>(d.length);
}

GridFileHandle open_grid_file(const std::string& path) {
    ByteReader r(path);
    unsigned char magic[4];
    r.read_exact(magic, 4);
    if (magic[0] != 'C' || magic[1] != 'D' || magic[2] != 'F')
        fail(Errc::BadMagic, "'" + path + "' is not a classic grid file");
    if (magic[3] == 5) fail(Errc::UnsupportedFeature, "CDF-5 files are not supported");
    if (magic[3] != 1 && magic[3] != 2)
        fail(Errc::UnsupportedFeature, "unknown format version byte " + std::to_string(magic[3]));

    GridFileHandle h;
    h.path_ = path;
    h.version_ = magic[3];

    std::uint32_t numrecs = r.u32();
    if (numrecs == kStreamingNumrecs) fail(Errc::UnsupportedFeature, "streaming record count");
    h.numrec_ = numrecs;

    // dimension list
    {
        std::uint32_t tag = r.u32();
        std::uint32_t count = r.u32();
        if (!(tag == 0 && count == 0)) {
            if (tag != kTagDimension) fail(Errc::UnsupportedFeature, "expected dimension tag");
            for (std::uint32_t i = 0; i < count; ++i) {
                DimDef d;
                d.name = read_name(r);
                d.length = r.u32();
                h.schema_.dimensions.push_back(std::move(d));
            }
        }
    }

    h.schema_.global_attrs = read_attr_list(r);

    // variable list
    {
        std::uint32_t tag = r.u32();
        std::uint32_t count = r.u32();
        if (!(tag == 0 && count == 0)) {
            if (tag != kTagVariable) fail(Errc::UnsupportedFeature, "expected variable tag");
            for (std::uint32_t i = 0; i < count; ++i) {
                VarDef v;
                v.name = read_name(r);
                std::uint32_t rank = r.u32();
                for (std::uint32_t k = 0; k < rank; ++k) {
                    std::uint32_t dimid = r.u32();
                    if (dimid >= h.schema_.dimensions.size())
                        fail(Errc::UnsupportedFeature, "dimension id out of range in variable '" + v.name + "'");
                    v.dims.push_back(h.schema_.dimensions[dimid].name);
                }
                v.attrs = read_attr_list(r);
                v.type = check_elem_type(r.u32());
                VarLayout lay;
                lay.vsize = r.u32();
                lay.begin = h.version_ == 1 ? r.u32() : r.u64();
                h.schema_.variables.push_back(std::move(v));
                h.layout_.push_back(lay);
            }
        }
    }

    int record_dims = 0;
    for (std::size_t i = 0; i < h.schema_.dimensions.size(); ++i) {
        if (h.schema_.dimensions[i].length == 0) {
            ++record_dims;
            h.record_dim_ = static_cast<int>(i);
        }
    }
    if (record_dims > 1) fail(Errc::UnsupportedFeature, "more than one record dimension");

    std::uint64_t recsize = 0;
    int record_vars = 0;
    std::uint64_t single_slab = 0;
    for (std::size_t i = 0; i < h.schema_.variables.size(); ++i) {
        const auto& v = h.schema_.variables[i];
        bool record = false;
        std::uint64_t elems = 1;
        for (std::size_t k = 0; k < v.dims.size(); ++k) {
            int di = h.schema_.find_dim(v.dims[k]);
            if (h.schema_.dimensions[static_cast<std::size_t>(di)].length == 0) {
                if (k != 0) fail(Errc::UnsupportedFeature, "record dimension is not the first dimension of '" + v.name + "'");
                record = true;
            } else {
                elems *= h.schema_.dimensions[static_cast<std::size_t>(di)].length;
            }
        }
        h.layout_[i].record = record;
        if (record) {
            ++record_vars;
            recsize += pad4(elems * elem_size(v.type));
            single_slab = elems * elem_size(v.type);
        }
    }
    h.recsize_ = record_vars == 1 ? single_slab : recsize;
    return h;
}

CoordinateAxis GridFileHandle::read_axis(const std::string& dim) const {
    int di = schema_.find_dim(dim);
    if (di < 0) fail(Errc::NoCoordinateVariable, "no dimension '" + dim + "' in '" + path_ + "'");
    int vi = schema_.find_var(dim);
    if (vi < 0 || schema_.variables[static_cast<std::size_t>(vi)].dims != std::vector<std::string>{dim})
        fail(Errc::NoCoordinateVariable, "dimension '" + dim + "' has no coordinate variable");

    std::int64_t len = dim_length(di);
    Block full({dim}, {0}, {len - 1});
    NdArray arr = read_subarray(dim, full);

    CoordinateAxis axis;
    axis.dim_name = dim;
    axis.values = std::move(arr.elements);
    axis.ascending = axis.values.size() < 2 || axis.values[1] > axis.values[0];
    for (std::size_t i = 1; i < axis.values.size(); ++i) {
        bool ok = axis.ascending ? axis.values[i] > axis.values[i - 1] : axis.values[i] < axis.values[i - 1];
        if (!ok)
            fail(Errc::NonMonotonicAxis, "axis '" + dim + "' of '" + path_ + "' is not strictly monotonic at index " +
                                             std::to_string(i));
    }
    return axis;
}

NdArray GridFileHandle::read_subarray(const std::string& var, const Block& block, IoCounter* io) const {
    int vi = schema_.find_var(var);
    if (vi < 0) fail(Errc::UnknownVariable, "no variable '" + var + "' in '" + path_ + "'");
    const VarDef& v = schema_.variables[static_cast<std::size_t>(vi)];
    const VarLayout& lay = layout_[static_cast<std::size_t>(vi)];

    std::size_t rank = v.dims.size();
    if (block.rank() != rank)
        fail(Errc::OutOfBounds, "block rank " + std::to_string(block.rank()) + " does not match variable '" + var +
                                    "' rank " + std::to_string(rank));
    std::vector<std::int64_t> lens(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        if (block.dims[k] != v.dims[k])
            fail(Errc::OutOfBounds, "block dimension '" + block.dims[k] + "' does not match variable dimension '" +
                                        v.dims[k] + "'");
        lens[k] = dim_length(schema_.find_dim(v.dims[k]));
        if (block.start[k] < 0 || block.start[k] > block.end[k] || block.end[k] >= lens[k])
            fail(Errc::OutOfBounds, "block " + to_string(block) + " out of bounds for variable '" + var + "'");
    }

    NdArray out;
    out.shape.resize(rank);
    std::int64_t total = 1;
    for (std::size_t k = 0; k < rank; ++k) {
        out.shape[k] = block.extent(k);
        total *= out.shape[k];
    }
    out.elements.resize(static_cast<std::size_t>(total));

    std::size_t esz = elem_size(v.type);

    // element strides over fixed dimensions (the record dimension, if any,
    // strides by recsize_ bytes instead)
    std::size_t first_fixed = lay.record ? 1 : 0;
    std::vector<std::uint64_t> stride(rank, 1);
    for (std::size_t k = rank; k-- > first_fixed;)
        stride[k] = k + 1 < rank ? stride[k + 1] * static_cast<std::uint64_t>(lens[k + 1]) : 1;

    // dims [s, rank) are fully covered, so a run anchored at dim s-1 is
    // contiguous in the file
    std::size_t s = rank;
    while (s > first_fixed && block.start[s - 1] == 0 && block.end[s - 1] == lens[s - 1] - 1) --s;

    std::size_t run_dim; // outer dims [0, run_dim) iterate; the run spans the rest
    std::int64_t run_elems = 1;
    if (s == first_fixed) {
        run_dim = first_fixed;
        for (std::size_t k = first_fixed; k < rank; ++k) run_elems *= lens[k];
    } else {
        run_dim = s - 1;
        run_elems = block.extent(run_dim);
        for (std::size_t k = s; k < rank; ++k) run_elems *= lens[k];
    }

    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(Errc::IoFailure, "cannot open '" + path_ + "'");

    std::vector<unsigned char> buf(static_cast<std::size_t>(run_elems) * esz);
    std::vector<std::int64_t> idx(block.start.begin(), block.start.end());
    std::size_t out_pos = 0;
    std::uint64_t run_count = 0;

    for (;;) {
        std::uint64_t elem_off = 0;
        for (std::size_t k = first_fixed; k < rank; ++k) {
            std::uint64_t pos = k < run_dim ? static_cast<std::uint64_t>(idx[k])
                                            : static_cast<std::uint64_t>(block.start[k]);
            elem_off += pos * stride[k];
            if (k >= run_dim) break; // run origin reached
        }
        std::uint64_t offset = lay.begin + elem_off * esz;
        if (lay.record) offset += static_cast<std::uint64_t>(idx[0]) * recsize_;

        in.seekg(static_cast<std::streamoff>(offset));
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            fail(Errc::IoFailure, "short read in '" + path_ + "'");
        ++run_count;

        for (std::int64_t e = 0; e < run_elems; ++e)
            out.elements[out_pos++] = decode_elem(v.type, buf.data() + static_cast<std::size_t>(e) * esz);

        bool done = true;
        for (std::size_t j = run_dim; j-- > 0;) {
            if (++idx[j] <= block.end[j]) {
                done = false;
                break;
            }
            idx[j] = block.start[j];
        }
        if (done) break;
    }

    if (io) {
        io->bytes.fetch_add(static_cast<std::uint64_t>(total) * esz, std::memory_order_relaxed);
        io->reads.fetch_add(run_count, std::memory_order_relaxed);
    }
    return out;
}

void write_grid_file(const std::string& path, const FileSchema& schema,
                     const std::vector<CoordinateAxis>& axes,
                     const std::map<std::string, FillFn>& fills, int version) {
    schema.validate();
    if (version != 1 && version != 2) fail(Errc::InvalidSchema, "writer supports versions 1 and 2");
    for (const auto& d : schema.dimensions)
        if (d.length == 0) fail(Errc::InvalidSchema, "writer does not emit record dimensions");

    auto axis_for = [&](const std::string& dim) -> const CoordinateAxis* {
        for (const auto& a : axes)
            if (a.dim_name == dim) return &a;
        return nullptr;
    };
    for (const auto& v : schema.variables) {
        if (schema.find_dim(v.name) < 0) continue;
        const CoordinateAxis* a = axis_for(v.name);
        if (!a) fail(Errc::InvalidSchema, "no axis values for coordinate variable '" + v.name + "'");
        std::uint32_t len = schema.dimensions[static_cast<std::size_t>(schema.find_dim(v.name))].length;
        if (a->values.size() != len)
            fail(Errc::InvalidSchema, "axis '" + v.name + "' has " + std::to_string(a->values.size()) +
                                          " values for a dimension of length " + std::to_string(len));
    }

    std::uint64_t header_size = 0;
    auto layout = compute_layout(schema, version, &header_size);

    ByteWriter w;
    w.buf.reserve(header_size);
    w.buf.insert(w.buf.end(), {'C', 'D', 'F', static_cast<unsigned char>(version)});
    w.u32(0); // numrecs
    if (schema.dimensions.empty()) {
        w.u32(0);
        w.u32(0);
    } else {
        w.u32(kTagDimension);
        w.u32(static_cast<std::uint32_t>(schema.dimensions.size()));
        for (const auto& d : schema.dimensions) {
            w.name(d.name);
            w.u32(d.length);
        }
    }
    write_attr_list(w, schema.global_attrs);
    if (schema.variables.empty()) {
        w.u32(0);
        w.u32(0);
    } else {
        w.u32(kTagVariable);
        w.u32(static_cast<std::uint32_t>(schema.variables.size()));
        for (std::size_t i = 0; i < schema.variables.size(); ++i) {
            const auto& v = schema.variables[i];
            w.name(v.name);
            w.u32(static_cast<std::uint32_t>(v.dims.size()));
            for (const auto& dn : v.dims) w.u32(static_cast<std::uint32_t>(schema.find_dim(dn)));
            write_attr_list(w, v.attrs);
            w.u32(static_cast<std::uint32_t>(v.type));
            if (layout[i].vsize > 0xFFFFFFFFull) fail(Errc::InvalidSchema, "variable '" + v.name + "' too large");
            w.u32(static_cast<std::uint32_t>(layout[i].vsize));
            if (version == 1) {
                if (layout[i].begin > 0xFFFFFFFFull)
                    fail(Errc::InvalidSchema, "offsets exceed the version-1 limit; use version 2");
                w.u32(static_cast<std::uint32_t>(layout[i].begin));
            } else {
                w.u64(layout[i].begin);
            }
        }
    }
    if (w.buf.size() != header_size) fail(Errc::IoFailure, "internal header size mismatch");

    // variable data, in declaration order
    for (std::size_t i = 0; i < schema.variables.size(); ++i) {
        const auto& v = schema.variables[i];
        std::size_t esz = elem_size(v.type);
        std::size_t before = w.buf.size();

        const CoordinateAxis* coord = schema.find_dim(v.name) >= 0 ? axis_for(v.name) : nullptr;
        if (coord) {
            unsigned char tmp[8];
            for (double val : coord->values) {
                encode_elem(v.type, val, tmp);
                w.buf.insert(w.buf.end(), tmp, tmp + esz);
            }
        } else {
            const FillFn* fill = nullptr;
            if (auto it = fills.find(v.name); it != fills.end()) fill = &it->second;

            std::vector<const CoordinateAxis*> var_axes(v.dims.size());
            std::vector<std::int64_t> lens(v.dims.size());
            for (std::size_t k = 0; k < v.dims.size(); ++k) {
                var_axes[k] = axis_for(v.dims[k]);
                lens[k] = schema.dimensions[static_cast<std::size_t>(schema.find_dim(v.dims[k]))].length;
            }
            std::vector<std::int64_t> idx(v.dims.size(), 0);
            std::vector<double> coords(v.dims.size(), 0.0);
            unsigned char tmp[8];
            for (;;) {
                double value = 0.0;
                if (fill) {
                    for (std::size_t k = 0; k < idx.size(); ++k)
                        coords[k] = var_axes[k] ? var_axes[k]->values[static_cast<std::size_t>(idx[k])]
                                                : static_cast<double>(idx[k]);
                    value = (*fill)(coords);
                }
                encode_elem(v.type, value, tmp);
                w.buf.insert(w.buf.end(), tmp, tmp + esz);

                bool done = true;
                for (std::size_t j = idx.size(); j-- > 0;) {
                    if (++idx[j] < lens[j]) {
                        done = false;
                        break;
                    }
                    idx[j] = 0;
                }
                if (done || idx.empty()) break;
            }
        }

        while (w.buf.size() - before < layout[i].vsize) w.buf.push_back(0);
        if (w.buf.size() != layout[i].begin + layout[i].vsize) fail(Errc::IoFailure, "internal layout mismatch");
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, "cannot create '" + path + "'");
    out.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
    if (!out) fail(Errc::IoFailure, "write failed for '" + path + "'");
}

} // namespace gridlight
