#pragma once

#include "gridlight/catalog.hpp"
#include "gridlight/queryir.hpp"
#include "gridlight/rewrite.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridlight {

struct EngineOptions {
    int workers = 0; // 0 = hardware concurrency
    std::int64_t max_cells = std::int64_t{1} << 22;
    std::int64_t dnf_clause_cap = 4096;
};

struct FileStats {
    std::string dataset;
    std::string file;
    bool skipped = false;
    std::int64_t blocks = 0;
    std::uint64_t bytes = 0;
    std::int64_t rows = 0;
};

struct QueryStats {
    std::uint64_t bytes_read = 0; // grid variable bytes
    std::int64_t files_scanned = 0;
    std::int64_t files_skipped = 0;
    std::int64_t blocks_loaded = 0;
    std::int64_t rows_emitted = 0;
    double wall_ms = 0.0;
    std::vector<FileStats> per_file;
    std::map<std::string, std::uint64_t> bytes_by_dataset;

    std::string trailer() const; // key=value lines
};

struct Column {
    ColumnType type = ColumnType::Float64;
    std::vector<double> nums;        // Float64 and Timestamp (epoch seconds)
    std::vector<std::int64_t> ints;  // Int64
    std::vector<std::string> texts;  // Text

    std::size_t size() const {
        switch (type) {
            case ColumnType::Int64: return ints.size();
            case ColumnType::Text: return texts.size();
            default: return nums.size();
        }
    }

    double num_at(std::size_t i) const {
        if (type == ColumnType::Int64) return static_cast<double>(ints[i]);
        return nums[i];
    }
};

/// Columnar rows; for join output the left side's columns come first and
/// left_width maps side-1 column refs past them.
struct RowBatch {
    std::vector<Column> columns;
    std::size_t rows = 0;
    std::size_t left_width = 0; // columns of side 0

    const Column& at(const ColumnRef& ref) const {
        return columns[ref.side == 0 ? static_cast<std::size_t>(ref.column)
                                     : left_width + static_cast<std::size_t>(ref.column)];
    }
};

/// Per-dataset scan specification, fully resolved at plan time.
struct ScanSpec {
    DatasetDescriptor dataset;
    std::optional<BoundPred> predicate; // side-local; column refs use side 0
    DnfPredicate dnf;                   // grid only
    std::vector<GlobalDimInfo> dims;    // grid only
    GlobalQuery global;                 // grid only
    std::vector<LocalPlan> locals;      // grid only, aligned to dataset.files
    std::vector<int> projected_vars;    // schema variable indices to load
};

struct OutputColumn {
    std::string name;
    ColumnType type = ColumnType::Float64;
};

struct PhysicalPlan {
    BoundQuery query;
    ScanSpec from_scan;
    std::optional<ScanSpec> join_scan;
    std::optional<BoundPred> post_join_filter;
    std::optional<BoundPred> injected_envelope; // the predicate pushed into the join scan
    std::vector<OutputColumn> output;
    std::string explain_text;
};

namespace detail {
int effective_workers(const EngineOptions& opts);
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);
RowBatch read_tabular_file(const DatasetDescriptor& ds, const std::string& path);
} // namespace detail

struct QueryResult {
    std::vector<OutputColumn> columns;
    std::vector<RowBatch> batches;
    QueryStats stats;

    std::int64_t row_count() const;
};

/// Element-wise evaluation over a batch; throws DomainError for ln of a
/// non-positive value or sqrt of a negative one, naming the row.
Column evaluate_expression(const BoundExpr& expr, const RowBatch& batch);

bool eval_pred_row(const BoundPred& p, const RowBatch& batch, std::size_t row);

/// Whole-result aggregation with mergeable partial states.
class Aggregator {
public:
    explicit Aggregator(const std::vector<BoundSelectItem>& items);

    void fold(const RowBatch& batch);
    void merge(const Aggregator& other);
    RowBatch result() const;

    static std::vector<OutputColumn> output_columns(const std::vector<BoundSelectItem>& items);

private:
    struct State {
        std::int64_t count = 0;
        double min = 0.0, max = 0.0;
        bool seen = false;
        double sum = 0.0, comp = 0.0; // compensated summation
        std::vector<std::int64_t> bins;
        std::int64_t underflow = 0, overflow = 0;
    };

    const std::vector<BoundSelectItem>* items_;
    std::vector<State> states_;
};

/// Per-file tight bounds; grid datasets use axis endpoints (no variable IO),
/// tabular datasets are fully scanned. Files with no rows are omitted.
EnvelopeSet compute_envelopes(const DatasetDescriptor& dataset, const std::vector<std::string>& dims);

/// Disjunction over the enveloped side's files, expressed over the probe
/// side's key columns (or, with for_left_side, redundantly over the build
/// side's own columns). Throws EnvelopeMissing when the build side carries
/// no envelopes; nullopt when no join key is enveloped.
std::optional<BoundPred> envelope_injection_predicate(const DatasetDescriptor& left,
                                                      const DatasetDescriptor& right,
                                                      const std::vector<std::pair<ColumnRef, ColumnRef>>& keys,
                                                      bool for_left_side);

class Engine {
public:
    explicit Engine(Catalog catalog, EngineOptions opts = {});

    const Catalog& catalog() const { return catalog_; }
    Catalog& catalog() { return catalog_; }
    const EngineOptions& options() const { return opts_; }

    /// Computes envelopes for the dataset and attaches them to the catalog.
    void attach_envelopes(const std::string& dataset, const std::vector<std::string>& dims);

    PhysicalPlan plan(const BoundQuery& query) const;
    QueryResult execute(const PhysicalPlan& plan) const;

    QueryResult run(const std::string& query_text) const;
    std::string explain(const std::string& query_text) const;

private:
    Catalog catalog_;
    EngineOptions opts_;
};

/// Runs the per-file scan of one dataset; batches come back in (file, block,
/// row-major) order. Residual atoms are applied before emission and skipped
/// files contribute no variable IO.
std::vector<RowBatch> execute_scan(const ScanSpec& spec, const EngineOptions& opts, QueryStats& stats);

} // namespace gridlight
