#pragma once

#include "gridlight/block.hpp"
#include "gridlight/error.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gridlight {

struct CoverStats {
    std::int64_t input_blocks = 0;
    std::int64_t sub_blocks_created = 0;
    std::int64_t duplicates_removed = 0;
    std::int64_t merges_performed = 0;
    std::int64_t output_blocks = 0;
};

struct CoverOptions {
    /// cover_naive aborts with CoverTooLarge when the projected sub-block
    /// count n*(2n-1)^d exceeds this cap.
    std::int64_t naive_cap = 10'000'000;
};

/// Splits every block at every distinct boundary along every dimension,
/// removes duplicate sub-blocks, then greedily merges adjacent blocks,
/// fastest-varying (last) dimension first. Output is pairwise disjoint and
/// covers exactly the input's cells.
std::pair<std::vector<Block>, CoverStats> cover_naive(const std::vector<Block>& blocks,
                                                      const CoverOptions& opts = {});

/// Recursive interval sweep: per dimension, slice the active blocks between
/// adjacent boundaries, recurse on the next dimension, and merge each strip's
/// sub-cover into the accumulated cover. The fastest-varying dimension is
/// handled in the innermost recursion as a 1-D interval cover. Same cell set
/// as cover_naive.
std::pair<std::vector<Block>, CoverStats> cover_optimized(const std::vector<Block>& blocks);

/// Dense bitmap over a rectangular domain; test oracle for small domains.
class CellSet {
public:
    CellSet() = default;
    explicit CellSet(std::vector<std::int64_t> domain);

    void mark(const Block& b);
    bool test(std::span<const std::int64_t> cell) const;
    std::uint64_t count() const;
    const std::vector<std::int64_t>& domain() const { return domain_; }

    bool operator==(const CellSet&) const = default;

private:
    std::vector<std::int64_t> domain_;
    std::vector<std::int64_t> stride_;
    std::vector<std::uint64_t> words_;
};

/// Exact union of the blocks' cells. Throws OutOfDomain when a block exceeds
/// the domain and DimensionMismatch when ranks differ.
CellSet rasterize(const std::vector<Block>& blocks, const std::vector<std::int64_t>& domain);

/// Splits a block into disjoint pieces of at most max_cells cells without
/// ever splitting fastest_dim; splitting proceeds from the slowest-varying
/// dimension inward.
std::vector<Block> split_for_memory(const Block& block, std::int64_t max_cells,
                                    const std::string& fastest_dim);

enum class WorkloadKind { Aligned, Misaligned, Diagonal, Centered };

WorkloadKind workload_kind_from_string(const std::string& s);
const char* workload_kind_name(WorkloadKind k);

/// Seed-deterministic benchmark workloads over dims d0..d{d-1}.
std::vector<Block> generate_workload(WorkloadKind kind, int n, int d, std::uint64_t seed);

/// Pairwise interval-intersection check; quadratic, for tests and the bench.
bool blocks_disjoint(const std::vector<Block>& blocks);

} // namespace gridlight
