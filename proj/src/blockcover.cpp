#include "gridlight/blockcover.hpp"

#include "gridlight/textutil.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace gridlight {

namespace {

void check_same_dims(const std::vector<Block>& blocks) {
    for (std::size_t i = 1; i < blocks.size(); ++i)
        if (blocks[i].dims != blocks[0].dims)
            fail(Errc::DimensionMismatch, "blocks disagree on dimensions");
    for (const auto& b : blocks)
        for (std::size_t k = 0; k < b.rank(); ++k)
            if (b.start[k] > b.end[k]) fail(Errc::InvalidParams, "degenerate block " + to_string(b));
}

std::string bounds_key(const Block& b) {
    std::string key;
    key.resize((b.start.size() + b.end.size()) * sizeof(std::int64_t));
    std::memcpy(key.data(), b.start.data(), b.start.size() * sizeof(std::int64_t));
    std::memcpy(key.data() + b.start.size() * sizeof(std::int64_t), b.end.data(),
                b.end.size() * sizeof(std::int64_t));
    return key;
}

// key over all bounds except dimension k
std::string bounds_key_except(const Block& b, std::size_t skip) {
    std::string key;
    key.reserve((b.start.size() * 2 - 2) * sizeof(std::int64_t));
    for (std::size_t k = 0; k < b.start.size(); ++k) {
        if (k == skip) continue;
        key.append(reinterpret_cast<const char*>(&b.start[k]), sizeof(std::int64_t));
        key.append(reinterpret_cast<const char*>(&b.end[k]), sizeof(std::int64_t));
    }
    return key;
}

void sort_blocks(std::vector<Block>& blocks) {
    std::sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.end < b.end;
    });
}

// merge adjacent blocks along dimension k; returns the number of pairwise merges
std::int64_t merge_along(std::vector<Block>& blocks, std::size_t k) {
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < blocks.size(); ++i) groups[bounds_key_except(blocks[i], k)].push_back(i);

    std::int64_t merges = 0;
    std::vector<Block> out;
    out.reserve(blocks.size());
    std::vector<char> used(blocks.size(), 0);
    for (auto& [key, idxs] : groups) {
        std::sort(idxs.begin(), idxs.end(),
                  [&](std::size_t a, std::size_t b) { return blocks[a].start[k] < blocks[b].start[k]; });
        std::size_t i = 0;
        while (i < idxs.size()) {
            Block cur = blocks[idxs[i]];
            std::size_t j = i + 1;
            while (j < idxs.size() && blocks[idxs[j]].start[k] == cur.end[k] + 1) {
                cur.end[k] = blocks[idxs[j]].end[k];
                ++merges;
                ++j;
            }
            out.push_back(std::move(cur));
            i = j;
        }
    }
    blocks = std::move(out);
    return merges;
}

} // namespace

std::pair<std::vector<Block>, CoverStats> cover_naive(const std::vector<Block>& blocks,
                                                      const CoverOptions& opts) {
    check_same_dims(blocks);
    CoverStats stats;
    stats.input_blocks = static_cast<std::int64_t>(blocks.size());
    if (blocks.empty()) return {{}, stats};

    const std::size_t d = blocks[0].rank();
    const double n = static_cast<double>(blocks.size());
    double projected = n;
    for (std::size_t k = 0; k < d; ++k) projected *= 2.0 * n - 1.0;
    if (projected > static_cast<double>(opts.naive_cap))
        fail(Errc::CoverTooLarge,
             "projected sub-block count " + format_number(projected) + " exceeds the cap of " +
                 std::to_string(opts.naive_cap));

    // distinct half-open boundaries per dimension
    std::vector<std::vector<std::int64_t>> edges(d);
    for (std::size_t k = 0; k < d; ++k) {
        for (const auto& b : blocks) {
            edges[k].push_back(b.start[k]);
            edges[k].push_back(b.end[k] + 1);
        }
        std::sort(edges[k].begin(), edges[k].end());
        edges[k].erase(std::unique(edges[k].begin(), edges[k].end()), edges[k].end());
    }

    std::unordered_set<std::string> seen;
    std::vector<Block> pieces;
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> parts(d);
    for (const auto& b : blocks) {
        for (std::size_t k = 0; k < d; ++k) {
            parts[k].clear();
            std::int64_t lo = b.start[k];
            auto first = std::upper_bound(edges[k].begin(), edges[k].end(), b.start[k]);
            for (auto it = first; it != edges[k].end() && *it <= b.end[k]; ++it) {
                parts[k].emplace_back(lo, *it - 1);
                lo = *it;
            }
            parts[k].emplace_back(lo, b.end[k]);
        }
        std::vector<std::size_t> pick(d, 0);
        for (;;) {
            Block sub;
            sub.dims = b.dims;
            sub.start.resize(d);
            sub.end.resize(d);
            for (std::size_t k = 0; k < d; ++k) {
                sub.start[k] = parts[k][pick[k]].first;
                sub.end[k] = parts[k][pick[k]].second;
            }
            ++stats.sub_blocks_created;
            if (seen.insert(bounds_key(sub)).second)
                pieces.push_back(std::move(sub));
            else
                ++stats.duplicates_removed;

            bool done = true;
            for (std::size_t j = d; j-- > 0;) {
                if (++pick[j] < parts[j].size()) {
                    done = false;
                    break;
                }
                pick[j] = 0;
            }
            if (done) break;
        }
    }

    // merge fastest-varying (last) dimension first, then outward
    for (std::size_t k = d; k-- > 0;) stats.merges_performed += merge_along(pieces, k);

    sort_blocks(pieces);
    stats.output_blocks = static_cast<std::int64_t>(pieces.size());
    return {std::move(pieces), stats};
}

namespace {

// half-open representation used by the sweep
struct HoBlock {
    std::vector<std::int64_t> start;
    std::vector<std::int64_t> end; // exclusive
};

std::string ho_key_except(const HoBlock& b, std::size_t skip, std::int64_t edge) {
    std::string key;
    key.reserve(b.start.size() * 2 * sizeof(std::int64_t));
    for (std::size_t k = 0; k < b.start.size(); ++k) {
        if (k == skip) continue;
        key.append(reinterpret_cast<const char*>(&b.start[k]), sizeof(std::int64_t));
        key.append(reinterpret_cast<const char*>(&b.end[k]), sizeof(std::int64_t));
    }
    key.append(reinterpret_cast<const char*>(&edge), sizeof(std::int64_t));
    return key;
}

std::vector<HoBlock> find_cover(std::vector<HoBlock> blocks, std::size_t dim, std::size_t last_dim,
                                CoverStats& stats) {
    if (blocks.empty()) return {};

    if (dim == last_dim) {
        // 1-D interval cover: union of the intervals as maximal runs
        std::vector<std::pair<std::int64_t, std::int64_t>> iv;
        iv.reserve(blocks.size());
        for (const auto& b : blocks) iv.emplace_back(b.start[dim], b.end[dim]);
        std::sort(iv.begin(), iv.end());
        std::vector<HoBlock> out;
        HoBlock tmpl = blocks.front();
        std::int64_t lo = iv[0].first, hi = iv[0].second;
        auto flush = [&] {
            HoBlock b = tmpl;
            b.start[dim] = lo;
            b.end[dim] = hi;
            out.push_back(std::move(b));
        };
        for (std::size_t i = 1; i < iv.size(); ++i) {
            if (iv[i].first <= hi) {
                hi = std::max(hi, iv[i].second);
            } else {
                flush();
                lo = iv[i].first;
                hi = iv[i].second;
            }
        }
        flush();
        stats.sub_blocks_created += static_cast<std::int64_t>(out.size());
        stats.duplicates_removed += static_cast<std::int64_t>(iv.size() - out.size());
        return out;
    }

    std::vector<std::int64_t> boundaries;
    boundaries.reserve(blocks.size() * 2);
    for (const auto& b : blocks) {
        boundaries.push_back(b.start[dim]);
        boundaries.push_back(b.end[dim]);
    }
    std::sort(boundaries.begin(), boundaries.end());
    boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());

    // sweep: blocks enter at their start boundary and leave at their end
    std::vector<std::size_t> by_start(blocks.size());
    for (std::size_t i = 0; i < by_start.size(); ++i) by_start[i] = i;
    std::sort(by_start.begin(), by_start.end(),
              [&](std::size_t a, std::size_t b) { return blocks[a].start[dim] < blocks[b].start[dim]; });

    std::vector<HoBlock> cover;
    std::unordered_map<std::string, std::size_t> merge_slots;
    std::vector<std::size_t> active;
    std::size_t next_in = 0;

    for (std::size_t bi = 0; bi + 1 < boundaries.size(); ++bi) {
        const std::int64_t lo = boundaries[bi];
        const std::int64_t hi = boundaries[bi + 1];
        while (next_in < by_start.size() && blocks[by_start[next_in]].start[dim] <= lo)
            active.push_back(by_start[next_in++]);
        std::erase_if(active, [&](std::size_t i) { return blocks[i].end[dim] <= lo; });
        if (active.empty()) continue;

        std::vector<HoBlock> sliced;
        sliced.reserve(active.size());
        for (std::size_t i : active) {
            HoBlock s = blocks[i];
            s.start[dim] = lo;
            s.end[dim] = hi;
            sliced.push_back(std::move(s));
        }

        std::vector<HoBlock> sub = find_cover(std::move(sliced), dim + 1, last_dim, stats);

        // merge this strip's sub-cover with cover blocks ending at the strip
        for (auto& b : sub) {
            auto it = merge_slots.find(ho_key_except(b, dim, b.start[dim]));
            if (it != merge_slots.end()) {
                std::size_t slot = it->second;
                merge_slots.erase(it);
                cover[slot].end[dim] = b.end[dim];
                merge_slots[ho_key_except(cover[slot], dim, cover[slot].end[dim])] = slot;
                ++stats.merges_performed;
            } else {
                cover.push_back(b);
                merge_slots[ho_key_except(cover.back(), dim, cover.back().end[dim])] = cover.size() - 1;
            }
        }
    }
    return cover;
}

} // namespace

std::pair<std::vector<Block>, CoverStats> cover_optimized(const std::vector<Block>& blocks) {
    check_same_dims(blocks);
    CoverStats stats;
    stats.input_blocks = static_cast<std::int64_t>(blocks.size());
    if (blocks.empty()) return {{}, stats};

    const std::size_t d = blocks[0].rank();
    if (d == 0) {
        // rank-0 blocks are all the same single cell
        stats.sub_blocks_created = 1;
        stats.duplicates_removed = stats.input_blocks - 1;
        stats.output_blocks = 1;
        return {{blocks[0]}, stats};
    }
    std::vector<HoBlock> ho(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        ho[i].start = blocks[i].start;
        ho[i].end = blocks[i].end;
        for (auto& e : ho[i].end) e += 1;
    }

    std::vector<HoBlock> cover = find_cover(std::move(ho), 0, d - 1, stats);

    std::vector<Block> out;
    out.reserve(cover.size());
    for (auto& b : cover) {
        Block r;
        r.dims = blocks[0].dims;
        r.start = std::move(b.start);
        r.end = std::move(b.end);
        for (auto& e : r.end) e -= 1;
        out.push_back(std::move(r));
    }
    sort_blocks(out);
    stats.output_blocks = static_cast<std::int64_t>(out.size());
    return {std::move(out), stats};
}

CellSet::CellSet(std::vector<std::int64_t> domain) : domain_(std::move(domain)) {
    stride_.assign(domain_.size(), 1);
    std::int64_t total = 1;
    for (std::size_t k = domain_.size(); k-- > 0;) {
        if (domain_[k] <= 0) fail(Errc::InvalidParams, "domain lengths must be positive");
        stride_[k] = total;
        total *= domain_[k];
    }
    words_.assign(static_cast<std::size_t>((total + 63) / 64), 0);
}

void CellSet::mark(const Block& b) {
    if (b.rank() != domain_.size()) fail(Errc::DimensionMismatch, "block rank does not match domain");
    for (std::size_t k = 0; k < domain_.size(); ++k)
        if (b.start[k] < 0 || b.end[k] >= domain_[k])
            fail(Errc::OutOfDomain, "block " + to_string(b) + " outside the domain");

    const std::size_t d = domain_.size();
    if (d == 0) return;
    std::vector<std::int64_t> idx(b.start);
    for (;;) {
        std::int64_t base = 0;
        for (std::size_t k = 0; k + 1 < d; ++k) base += idx[k] * stride_[k];
        // innermost run [start, end] is contiguous
        std::int64_t lo = base + b.start[d - 1];
        std::int64_t hi = base + b.end[d - 1];
        std::size_t wlo = static_cast<std::size_t>(lo >> 6), whi = static_cast<std::size_t>(hi >> 6);
        if (wlo == whi) {
            words_[wlo] |= (~0ull >> (63 - (hi & 63))) & (~0ull << (lo & 63));
        } else {
            words_[wlo] |= ~0ull << (lo & 63);
            for (std::size_t w = wlo + 1; w < whi; ++w) words_[w] = ~0ull;
            words_[whi] |= ~0ull >> (63 - (hi & 63));
        }

        bool done = true;
        for (std::size_t j = d - 1; j-- > 0;) {
            if (++idx[j] <= b.end[j]) {
                done = false;
                break;
            }
            idx[j] = b.start[j];
        }
        if (done) break;
    }
}

bool CellSet::test(std::span<const std::int64_t> cell) const {
    std::int64_t pos = 0;
    for (std::size_t k = 0; k < domain_.size(); ++k) pos += cell[k] * stride_[k];
    return (words_[static_cast<std::size_t>(pos >> 6)] >> (pos & 63)) & 1;
}

std::uint64_t CellSet::count() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
}

CellSet rasterize(const std::vector<Block>& blocks, const std::vector<std::int64_t>& domain) {
    CellSet set(domain);
    for (const auto& b : blocks) set.mark(b);
    return set;
}

std::vector<Block> split_for_memory(const Block& block, std::int64_t max_cells,
                                    const std::string& fastest_dim) {
    if (max_cells <= 0) fail(Errc::InvalidParams, "max_cells must be positive");
    std::size_t fi = block.dims.size();
    for (std::size_t k = 0; k < block.dims.size(); ++k)
        if (block.dims[k] == fastest_dim) fi = k;
    if (fi == block.dims.size()) fail(Errc::InvalidParams, "fastest dimension '" + fastest_dim + "' not in block");

    if (block.cells() <= max_cells) return {block};
    if (block.extent(fi) > max_cells)
        fail(Errc::SplitImpossible, "max_cells " + std::to_string(max_cells) +
                                        " is below the unsplittable extent of '" + fastest_dim + "'");

    // split order: slowest-varying first, fastest dim pinned last
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < block.dims.size(); ++k)
        if (k != fi) order.push_back(k);
    order.push_back(fi);

    std::vector<std::int64_t> suffix(order.size(), 1);
    for (std::size_t k = order.size() - 1; k-- > 0;) suffix[k] = suffix[k + 1] * block.extent(order[k + 1]);

    std::size_t pivot = 0;
    while (suffix[pivot] > max_cells) ++pivot;
    std::int64_t chunk = std::min<std::int64_t>(max_cells / suffix[pivot], block.extent(order[pivot]));

    std::vector<Block> out;
    std::vector<std::int64_t> idx(block.start);
    for (;;) {
        // unit positions for dims before the pivot, chunks along the pivot
        for (std::int64_t lo = block.start[order[pivot]]; lo <= block.end[order[pivot]]; lo += chunk) {
            Block piece = block;
            for (std::size_t j = 0; j < pivot; ++j) {
                piece.start[order[j]] = idx[order[j]];
                piece.end[order[j]] = idx[order[j]];
            }
            piece.start[order[pivot]] = lo;
            piece.end[order[pivot]] = std::min(lo + chunk - 1, block.end[order[pivot]]);
            out.push_back(std::move(piece));
        }
        bool done = true;
        for (std::size_t j = pivot; j-- > 0;) {
            std::size_t k = order[j];
            if (++idx[k] <= block.end[k]) {
                done = false;
                break;
            }
            idx[k] = block.start[k];
        }
        if (done) break;
    }
    return out;
}

WorkloadKind workload_kind_from_string(const std::string& s) {
    if (s == "aligned") return WorkloadKind::Aligned;
    if (s == "misaligned") return WorkloadKind::Misaligned;
    if (s == "diagonal") return WorkloadKind::Diagonal;
    if (s == "centered") return WorkloadKind::Centered;
    fail(Errc::InvalidParams, "unknown workload '" + s + "'");
}

const char* workload_kind_name(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::Aligned: return "aligned";
        case WorkloadKind::Misaligned: return "misaligned";
        case WorkloadKind::Diagonal: return "diagonal";
        case WorkloadKind::Centered: return "centered";
    }
    return "?";
}

std::vector<Block> generate_workload(WorkloadKind kind, int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) fail(Errc::InvalidParams, "workload requires n >= 1 and d >= 1");
    constexpr std::int64_t kExtent = 16;
    std::mt19937_64 rng(seed);
    std::vector<std::string> dims(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) dims[static_cast<std::size_t>(k)] = "d" + std::to_string(k);

    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(n));

    auto make = [&](std::vector<std::int64_t> start, std::vector<std::int64_t> end) {
        blocks.emplace_back(dims, std::move(start), std::move(end));
    };

    switch (kind) {
        case WorkloadKind::Aligned:
        case WorkloadKind::Misaligned: {
            std::int64_t pos = 0;
            for (int i = 0; i < n; ++i) {
                if (i > 0) {
                    bool overlap = rng() & 1;
                    pos += overlap ? kExtent / 2 : kExtent;
                }
                std::vector<std::int64_t> start(static_cast<std::size_t>(d), 0);
                std::vector<std::int64_t> end(static_cast<std::size_t>(d), kExtent - 1);
                start[0] = pos;
                end[0] = pos + kExtent - 1;
                make(std::move(start), std::move(end));
            }
            if (kind == WorkloadKind::Misaligned) {
                for (auto& b : blocks) {
                    for (int k = 1; k < d; ++k) {
                        if (rng() & 1) {
                            b.start[static_cast<std::size_t>(k)] += kExtent / 2;
                            b.end[static_cast<std::size_t>(k)] += kExtent / 2;
                        }
                    }
                }
            }
            break;
        }
        case WorkloadKind::Diagonal: {
            const std::int64_t step = kExtent / 2;
            std::int64_t outer_end = n >= 2 ? step * (n - 2) + kExtent - 1 : kExtent - 1;
            make(std::vector<std::int64_t>(static_cast<std::size_t>(d), 0),
                 std::vector<std::int64_t>(static_cast<std::size_t>(d), outer_end));
            for (int i = 1; i < n; ++i) {
                std::int64_t lo = step * (i - 1);
                make(std::vector<std::int64_t>(static_cast<std::size_t>(d), lo),
                     std::vector<std::int64_t>(static_cast<std::size_t>(d), lo + kExtent - 1));
            }
            break;
        }
        case WorkloadKind::Centered: {
            const std::int64_t center = n + kExtent / 2;
            for (int i = 0; i < n; ++i) {
                std::vector<std::int64_t> start(static_cast<std::size_t>(d));
                std::vector<std::int64_t> end(static_cast<std::size_t>(d));
                std::int64_t h0 = kExtent / 2 + i;
                std::int64_t hk = kExtent / 2 + (n - 1 - i);
                for (int k = 0; k < d; ++k) {
                    std::int64_t h = k == 0 ? h0 : hk;
                    start[static_cast<std::size_t>(k)] = center - h;
                    end[static_cast<std::size_t>(k)] = center + h;
                }
                make(std::move(start), std::move(end));
            }
            break;
        }
    }
    return blocks;
}

bool blocks_disjoint(const std::vector<Block>& blocks) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            bool overlap = true;
            for (std::size_t k = 0; k < blocks[i].rank() && overlap; ++k)
                overlap = blocks[i].start[k] <= blocks[j].end[k] && blocks[j].start[k] <= blocks[i].end[k];
            if (overlap) return false;
        }
    }
    return true;
}

} // namespace gridlight
