#include "gridlight/blockcover.hpp"

#include <doctest.h>

#include <random>

using namespace gridlight;

namespace {

Block b2(std::int64_t x0, std::int64_t x1, std::int64_t y0, std::int64_t y1) {
    return Block({"x", "y"}, {x0, y0}, {x1, y1});
}

std::vector<std::int64_t> bounding_domain(const std::vector<Block>& blocks) {
    std::vector<std::int64_t> domain(blocks.empty() ? 0 : blocks[0].rank(), 1);
    for (const Block& b : blocks)
        for (std::size_t k = 0; k < b.rank(); ++k) domain[k] = std::max(domain[k], b.end[k] + 1);
    return domain;
}

std::vector<Block> random_blocks(std::mt19937_64& rng, int n, int d, std::int64_t domain_len) {
    std::vector<std::string> dims;
    for (int k = 0; k < d; ++k) dims.push_back("d" + std::to_string(k));
    std::vector<Block> blocks;
    for (int i = 0; i < n; ++i) {
        std::vector<std::int64_t> start(static_cast<std::size_t>(d)), end(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            std::int64_t a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(domain_len));
            std::int64_t b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(domain_len));
            start[static_cast<std::size_t>(k)] = std::min(a, b);
            end[static_cast<std::size_t>(k)] = std::max(a, b);
        }
        blocks.emplace_back(dims, std::move(start), std::move(end));
    }
    return blocks;
}

// the four blocks of the paper's non-convex running example, on the
// 721 x 1440 quarter-degree grid with a single time entry
std::vector<Block> running_example_blocks() {
    auto b3 = [](std::int64_t lat0, std::int64_t lat1, std::int64_t lon0, std::int64_t lon1) {
        return Block({"time", "lat", "lon"}, {0, lat0, lon0}, {0, lat1, lon1});
    };
    return {
        b3(361, 720, 360, 1439), // lon >= 90 and lat < 0
        b3(0, 359, 360, 1439),   // lon >= 90 and lat > 0
        b3(0, 720, 360, 651),    // lon >= 90 and lon < 163
        b3(0, 720, 656, 1439),   // lon > 163.75
    };
}

} // namespace

TEST_CASE("rasterize marks exact cell sets") {
    CellSet one = rasterize({Block({"x"}, {0}, {2})}, {5});
    CHECK(one.count() == 3);
    std::int64_t c0 = 0, c3 = 3;
    CHECK(one.test({&c0, 1}));
    CHECK_FALSE(one.test({&c3, 1}));

    CellSet two = rasterize({b2(0, 1, 0, 1), b2(1, 2, 1, 2)}, {4, 4});
    CHECK(two.count() == 7); // the shared (1,1) cell counts once

    CHECK(rasterize({}, {3, 3}).count() == 0);

    try {
        rasterize({b2(0, 5, 0, 1)}, {3, 3});
        FAIL("expected OutOfDomain");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutOfDomain);
    }
}

TEST_CASE("naive cover reproduces the worked split/dedup/merge trace") {
    auto [cover, stats] = cover_naive(running_example_blocks());
    CHECK(stats.input_blocks == 4);
    CHECK(stats.sub_blocks_created == 12);
    CHECK(stats.duplicates_removed == 4); // 8 distinct sub-blocks remain
    CHECK(stats.sub_blocks_created - stats.duplicates_removed == 8);
    CHECK(stats.output_blocks == 4);
    CHECK(cover.size() == 4);
    CHECK(blocks_disjoint(cover));

    auto domain = bounding_domain(running_example_blocks());
    CHECK(rasterize(cover, domain) == rasterize(running_example_blocks(), domain));
}

TEST_CASE("single block passes through unchanged") {
    auto [cover, stats] = cover_naive({b2(2, 5, 3, 9)});
    REQUIRE(cover.size() == 1);
    CHECK(cover[0] == b2(2, 5, 3, 9));
    CHECK(stats.sub_blocks_created == 1);
    CHECK(stats.duplicates_removed == 0);
    CHECK(stats.merges_performed == 0);
}

TEST_CASE("two identical blocks become one") {
    auto [cover, stats] = cover_naive({b2(1, 2, 1, 2), b2(1, 2, 1, 2)});
    REQUIRE(cover.size() == 1);
    CHECK(cover[0] == b2(1, 2, 1, 2));
    CHECK(stats.duplicates_removed == 1);
}

TEST_CASE("1-D overlapping intervals merge back to a single run") {
    auto [cover, stats] = cover_naive({Block({"x"}, {0}, {5}), Block({"x"}, {3}, {9})});
    REQUIRE(cover.size() == 1);
    CHECK(cover[0].start[0] == 0);
    CHECK(cover[0].end[0] == 9);
    CHECK(rasterize(cover, {10}).count() == 10);

    auto [opt, ostats] = cover_optimized({Block({"x"}, {0}, {5}), Block({"x"}, {3}, {9})});
    REQUIRE(opt.size() == 1);
    CHECK(opt[0] == cover[0]);
}

TEST_CASE("optimized cover matches naive on the running example") {
    auto blocks = running_example_blocks();
    auto [naive, ns] = cover_naive(blocks);
    auto [opt, os] = cover_optimized(blocks);
    auto domain = bounding_domain(blocks);
    CHECK(rasterize(opt, domain) == rasterize(naive, domain));
    CHECK(blocks_disjoint(opt));
    CHECK(os.output_blocks <= ns.output_blocks);
}

TEST_CASE("disjoint inputs keep their cells") {
    std::vector<Block> blocks = {b2(0, 1, 0, 1), b2(4, 5, 4, 5)};
    auto [opt, stats] = cover_optimized(blocks);
    auto domain = bounding_domain(blocks);
    CHECK(rasterize(opt, domain) == rasterize(blocks, domain));
    CHECK(blocks_disjoint(opt));
}

TEST_CASE("covers are equivalent and disjoint on random inputs") {
    std::mt19937_64 rng(11823);
    for (int iter = 0; iter < 300; ++iter) {
        int d = 1 + static_cast<int>(rng() % 3);
        int n = 1 + static_cast<int>(rng() % 12);
        auto blocks = random_blocks(rng, n, d, 12);
        auto domain = bounding_domain(blocks);
        CellSet expected = rasterize(blocks, domain);

        auto [naive, ns] = cover_naive(blocks);
        auto [opt, os] = cover_optimized(blocks);
        REQUIRE(rasterize(naive, domain) == expected);
        REQUIRE(rasterize(opt, domain) == expected);
        REQUIRE(blocks_disjoint(naive));
        REQUIRE(blocks_disjoint(opt));
        REQUIRE(os.output_blocks <= os.sub_blocks_created);
        REQUIRE(ns.output_blocks <= ns.sub_blocks_created);
    }
}

TEST_CASE("the fastest-dim merge is exhaustive in naive covers") {
    std::mt19937_64 rng(5150);
    for (int iter = 0; iter < 100; ++iter) {
        int d = 1 + static_cast<int>(rng() % 3);
        auto blocks = random_blocks(rng, 1 + static_cast<int>(rng() % 10), d, 10);
        auto [cover, stats] = cover_naive(blocks);
        for (std::size_t i = 0; i < cover.size(); ++i) {
            for (std::size_t j = 0; j < cover.size(); ++j) {
                if (i == j) continue;
                bool same_profile = true;
                for (std::size_t k = 0; k + 1 < cover[i].rank(); ++k)
                    same_profile = same_profile && cover[i].start[k] == cover[j].start[k] &&
                                   cover[i].end[k] == cover[j].end[k];
                if (same_profile) REQUIRE(cover[i].end.back() + 1 != cover[j].start.back());
            }
        }
    }
}

TEST_CASE("mismatched dimensions are rejected") {
    try {
        cover_naive({Block({"x"}, {0}, {1}), Block({"y"}, {0}, {1})});
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DimensionMismatch);
    }
}

TEST_CASE("naive blow-up guard trips on the projected count") {
    auto blocks = generate_workload(WorkloadKind::Diagonal, 256, 4, 1);
    try {
        cover_naive(blocks);
        FAIL("expected CoverTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CoverTooLarge);
    }
}

TEST_CASE("split_for_memory reproduces the lat-chunking example") {
    Block era({"time", "lat", "lon"}, {0, 0, 0}, {0, 720, 1439});
    auto pieces = split_for_memory(era, 300'000, "lon");
    REQUIRE(pieces.size() == 4);
    std::vector<std::int64_t> lat_extents;
    for (const Block& p : pieces) {
        CHECK(p.start[2] == 0);
        CHECK(p.end[2] == 1439); // the fastest dimension is never split
        CHECK(p.cells() <= 300'000);
        lat_extents.push_back(p.extent(1));
    }
    CHECK(lat_extents == std::vector<std::int64_t>{208, 208, 208, 97});

    CHECK(blocks_disjoint(pieces));
    CHECK(rasterize(pieces, {1, 721, 1440}) == rasterize({era}, {1, 721, 1440}));
}

TEST_CASE("split_for_memory leaves small blocks alone and rejects impossible limits") {
    Block small({"x", "y"}, {0, 0}, {3, 3});
    auto pieces = split_for_memory(small, 100, "y");
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0] == small);

    Block era({"time", "lat", "lon"}, {0, 0, 0}, {0, 720, 1439});
    try {
        split_for_memory(era, 1000, "lon");
        FAIL("expected SplitImpossible");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SplitImpossible);
    }
}

TEST_CASE("split_for_memory splits slow dimensions before fast ones") {
    std::mt19937_64 rng(99);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<std::string> dims = {"a", "b", "c"};
        std::vector<std::int64_t> start(3), end(3);
        for (int k = 0; k < 3; ++k) {
            start[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(rng() % 4);
            end[static_cast<std::size_t>(k)] =
                start[static_cast<std::size_t>(k)] + 1 + static_cast<std::int64_t>(rng() % 9);
        }
        Block b(dims, start, end);
        std::int64_t max_cells = b.extent(2) * (1 + static_cast<std::int64_t>(rng() % 20));
        auto pieces = split_for_memory(b, max_cells, "c");
        std::vector<std::int64_t> domain = {end[0] + 1, end[1] + 1, end[2] + 1};
        REQUIRE(blocks_disjoint(pieces));
        REQUIRE(rasterize(pieces, domain) == rasterize({b}, domain));
        for (const Block& p : pieces) {
            REQUIRE(p.cells() <= max_cells);
            REQUIRE(p.extent(2) == b.extent(2));
        }
    }
}

TEST_CASE("workloads are deterministic in the seed") {
    for (auto kind : {WorkloadKind::Aligned, WorkloadKind::Misaligned, WorkloadKind::Diagonal,
                      WorkloadKind::Centered}) {
        auto a = generate_workload(kind, 16, 3, 77);
        auto b = generate_workload(kind, 16, 3, 77);
        CHECK(a == b);
        auto c = generate_workload(kind, 16, 3, 78);
        if (kind == WorkloadKind::Aligned || kind == WorkloadKind::Misaligned) CHECK(a != c);
    }
}

TEST_CASE("workload shapes match their definitions") {
    CHECK(generate_workload(WorkloadKind::Aligned, 1, 2, 5).size() == 1);

    // diagonal: all later blocks sit inside the first
    auto diag = generate_workload(WorkloadKind::Diagonal, 4, 2, 7);
    REQUIRE(diag.size() == 4);
    for (std::size_t i = 1; i < diag.size(); ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(diag[i].start[k] >= diag[0].start[k]);
            CHECK(diag[i].end[k] <= diag[0].end[k]);
        }

    // centered: every pair overlaps at the common center cell
    auto centered = generate_workload(WorkloadKind::Centered, 3, 2, 1);
    auto domain = bounding_domain(centered);
    CellSet set = rasterize(centered, domain);
    std::int64_t center = 3 + 8; // n + extent/2
    std::vector<std::int64_t> cell = {center, center};
    CHECK(set.test(cell));
    for (const Block& b : centered)
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(b.start[k] <= center);
            CHECK(b.end[k] >= center);
        }

    // aligned blocks share bounds on every dimension except the first
    auto aligned = generate_workload(WorkloadKind::Aligned, 8, 3, 3);
    for (const Block& b : aligned)
        for (std::size_t k = 1; k < 3; ++k) {
            CHECK(b.start[k] == aligned[0].start[k]);
            CHECK(b.end[k] == aligned[0].end[k]);
        }

    try {
        generate_workload(WorkloadKind::Aligned, 0, 2, 1);
        FAIL("expected InvalidParams");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidParams);
    }
}

TEST_CASE("workload covers agree between strategies") {
    for (auto kind : {WorkloadKind::Aligned, WorkloadKind::Misaligned, WorkloadKind::Diagonal,
                      WorkloadKind::Centered}) {
        for (int n : {2, 8, 24}) {
            for (int d : {1, 2, 3}) {
                auto blocks = generate_workload(kind, n, d, 13);
                auto domain = bounding_domain(blocks);
                CoverOptions opts;
                opts.naive_cap = 100'000'000;
                auto [naive, ns] = cover_naive(blocks, opts);
                auto [opt, os] = cover_optimized(blocks);
                REQUIRE(rasterize(naive, domain) == rasterize(blocks, domain));
                REQUIRE(rasterize(opt, domain) == rasterize(blocks, domain));
                REQUIRE(blocks_disjoint(naive));
                REQUIRE(blocks_disjoint(opt));
            }
        }
    }
}

TEST_CASE("rank-0 blocks collapse to a single cell") {
    std::vector<Block> scalars(3, Block({}, {}, {}));
    auto [naive, ns] = cover_naive(scalars);
    auto [opt, os] = cover_optimized(scalars);
    REQUIRE(naive.size() == 1);
    REQUIRE(opt.size() == 1);
    CHECK(ns.duplicates_removed == 2);
    CHECK(naive[0].cells() == 1);
}
