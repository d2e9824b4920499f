#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridlight {

/// Axis-aligned positional hyper-rectangle with inclusive [start, end]
/// bounds per dimension. The unit of pruning, cover computation and IO.
struct Block {
    std::vector<std::string> dims;
    std::vector<std::int64_t> start;
    std::vector<std::int64_t> end;

    Block() = default;
    Block(std::vector<std::string> d, std::vector<std::int64_t> s, std::vector<std::int64_t> e)
        : dims(std::move(d)), start(std::move(s)), end(std::move(e)) {}

    std::size_t rank() const { return dims.size(); }

    std::int64_t extent(std::size_t k) const { return end[k] - start[k] + 1; }

    std::int64_t cells() const {
        std::int64_t n = 1;
        for (std::size_t k = 0; k < start.size(); ++k) n *= extent(k);
        return n;
    }

    bool operator==(const Block&) const = default;
};

std::string to_string(const Block& b);

} // namespace gridlight
