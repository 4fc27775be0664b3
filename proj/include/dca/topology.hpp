#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dca {

// Ring of cells (indices mod ring_size) plus the list of offsets a local
// rule reads, in the order they index pattern digits.
class Topology {
public:
    Topology(std::size_t ring_size, std::vector<int> offsets)
        : ring_size_(ring_size), offsets_(std::move(offsets)) {
        if (ring_size_ == 0)
            throw std::invalid_argument("ring size must be positive");
        if (offsets_.empty())
            throw std::invalid_argument("offset list must not be empty");
        std::set<int> seen(offsets_.begin(), offsets_.end());
        if (seen.size() != offsets_.size())
            throw std::invalid_argument("offsets must be distinct");
    }

    // The usual radius-1 neighborhood.
    static Topology ring(std::size_t n) { return Topology(n, {-1, 0, 1}); }

    std::size_t ring_size() const { return ring_size_; }
    std::size_t arity() const { return offsets_.size(); }
    const std::vector<int>& offsets() const { return offsets_; }

    // (cell + offset) mod ring_size, well defined for any offset sign or size.
    std::size_t neighbor(std::size_t cell, std::size_t offset_index) const {
        const long long n = static_cast<long long>(ring_size_);
        long long v = (static_cast<long long>(cell) + offsets_[offset_index]) % n;
        if (v < 0) v += n;
        return static_cast<std::size_t>(v);
    }

    bool operator==(const Topology& other) const {
        return ring_size_ == other.ring_size_ && offsets_ == other.offsets_;
    }

private:
    std::size_t ring_size_;
    std::vector<int> offsets_;
};

}  // namespace dca
