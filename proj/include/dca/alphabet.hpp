#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dca {

// Finite symbol set with a fixed canonical ordering. For the binary
// alphabet, index 1 is the black cell.
class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols)
        : symbols_(std::move(symbols)) {
        if (symbols_.size() < 2)
            throw std::invalid_argument("alphabet needs at least two symbols");
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (symbols_[i].empty())
                throw std::invalid_argument("alphabet symbol must not be empty");
            auto [it, fresh] = index_.emplace(symbols_[i], i);
            if (!fresh)
                throw std::invalid_argument("duplicate alphabet symbol: " + symbols_[i]);
        }
    }

    static Alphabet binary() { return Alphabet({"0", "1"}); }

    std::size_t size() const { return symbols_.size(); }

    const std::string& label(std::size_t index) const {
        if (index >= symbols_.size())
            throw std::invalid_argument("symbol index out of range");
        return symbols_[index];
    }

    const std::vector<std::string>& labels() const { return symbols_; }

    std::size_t index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw std::invalid_argument("unknown symbol: " + label);
        return it->second;
    }

    bool contains(const std::string& label) const { return index_.count(label) != 0; }

    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }
    bool operator!=(const Alphabet& other) const { return !(*this == other); }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dca
