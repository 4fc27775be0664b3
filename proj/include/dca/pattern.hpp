#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace dca {

// Neighborhood patterns are indexed by a mixed-radix code: the symbol at
// the first offset is the most significant digit. With the binary
// alphabet and black = 1 this reproduces Wolfram's table order.

inline std::size_t pattern_count(std::size_t symbol_count, std::size_t arity) {
    if (symbol_count < 2) throw std::invalid_argument("need at least two symbols");
    if (arity == 0) throw std::invalid_argument("arity must be positive");
    std::size_t count = 1;
    for (std::size_t i = 0; i < arity; ++i) {
        if (count > std::numeric_limits<std::size_t>::max() / symbol_count)
            throw std::invalid_argument("pattern space too large");
        count *= symbol_count;
    }
    return count;
}

inline std::size_t encode_pattern(std::span<const std::size_t> symbols,
                                  std::size_t symbol_count) {
    if (symbols.empty()) throw std::invalid_argument("empty pattern");
    std::size_t code = 0;
    for (std::size_t sym : symbols) {
        if (sym >= symbol_count)
            throw std::invalid_argument("symbol index out of range");
        code = code * symbol_count + sym;
    }
    return code;
}

inline void decode_pattern_into(std::size_t code, std::size_t symbol_count,
                                std::span<std::size_t> out) {
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = code % symbol_count;
        code /= symbol_count;
    }
}

inline std::vector<std::size_t> decode_pattern(std::size_t code,
                                               std::size_t symbol_count,
                                               std::size_t arity) {
    if (code >= pattern_count(symbol_count, arity))
        throw std::invalid_argument("pattern code out of range");
    std::vector<std::size_t> symbols(arity);
    decode_pattern_into(code, symbol_count, symbols);
    return symbols;
}

// All pattern digits as one flat table: entry (code * arity + position).
// Step and gradient loops index this instead of re-decoding.
inline std::vector<std::size_t> pattern_digit_table(std::size_t symbol_count,
                                                    std::size_t arity) {
    const std::size_t count = pattern_count(symbol_count, arity);
    std::vector<std::size_t> table(count * arity);
    for (std::size_t code = 0; code < count; ++code)
        decode_pattern_into(code, symbol_count,
                            std::span(table).subspan(code * arity, arity));
    return table;
}

}  // namespace dca
