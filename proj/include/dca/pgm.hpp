#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dca/binary.hpp"
#include "dca/configuration.hpp"

namespace dca {

// Time-major stack of configurations; row 0 is the initial one.
struct SpaceTimeDiagram {
    std::vector<Configuration> rows;

    std::size_t width() const { return rows.empty() ? 0 : rows.front().cell_count(); }
    std::size_t height() const { return rows.size(); }
};

inline SpaceTimeDiagram make_diagram(std::vector<Configuration> rows) {
    SpaceTimeDiagram diagram{std::move(rows)};
    if (diagram.rows.empty())
        throw std::invalid_argument("diagram needs at least one row");
    for (const auto& row : diagram.rows)
        if (row.cell_count() != diagram.width() ||
            row.symbol_count() != diagram.rows.front().symbol_count())
            throw std::invalid_argument("diagram rows have mismatched dimensions");
    return diagram;
}

inline SpaceTimeDiagram make_diagram(const std::vector<BinaryConfig>& rows) {
    std::vector<Configuration> converted;
    converted.reserve(rows.size());
    for (const auto& row : rows) converted.push_back(to_configuration(row));
    return make_diagram(std::move(converted));
}

// Binary PGM (P5, maxval 255), one pixel per (time, cell). Pixel value is
// round(255 * (1 - P(black))) with half rounded away from zero, so a sure
// black cell renders as 0 and a sure white one as 255. Identical diagrams
// produce byte-identical output.
inline std::string render_pgm(const SpaceTimeDiagram& diagram,
                              std::size_t black_symbol = 1) {
    if (diagram.rows.empty())
        throw std::invalid_argument("diagram needs at least one row");
    if (black_symbol >= diagram.rows.front().symbol_count())
        throw std::invalid_argument("black symbol index out of range");

    std::string bytes = "P5\n" + std::to_string(diagram.width()) + " " +
                        std::to_string(diagram.height()) + "\n255\n";
    bytes.reserve(bytes.size() + diagram.width() * diagram.height());
    for (const auto& row : diagram.rows)
        for (std::size_t cell = 0; cell < row.cell_count(); ++cell) {
            const double p = row.at(cell, black_symbol);
            if (!(p >= -kSimplexTol && p <= 1.0 + kSimplexTol))
                throw std::invalid_argument("pixel probability outside [0,1]");
            const long pixel = std::lround(255.0 * (1.0 - p));
            bytes.push_back(static_cast<char>(static_cast<unsigned char>(
                pixel < 0 ? 0 : (pixel > 255 ? 255 : pixel))));
        }
    return bytes;
}

}  // namespace dca
