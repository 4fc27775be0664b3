#pragma once

#include <ostream>
#include <span>
#include <sstream>
#include <string>

#include "dca/rule_io.hpp"

namespace dca {

// "iteration,loss" header, one row per iteration, 17 significant digits,
// LF line endings.
inline void write_loss_csv(std::span<const double> history, std::ostream& out) {
    out << "iteration,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i << "," << format_double(history[i]) << "\n";
}

inline std::string loss_csv_string(std::span<const double> history) {
    std::ostringstream out;
    write_loss_csv(history, out);
    return out.str();
}

}  // namespace dca
