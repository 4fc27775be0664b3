#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dca/configuration.hpp"
#include "dca/discrete.hpp"

namespace dca::test {

struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

// Minimal parser for the P5 files the renderer emits.
inline PgmImage parse_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a P5 file");
    PgmImage image;
    std::size_t maxval = 0;
    in >> image.width >> image.height >> maxval;
    if (maxval != 255) throw std::runtime_error("unexpected maxval");
    in.get();  // the single whitespace byte after the header
    image.pixels.resize(image.width * image.height);
    in.read(reinterpret_cast<char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != image.pixels.size())
        throw std::runtime_error("truncated pixel data");
    return image;
}

struct LossCsv {
    std::vector<std::size_t> iterations;
    std::vector<double> losses;
};

inline LossCsv parse_loss_csv(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string line;
    if (!std::getline(in, line) || line != "iteration,loss")
        throw std::runtime_error("bad csv header");
    LossCsv csv;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("bad csv row");
        csv.iterations.push_back(std::stoul(line.substr(0, comma)));
        csv.losses.push_back(std::stod(line.substr(comma + 1)));
    }
    return csv;
}

inline dca::DiscreteState state_from_string(const std::string& bits) {
    dca::DiscreteState state;
    state.reserve(bits.size());
    for (char c : bits) state.push_back(c == '0' ? 0 : 1);
    return state;
}

inline std::string state_to_string(const dca::DiscreteState& state) {
    std::string bits;
    bits.reserve(state.size());
    for (std::size_t sym : state) bits.push_back(sym ? '1' : '0');
    return bits;
}

}  // namespace dca::test
