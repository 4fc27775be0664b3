#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "dca/configuration.hpp"

namespace dca {

// mt19937_64 with explicit output transforms, so seeded streams do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // [0, 1), 53-bit resolution
    double uniform_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t uniform_index(std::size_t bound) {
        return static_cast<std::size_t>(uniform_unit() * static_cast<double>(bound));
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        // Box-Muller; u1 in (0, 1] keeps the log finite
        const double u1 = 1.0 - uniform_unit();
        const double u2 = uniform_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline DiscreteState random_state(Rng& rng, std::size_t cells, std::size_t symbol_count) {
    DiscreteState state(cells);
    for (std::size_t& sym : state) sym = rng.uniform_index(symbol_count);
    return state;
}

inline Configuration random_delta_configuration(Rng& rng, std::size_t cells,
                                                std::size_t symbol_count) {
    return Configuration::delta(random_state(rng, cells, symbol_count), symbol_count);
}

// Interior point of each cell's simplex (normalized exponentials).
inline Configuration random_interior_configuration(Rng& rng, std::size_t cells,
                                                   std::size_t symbol_count) {
    Configuration config(cells, symbol_count);
    for (std::size_t c = 0; c < cells; ++c) {
        double sum = 0.0;
        for (std::size_t a = 0; a < symbol_count; ++a) {
            config.at(c, a) = -std::log(1.0 - rng.uniform_unit());
            sum += config.at(c, a);
        }
        for (std::size_t a = 0; a < symbol_count; ++a) config.at(c, a) /= sum;
    }
    return config;
}

}  // namespace dca
