#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace fusegraph {

/// Seeded generator with portable draws.
///
/// The standard distributions are implementation-defined, so everything that
/// feeds a persisted artifact draws through these helpers instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t index(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw = engine_();
        while (draw >= limit) draw = engine_();
        return draw % bound;
    }

    /// Uniform real in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform();
        while (u <= 0.0) u = uniform();
        const double v = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u));
        spare_ = radius * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return radius * std::cos(2.0 * std::numbers::pi * v);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fusegraph
