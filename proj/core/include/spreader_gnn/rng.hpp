#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace spreader_gnn {

// Counter-based generator: the n-th draw of stream (seed, stream) is a pure
// function of (seed, stream, n). Every random decision in the library goes
// through this type so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Stream ids used by the library. Keeping them distinct means e.g. changing
// the dropout rate never perturbs weight initialization.
namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t dropout = 2;
inline constexpr std::uint64_t shuffle = 3;
inline constexpr std::uint64_t split = 4;
inline constexpr std::uint64_t sampling = 5;
inline constexpr std::uint64_t synth_classes = 10;
inline constexpr std::uint64_t synth_features = 11;
inline constexpr std::uint64_t synth_edges = 12;
inline constexpr std::uint64_t synth_labels = 13;
}  // namespace streams

}  // namespace spreader_gnn
