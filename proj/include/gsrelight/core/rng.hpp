#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gsr {

class Image;

using Rng = std::mt19937_64;

/// Mixes a base seed with a sequence of tags (iteration counters, stream ids)
/// into an independent seed. Used so every (outer, inner) step owns its own
/// stream and a resumed run replays identical draws.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(seed, tags));
}

[[nodiscard]] double uniform01(Rng& rng);
[[nodiscard]] double standard_normal(Rng& rng);
/// Uniform integer in the closed range [lo, hi].
[[nodiscard]] std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

void fill_standard_normal(Image& image, Rng& rng);

/// 64-bit FNV-1a, used for content-derived fixture seeds and ids.
[[nodiscard]] std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 14695981039346656037ull);

} // namespace gsr
