#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace elaudit {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for an independent sub-stream; distinct (seed, stream) pairs give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) { return Engine(derive_seed(seed, stream)); }

// Unbiased draw from {0, ..., n-1} by multiply-and-reject.
std::size_t uniform_index(Engine& engine, std::size_t n);

}  // namespace elaudit
