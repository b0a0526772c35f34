#include "elaudit/rng.hpp"

namespace elaudit {
namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
}

std::size_t uniform_index(Engine& engine, std::size_t n) {
  const std::uint64_t range = n;
  u128 product = static_cast<u128>(engine()) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    const std::uint64_t floor = (0 - range) % range;
    while (low < floor) {
      product = static_cast<u128>(engine()) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::size_t>(product >> 64);
}

}  // namespace elaudit
