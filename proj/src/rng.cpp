#include "csel/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace csel {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t derive_key(std::uint64_t parent, std::string_view label) {
  return mix64(mix64(parent ^ fnv1a64(label)) + kGolden);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : RngStream(seed, std::string(label), derive_key(mix64(seed + kGolden), label)) {}

RngStream::RngStream(std::uint64_t seed, std::string label, std::uint64_t key)
    : seed_(seed), label_(std::move(label)), key_(key) {}

RngStream RngStream::split(std::string_view label) const {
  std::string child = label_;
  child += '/';
  child += label;
  return RngStream(seed_, std::move(child), derive_key(key_, label));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden) ^ mix64(counter_ ^ key_);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be positive");
  // Lemire's multiply-shift with rejection
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace csel
