#include "qforest/rng.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace qforest {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_bytes(std::span<const std::byte> bytes, std::uint64_t seed) {
  // FNV-1a over the bytes, finalised with the mixer.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t seed) {
  return hash_bytes(std::as_bytes(values), seed);
}

StreamKey StreamKey::derive(std::uint64_t tag) const {
  return StreamKey(mix64(value_ ^ mix64(tag + 0x632be59bd9b4e019ULL)));
}

StreamKey StreamKey::derive(std::string_view tag) const {
  return derive(hash_bytes(std::as_bytes(std::span(tag.data(), tag.size()))));
}

Stream::Stream(StreamKey key) : engine_(mix64(key.value())) {}

double Stream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Stream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Stream::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::uint64_t Stream::binomial(std::uint64_t trials, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(engine_);
}

}  // namespace qforest
