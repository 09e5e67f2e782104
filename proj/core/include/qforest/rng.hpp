#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qforest {

/// Key of a deterministic random stream. Keys form a tree: every consumer
/// derives its own child key from its parent plus a context tag, so the
/// numbers a consumer sees never depend on scheduling or call order.
class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t value) : value_(value) {}

  StreamKey derive(std::uint64_t tag) const;
  StreamKey derive(std::string_view tag) const;
  template <typename... Tags>
  StreamKey derive(std::uint64_t first, Tags... rest) const {
    return derive(first).derive(static_cast<std::uint64_t>(rest)...);
  }

  constexpr std::uint64_t value() const { return value_; }
  friend constexpr bool operator==(StreamKey, StreamKey) = default;

 private:
  std::uint64_t value_ = 0;
};

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t hash_bytes(std::span<const std::byte> bytes, std::uint64_t seed = 0);
std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t seed = 0);

/// Engine owned by one consumer for the lifetime of one keyed task.
class Stream {
 public:
  explicit Stream(StreamKey key);

  double uniform();                        // [0, 1)
  std::uint64_t below(std::uint64_t n);    // uniform in [0, n)
  double normal();
  std::uint64_t binomial(std::uint64_t trials, double p);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qforest
