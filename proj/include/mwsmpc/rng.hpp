#pragma once

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>

namespace mwsmpc {

/// Purpose tags used when deriving independent streams from one seed.
enum class StreamPurpose : std::uint64_t {
  kScenarios = 1,
  kEstimate = 2,
  kPlant = 3,
  kOracle = 4,
  kTest = 5,
};

/// Identifies one stream: (seed, mission, step, purpose).
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t mission = 0;
  std::uint64_t step = 0;
  StreamPurpose purpose = StreamPurpose::kTest;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/**
 * Counter-based generator: draw i is splitmix64(key + i * golden).
 *
 * Also a UniformRandomBitGenerator. Normals come from Boost's ziggurat
 * sampler driven by this stream.
 */
class RandomStream {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  explicit RandomStream(const StreamId& id);

  const StreamId& id() const { return id_; }
  std::uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }
  result_type operator()() { return next_u64(); }
  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() { return normal_(*this); }
  void fill_normal(Eigen::Ref<Eigen::MatrixXd> out);

 private:
  StreamId id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace mwsmpc
