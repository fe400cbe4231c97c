#pragma once

#include <cstdint>
#include <random>

namespace hflow {

// Counter-based seed derivation: (master, stream, index) -> 64-bit seed via
// chained splitmix64 finalizers. Distinct (stream, index) pairs give
// statistically independent engines; equal triples give equal engines.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

// Well-known stream ids so that experiments can share common random numbers
// (same replica seed -> same driving Brownian increments) across flow kinds.
namespace streams {
inline constexpr std::uint64_t replica = 1;
inline constexpr std::uint64_t reference = 2;
inline constexpr std::uint64_t independent = 3;
inline constexpr std::uint64_t hitting = 4;
}  // namespace streams

// Two engines per replica: `drive` produces the Brownian increments on the
// recording grid and is consumed identically by every flow kind; `aux`
// feeds bridge tests and sub-step refinement, whose consumption depends on
// the path.
class ReplicaRng {
 public:
  explicit ReplicaRng(std::uint64_t seed);

  double drive_normal() { return drive_normal_(drive_); }
  double aux_normal() { return aux_normal_(aux_); }
  double aux_uniform() { return aux_uniform_(aux_); }

 private:
  std::mt19937_64 drive_;
  std::mt19937_64 aux_;
  std::normal_distribution<double> drive_normal_;
  std::normal_distribution<double> aux_normal_;
  std::uniform_real_distribution<double> aux_uniform_;
};

}  // namespace hflow
