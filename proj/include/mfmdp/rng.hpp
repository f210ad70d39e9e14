#ifndef MFMDP_RNG_HPP
#define MFMDP_RNG_HPP

#include <cstdint>

namespace mfmdp {

// Counter-based random numbers. Every draw is a pure function
// (master seed, stream id, counter) -> uint64, so simulations are reproducible
// bit-for-bit regardless of scheduling or worker count, and stream i never
// consumes values from stream j.
//
// Stream ids pack (purpose, replication, agent):
//   bits 56..63 purpose, bits 36..55 replication (< 2^20), bits 0..35 agent.
// The per-draw counter is the time step (or sample index).

inline uint64_t mix64(uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class StreamPurpose : uint64_t {
    InitialState = 1,
    IdioNoise = 2,
    PolicyRandomizer = 3,
    CommonNoise = 4,
    Generic = 5,
};

inline uint64_t streamId(StreamPurpose purpose, uint64_t replication, uint64_t agent) {
    return (static_cast<uint64_t>(purpose) << 56) | ((replication & 0xFFFFFULL) << 36) |
           (agent & 0xFFFFFFFFFULL);
}

class RngStream {
  public:
    RngStream(uint64_t master_seed, uint64_t stream_id)
        : key_(mix64(master_seed ^ mix64(stream_id ^ 0x6a09e667f3bcc909ULL))) {}

    RngStream(uint64_t master_seed, StreamPurpose purpose, uint64_t replication, uint64_t agent)
        : RngStream(master_seed, streamId(purpose, replication, agent)) {}

    uint64_t bits(uint64_t counter) const { return mix64(key_ ^ mix64(counter)); }

    // uniform on [0,1), 53-bit resolution
    double uniform(uint64_t counter) const { return (bits(counter) >> 11) * 0x1.0p-53; }

  private:
    uint64_t key_;
};

}  // namespace mfmdp

#endif
