#pragma once

#include <cstdint>
#include <utility>

#include "bhsim/errors.hpp"

namespace bhsim {

// Network-unique beam identifier: (local_beam << log2(num_bs)) + bs_id.
// The BS id occupies the low bits so decode is a mask and a shift.
struct GlobalBeamId {
  std::int32_t value = -1;

  bool valid() const { return value >= 0; }
  friend bool operator==(GlobalBeamId a, GlobalBeamId b) { return a.value == b.value; }
  friend bool operator!=(GlobalBeamId a, GlobalBeamId b) { return a.value != b.value; }
  friend bool operator<(GlobalBeamId a, GlobalBeamId b) { return a.value < b.value; }
};

class BeamCodec {
 public:
  BeamCodec(int num_bs, int beams_per_bs) : num_bs_(num_bs), beams_per_bs_(beams_per_bs) {
    if (num_bs <= 0 || (num_bs & (num_bs - 1)) != 0) {
      throw ConfigError("beam codec requires a power-of-two BS count, got " +
                        std::to_string(num_bs) + "; pad the grid to the next power of two");
    }
    if (beams_per_bs <= 0) throw ConfigError("beams_per_bs must be positive");
    shift_ = 0;
    while ((1 << shift_) < num_bs) ++shift_;
  }

  GlobalBeamId encode(int bs_id, int local_beam) const {
    if (bs_id < 0 || bs_id >= num_bs_) throw InvalidInput("bs_id out of range");
    if (local_beam < 0 || local_beam >= beams_per_bs_) throw InvalidInput("local beam out of range");
    return GlobalBeamId{static_cast<std::int32_t>((local_beam << shift_) + bs_id)};
  }

  // Returns (bs_id, local_beam).
  std::pair<int, int> decode(GlobalBeamId id) const {
    if (!id.valid() || id.value >= num_bs_ * beams_per_bs_) {
      throw InvalidInput("global beam id out of range: " + std::to_string(id.value));
    }
    return {id.value & (num_bs_ - 1), id.value >> shift_};
  }

  int bs_of(GlobalBeamId id) const { return decode(id).first; }
  int local_of(GlobalBeamId id) const { return decode(id).second; }

  int num_bs() const { return num_bs_; }
  int beams_per_bs() const { return beams_per_bs_; }
  int shift() const { return shift_; }
  int num_beams() const { return num_bs_ * beams_per_bs_; }

 private:
  int num_bs_;
  int beams_per_bs_;
  int shift_;
};

}  // namespace bhsim
