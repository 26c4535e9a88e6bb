#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tabsol/network.hpp"
#include "tabsol/trainers.hpp"

namespace tabsol {

inline constexpr unsigned kMinCounterBits = 1;
inline constexpr unsigned kMaxCounterBits = 16;
inline constexpr unsigned kMaxAddNo = 7;

/// One hidden->output connection of the digital learning block: a magnitude
/// counter, a sign bit (1 = negative) and the shared add_no step register.
struct DlbState {
  std::uint32_t mag_w = 0;
  Bit sign_w = 0;
  std::uint8_t add_no = 0;
  unsigned bits = 13;

  std::uint32_t max_count() const { return (1u << bits) - 1u; }
  bool valid() const;

  friend bool operator==(const DlbState&, const DlbState&) = default;
};

/// One clock of the learning block:
///   decr = sign_e ^ sign_h
///   if (sign_w ^ decr) mag_w -= 2^add_no, reflecting through zero
///   else               mag_w += 2^add_no, saturating at 2^bits - 1
DlbState dlb_update(DlbState state, Bit sign_e, Bit sign_h);

/// (-1)^sign_w * mag_w / 2^bits.
double dlb_weight_value(const DlbState& state);

/// True when the increment branch would clip at the counter maximum.
bool dlb_update_saturates(const DlbState& state, Bit sign_e, Bit sign_h);

class DlbArray {
 public:
  /// Zeroed counters. Throws ConfigError for bits outside [1, 16] or an
  /// add_no that does not fit the counter.
  DlbArray(std::size_t count, unsigned bits, std::uint8_t add_no = 0);

  /// Restores saved counters; all states must share bits and add_no.
  explicit DlbArray(std::vector<DlbState> states);

  std::size_t size() const { return states_.size(); }
  unsigned bits() const { return bits_; }
  std::uint8_t add_no() const { return add_no_; }
  const std::vector<DlbState>& states() const { return states_; }
  const DlbState& operator[](std::size_t i) const { return states_[i]; }

  /// Loads the step register on every connection; counters are untouched.
  void set_add_no(unsigned value);

  /// Clocks every connection with the shared error sign.
  void update(Bit sign_e, std::span<const Bit> sign_h);

  /// Real-valued readout row (1 x L).
  OutputWeights weights() const;

  friend bool operator==(const DlbArray&, const DlbArray&) = default;

 private:
  std::vector<DlbState> states_;
  unsigned bits_;
  std::uint8_t add_no_;
};

/// Predicts with the pre-update counters, then clocks every connection with
/// (sign(y_target - y_pred), sign(h_i)). SISO only.
StepRecord sol_hw_step(const TabNetwork& net, DlbArray& dlbs, const Vector& x,
                       double y_target);

/// As sol_hw_step, with the hidden activations already computed.
StepRecord sol_hw_step_h(DlbArray& dlbs, const Vector& h, double y_target);

/// One line of hardware test-bench stimulus.
struct DlbVector {
  DlbState in;
  Bit sign_e = 0;
  Bit sign_h = 0;
  DlbState out;
};

/// "mag_w_in sign_w_in add_no sign_e sign_h mag_w_out sign_w_out\n"
std::string format_vector(const DlbVector& v);

/// Parses one line produced by format_vector; bits is not part of the line.
DlbVector parse_vector(const std::string& line, unsigned bits);

/// `count` vectors over uniformly random valid states and input signs.
std::vector<DlbVector> random_vectors(std::size_t count, unsigned bits,
                                      std::uint64_t seed);

}  // namespace tabsol
