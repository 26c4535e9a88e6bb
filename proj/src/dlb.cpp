#include "tabsol/dlb.hpp"

#include <algorithm>
#include <sstream>

#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"

namespace tabsol {

namespace {

void check_register(unsigned bits, unsigned add_no) {
  if (bits < kMinCounterBits || bits > kMaxCounterBits)
    throw ConfigError("counter width must be in [1, 16], got " +
                      std::to_string(bits));
  if (add_no > kMaxAddNo)
    throw ConfigError("add_no must be in [0, 7], got " + std::to_string(add_no));
  if (bits < add_no + 1)
    throw ConfigError("add_no " + std::to_string(add_no) +
                      " does not fit a " + std::to_string(bits) + "-bit counter");
}

}  // namespace

bool DlbState::valid() const {
  return bits >= kMinCounterBits && bits <= kMaxCounterBits &&
         add_no <= kMaxAddNo && bits >= add_no + 1u && mag_w <= max_count() &&
         sign_w <= 1;
}

DlbState dlb_update(DlbState state, Bit sign_e, Bit sign_h) {
  const std::uint32_t add_count = 1u << state.add_no;
  const Bit decr = sign_e ^ sign_h;
  if (state.sign_w ^ decr) {
    if (add_count > state.mag_w) {
      // Underflow: the weight crosses zero and the sign flips.
      state.sign_w ^= 1;
      state.mag_w = add_count - state.mag_w;
    } else {
      state.mag_w -= add_count;
    }
  } else {
    const std::uint32_t limit = state.max_count();
    state.mag_w = state.mag_w > limit - add_count ? limit : state.mag_w + add_count;
  }
  return state;
}

bool dlb_update_saturates(const DlbState& state, Bit sign_e, Bit sign_h) {
  const std::uint32_t add_count = 1u << state.add_no;
  const Bit decr = sign_e ^ sign_h;
  return !(state.sign_w ^ decr) && state.mag_w > state.max_count() - add_count;
}

double dlb_weight_value(const DlbState& state) {
  const double magnitude =
      static_cast<double>(state.mag_w) / static_cast<double>(1u << state.bits);
  return state.sign_w ? -magnitude : magnitude;
}

DlbArray::DlbArray(std::size_t count, unsigned bits, std::uint8_t add_no)
    : bits_(bits), add_no_(add_no) {
  check_register(bits, add_no);
  states_.assign(count, DlbState{0, 0, add_no, bits});
}

DlbArray::DlbArray(std::vector<DlbState> states) : states_(std::move(states)) {
  if (states_.empty()) throw ConfigError("DLB array must not be empty");
  bits_ = states_.front().bits;
  add_no_ = states_.front().add_no;
  check_register(bits_, add_no_);
  for (const auto& s : states_) {
    if (s.bits != bits_ || s.add_no != add_no_)
      throw ConfigError("all DLB states must share bits and add_no");
    if (!s.valid()) throw ConfigError("DLB counter state out of range");
  }
}

void DlbArray::set_add_no(unsigned value) {
  check_register(bits_, value);
  add_no_ = static_cast<std::uint8_t>(value);
  for (auto& s : states_) s.add_no = add_no_;
}

void DlbArray::update(Bit sign_e, std::span<const Bit> sign_h) {
  if (sign_h.size() != states_.size())
    throw InputError("sign_h length does not match DLB array");
  for (std::size_t i = 0; i < states_.size(); ++i)
    states_[i] = dlb_update(states_[i], sign_e, sign_h[i]);
}

OutputWeights DlbArray::weights() const {
  OutputWeights w = OutputWeights::zeros(1, states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i)
    w.matrix(0, static_cast<Eigen::Index>(i)) = dlb_weight_value(states_[i]);
  return w;
}

StepRecord sol_hw_step_h(DlbArray& dlbs, const Vector& h, double y_target) {
  if (h.size() != static_cast<Eigen::Index>(dlbs.size()))
    throw InputError("activation length does not match DLB array");
  StepRecord rec;
  rec.h = h;
  rec.y_target = Vector::Constant(1, y_target);
  rec.y_pred = readout(dlbs.weights(), h);
  rec.error = rec.y_target - rec.y_pred;
  rec.normalizer = static_cast<double>(1u << dlbs.bits());
  rec.phi = h / rec.normalizer;

  std::vector<Bit> sign_h(dlbs.size());
  for (std::size_t i = 0; i < sign_h.size(); ++i)
    sign_h[i] = sign_bit(h(static_cast<Eigen::Index>(i)));
  dlbs.update(sign_bit(rec.error(0)), sign_h);
  return rec;
}

StepRecord sol_hw_step(const TabNetwork& net, DlbArray& dlbs, const Vector& x,
                       double y_target) {
  if (net.output_dim() != 1)
    throw InputError("the learning block drives a single output");
  if (dlbs.size() != net.hidden_count())
    throw InputError("DLB array size does not match hidden_count");
  return sol_hw_step_h(dlbs, net.hidden_activations(x), y_target);
}

std::string format_vector(const DlbVector& v) {
  std::ostringstream out;
  out << v.in.mag_w << ' ' << unsigned{v.in.sign_w} << ' '
      << unsigned{v.in.add_no} << ' ' << unsigned{v.sign_e} << ' '
      << unsigned{v.sign_h} << ' ' << v.out.mag_w << ' '
      << unsigned{v.out.sign_w} << '\n';
  return out.str();
}

DlbVector parse_vector(const std::string& line, unsigned bits) {
  std::istringstream in(line);
  unsigned long fields[7];
  for (auto& f : fields)
    if (!(in >> f)) throw InputError("malformed test vector: '" + line + "'");
  std::string extra;
  if (in >> extra) throw InputError("trailing data in test vector: '" + line + "'");
  for (int i : {1, 3, 4, 6})
    if (fields[i] > 1) throw InputError("sign field is not a bit: '" + line + "'");
  DlbVector v;
  v.in = {static_cast<std::uint32_t>(fields[0]), static_cast<Bit>(fields[1]),
          static_cast<std::uint8_t>(fields[2]), bits};
  v.sign_e = static_cast<Bit>(fields[3]);
  v.sign_h = static_cast<Bit>(fields[4]);
  v.out = {static_cast<std::uint32_t>(fields[5]), static_cast<Bit>(fields[6]),
           v.in.add_no, bits};
  if (fields[2] > kMaxAddNo || !v.in.valid() || !v.out.valid())
    throw InputError("test vector state out of range: '" + line + "'");
  return v;
}

std::vector<DlbVector> random_vectors(std::size_t count, unsigned bits,
                                      std::uint64_t seed) {
  check_register(bits, 0);
  const unsigned max_add = std::min(kMaxAddNo, bits - 1);
  Rng rng(seed);
  std::vector<DlbVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    DlbVector v;
    v.in.bits = bits;
    v.in.mag_w = static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << bits));
    v.in.sign_w = static_cast<Bit>(rng.below(2));
    v.in.add_no = static_cast<std::uint8_t>(rng.below(max_add + 1));
    v.sign_e = static_cast<Bit>(rng.below(2));
    v.sign_h = static_cast<Bit>(rng.below(2));
    v.out = dlb_update(v.in, v.sign_e, v.sign_h);
    out.push_back(v);
  }
  return out;
}

}  // namespace tabsol
