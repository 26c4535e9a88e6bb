#include <doctest.h>

#include <cstdint>

#include "tabsol/dlb.hpp"
#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"

using namespace tabsol;

namespace {

// Signed counter value in LSBs.
std::int64_t counts(const DlbState& s) {
  return s.sign_w ? -static_cast<std::int64_t>(s.mag_w) : static_cast<std::int64_t>(s.mag_w);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("update examples") {
  DlbState s{5, 0, 0, 13};
  s = dlb_update(s, 0, 0);
  CHECK(s.mag_w == 6);
  CHECK(s.sign_w == 0);

  s = dlb_update(DlbState{0, 0, 1, 13}, 1, 0);
  CHECK(s.mag_w == 2);
  CHECK(s.sign_w == 1);

  const DlbState top{8191, 0, 0, 13};
  CHECK(dlb_update(top, 0, 0) == top);
  CHECK(dlb_update_saturates(top, 0, 0));
  CHECK(!dlb_update_saturates(top, 1, 0));

  // +1 minus 4 counts reflects to -3.
  s = dlb_update(DlbState{1, 0, 2, 13}, 0, 1);
  CHECK(s.mag_w == 3);
  CHECK(s.sign_w == 1);
}

TEST_CASE("weight values") {
  CHECK(dlb_weight_value(DlbState{0, 0, 0, 13}) == 0.0);
  CHECK(dlb_weight_value(DlbState{4096, 1, 0, 13}) == -0.5);
  CHECK(dlb_weight_value(DlbState{1, 0, 0, 13}) == 1.220703125e-4);
}

TEST_CASE("exhaustive arithmetic and range check up to 8 bits") {
  for (unsigned bits = 1; bits <= 8; ++bits) {
    const std::uint32_t max = (1u << bits) - 1u;
    for (unsigned add_no = 0; add_no + 1 <= bits && add_no <= kMaxAddNo; ++add_no) {
      const std::int64_t step = std::int64_t{1} << add_no;
      for (std::uint32_t mag = 0; mag <= max; ++mag) {
        for (Bit sw : {Bit{0}, Bit{1}}) {
          for (Bit se : {Bit{0}, Bit{1}}) {
            for (Bit sh : {Bit{0}, Bit{1}}) {
              const DlbState in{mag, sw, static_cast<std::uint8_t>(add_no), bits};
              const DlbState out = dlb_update(in, se, sh);
              // (-1)^decr equals sign(e) sign(h).
              const std::int64_t dir =
                  static_cast<std::int64_t>(sign_value(se) * sign_value(sh));
              const std::int64_t exact = counts(in) + dir * step;
              const bool saturates = (exact > 0 ? exact : -exact) > std::int64_t{max};
              CHECK(out.mag_w <= max);
              CHECK(out.sign_w <= 1);
              CHECK(out.bits == bits);
              CHECK(out.add_no == add_no);
              CHECK(dlb_update_saturates(in, se, sh) == saturates);
              if (saturates) {
                CHECK(out.mag_w == max);
                CHECK(out.sign_w == sw);
              } else {
                CHECK(counts(out) == exact);
                CHECK(dlb_weight_value(out) ==
                      dlb_weight_value(in) + static_cast<double>(dir * step) /
                                                 static_cast<double>(1u << bits));
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("emulated steps equal real-valued sol on the counter grid") {
  Rng rng(17);
  const std::size_t L = 16;
  DlbArray dlbs(L, 13, 0);
  OutputWeights w = OutputWeights::zeros(1, L);
  for (int n = 0; n < 20000; ++n) {
    Vector h(static_cast<Eigen::Index>(L));
    for (auto& v : h) v = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-0.5, 0.5);
    const StepRecord hw = sol_hw_step_h(dlbs, h, y);
    const StepRecord sw = sol_step(w, h, Vector::Constant(1, y), 8192.0);
    REQUIRE(hw.y_pred(0) == sw.y_pred(0));
    REQUIRE(dlbs.weights().matrix == w.matrix);
  }
}

TEST_CASE("hardware step examples") {
  NetworkConfig c;
  c.hidden_count = 1;
  const TabNetwork net(c, Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1));
  DlbArray dlbs(1, 13, 0);
  const StepRecord rec = sol_hw_step(net, dlbs, vec({0.5}), 0.3);
  CHECK(rec.y_pred(0) == 0.0);
  CHECK(dlb_weight_value(dlbs[0]) == 1.0 / 8192.0);

  DlbArray neg(1, 13, 0);
  sol_hw_step(net, neg, vec({0.5}), -0.3);
  CHECK(dlb_weight_value(neg[0]) == -1.0 / 8192.0);

  CHECK_THROWS_AS(sol_hw_step(net, dlbs, vec({0.5, 0.1}), 0.3), InputError);
  DlbArray wrong(2, 13, 0);
  CHECK_THROWS_AS(sol_hw_step(net, wrong, vec({0.5}), 0.3), InputError);
}

TEST_CASE("repeating one sample drives the output across the target") {
  const Vector h = vec({0.6, -0.3});
  const double y = 0.25;
  DlbArray dlbs(2, 13, 0);
  std::int64_t last0 = 0, last1 = 0;
  int steps = 0;
  while (true) {
    const StepRecord rec = sol_hw_step_h(dlbs, h, y);
    if (rec.y_pred(0) > y) break;
    const std::int64_t c0 = counts(dlbs[0]), c1 = counts(dlbs[1]);
    CHECK(c0 > last0);
    CHECK(c1 < last1);
    last0 = c0;
    last1 = c1;
    REQUIRE(++steps < 100000);
  }
  CHECK(readout(dlbs.weights(), h)(0) > y - 1e-3);
}

TEST_CASE("add_no register") {
  DlbArray dlbs(3, 13, 0);
  dlbs.set_add_no(3);
  CHECK(dlbs.add_no() == 3);
  const std::vector<Bit> sh{0, 0, 1};
  dlbs.update(0, sh);
  CHECK(counts(dlbs[0]) == 8);
  CHECK(counts(dlbs[2]) == -8);
  dlbs.set_add_no(0);
  dlbs.update(0, sh);
  CHECK(counts(dlbs[0]) == 9);
  CHECK_THROWS_AS(dlbs.set_add_no(8), ConfigError);
  DlbArray narrow(1, 4, 0);
  CHECK_THROWS_AS(narrow.set_add_no(4), ConfigError);
  CHECK_THROWS_AS(DlbArray(1, 17, 0), ConfigError);
  CHECK_THROWS_AS(DlbArray(std::vector<DlbState>{{0, 0, 0, 13}, {0, 0, 1, 13}}),
                  ConfigError);
}

TEST_CASE("test vectors") {
  const DlbVector v{{1, 0, 2, 13}, 0, 1, dlb_update({1, 0, 2, 13}, 0, 1)};
  CHECK(format_vector(v) == "1 0 2 0 1 3 1\n");
  const DlbVector back = parse_vector("1 0 2 0 1 3 1", 13);
  CHECK(back.in == v.in);
  CHECK(back.out == v.out);

  const auto a = random_vectors(500, 13, 9);
  CHECK(a.size() == 500);
  for (const auto& x : a) {
    CHECK(dlb_update(x.in, x.sign_e, x.sign_h) == x.out);
    const DlbVector p = parse_vector(format_vector(x), 13);
    CHECK(p.in == x.in);
    CHECK(p.out == x.out);
  }
  const auto b = random_vectors(500, 13, 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(format_vector(a[i]) == format_vector(b[i]));
  CHECK(random_vectors(0, 13, 1).empty());

  CHECK_THROWS_AS(parse_vector("1 0 2 0", 13), InputError);
  CHECK_THROWS_AS(parse_vector("1 0 2 0 1 3 1 9", 13), InputError);
  CHECK_THROWS_AS(parse_vector("1 2 2 0 1 3 1", 13), InputError);
  CHECK_THROWS_AS(parse_vector("9000 0 0 0 0 9001 0", 13), InputError);
}
