#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vlos/statistics.hpp"

using namespace vlos;

namespace {

// feed one machine a scripted (state, dist) sequence with interval sinks
struct Scripted {
  PairRun run;
  IntensityTotals totals;
  std::vector<double> los, olos;

  void feed(LinkState s, double d) { run.on_sample(s, d, totals, &los, &olos); }
  void done() { run.finalize(&los, &olos); }
};

}  // namespace

TEST_CASE("pair run: distance accrues to the outgoing state, left-aligned") {
  Scripted m;
  m.feed(LinkState::LOS, 10);   // first sample opens the run, nothing accrues
  m.feed(LinkState::LOS, 10);   // LOS +10
  m.feed(LinkState::OLOS, 10);  // LOS +10, direct flip
  m.feed(LinkState::OLOS, 10);  // OLOS +10
  m.feed(LinkState::LOS, 10);   // OLOS +10, direct flip back
  m.feed(LinkState::OoR, 10);   // LOS +10, closes silently
  m.feed(LinkState::OoR, 10);   // out of range: nothing accrues
  m.feed(LinkState::OLOS, 10);  // re-entry opens a fresh OLOS run
  m.feed(LinkState::OLOS, 10);  // OLOS +10
  m.done();

  CHECK(m.totals.d_los == doctest::Approx(30.0));
  CHECK(m.totals.d_olos == doctest::Approx(30.0));
  CHECK(m.totals.n_los_olos == 1);  // the OoR exit did not count
  CHECK(m.totals.n_olos_los == 1);
  REQUIRE(m.los.size() == 2);
  CHECK(m.los[0] == doctest::Approx(20.0));
  CHECK(m.los[1] == doctest::Approx(10.0));
  REQUIRE(m.olos.size() == 2);
  CHECK(m.olos[0] == doctest::Approx(20.0));
  CHECK(m.olos[1] == doctest::Approx(10.0));
}

TEST_CASE("pair run: closed intervals sum to the state distances") {
  std::mt19937_64 eng(404);
  auto unit = [&eng]() { return (eng() >> 11) * 0x1.0p-53; };
  Scripted m;
  for (int i = 0; i < 5000; ++i) {
    const double u = unit();
    const LinkState s = u < 0.45 ? LinkState::LOS : (u < 0.9 ? LinkState::OLOS : LinkState::OoR);
    m.feed(s, 5.0 + 20.0 * unit());
  }
  m.done();
  double los_sum = 0, olos_sum = 0;
  for (double v : m.los) los_sum += v;
  for (double v : m.olos) olos_sum += v;
  CHECK(los_sum == doctest::Approx(m.totals.d_los).epsilon(1e-12));
  CHECK(olos_sum == doctest::Approx(m.totals.d_olos).epsilon(1e-12));
}

TEST_CASE("pair run: without range exits the two transition counts alternate") {
  std::mt19937_64 eng(77);
  Scripted m;
  for (int i = 0; i < 4000; ++i)
    m.feed((eng() & 1) ? LinkState::LOS : LinkState::OLOS, 10.0);
  m.done();
  CHECK(m.totals.n_los_olos > 500);  // the walk actually flips a lot
  CHECK(std::abs(m.totals.n_los_olos - m.totals.n_olos_los) <= 1);
}

TEST_CASE("intensity estimates and the fleet summary") {
  IntensityTotals t;
  t.n_los_olos = 2;
  t.d_los = 1000.0;
  t.n_olos_los = 1;
  t.d_olos = 500.0;
  const IntensityEstimate e = intensity_from(t);
  REQUIRE(e.has_P);
  REQUIRE(e.has_p);
  CHECK(e.P == doctest::Approx(0.002));
  CHECK(e.p == doctest::Approx(0.002));

  const IntensityEstimate none = intensity_from(IntensityTotals{});
  CHECK_FALSE(none.has_P);
  CHECK_FALSE(none.has_p);

  // a vehicle with no OLOS travel contributes to mu_P only
  IntensityTotals only_los;
  only_los.n_los_olos = 4;
  only_los.d_los = 1000.0;
  const IntensitySummary s = summarize_intensities({t, only_los});
  CHECK(s.n_P == 2);
  CHECK(s.n_p == 1);
  CHECK(s.mu_P == doctest::Approx(0.5 * (0.002 + 0.004)));
  CHECK(s.mu_p == doctest::Approx(0.002));
}

TEST_CASE("distance profile: right-closed bins and LOS share") {
  DistanceProfile prof(25.0, 500.0);
  REQUIRE(prof.bins() == 20);
  CHECK(prof.bin_of(0.0) == 0);
  CHECK(prof.bin_of(0.4) == 0);
  CHECK(prof.bin_of(25.0) == 0);  // bin k covers (k*w, (k+1)*w]
  CHECK(prof.bin_of(25.0001) == 1);
  CHECK(prof.bin_of(50.0) == 1);
  CHECK(prof.bin_of(499.9) == 19);
  CHECK(prof.bin_of(500.0) == 19);
  CHECK(prof.bin_of(777.0) == 19);  // clamped
  CHECK(prof.bin_center(0) == doctest::Approx(12.5));
  CHECK(prof.bin_low(3) == doctest::Approx(75.0));
  CHECK(prof.bin_high(3) == doctest::Approx(100.0));

  for (int i = 0; i < 80; ++i) prof.add(30.0, LinkState::LOS);
  for (int i = 0; i < 20; ++i) prof.add(45.0, LinkState::OLOS);
  CHECK(prof.defined(1));
  CHECK_FALSE(prof.defined(2));
  CHECK(prof.pr_los(1) == doctest::Approx(0.8));
  CHECK(prof.pr_los(2) == 0.0);  // empty bin reports 0, guarded by defined()
}

TEST_CASE("empirical cdf is right-continuous") {
  EmpiricalCdf F({3.0, 1.0, 2.0});
  CHECK(F(0.0) == 0.0);
  CHECK(F(1.0) == doctest::Approx(1.0 / 3));
  CHECK(F(1.999) == doctest::Approx(1.0 / 3));
  CHECK(F(2.0) == doctest::Approx(2.0 / 3));
  CHECK(F(3.0) == 1.0);
  CHECK(F(99.0) == 1.0);
  CHECK(F.sorted().front() == 1.0);
  CHECK(F.sorted().back() == 3.0);
  CHECK_THROWS_AS(EmpiricalCdf(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("spearman correlation: monotone, tied and degenerate inputs") {
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
  // ties get averaged ranks: b-ranks {1.5, 1.5, 3.5, 3.5}
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {1, 1, 2, 2}) ==
        doctest::Approx(4.0 / std::sqrt(20.0)));
  CHECK(std::isnan(spearman_rank_correlation({1, 2, 3}, {5, 5, 5})));
  CHECK(std::isnan(spearman_rank_correlation({1, 2}, {1, 2, 3})));
}

namespace {

// hand-rolled three-vehicle tick: states/dists filled symmetrically
LinkMatrix tick(LinkState s01, LinkState s02, LinkState s12, double d01, double d02, double d12) {
  LinkMatrix m;
  m.resize(3);
  auto put = [&m](int a, int b, LinkState s, double d) {
    m.state[static_cast<size_t>(a) * 3 + b] = static_cast<std::uint8_t>(s);
    m.state[static_cast<size_t>(b) * 3 + a] = static_cast<std::uint8_t>(s);
    const float fd = s == LinkState::OoR ? -1.0f : static_cast<float>(d);
    m.dist[static_cast<size_t>(a) * 3 + b] = fd;
    m.dist[static_cast<size_t>(b) * 3 + a] = fd;
  };
  put(0, 1, s01, d01);
  put(0, 2, s02, d02);
  put(1, 2, s12, d12);
  return m;
}

}  // namespace

TEST_CASE("pair state tracker: pooled totals, designated-tx intervals, profile") {
  const std::vector<double> moved{10.0, 20.0, 30.0};
  PairStateTracker trk(3, /*designated_tx=*/1, DistanceProfile(25.0, 500.0));

  trk.update(tick(LinkState::LOS, LinkState::OLOS, LinkState::OoR, 30, 60, 110), moved, 1);
  trk.update(tick(LinkState::OLOS, LinkState::OLOS, LinkState::LOS, 30, 60, 110), moved, 1);
  trk.update(tick(LinkState::LOS, LinkState::OoR, LinkState::LOS, 30, 60, 110), moved, 1);
  trk.finalize();
  trk.finalize();  // idempotent: intervals must not double up

  // receiver 0 pools its tx=1 machine (flip out and back) and its tx=2
  // machine (two obstructed seconds, then a silent range exit)
  const IntensityTotals& r0 = trk.pooled()[0];
  CHECK(r0.n_los_olos == 1);
  CHECK(r0.n_olos_los == 1);
  CHECK(r0.d_los == doctest::Approx(10.0));
  CHECK(r0.d_olos == doctest::Approx(30.0));

  const IntensityTotals& r1 = trk.pooled()[1];
  CHECK(r1.n_los_olos == 1);
  CHECK(r1.n_olos_los == 1);
  CHECK(r1.d_los == doctest::Approx(40.0));
  CHECK(r1.d_olos == doctest::Approx(20.0));

  // designated-tx view of receiver 0 equals its tx=1 machine alone
  const IntensityTotals& w0 = trk.wrt_tx()[0];
  CHECK(w0.n_los_olos == 1);
  CHECK(w0.n_olos_los == 1);
  CHECK(w0.d_los == doctest::Approx(10.0));
  CHECK(w0.d_olos == doctest::Approx(10.0));

  CHECK(trk.vehicle_distance()[0] == doctest::Approx(30.0));
  CHECK(trk.vehicle_distance()[2] == doctest::Approx(90.0));

  // closed LOS intervals wrt tx 1: rx0 closes 10 then ends holding a fresh
  // zero-length run; rx2 accrues its final LOS second and is flushed
  REQUIRE(trk.los_intervals().size() == 3);
  CHECK(trk.los_intervals()[0] == doctest::Approx(10.0));
  CHECK(trk.los_intervals()[1] == doctest::Approx(0.0));
  CHECK(trk.los_intervals()[2] == doctest::Approx(30.0));
  REQUIRE(trk.olos_intervals().size() == 1);
  CHECK(trk.olos_intervals()[0] == doctest::Approx(10.0));

  // profile counts ordered pairs: bin (25,50] saw LOS twice per direction in
  // ticks 1 and 3 and OLOS twice in tick 2
  const DistanceProfile& prof = trk.profile();
  CHECK(prof.n_los[prof.bin_of(30)] == 4);
  CHECK(prof.n_olos[prof.bin_of(30)] == 2);
  CHECK(prof.pr_los(prof.bin_of(30)) == doctest::Approx(2.0 / 3));
  CHECK(prof.n_olos[prof.bin_of(60)] == 4);
  CHECK(prof.n_los[prof.bin_of(60)] == 0);
  CHECK(prof.n_los[prof.bin_of(110)] == 4);
}

TEST_CASE("pair state tracker: thread count does not change the result") {
  std::mt19937_64 eng(11);
  auto unit = [&eng]() { return (eng() >> 11) * 0x1.0p-53; };
  auto any_state = [&unit]() {
    const double u = unit();
    return u < 0.4 ? LinkState::LOS : (u < 0.8 ? LinkState::OLOS : LinkState::OoR);
  };

  PairStateTracker one(3, 0, DistanceProfile(25.0, 500.0));
  PairStateTracker four(3, 0, DistanceProfile(25.0, 500.0));
  const std::vector<double> moved{12.0, 14.0, 16.0};
  for (int i = 0; i < 300; ++i) {
    const LinkMatrix m = tick(any_state(), any_state(), any_state(), 40 + 400 * unit(),
                              40 + 400 * unit(), 40 + 400 * unit());
    one.update(m, moved, 1);
    four.update(m, moved, 4);
  }
  one.finalize();
  four.finalize();
  for (int rx = 0; rx < 3; ++rx) {
    CHECK(one.pooled()[rx].n_los_olos == four.pooled()[rx].n_los_olos);
    CHECK(one.pooled()[rx].n_olos_los == four.pooled()[rx].n_olos_los);
    CHECK(one.pooled()[rx].d_los == four.pooled()[rx].d_los);
    CHECK(one.pooled()[rx].d_olos == four.pooled()[rx].d_olos);
  }
  CHECK(one.los_intervals() == four.los_intervals());
  CHECK(one.olos_intervals() == four.olos_intervals());
}
