#include <doctest.h>

#include <cmath>

#include "dysarthria/error.hpp"
#include "dysarthria/fixtures.hpp"
#include "dysarthria/random.hpp"
#include "dysarthria/voice_quality.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dysarthria;
using testing::english;

namespace {

std::vector<double> ms(std::initializer_list<double> v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x / 1000.0);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

SynthResult sustained(double f0, double jitter, double shimmer, std::optional<double> hnr_db, std::uint64_t seed,
                      double seconds = 1.0) {
  SynthSpec spec;
  spec.f0_start = f0;
  spec.f0_end = f0;
  spec.jitter_pct = jitter;
  spec.shimmer_pct = shimmer;
  spec.hnr_db = hnr_db;
  spec.plan = {{"AA", seconds}};
  spec.seed = seed;
  return synthesize(spec, english());
}

VoiceQualityFeatures measure(const AudioClip& clip) {
  const auto contour = pitch_track(clip);
  return voice_quality_features(clip, contour, detect_pulses(clip, contour));
}

}  // namespace

TEST_CASE("perturbation measures on worked examples") {
  CHECK(jitter_local(ms({10, 10, 10, 10})) == 0.0);
  CHECK(jitter_local(ms({10, 11, 10, 11})) == doctest::Approx(9.5238).epsilon(1e-5));
  CHECK(shimmer_local(std::vector{1.0, 0.8, 1.0, 0.8}) == doctest::Approx(22.2222).epsilon(1e-5));
  CHECK(ppq(ms({10, 10, 10, 10, 10})) == 0.0);
  CHECK(apq(std::vector{0.5, 0.5, 0.5, 0.5, 0.5, 0.5}) == 0.0);
  CHECK(shimmer_local(std::vector{0.5, 0.5, 0.5}) == 0.0);

  const auto alternating = ms({10, 12, 10, 12, 10});
  CHECK(ppq(alternating) == doctest::Approx(oracle::quotient5(alternating)).epsilon(1e-12));

  std::vector<double> ramp;
  for (int k = 0; k <= 10; ++k) ramp.push_back((10.0 + 0.1 * k) / 1000.0);
  CHECK(ppq(ramp) < jitter_local(ramp));
  CHECK(ppq(ramp) == doctest::Approx(oracle::quotient5(ramp)).epsilon(1e-12));

  CHECK(code_of([] { jitter_local(std::vector{0.01}); }) == ErrorCode::TooFewPeriods);
  CHECK(code_of([] { ppq(std::vector{0.01, 0.01, 0.01, 0.01}); }) == ErrorCode::TooFewPeriods);
}

TEST_CASE("perturbation properties on random sequences") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(5 + rng.index(40));
    for (double& x : v) x = rng.uniform(0.004, 0.012);
    const double j = jitter_local(v);
    const double q = ppq(v);
    CHECK(j == doctest::Approx(oracle::local_perturbation(v)).epsilon(1e-12));
    CHECK(q == doctest::Approx(oracle::quotient5(v)).epsilon(1e-12));
    CHECK(j >= 0.0);
    CHECK(q >= 0.0);

    const double scale = rng.uniform(0.1, 50.0);
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= scale;
    CHECK(jitter_local(scaled) == doctest::Approx(j).epsilon(1e-12));
    CHECK(ppq(scaled) == doctest::Approx(q).epsilon(1e-12));
    CHECK(shimmer_local(scaled) == doctest::Approx(shimmer_local(v)).epsilon(1e-12));
    CHECK(apq(scaled) == doctest::Approx(apq(v)).epsilon(1e-12));
  }
  SUBCASE("zero only for constant sequences") {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> v(2 + rng.index(10), rng.uniform(0.1, 1.0));
      CHECK(jitter_local(v) == 0.0);
      CHECK(shimmer_local(v) == 0.0);
      v[rng.index(v.size())] *= 1.01;
      CHECK(jitter_local(v) > 0.0);
      CHECK(shimmer_local(v) > 0.0);
    }
  }
  SUBCASE("differences never cross run boundaries") {
    const std::vector<std::vector<double>> runs{{0.010, 0.011, 0.010}, {0.005, 0.005, 0.005, 0.005}};
    const double diff = (0.001 + 0.001) / 5.0;
    const double mean_all = (0.031 + 0.020) / 7.0;
    CHECK(relative_perturbation(runs) == doctest::Approx(100.0 * diff / mean_all).epsilon(1e-12));
  }
}

TEST_CASE("harmonics-to-noise ratio") {
  CHECK(hnr_from_correlation(0.99) == doctest::Approx(19.956).epsilon(1e-4));
  CHECK(hnr_from_correlation(0.5) == doctest::Approx(0.0));
  CHECK(std::isfinite(hnr_from_correlation(1.0)));
  CHECK(std::isfinite(hnr_from_correlation(0.0)));

  const AudioClip silence(std::vector<double>(8000, 0.0), 16000);
  CHECK(code_of([&] { hnr(silence, pitch_track(silence)); }) == ErrorCode::NoVoicedFrames);

  SUBCASE("programmed noise levels") {
    for (double target : {10.0, 20.0, 30.0}) {
      CAPTURE(target);
      const auto synth = sustained(100.0, 0.0, 0.0, target, 17);
      const auto contour = pitch_track(synth.clip);
      CHECK(std::abs(hnr(synth.clip, contour) - target) <= 1.5);
    }
  }
}

TEST_CASE("voice breaks") {
  auto train = [](std::vector<double> times) {
    PulseTrain p;
    p.times = std::move(times);
    p.amplitudes.assign(p.times.size(), 1.0);
    return p;
  };
  const auto regular = voice_breaks(train({0.00, 0.01, 0.02, 0.03, 0.04}), 0.1);
  CHECK(regular.count == 0);
  CHECK(regular.degree == 0.0);

  const auto gaps = voice_breaks(train({0.000, 0.014, 0.034, 0.048}), 0.1);
  CHECK(gaps.count == 1);
  CHECK(gaps.degree == doctest::Approx(20.0));

  CHECK(voice_breaks(train({}), 1.0).count == 0);
  CHECK(voice_breaks(train({0.3}), 1.0).degree == 0.0);

  SUBCASE("threshold is 1.25/70 s exactly") {
    const double t = 1.25 / 70.0;
    CHECK(voice_breaks(train({0.0, t}), 1.0).count == 0);
    CHECK(voice_breaks(train({0.0, std::nextafter(t, 1.0)}), 1.0).count == 1);
  }
  SUBCASE("degree stays within [0, 100] and is zero without breaks") {
    Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> times;
      double t = 0.0;
      for (std::size_t k = 0; k < 2 + rng.index(30); ++k) {
        times.push_back(t);
        t += rng.bernoulli(0.2) ? rng.uniform(0.018, 0.2) : rng.uniform(0.003, 0.017);
      }
      const auto b = voice_breaks(train(times), times.back() + rng.uniform(0.0, 0.1));
      CHECK(b.degree >= 0.0);
      CHECK(b.degree <= 100.0);
      if (b.count == 0) CHECK(b.degree == 0.0);
    }
  }
}

TEST_CASE("recovery from synthetic sustained vowels") {
  SUBCASE("programmed jitter against the generated period list") {
    for (double target : {1.0, 2.0, 5.0}) {
      CAPTURE(target);
      const auto synth = sustained(100.0, target, 0.0, std::nullopt, 9);
      REQUIRE(synth.periods.size() == 1);
      const double truth = oracle::local_perturbation(synth.periods[0]);
      const auto measured = measure(synth.clip);
      REQUIRE(measured.jitter_local.has_value());
      CHECK(std::abs(*measured.jitter_local - truth) <= 0.3);
    }
  }
  SUBCASE("clean synthesis") {
    const auto measured = measure(sustained(120.0, 0.0, 0.0, std::nullopt, 2).clip);
    REQUIRE(measured.jitter_local.has_value());
    CHECK(*measured.jitter_local < 0.2);
    CHECK(*measured.hnr > 30.0);
    CHECK(measured.num_voice_breaks == 0);
  }
  SUBCASE("shimmer follows the programmed amplitude list") {
    for (double target : {3.0, 6.0}) {
      CAPTURE(target);
      const auto synth = sustained(100.0, 0.0, target, std::nullopt, 5);
      const double truth = oracle::local_perturbation(synth.amplitudes[0]);
      const auto measured = measure(synth.clip);
      REQUIRE(measured.shimmer_local.has_value());
      CHECK(std::abs(*measured.shimmer_local - truth) <= 0.25 * truth);
    }
  }
}
