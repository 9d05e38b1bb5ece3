#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dysarthria/error.hpp"
#include "dysarthria/random.hpp"
#include "dysarthria/signal.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dysarthria;
using testing::english;
using testing::sine;
using testing::sine_clip;

namespace {

double median(std::vector<double> v) {
  REQUIRE_FALSE(v.empty());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_between(const PitchContour& c, double from, double to) {
  std::vector<double> v;
  for (const auto& f : c.frames()) {
    if (f.f0 && f.time >= from && f.time < to) v.push_back(*f.f0);
  }
  return median(v);
}

std::vector<Segment> silent_only(const std::vector<Segment>& segments) {
  std::vector<Segment> out;
  for (const auto& s : segments) {
    if (s.silent) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("pitch tracking recovers synthetic F0") {
  CHECK(median(pitch_track(sine_clip(200.0, 1.0)).voiced_f0()) == doctest::Approx(200.0).epsilon(0.005));

  SUBCASE("silence is unvoiced") {
    const auto c = pitch_track(AudioClip(std::vector<double>(16000, 0.0), 16000));
    CHECK_FALSE(c.frames().empty());
    CHECK(c.voiced_count() == 0);
  }
  SUBCASE("a step from 150 to 300 Hz") {
    auto x = sine(150.0, 1.0);
    const auto y = sine(300.0, 1.0);
    x.insert(x.end(), y.begin(), y.end());
    const auto c = pitch_track(AudioClip(x, 16000));
    CHECK(std::abs(median_between(c, 0.0, 1.0) - 150.0) <= 2.0);
    CHECK(std::abs(median_between(c, 1.0, 2.0) - 300.0) <= 2.0);
  }
  SUBCASE("within 1% over 80-400 Hz for sines and harmonic vowels") {
    for (double f0 = 80.0; f0 <= 400.0; f0 += 10.0) {
      CAPTURE(f0);
      CHECK(std::abs(median(pitch_track(sine_clip(f0, 0.6)).voiced_f0()) - f0) <= 0.01 * f0);
      const auto vowel = testing::harmonic_vowel(f0, {{600.0, 80.0}, {1400.0, 100.0}}, 0.6);
      CHECK(std::abs(median(pitch_track(vowel).voiced_f0()) - f0) <= 0.01 * f0);
    }
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(pitch_track(sine_clip(200.0, 0.03)), Error);
    try {
      pitch_track(sine_clip(200.0, 0.03));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ClipTooShort);
    }
  }
}

TEST_CASE("glottal pulses") {
  SUBCASE("resonated 100 Hz impulse train") {
    const auto clip = testing::impulse_vowel(100.0, {{500.0, 80.0}, {1500.0, 100.0}}, 1.0);
    const auto pulses = detect_pulses(clip, pitch_track(clip));
    REQUIRE(pulses.size() > 50);
    for (std::size_t i = 1; i < pulses.size(); ++i) CHECK(pulses.times[i] > pulses.times[i - 1]);
    for (double p : pulses.periods()) CHECK(std::abs(p - 0.010) <= 0.0005);
  }
  SUBCASE("silence gives no pulses") {
    const AudioClip clip(std::vector<double>(16000, 0.0), 16000);
    CHECK(detect_pulses(clip, pitch_track(clip)).empty());
  }
  SUBCASE("one pulse per cycle of a 200 Hz sine") {
    const auto clip = sine_clip(200.0, 1.0);
    const auto n = static_cast<double>(detect_pulses(clip, pitch_track(clip)).size());
    CHECK(std::abs(n - 200.0) <= 2.0);
  }
  SUBCASE("no pulses inside an unvoiced stretch") {
    auto x = sine(150.0, 0.5);
    x.resize(x.size() + 8000, 0.0);
    const auto y = sine(150.0, 0.5);
    x.insert(x.end(), y.begin(), y.end());
    const AudioClip clip(x, 16000);
    const auto contour = pitch_track(clip);
    for (double t : detect_pulses(clip, contour).times) CHECK((t < 0.52 || t > 0.98));
  }
  SUBCASE("stationary signals have steady periods") {
    for (double f0 : {90.0, 130.0, 200.0, 280.0}) {
      CAPTURE(f0);
      for (const auto& clip : {sine_clip(f0, 0.8), testing::impulse_vowel(f0, {{700.0, 90.0}, {1200.0, 110.0}}, 0.8)}) {
        const auto periods = detect_pulses(clip, pitch_track(clip)).periods();
        REQUIRE(periods.size() > 10);
        CHECK(oracle::population_std(periods) / oracle::mean(periods) < 0.02);
      }
    }
  }
}

TEST_CASE("intensity contour") {
  auto all_near = [](const IntensityContour& c, double db, double tol) {
    REQUIRE_FALSE(c.frames.empty());
    for (const auto& f : c.frames) {
      if (std::abs(f.db - db) > tol) return false;
    }
    return true;
  };
  CHECK(all_near(intensity_contour(sine_clip(250.0, 1.0)), 100.0, 0.1));
  CHECK(all_near(intensity_contour(sine_clip(250.0, 1.0, 16000, 0.5)), 100.0 - 6.02, 0.1));
  const auto zero = intensity_contour(AudioClip(std::vector<double>(8000, 0.0), 16000));
  CHECK(all_near(zero, zero.floor_db, 0.0));

  SUBCASE("20 dB of gain shifts every frame above the floor by 20 dB") {
    Rng rng(5);
    std::vector<double> x(16000);
    double env = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      env = 0.999 * env + 0.001 * rng.uniform(0.0, 0.08);
      x[i] = env * rng.normal();
    }
    std::vector<double> loud = x;
    for (double& v : loud) v *= 10.0;
    const auto a = intensity_contour(AudioClip(x, 16000));
    const auto b = intensity_contour(AudioClip(loud, 16000));
    REQUIRE(a.frames.size() == b.frames.size());
    int compared = 0;
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
      if (a.frames[i].db <= a.floor_db) continue;
      CHECK(std::abs(b.frames[i].db - a.frames[i].db - 20.0) <= 0.05);
      ++compared;
    }
    CHECK(compared > 50);
  }
}

TEST_CASE("formant estimation") {
  auto at_middle = [](const AudioClip& clip) { return estimate_formants(clip, clip.duration() / 2.0); };

  for (double f0 : {100.0, 130.0, 150.0}) {
    CAPTURE(f0);
    const auto a = at_middle(testing::impulse_vowel(f0, {{500.0, 80.0}, {1500.0, 100.0}}));
    CHECK(std::abs(a.f1 - 500.0) <= 50.0);
    CHECK(std::abs(a.f2 - 1500.0) <= 75.0);

    const auto i = at_middle(testing::impulse_vowel(f0, {{300.0, 70.0}, {2300.0, 120.0}}));
    CHECK(std::abs(i.f1 - 300.0) <= 50.0);
    CHECK(std::abs(i.f2 - 2300.0) <= 100.0);
  }

  SUBCASE("amplitude does not matter") {
    const auto clip = testing::impulse_vowel(140.0, {{650.0, 90.0}, {1100.0, 100.0}});
    for (double gain : {0.01, 0.3, 1.2}) {
      std::vector<double> x(clip.samples().begin(), clip.samples().end());
      for (double& v : x) v *= gain;
      const auto scaled = at_middle(AudioClip(x, clip.sample_rate()));
      const auto base = at_middle(clip);
      CHECK(std::abs(scaled.f1 - base.f1) <= 1.0);
      CHECK(std::abs(scaled.f2 - base.f2) <= 1.0);
    }
  }
  SUBCASE("white noise does not crash") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      std::vector<double> x(8000);
      for (double& v : x) v = rng.uniform(-0.5, 0.5);
      try {
        const auto f = at_middle(AudioClip(x, 16000));
        CHECK(f.f1 > 0.0);
        CHECK(f.f2 > f.f1);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoFormantsFound);
      }
    }
  }
  SUBCASE("window must lie inside the clip") {
    const auto clip = testing::impulse_vowel(120.0, {{500.0, 80.0}, {1500.0, 100.0}});
    CHECK_THROWS_AS(estimate_formants(clip, 0.001), Error);
  }
}

TEST_CASE("silence segmentation") {
  const auto& p = english();

  SUBCASE("from a tier, verbatim") {
    const AnnotationTier tier({{0.0, 0.2, "AA"}, {0.2, 0.5, "sil"}, {0.5, 0.9, "K"}});
    const auto silent = silent_only(segment_silence(sine_clip(200.0, 0.9), &tier, p));
    REQUIRE(silent.size() == 1);
    CHECK(silent[0] == Segment{0.2, 0.5, true});
  }
  SUBCASE("touching silence labels merge, speech never counts") {
    const AnnotationTier tier({{0.0, 0.1, "sil"}, {0.1, 0.3, "sp"}, {0.3, 0.6, "IY"}});
    const auto silent = silent_only(silence_from_tier(tier, p));
    REQUIRE(silent.size() == 1);
    CHECK(silent[0] == Segment{0.0, 0.3, true});
  }
  SUBCASE("all-speech tier") {
    const AnnotationTier tier({{0.0, 0.3, "AA"}, {0.3, 0.6, "K"}});
    CHECK(silent_only(segment_silence(sine_clip(200.0, 0.6), &tier, p)).empty());
  }
  SUBCASE("energy fallback finds a zeroed gap") {
    auto x = sine(220.0, 0.5);
    x.resize(x.size() + 3200, 0.0);
    const auto y = sine(220.0, 0.5);
    x.insert(x.end(), y.begin(), y.end());
    const auto silent = silent_only(segment_silence(AudioClip(x, 16000), nullptr, p));
    REQUIRE(silent.size() == 1);
    CHECK(std::abs(silent[0].start - 0.5) <= 0.010);
    CHECK(std::abs(silent[0].end - 0.7) <= 0.010);
  }
  SUBCASE("segments tile the clip") {
    auto x = sine(180.0, 0.3);
    x.resize(x.size() + 4000, 0.0);
    const AudioClip clip(x, 16000);
    const auto segments = segment_silence(clip, nullptr, p);
    REQUIRE_FALSE(segments.empty());
    for (std::size_t k = 1; k < segments.size(); ++k) CHECK(segments[k].start >= segments[k - 1].end - 1e-12);
  }
}
