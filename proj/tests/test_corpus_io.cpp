#include <doctest.h>

#include <cstdint>
#include <cstring>

#include "dysarthria/annotation.hpp"
#include "dysarthria/audio.hpp"
#include "dysarthria/error.hpp"
#include "dysarthria/manifest.hpp"
#include "dysarthria/profile.hpp"
#include "dysarthria/random.hpp"
#include "support.hpp"

using namespace dysarthria;
using testing::english;

namespace {

// Minimal RIFF writer, kept separate from the library's.
std::string riff(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                 const std::string& payload) {
  auto u16 = [](std::uint16_t v) { return std::string{static_cast<char>(v & 0xff), static_cast<char>(v >> 8)}; };
  auto u32 = [](std::uint32_t v) {
    std::string s(4, '\0');
    for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    return s;
  };
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  std::string fmt = "fmt " + u32(16) + u16(format) + u16(channels) + u32(rate) + u32(rate * block) + u16(block) + u16(bits);
  std::string data = "data" + u32(static_cast<std::uint32_t>(payload.size())) + payload;
  return "RIFF" + u32(static_cast<std::uint32_t>(4 + fmt.size() + data.size())) + "WAVE" + fmt + data;
}

std::string pcm16(const std::vector<std::int16_t>& v) {
  std::string s;
  for (auto x : v) {
    const auto u = static_cast<std::uint16_t>(x);
    s += static_cast<char>(u & 0xff);
    s += static_cast<char>(u >> 8);
  }
  return s;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("audio clip invariants") {
  AudioClip clip(std::vector<double>(8000, 0.0), 16000);
  CHECK(clip.duration() == doctest::Approx(0.5));
  CHECK(code_of([] { AudioClip(std::vector<double>(10, 0.0), 4000); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { AudioClip({0.0, std::nan("")}, 16000); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("read_wav rescales, downmixes and rejects bad files") {
  testing::TempDir dir;

  SUBCASE("one second of silence") {
    testing::write_text(dir / "zero.wav", riff(1, 1, 16000, 16, pcm16(std::vector<std::int16_t>(16000, 0))));
    const auto clip = read_wav(dir / "zero.wav");
    CHECK(clip.size() == 16000);
    CHECK(clip.sample_rate() == 16000);
    for (double s : clip.samples()) CHECK(s == 0.0);
  }
  SUBCASE("16-bit full scale") {
    testing::write_text(dir / "max.wav", riff(1, 1, 16000, 16, pcm16({32767, -32768, 0})));
    const auto clip = read_wav(dir / "max.wav");
    CHECK(clip[0] == 32767.0 / 32768.0);
    CHECK(clip[1] == -1.0);
  }
  SUBCASE("stereo x and -x averages to zero") {
    std::vector<std::int16_t> frames;
    for (int i = 0; i < 100; ++i) {
      frames.push_back(static_cast<std::int16_t>(i * 100));
      frames.push_back(static_cast<std::int16_t>(-i * 100));
    }
    testing::write_text(dir / "st.wav", riff(1, 2, 16000, 16, pcm16(frames)));
    const auto clip = read_wav(dir / "st.wav");
    CHECK(clip.size() == 100);
    for (double s : clip.samples()) CHECK(s == 0.0);
  }
  SUBCASE("32-bit float round trip is bit exact") {
    Rng rng(3);
    std::vector<double> x(500);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    write_wav(dir / "f.wav", AudioClip(x, 22050));
    const auto a = read_wav(dir / "f.wav");
    const auto b = read_wav(dir / "f.wav");
    CHECK(a.sample_rate() == 22050);
    REQUIRE(a.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(a[i] == x[i]);
      CHECK(a[i] == b[i]);
    }
  }
  SUBCASE("errors") {
    testing::write_text(dir / "short.wav", "RIFF");
    CHECK(code_of([&] { read_wav(dir / "short.wav"); }) == ErrorCode::TruncatedFile);
    testing::write_text(dir / "text.wav", "this is not a wave file at all");
    CHECK(code_of([&] { read_wav(dir / "text.wav"); }) == ErrorCode::UnsupportedFormat);
    testing::write_text(dir / "b8.wav", riff(1, 1, 16000, 8, std::string(10, '\x80')));
    CHECK(code_of([&] { read_wav(dir / "b8.wav"); }) == ErrorCode::UnsupportedFormat);
    auto cut = riff(1, 1, 16000, 16, pcm16(std::vector<std::int16_t>(100, 1)));
    cut.resize(cut.size() - 51);
    testing::write_text(dir / "cut.wav", cut);
    CHECK(code_of([&] { read_wav(dir / "cut.wav"); }) == ErrorCode::TruncatedFile);
  }
}

TEST_CASE("language profiles") {
  for (const char* lang : {"english", "korean", "tamil"}) {
    CAPTURE(lang);
    const auto p = load_profile(testing::profile_path(lang));
    for (auto role : {CornerVowel::I, CornerVowel::A, CornerVowel::U}) CHECK(p.corner_symbol(role).has_value());
    for (const auto& v : p.vowels()) {
      CHECK(p.consonants().count(v) == 0);
      CHECK(p.silences().count(v) == 0);
    }
    for (const auto& n : p.nuclei()) CHECK(p.vowels().count(n) == 1);
  }
  const auto& p = english();
  CHECK(p.classify("AA") == PhoneClass::Vowel);
  CHECK(p.classify("K") == PhoneClass::Consonant);
  CHECK(p.classify("sil") == PhoneClass::Silence);
  CHECK(p.classify("XX") == PhoneClass::Unknown);
  CHECK(p.normalize("AA1") == "AA");
  CHECK(p.normalize("") == p.silence_symbol());

  CHECK(code_of([] { parse_profile(R"({"name":"x","vowels":["a","i","u"],"consonants":["a"],"silences":["sil"],
      "corner_vowels":{"i":"i","a":"a","u":"u"},"nuclei":["a"]})"); }) == ErrorCode::InvalidProfile);
  CHECK(code_of([] { parse_profile(R"({"name":"x","vowels":["a","i"],"consonants":["k"],"silences":["sil"],
      "corner_vowels":{"i":"i","a":"a"},"nuclei":["a"]})"); }) == ErrorCode::InvalidProfile);
  CHECK(code_of([] { parse_profile(R"({"name":"x","vowels":["a","i","u"],"consonants":["k"],"silences":["sil"],
      "corner_vowels":{"i":"i","a":"a","u":"u"},"nuclei":["k"]})"); }) == ErrorCode::InvalidProfile);
}

TEST_CASE("manifest parsing") {
  const auto& p = english();
  const std::string good =
      R"({"utt_id":"u1","speaker_id":"s1","severity":"severe","audio":"a.wav","annotation":"a.txt","canonical":"HH IY","decoded":"SH IY"})";

  CHECK(parse_manifest_text("", p).empty());
  const auto one = parse_manifest_text(good + "\n", p, "/data");
  REQUIRE(one.size() == 1);
  CHECK(one[0].severity == Severity::Severe);
  CHECK(one[0].canonical == std::vector<std::string>{"HH", "IY"});
  CHECK(one[0].decoded == std::vector<std::string>{"SH", "IY"});
  CHECK(one[0].audio_path == std::filesystem::path("/data/a.wav"));

  auto replace = [&](const std::string& from, const std::string& to) {
    auto s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  auto line_error = [&](const std::string& text) {
    try {
      parse_manifest_text(text, p);
    } catch (const LineError& e) {
      return std::pair{e.code(), e.line()};
    }
    return std::pair{ErrorCode::InvalidArgument, std::size_t{0}};
  };
  CHECK(line_error(good + "\n" + replace("severe", "profound")) == std::pair{ErrorCode::UnknownSeverity, std::size_t{2}});
  CHECK(line_error(replace("HH IY", "HH QQ")) == std::pair{ErrorCode::UnknownPhoneme, std::size_t{1}});
  CHECK(line_error("{not json") == std::pair{ErrorCode::MalformedRecord, std::size_t{1}});
  CHECK(line_error(replace(R"("speaker_id":"s1",)", "")).first == ErrorCode::MalformedRecord);
  CHECK(line_error(replace(R"("canonical":"HH IY")", R"("canonical":"")")).first == ErrorCode::MalformedRecord);

  SUBCASE("every line is accounted for") {
    const std::string text = good + "\n\n" + replace("severe", "profound") + "\n" + replace("u1", "u2") + "\n{bad\n";
    const auto entries = parse_manifest_entries(text, p);
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].ok());
    CHECK(entries[0].line == 1);
    CHECK_FALSE(entries[1].ok());
    CHECK(entries[1].line == 3);
    CHECK(entries[2].ok());
    CHECK_FALSE(entries[3].ok());
    CHECK(entries[3].line == 5);
  }
  SUBCASE("record serialization round trips") {
    const auto back = parse_manifest_text(to_manifest_line(one[0]), p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].utterance_id == one[0].utterance_id);
    CHECK(back[0].canonical == one[0].canonical);
    CHECK(back[0].decoded == one[0].decoded);
    CHECK(back[0].severity == one[0].severity);
  }
}

TEST_CASE("annotation tiers") {
  const auto& p = english();
  const auto tier = parse_annotation_text("0.0 0.5 sil\n0.5 0.8 AA\n", p);
  REQUIRE(tier.size() == 2);
  CHECK(tier.intervals()[1] == Interval{0.5, 0.8, "AA"});

  auto code = [&](const std::string& text) { return code_of([&] { parse_annotation_text(text, p); }); };
  CHECK(code("0 1 AA\n0.5 1.5 K\n") == ErrorCode::OverlappingIntervals);
  CHECK(code("0.5 1 AA\n0 0.5 K\n") == ErrorCode::UnorderedIntervals);
  CHECK(code("0 1 ZZZ\n") == ErrorCode::UnknownLabel);
  CHECK(code("0 x AA\n") == ErrorCode::UnsupportedFormat);
  CHECK(code("0 1 AA K\n") == ErrorCode::UnsupportedFormat);
  CHECK(parse_annotation_text("0 1\n", p).intervals()[0].label == p.silence_symbol());

  SUBCASE("both formats round trip") {
    Rng rng(11);
    const std::vector<std::string> labels{"sil", "AA", "K", "IY", "S", "UW"};
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Interval> iv;
      double t = rng.uniform(0.0, 0.2);
      const auto n = 1 + rng.index(12);
      for (std::size_t k = 0; k < n; ++k) {
        const double d = std::round(rng.uniform(0.01, 0.3) * 1000.0) / 1000.0;
        if (rng.bernoulli(0.2)) t += 0.05;
        iv.push_back({t, t + d, labels[rng.index(labels.size())]});
        t += d;
      }
      const AnnotationTier original(iv);
      CHECK(parse_annotation_text(to_plain_tier(original), p) == original);
      CHECK(parse_annotation_text(to_textgrid(original), p) == original);
    }
  }
  SUBCASE("short-form TextGrid gives the same tier as the plain form") {
    const std::string short_form =
        "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n0.8\n<exists>\n1\n\"IntervalTier\"\n\"phones\"\n"
        "0\n0.8\n2\n0\n0.5\n\"sil\"\n0.5\n0.8\n\"AA\"\n";
    CHECK(parse_annotation_text(short_form, p) == tier);
  }
}
