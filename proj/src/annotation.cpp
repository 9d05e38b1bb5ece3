#include "dysarthria/annotation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dysarthria/error.hpp"

namespace dysarthria {

namespace {

constexpr double kTouchTolerance = 1e-9;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw LineError(ErrorCode::UnsupportedFormat, line, "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

std::string normalize_label(const LanguageProfile& profile, std::string_view raw, std::size_t line) {
  auto symbol = profile.normalize(raw);
  if (!symbol) throw LineError(ErrorCode::UnknownLabel, line, "label '" + std::string(raw) + "'");
  return *symbol;
}

AnnotationTier parse_plain(std::string_view text, const LanguageProfile& profile) {
  std::vector<Interval> intervals;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::istringstream fields{std::string(line)};
    std::string start, end, label, extra;
    if (!(fields >> start >> end)) {
      throw LineError(ErrorCode::UnsupportedFormat, line_no, "expected '<start> <end> <label>'");
    }
    fields >> label;
    if (fields >> extra) throw LineError(ErrorCode::UnsupportedFormat, line_no, "unexpected trailing field");
    intervals.push_back({parse_number(start, line_no), parse_number(end, line_no),
                         normalize_label(profile, label, line_no)});
  }
  return AnnotationTier(std::move(intervals));
}

struct Value {
  std::string text;
  bool quoted = false;
  std::size_t line = 0;
};

std::string unquote(std::string_view s, std::size_t line) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    throw LineError(ErrorCode::UnsupportedFormat, line, "unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    out.push_back(s[i]);
    if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') ++i;
  }
  return out;
}

// Flattens long- and short-form TextGrids into the same value sequence.
std::vector<Value> textgrid_values(std::string_view text) {
  std::vector<Value> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.find("<exists>") != std::string_view::npos) {
      values.push_back({"<exists>", false, line_no});
      continue;
    }
    if (line.front() != '"') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        if (line.back() == ':') continue;
      } else {
        line = trim(line.substr(eq + 1));
      }
    }
    if (!line.empty() && line.front() == '"') {
      values.push_back({unquote(line, line_no), true, line_no});
    } else {
      values.push_back({std::string(line), false, line_no});
    }
  }
  return values;
}

AnnotationTier parse_textgrid(std::string_view text, const LanguageProfile& profile) {
  const auto values = textgrid_values(text);
  std::size_t next = 0;
  auto take = [&](const char* what) -> const Value& {
    if (next >= values.size()) {
      throw Error(ErrorCode::TruncatedFile, std::string("TextGrid ended while reading ") + what);
    }
    return values[next++];
  };
  auto take_number = [&](const char* what) {
    const auto& v = take(what);
    return parse_number(v.text, v.line);
  };

  if (take("file type").text != "ooTextFile") throw Error(ErrorCode::UnsupportedFormat, "not an ooTextFile");
  if (take("object class").text != "TextGrid") throw Error(ErrorCode::UnsupportedFormat, "not a TextGrid");
  take_number("xmin");
  take_number("xmax");
  if (take("tiers flag").text != "<exists>") throw Error(ErrorCode::UnsupportedFormat, "TextGrid has no tiers");
  const auto& tier_count = take("tier count");
  if (parse_number(tier_count.text, tier_count.line) != 1.0) {
    throw LineError(ErrorCode::UnsupportedFormat, tier_count.line, "only single-tier TextGrids are supported");
  }
  const auto& tier_class = take("tier class");
  if (tier_class.text != "IntervalTier") {
    throw LineError(ErrorCode::UnsupportedFormat, tier_class.line, "only interval tiers are supported");
  }
  take("tier name");
  take_number("tier xmin");
  take_number("tier xmax");
  const double count = take_number("interval count");
  if (count < 0 || count != std::floor(count)) throw Error(ErrorCode::UnsupportedFormat, "bad interval count");

  std::vector<Interval> intervals;
  intervals.reserve(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
    const double start = take_number("interval xmin");
    const double end = take_number("interval xmax");
    const auto& label = take("interval text");
    intervals.push_back({start, end, normalize_label(profile, label.text, label.line)});
  }
  return AnnotationTier(std::move(intervals));
}

}  // namespace

AnnotationTier::AnnotationTier(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (!(iv.start < iv.end) || iv.start < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("interval {} [{}, {}] must satisfy 0 <= start < end", i + 1, iv.start, iv.end));
    }
    if (i == 0) continue;
    const auto& prev = intervals_[i - 1];
    if (iv.start < prev.start) {
      throw Error(ErrorCode::UnorderedIntervals,
                  fmt::format("interval {} starts at {} before its predecessor at {}", i + 1, iv.start, prev.start));
    }
    if (iv.start < prev.end - kTouchTolerance) {
      throw Error(ErrorCode::OverlappingIntervals,
                  fmt::format("interval {} [{}, {}] overlaps [{}, {}]", i + 1, iv.start, iv.end, prev.start,
                              prev.end));
    }
  }
}

bool AnnotationTier::fits_within(double duration) const noexcept {
  return intervals_.empty() || (intervals_.front().start >= 0.0 && intervals_.back().end <= duration + 1e-4);
}

AnnotationTier parse_annotation_text(std::string_view text, const LanguageProfile& profile) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto head = trim(text.substr(0, text.find('\n')));
  if (head.rfind("File type", 0) == 0) return parse_textgrid(text, profile);
  return parse_plain(text, profile);
}

AnnotationTier parse_annotation(const std::filesystem::path& path, const LanguageProfile& profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open annotation " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_annotation_text(text.str(), profile);
}

std::string to_plain_tier(const AnnotationTier& tier) {
  std::string out;
  for (const auto& iv : tier.intervals()) out += fmt::format("{} {} {}\n", iv.start, iv.end, iv.label);
  return out;
}

std::string to_textgrid(const AnnotationTier& tier, std::string_view tier_name) {
  auto quote = [](std::string_view s) {
    std::string q = "\"";
    for (char c : s) {
      q.push_back(c);
      if (c == '"') q.push_back('"');
    }
    return q + "\"";
  };
  const double xmax = tier.end_time();
  std::string out = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
  out += fmt::format("xmin = 0\nxmax = {}\ntiers? <exists>\nsize = 1\nitem []:\n", xmax);
  out += fmt::format("    item [1]:\n        class = \"IntervalTier\"\n        name = {}\n", quote(tier_name));
  out += fmt::format("        xmin = 0\n        xmax = {}\n        intervals: size = {}\n", xmax, tier.size());
  std::size_t i = 1;
  for (const auto& iv : tier.intervals()) {
    out += fmt::format("        intervals [{}]:\n            xmin = {}\n            xmax = {}\n            text = {}\n",
                       i++, iv.start, iv.end, quote(iv.label));
  }
  return out;
}

}  // namespace dysarthria
