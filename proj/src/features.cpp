#include "dysarthria/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "dysarthria/error.hpp"

namespace dysarthria {

std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::VoiceQuality: return "voice quality";
    case Dimension::Pronunciation: return "pronunciation";
    case Dimension::Prosody: return "prosody";
  }
  return "?";
}

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatures.size(); ++i) {
    if (kFeatures[i].name == name) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
}

std::vector<std::string> all_feature_names() {
  std::vector<std::string> names;
  for (const auto& f : kFeatures) names.emplace_back(f.name);
  return names;
}

std::vector<std::string> FeatureMatrix::speakers() const {
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.speaker_id);
  return {ids.begin(), ids.end()};
}

namespace {

void check_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "identifier '" + s + "' contains a CSV delimiter");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::string to_csv(const FeatureMatrix& matrix) {
  std::string out = "utt_id,speaker_id,severity";
  for (const auto& f : kFeatures) {
    out += ',';
    out += f.name;
  }
  out += '\n';
  for (const auto& row : matrix.rows) {
    check_field(row.utterance_id);
    check_field(row.speaker_id);
    out += fmt::format("{},{},{}", row.utterance_id, row.speaker_id, to_string(row.severity));
    for (const auto& v : row.values) {
      out += ',';
      out += v ? fmt::format("{}", *v) : std::string("NA");
    }
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::MalformedRecord, "feature CSV has no header");

  const auto header = split_commas(lines.front());
  std::map<std::string_view, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  if (!column.count("severity")) throw Error(ErrorCode::MissingSeverity, "feature CSV has no severity column");
  for (const char* key : {"utt_id", "speaker_id"}) {
    if (!column.count(key)) throw Error(ErrorCode::MalformedRecord, std::string("missing column ") + key);
  }
  std::array<std::optional<std::size_t>, kFeatureCount> feature_column{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (auto it = column.find(kFeatures[f].name); it != column.end()) feature_column[f] = it->second;
  }

  FeatureMatrix matrix;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto cells = split_commas(lines[n]);
    if (cells.size() != header.size()) {
      throw LineError(ErrorCode::MalformedRecord, n + 1, "expected " + std::to_string(header.size()) + " cells");
    }
    FeatureRow row;
    row.utterance_id = std::string(cells[column["utt_id"]]);
    row.speaker_id = std::string(cells[column["speaker_id"]]);
    const auto severity = cells[column["severity"]];
    auto level = severity_from_string(severity);
    if (!level) throw LineError(ErrorCode::UnknownSeverity, n + 1, "severity '" + std::string(severity) + "'");
    row.severity = *level;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!feature_column[f]) continue;
      const auto cell = cells[*feature_column[f]];
      if (cell.empty() || cell == "NA") continue;
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw LineError(ErrorCode::MalformedRecord, n + 1, "bad number '" + std::string(cell) + "'");
      }
      row.values[f] = value;
    }
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_feature_csv(text.str());
}

}  // namespace dysarthria
