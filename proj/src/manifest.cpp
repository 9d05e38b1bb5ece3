#include "dysarthria/manifest.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dysarthria {

std::string_view to_string(Severity s) noexcept {
  switch (s) {
    case Severity::Healthy: return "healthy";
    case Severity::Mild: return "mild";
    case Severity::Moderate: return "moderate";
    case Severity::Severe: return "severe";
  }
  return "?";
}

std::optional<Severity> severity_from_string(std::string_view s) noexcept {
  for (auto level : kSeverities) {
    if (to_string(level) == s) return level;
  }
  return std::nullopt;
}

std::vector<std::string> split_symbols(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

std::string join_symbols(const std::vector<std::string>& symbols) {
  std::string out;
  for (const auto& s : symbols) {
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

namespace {

std::vector<std::string> checked_symbols(const std::string& text, const LanguageProfile& profile,
                                         std::size_t line) {
  std::vector<std::string> symbols;
  for (const auto& raw : split_symbols(text)) {
    auto symbol = profile.normalize(raw);
    if (!symbol) throw LineError(ErrorCode::UnknownPhoneme, line, "symbol '" + raw + "'");
    symbols.push_back(std::move(*symbol));
  }
  return symbols;
}

UtteranceRecord parse_record(std::string_view text, std::size_t line, const LanguageProfile& profile,
                             const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LineError(ErrorCode::MalformedRecord, line, e.what());
  }
  if (!doc.is_object()) throw LineError(ErrorCode::MalformedRecord, line, "expected a JSON object");

  auto field = [&](const char* key) -> std::string {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) {
      throw LineError(ErrorCode::MalformedRecord, line, std::string("missing string field '") + key + "'");
    }
    auto value = it->get<std::string>();
    if (value.empty()) throw LineError(ErrorCode::MalformedRecord, line, std::string("empty field '") + key + "'");
    return value;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  UtteranceRecord rec;
  rec.utterance_id = field("utt_id");
  rec.speaker_id = field("speaker_id");
  const auto severity = field("severity");
  auto level = severity_from_string(severity);
  if (!level) throw LineError(ErrorCode::UnknownSeverity, line, "severity '" + severity + "'");
  rec.severity = *level;
  rec.audio_path = resolve(field("audio"));
  rec.annotation_path = resolve(field("annotation"));
  rec.canonical = checked_symbols(field("canonical"), profile, line);
  if (rec.canonical.empty()) throw LineError(ErrorCode::MalformedRecord, line, "canonical sequence is empty");

  if (auto it = doc.find("decoded"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw LineError(ErrorCode::MalformedRecord, line, "field 'decoded' must be a string");
    rec.decoded = checked_symbols(it->get<std::string>(), profile, line);
  }
  return rec;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest_entries(std::string_view jsonl, const LanguageProfile& profile,
                                                  const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const auto line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      entries.push_back({line_no, parse_record(line, line_no, profile, base_dir)});
    } catch (const LineError& e) {
      entries.push_back({line_no, e});
    }
  }
  return entries;
}

std::vector<UtteranceRecord> parse_manifest_text(std::string_view jsonl, const LanguageProfile& profile,
                                                 const std::filesystem::path& base_dir) {
  std::vector<UtteranceRecord> records;
  for (auto& entry : parse_manifest_entries(jsonl, profile, base_dir)) {
    if (auto* err = std::get_if<LineError>(&entry.value)) throw *err;
    records.push_back(std::move(std::get<UtteranceRecord>(entry.value)));
  }
  return records;
}

std::vector<UtteranceRecord> parse_manifest(const std::filesystem::path& path, const LanguageProfile& profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest_text(text.str(), profile, path.parent_path());
}

std::string to_manifest_line(const UtteranceRecord& record) {
  nlohmann::ordered_json doc;
  doc["utt_id"] = record.utterance_id;
  doc["speaker_id"] = record.speaker_id;
  doc["severity"] = std::string(to_string(record.severity));
  doc["audio"] = record.audio_path.generic_string();
  doc["annotation"] = record.annotation_path.generic_string();
  doc["canonical"] = join_symbols(record.canonical);
  if (record.decoded) doc["decoded"] = join_symbols(*record.decoded);
  return doc.dump();
}

}  // namespace dysarthria
