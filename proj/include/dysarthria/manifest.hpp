#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dysarthria/error.hpp"
#include "dysarthria/profile.hpp"

namespace dysarthria {

/// Four-level intelligibility scheme; datasets are regrouped onto it before ingestion.
enum class Severity { Healthy, Mild, Moderate, Severe };

inline constexpr std::array<Severity, 4> kSeverities{Severity::Healthy, Severity::Mild, Severity::Moderate,
                                                     Severity::Severe};

std::string_view to_string(Severity s) noexcept;
std::optional<Severity> severity_from_string(std::string_view s) noexcept;
inline int severity_index(Severity s) noexcept { return static_cast<int>(s); }

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  Severity severity = Severity::Healthy;
  std::filesystem::path audio_path;
  std::filesystem::path annotation_path;
  std::vector<std::string> canonical;
  std::optional<std::vector<std::string>> decoded;
};

/// Outcome of one non-blank manifest line: a record or the reason it was rejected.
struct ManifestEntry {
  std::size_t line = 0;
  std::variant<UtteranceRecord, LineError> value;

  bool ok() const noexcept { return std::holds_alternative<UtteranceRecord>(value); }
};

/// Parses every line, never dropping one silently. Relative paths resolve
/// against `base_dir`.
std::vector<ManifestEntry> parse_manifest_entries(std::string_view jsonl, const LanguageProfile& profile,
                                                  const std::filesystem::path& base_dir = {});

/// Strict form: throws the first line error.
std::vector<UtteranceRecord> parse_manifest(const std::filesystem::path& path, const LanguageProfile& profile);
std::vector<UtteranceRecord> parse_manifest_text(std::string_view jsonl, const LanguageProfile& profile,
                                                 const std::filesystem::path& base_dir = {});

std::vector<std::string> split_symbols(std::string_view text);
std::string join_symbols(const std::vector<std::string>& symbols);

/// One JSON line for the record (paths written as given).
std::string to_manifest_line(const UtteranceRecord& record);

}  // namespace dysarthria
