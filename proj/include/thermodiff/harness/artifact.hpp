#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermodiff/harness/config.hpp"

namespace thermodiff::harness {

/// Output sink for one artifact: stdout when `path` is empty, otherwise a
/// temporary file next to `path` that `commit()` renames into place. A sink
/// destroyed without commit removes its temporary file.
class ArtifactSink {
 public:
  ArtifactSink(const std::string& path, std::ostream& console);
  ~ArtifactSink();
  ArtifactSink(const ArtifactSink&) = delete;
  ArtifactSink& operator=(const ArtifactSink&) = delete;

  std::ostream& stream();
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream file_;
  std::ostream* console_;
  bool committed_ = false;
};

std::string library_version();

/// {"tool", "version", "config": {key: value, ...}}
nlohmann::ordered_json metadata_json(const RunConfig& config);

/// Leading comment block for CSV artifacts: "# thermodiff <version>" followed
/// by one "# key=value" line per config entry.
void write_csv_preamble(std::ostream& out, const RunConfig& config);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Number cell for CSV: shortest round-trip text, "nan"/"inf" for non-finite.
std::string cell(double value);
std::string cell(long long value);

}  // namespace thermodiff::harness
