#include "thermodiff/harness/artifact.hpp"

#include <cmath>
#include <iostream>
#include <system_error>

#include <unistd.h>

#include "thermodiff/error.hpp"

namespace thermodiff::harness {

ArtifactSink::ArtifactSink(const std::string& path, std::ostream& console) : console_(&console) {
  if (path.empty()) return;
  target_ = path;
  temp_ = target_;
  temp_ += ".tmp." + std::to_string(::getpid());
  file_.open(temp_, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!file_) {
    throw std::runtime_error("cannot open '" + temp_.string() + "' for writing");
  }
}

ArtifactSink::~ArtifactSink() {
  if (!target_.empty() && !committed_) {
    file_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

std::ostream& ArtifactSink::stream() { return target_.empty() ? *console_ : file_; }

void ArtifactSink::commit() {
  if (target_.empty()) {
    console_->flush();
    committed_ = true;
    return;
  }
  file_.flush();
  if (!file_) throw std::runtime_error("write to '" + temp_.string() + "' failed");
  file_.close();
  std::filesystem::rename(temp_, target_);
  committed_ = true;
}

std::string library_version() { return THERMODIFF_VERSION; }

nlohmann::ordered_json metadata_json(const RunConfig& config) {
  nlohmann::ordered_json meta;
  meta["tool"] = "thermodiff";
  meta["version"] = library_version();
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : serialize(config)) cfg[key] = value;
  meta["config"] = std::move(cfg);
  return meta;
}

void write_csv_preamble(std::ostream& out, const RunConfig& config) {
  out << "# thermodiff " << library_version() << '\n';
  for (const auto& [key, value] : serialize(config)) out << "# " << key << '=' << value << '\n';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::string cell(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return format_double(value);
}

std::string cell(long long value) { return std::to_string(value); }

}  // namespace thermodiff::harness
