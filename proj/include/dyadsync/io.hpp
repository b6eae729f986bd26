#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dyadsync/recording.hpp"

namespace dyadsync::io {

namespace fs = std::filesystem;

/// Writes `text`, creating parent directories. Throws Errc::io.
void write_text(const fs::path& path, std::string_view text);
/// Throws Errc::io when the file cannot be read.
std::string read_text(const fs::path& path);

/// `foo.csv` -> `foo.json`.
fs::path sidecar_path(const fs::path& csv);

/// A continuous recording with its trial descriptor.
struct RecordingFile {
  Recording recording;
  std::vector<std::size_t> trial_onsets;  // samples
  std::vector<ClassLabel> labels;
  std::vector<std::size_t> trial_indices;
};

/// Comma-separated samples (header = electrode labels, one row per sample)
/// plus a JSON sidecar next to it.
void write_recording(const fs::path& csv, const RecordingFile& file);
/// Throws Errc::io on a missing or malformed file.
RecordingFile read_recording(const fs::path& csv);

/// Epochs as rows of (trial_index, condition, samples...) plus a sidecar.
void write_epoch_archive(const fs::path& csv, const std::string& subject_id, std::span<const Epoch> epochs,
                         std::span<const std::size_t> dropped = {});
std::vector<Epoch> read_epoch_archive(const fs::path& csv);

/// Minimal comma-separated table builder.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  Table& add(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const fs::path& path) const { write_text(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip text for a double; "nan" for NaN.
std::string num(double v);

}  // namespace dyadsync::io
