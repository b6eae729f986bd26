#include "dyadsync/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dyadsync/error.hpp"
#include "json.hpp"

namespace dyadsync::io {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, const fs::path& file, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::io, fmt::format("{}:{}: '{}' is not a number", file.string(), line, text));
  }
  return v;
}

/// Calls `row(fields, line_number)` for each data line after checking the header.
template <typename F>
void for_each_row(const fs::path& csv, const std::string& text, F&& row, std::vector<std::string>* header) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (line_no == 1) {
      for (auto f : fields) header->emplace_back(f);
      continue;
    }
    if (fields.size() != header->size()) {
      throw Error(Errc::io, fmt::format("{}:{}: expected {} fields, found {}", csv.string(), line_no, header->size(),
                                        fields.size()));
    }
    row(fields, line_no);
  }
  if (header->empty()) throw Error(Errc::io, fmt::format("{}: missing header", csv.string()));
}

std::vector<Electrode> parse_channels(std::span<const std::string> names, const fs::path& csv) {
  std::vector<Electrode> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_electrode(n));
    } catch (const Error&) {
      throw Error(Errc::io, fmt::format("{}: unknown electrode column '{}'", csv.string(), n));
    }
  }
  return out;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(Errc::io, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void write_text(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, fmt::format("cannot write {}", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::io, fmt::format("write to {} failed", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

void write_recording(const fs::path& csv, const RecordingFile& file) {
  const auto& rec = file.recording;
  rec.validate();
  std::string out;
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (c) out += ',';
    out += to_string(rec.channels[c]);
  }
  out += '\n';
  for (std::size_t i = 0; i < rec.samples(); ++i) {
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      if (c) out += ',';
      fmt::format_to(std::back_inserter(out), "{:.3f}", rec.data[c][i]);
    }
    out += '\n';
  }
  write_text(csv, out);

  json side;
  side["subject_id"] = rec.subject_id;
  side["sample_rate"] = rec.sample_rate;
  side["trial_onsets"] = file.trial_onsets;
  json labels = json::array();
  for (const auto& l : file.labels) labels.push_back(l.to_string());
  side["labels"] = labels;
  side["trial_indices"] = file.trial_indices;
  write_text(sidecar_path(csv), side.dump(2) + "\n");
}

RecordingFile read_recording(const fs::path& csv) {
  RecordingFile file;
  const auto side = read_json(sidecar_path(csv));
  auto& rec = file.recording;
  try {
    rec.subject_id = side.at("subject_id").get<std::string>();
    rec.sample_rate = side.at("sample_rate").get<int>();
    file.trial_onsets = side.at("trial_onsets").get<std::vector<std::size_t>>();
    for (const auto& l : side.at("labels")) file.labels.push_back(ClassLabel::parse(l.get<std::string>()));
    if (side.contains("trial_indices")) {
      file.trial_indices = side.at("trial_indices").get<std::vector<std::size_t>>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::io, fmt::format("{}: {}", sidecar_path(csv).string(), e.what()));
  } catch (const Error& e) {
    throw Error(Errc::io, fmt::format("{}: {}", sidecar_path(csv).string(), e.what()));
  }
  if (file.trial_indices.empty()) {
    for (std::size_t i = 0; i < file.trial_onsets.size(); ++i) file.trial_indices.push_back(i);
  }
  if (file.labels.size() != file.trial_onsets.size() || file.trial_indices.size() != file.trial_onsets.size()) {
    throw Error(Errc::io, fmt::format("{}: onsets, labels and trial indices differ in length", sidecar_path(csv).string()));
  }

  const auto text = read_text(csv);
  std::vector<std::string> header;
  for_each_row(
      csv, text,
      [&](const std::vector<std::string_view>& fields, std::size_t line) {
        if (rec.data.empty()) rec.data.resize(header.size());
        for (std::size_t c = 0; c < fields.size(); ++c) rec.data[c].push_back(parse_number<double>(fields[c], csv, line));
      },
      &header);
  rec.channels = parse_channels(header, csv);
  if (rec.data.empty()) rec.data.resize(rec.channels.size());
  try {
    rec.validate();
  } catch (const Error& e) {
    throw Error(Errc::io, fmt::format("{}: {}", csv.string(), e.what()));
  }
  return file;
}

void write_epoch_archive(const fs::path& csv, const std::string& subject_id, std::span<const Epoch> epochs,
                         std::span<const std::size_t> dropped) {
  std::string out = "trial_index,condition";
  const auto& channels = epochs.empty() ? std::vector<Electrode>(kMontage.begin(), kMontage.end()) : epochs.front().channels;
  for (Electrode e : channels) {
    out += ',';
    out += to_string(e);
  }
  out += '\n';
  for (const auto& e : epochs) {
    if (e.channels != channels || e.sample_rate != epochs.front().sample_rate) {
      throw Error(Errc::shape_mismatch, "epochs in one archive must share channels and sample rate");
    }
    const auto cond = e.condition.to_string();
    for (std::size_t i = 0; i < e.samples(); ++i) {
      fmt::format_to(std::back_inserter(out), "{},{}", e.trial_index, cond);
      for (std::size_t c = 0; c < channels.size(); ++c) fmt::format_to(std::back_inserter(out), ",{:.3f}", e.data[c][i]);
      out += '\n';
    }
  }
  write_text(csv, out);

  json side;
  side["subject_id"] = subject_id;
  side["sample_rate"] = epochs.empty() ? 0 : epochs.front().sample_rate;
  json trials = json::array();
  json labels = json::array();
  for (const auto& e : epochs) {
    trials.push_back(e.trial_index);
    labels.push_back(e.condition.to_string());
  }
  side["trial_indices"] = trials;
  side["labels"] = labels;
  side["dropped"] = std::vector<std::size_t>(dropped.begin(), dropped.end());
  write_text(sidecar_path(csv), side.dump(2) + "\n");
}

std::vector<Epoch> read_epoch_archive(const fs::path& csv) {
  const auto side = read_json(sidecar_path(csv));
  int fs_hz = 0;
  try {
    fs_hz = side.at("sample_rate").get<int>();
  } catch (const json::exception& e) {
    throw Error(Errc::io, fmt::format("{}: {}", sidecar_path(csv).string(), e.what()));
  }
  const auto text = read_text(csv);
  std::vector<std::string> header;
  std::vector<Epoch> epochs;
  std::vector<Electrode> channels;
  for_each_row(
      csv, text,
      [&](const std::vector<std::string_view>& fields, std::size_t line) {
        if (channels.empty()) {
          if (header.size() < 3 || header[0] != "trial_index" || header[1] != "condition") {
            throw Error(Errc::io, fmt::format("{}: not an epoch archive", csv.string()));
          }
          channels = parse_channels(std::span<const std::string>(header).subspan(2), csv);
        }
        const auto idx = parse_number<std::size_t>(fields[0], csv, line);
        if (epochs.empty() || epochs.back().trial_index != idx) {
          Epoch e;
          e.trial_index = idx;
          try {
            e.condition = ClassLabel::parse(fields[1]);
          } catch (const Error&) {
            throw Error(Errc::io, fmt::format("{}:{}: bad condition '{}'", csv.string(), line, fields[1]));
          }
          e.sample_rate = fs_hz;
          e.channels = channels;
          e.data.resize(channels.size());
          epochs.push_back(std::move(e));
        }
        auto& e = epochs.back();
        for (std::size_t c = 0; c < channels.size(); ++c) e.data[c].push_back(parse_number<double>(fields[c + 2], csv, line));
      },
      &header);
  for (const auto& e : epochs) {
    if (e.samples() != epoch_samples(fs_hz)) {
      throw Error(Errc::io, fmt::format("{}: trial {} has {} samples, expected {}", csv.string(), e.trial_index,
                                        e.samples(), epoch_samples(fs_hz)));
    }
  }
  return epochs;
}

Table& Table::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw Error(Errc::shape_mismatch, "table row width differs from its header");
  rows_.push_back(std::move(row));
  return *this;
}

std::string Table::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

}  // namespace dyadsync::io
