#include "sonilab/recording_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sonilab/error.hpp"
#include "sonilab/layout.hpp"

namespace sonilab {

namespace {

constexpr const char* kMarkerHeader =
    "onset,parameter,focus_level,session,participant,response,latency_ms";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw_data("malformed_value", "cannot parse " + what + " '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw_data("malformed_value", "cannot parse " + what + " '" + text + "'");
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("missing_input", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("unwritable_path", "cannot write " + path.string());
  out << text;
  if (!out) throw_data("unwritable_path", "write failed for " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::filesystem::path markers_path_for(const std::filesystem::path& recording_csv) {
  auto p = recording_csv;
  p.replace_extension();
  p += ".markers.csv";
  return p;
}

std::vector<TrialMarker> parse_markers_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw_data("malformed_header", "markers CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMarkerHeader)
    throw_data("malformed_header", "markers CSV header must be '" + std::string(kMarkerHeader) +
                                       "'");
  std::vector<TrialMarker> markers;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != 7)
      throw_data("malformed_row", "markers row " + std::to_string(row) + " has " +
                                      std::to_string(f.size()) + " fields");
    TrialMarker m;
    const long long onset = parse_int(f[0], "onset");
    if (onset < 0) throw_data("malformed_value", "negative onset");
    m.onset = static_cast<std::size_t>(onset);
    m.parameter = parse_parameter(f[1]);
    m.focus_level = static_cast<int>(parse_int(f[2], "focus_level"));
    m.session = parse_session_kind(f[3]);
    m.participant = f[4];
    if (!f[5].empty()) {
      if (m.session == SessionKind::CR) {
        if (f[5] == "yes") m.response = 1;
        else if (f[5] == "no") m.response = 0;
        else throw_data("unknown_label", "CR response must be yes/no, got '" + f[5] + "'");
      } else {
        m.response = static_cast<int>(parse_int(f[5], "response"));
      }
    }
    if (!f[6].empty()) m.latency_ms = parse_double(f[6], "latency_ms");
    validate_marker(m);
    markers.push_back(std::move(m));
  }
  return markers;
}

std::string format_markers_csv(const std::vector<TrialMarker>& markers) {
  std::string out = kMarkerHeader;
  out += '\n';
  for (const auto& m : markers) {
    if (m.participant.find_first_of(",\n\r") != std::string::npos)
      throw_data("malformed_value", "participant id may not contain ',' or newlines");
    out += std::to_string(m.onset);
    out += ',';
    out += to_string(m.parameter);
    out += ',';
    out += std::to_string(m.focus_level);
    out += ',';
    out += to_string(m.session);
    out += ',';
    out += m.participant;
    out += ',';
    if (m.response) {
      if (m.session == SessionKind::CR) out += *m.response ? "yes" : "no";
      else out += std::to_string(*m.response);
    }
    out += ',';
    if (m.latency_ms) out += format_double(*m.latency_ms);
    out += '\n';
  }
  return out;
}

RawRecording read_recording(const std::filesystem::path& recording_csv,
                            const std::filesystem::path& markers_csv) {
  const std::string text = read_text(recording_csv);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw_data("malformed_header", "recording CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const auto& layout = default_layout();
  for (std::size_t i = 0; i < header.size(); ++i) {
    bool known = false;
    for (const auto& n : layout.names) known = known || n == header[i];
    if (!known) throw_data("malformed_header", "unknown column '" + header[i] + "'");
  }
  if (header.size() != kChannelCount)
    throw_data("channel_count", "recording has " + std::to_string(header.size()) +
                                    " channels, expected 14");
  for (std::size_t i = 0; i < kChannelCount; ++i)
    if (header[i] != layout.names[i])
      throw_data("malformed_header", "channel columns must follow layout order; column " +
                                         std::to_string(i) + " is '" + header[i] + "'");

  std::vector<std::vector<double>> columns(kChannelCount);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != kChannelCount)
      throw_data("channel_count", "recording row " + std::to_string(row) + " has " +
                                      std::to_string(f.size()) + " values, expected 14");
    for (std::size_t c = 0; c < kChannelCount; ++c) columns[c].push_back(parse_double(f[c], "sample"));
  }
  RawRecording rec;
  const std::size_t n = columns[0].size();
  rec.data = Matrix(kChannelCount, n);
  for (std::size_t c = 0; c < kChannelCount; ++c)
    for (std::size_t t = 0; t < n; ++t) rec.data(c, t) = columns[c][t];
  rec.markers = parse_markers_csv(read_text(markers_csv));
  validate_recording(rec);
  return rec;
}

RawRecording read_recording(const std::filesystem::path& recording_csv) {
  return read_recording(recording_csv, markers_path_for(recording_csv));
}

void write_recording(const RawRecording& rec, const std::filesystem::path& recording_csv,
                     const std::filesystem::path& markers_csv) {
  validate_recording(rec);
  std::string out;
  const auto& layout = default_layout();
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (c) out += ',';
    out += layout.names[c];
  }
  out += '\n';
  for (std::size_t t = 0; t < rec.data.cols(); ++t) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (c) out += ',';
      out += format_double(rec.data(c, t));
    }
    out += '\n';
  }
  write_text(recording_csv, out);
  write_text(markers_csv, format_markers_csv(rec.markers));
}

}  // namespace sonilab
