#include "sonilab/media_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sonilab/error.hpp"

namespace sonilab {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_le(const std::vector<std::uint8_t>& b, std::size_t pos, int bytes) {
  if (pos + static_cast<std::size_t>(bytes) > b.size())
    throw_data("malformed_wav", "truncated WAV file");
  std::uint32_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint32_t>(b[pos + i]) << (8 * i);
  return v;
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

bool tag_at(const std::vector<std::uint8_t>& b, std::size_t pos, const char* tag) {
  return pos + 4 <= b.size() && std::memcmp(b.data() + pos, tag, 4) == 0;
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  const auto rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_le(out, 36 + data_bytes, 4);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_le(out, 16, 4);
  put_le(out, 1, 2);         // PCM
  put_le(out, 1, 2);         // mono
  put_le(out, rate, 4);
  put_le(out, rate * 2, 4);  // byte rate
  put_le(out, 2, 2);         // block align
  put_le(out, 16, 2);        // bits per sample
  put_tag(out, "data");
  put_le(out, data_bytes, 4);
  for (double s : buffer.samples) {
    const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
    put_le(out, static_cast<std::uint32_t>(static_cast<std::uint16_t>(static_cast<std::int16_t>(q))), 2);
  }
  return out;
}

AudioBuffer decode_wav(const std::vector<std::uint8_t>& b) {
  if (!tag_at(b, 0, "RIFF") || !tag_at(b, 8, "WAVE")) throw_data("malformed_wav", "not a RIFF/WAVE file");
  std::size_t pos = 12;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get_le(b, pos + 4, 4);
    if (tag_at(b, pos, "fmt ")) {
      if (get_le(b, pos + 8, 2) != 1 || get_le(b, pos + 10, 2) != 1 || get_le(b, pos + 22, 2) != 16)
        throw_data("malformed_wav", "only mono PCM16 WAV is supported");
      rate = get_le(b, pos + 12, 4);
      have_fmt = true;
    } else if (tag_at(b, pos, "data")) {
      if (!have_fmt) throw_data("malformed_wav", "data chunk before fmt chunk");
      if (pos + 8 + size > b.size()) throw_data("malformed_wav", "truncated data chunk");
      AudioBuffer out{static_cast<double>(rate), std::vector<double>(size / 2)};
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(get_le(b, pos + 8 + 2 * i, 2));
        out.samples[i] = static_cast<double>(raw) / 32767.0;
      }
      return out;
    }
    pos += 8 + size + (size & 1u);
  }
  throw_data("malformed_wav", "no data chunk");
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  write_bytes(encode_wav(buffer), path);
}

AudioBuffer read_wav(const std::filesystem::path& path) { return decode_wav(read_bytes(path)); }

std::vector<std::uint8_t> encode_pgm(const Matrix& image) {
  if (image.empty()) throw_usage("empty_image", "cannot encode an empty image");
  const std::string header =
      "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : image.data())
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
  return out;
}

Matrix decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") throw_data("malformed_pgm", "not a binary PGM");
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(token());
    height = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    throw_data("malformed_pgm", "bad PGM header");
  }
  if (maxval != 255) throw_data("malformed_pgm", "only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  if (pos + width * height > bytes.size()) throw_data("malformed_pgm", "truncated PGM");
  Matrix img(height, width);
  for (std::size_t i = 0; i < width * height; ++i) img.data()[i] = bytes[pos + i];
  return img;
}

void write_pgm(const Matrix& image, const std::filesystem::path& path) {
  write_bytes(encode_pgm(image), path);
}

Matrix read_pgm(const std::filesystem::path& path) { return decode_pgm(read_bytes(path)); }

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("missing_input", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("unwritable_path", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_data("unwritable_path", "write failed for " + path.string());
}

}  // namespace sonilab
