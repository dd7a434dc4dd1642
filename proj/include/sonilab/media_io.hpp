#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sonilab/matrix.hpp"
#include "sonilab/stimulus.hpp"

namespace sonilab {

/// RIFF/WAVE, PCM 16-bit little-endian, mono. Samples are scaled by 32767
/// and rounded; read-back error is at most half an LSB.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);
AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes);
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);
AudioBuffer read_wav(const std::filesystem::path& path);

/// Binary PGM (P5), 8-bit. Pixel values are rounded and clamped to [0, 255].
std::vector<std::uint8_t> encode_pgm(const Matrix& image);
Matrix decode_pgm(const std::vector<std::uint8_t>& bytes);
void write_pgm(const Matrix& image, const std::filesystem::path& path);
Matrix read_pgm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path);

}  // namespace sonilab
