#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wiom {

// On-disk tensor blob format:
//   bytes 0-3   magic "WIOM"
//   bytes 4-7   format version (u32 LE), currently 1
//   bytes 8-11  dtype tag (u32 LE): 0 = f32, 1 = c64 (interleaved re/im f32),
//               2 = u32, 3 = f64 (model checkpoints need lossless doubles)
//   bytes 12-15 rank (u32 LE)
//   then rank u64 LE dims, then the row-major payload, little-endian.
enum class Dtype : std::uint32_t { f32 = 0, c64 = 1, u32 = 2, f64 = 3 };

constexpr std::uint32_t kContainerVersion = 1;

std::size_t dtype_size(Dtype d);
std::string dtype_name(Dtype d);

struct TensorF {
    std::vector<std::size_t> dims;
    std::vector<float> data;
};

struct TensorC {
    std::vector<std::size_t> dims;
    std::vector<std::complex<float>> data;
};

struct TensorU {
    std::vector<std::size_t> dims;
    std::vector<std::uint32_t> data;
};

struct TensorD {
    std::vector<std::size_t> dims;
    std::vector<double> data;
};

// FNV-1a 64-bit over a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t bytes);
// FNV-1a 64-bit over a whole file. Throws IoError if unreadable.
std::uint64_t file_checksum(const std::filesystem::path& path);

void write_blob(const std::filesystem::path& path, const TensorF& t);
void write_blob(const std::filesystem::path& path, const TensorC& t);
void write_blob(const std::filesystem::path& path, const TensorU& t);
void write_blob(const std::filesystem::path& path, const TensorD& t);

TensorF read_blob_f32(const std::filesystem::path& path);
TensorC read_blob_c64(const std::filesystem::path& path);
TensorU read_blob_u32(const std::filesystem::path& path);
TensorD read_blob_f64(const std::filesystem::path& path);

// Header metadata without decoding the payload. Validates magic, version,
// dtype, rank, dims and that the file length matches the declared payload.
struct BlobInfo {
    Dtype dtype;
    std::vector<std::size_t> dims;
    std::size_t payload_bytes = 0;
    std::uint64_t checksum = 0; // FNV-1a 64 over the entire file
};

BlobInfo blob_info(const std::filesystem::path& path);

} // namespace wiom
