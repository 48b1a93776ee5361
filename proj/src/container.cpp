#include "wiom/container.hpp"

#include "wiom/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace wiom {

namespace {

constexpr char kMagic[4] = {'W', 'I', 'O', 'M'};
constexpr std::size_t kMaxRank = 8;

// The format is little-endian by definition; on big-endian hosts every scalar
// is byte-swapped on the way in and out.
constexpr bool kHostLittle = (std::endian::native == std::endian::little);

template <typename T>
T byteswap_value(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
}

void put_u32(std::ostream& os, std::uint32_t v) {
    if (!kHostLittle) v = byteswap_value(v);
    os.write(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    if (!kHostLittle) v = byteswap_value(v);
    os.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint32_t get_u32(std::istream& is, const std::filesystem::path& path) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw IoError("truncated blob header: " + path.string());
    return kHostLittle ? v : byteswap_value(v);
}

std::uint64_t get_u64(std::istream& is, const std::filesystem::path& path) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8))
        throw IoError("truncated blob header: " + path.string());
    return kHostLittle ? v : byteswap_value(v);
}

std::size_t checked_element_count(const std::vector<std::size_t>& dims,
                                  const std::filesystem::path& path) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            n = 0;
            continue;
        }
        if (n > std::numeric_limits<std::size_t>::max() / d)
            throw IoError("blob dimension overflow: " + path.string());
        n *= d;
    }
    return n;
}

void write_header(std::ostream& os, Dtype dtype, const std::vector<std::size_t>& dims) {
    os.write(kMagic, 4);
    put_u32(os, kContainerVersion);
    put_u32(os, static_cast<std::uint32_t>(dtype));
    put_u32(os, static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) put_u64(os, static_cast<std::uint64_t>(d));
}

// Word size the payload byteswap operates on: f32/u32/c64 are 4-byte grained,
// f64 is 8-byte grained.
std::size_t dtype_word(Dtype d) { return d == Dtype::f64 ? 8 : 4; }

void write_payload(std::ostream& os, const void* data, std::size_t bytes, std::size_t word) {
    if (kHostLittle) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(bytes));
        return;
    }
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::vector<char> buf(bytes);
    for (std::size_t i = 0; i + word <= bytes; i += word)
        for (std::size_t j = 0; j < word; ++j) buf[i + j] = static_cast<char>(p[i + word - 1 - j]);
    os.write(buf.data(), static_cast<std::streamsize>(bytes));
}

void write_blob_raw(const std::filesystem::path& path, Dtype dtype,
                    const std::vector<std::size_t>& dims, const void* data, std::size_t count) {
    std::size_t expected = checked_element_count(dims, path);
    if (expected != count)
        throw IoError("blob element count does not match dims: " + path.string());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open blob for writing: " + path.string());
    write_header(os, dtype, dims);
    write_payload(os, data, count * dtype_size(dtype), dtype_word(dtype));
    if (!os) throw IoError("short write: " + path.string());
}

struct Header {
    Dtype dtype;
    std::vector<std::size_t> dims;
    std::size_t payload_bytes;
    std::size_t header_bytes;
};

Header read_header(std::istream& is, const std::filesystem::path& path) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad blob magic: " + path.string());
    std::uint32_t version = get_u32(is, path);
    if (version != kContainerVersion)
        throw IoError("unsupported blob version " + std::to_string(version) + ": " + path.string());
    std::uint32_t dtype_tag = get_u32(is, path);
    if (dtype_tag > 3) throw IoError("unknown blob dtype tag: " + path.string());
    std::uint32_t rank = get_u32(is, path);
    if (rank > kMaxRank) throw IoError("implausible blob rank: " + path.string());
    Header h;
    h.dtype = static_cast<Dtype>(dtype_tag);
    h.dims.resize(rank);
    for (std::uint32_t i = 0; i < rank; ++i)
        h.dims[i] = static_cast<std::size_t>(get_u64(is, path));
    h.payload_bytes = checked_element_count(h.dims, path) * dtype_size(h.dtype);
    h.header_bytes = 16 + 8 * static_cast<std::size_t>(rank);
    return h;
}

void read_payload(std::istream& is, void* data, std::size_t bytes, std::size_t word,
                  const std::filesystem::path& path) {
    if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(bytes)))
        throw IoError("truncated blob payload: " + path.string());
    char extra;
    if (is.read(&extra, 1)) throw IoError("trailing bytes after blob payload: " + path.string());
    if (!kHostLittle) {
        unsigned char* p = static_cast<unsigned char*>(data);
        for (std::size_t i = 0; i + word <= bytes; i += word)
            for (std::size_t j = 0; j < word / 2; ++j) std::swap(p[i + j], p[i + word - 1 - j]);
    }
}

template <typename Tensor, typename Elem>
Tensor read_blob_typed(const std::filesystem::path& path, Dtype want) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open blob: " + path.string());
    Header h = read_header(is, path);
    if (h.dtype != want)
        throw IoError("blob dtype is " + dtype_name(h.dtype) + ", expected " + dtype_name(want) +
                      ": " + path.string());
    Tensor t;
    t.dims = h.dims;
    t.data.resize(h.payload_bytes / sizeof(Elem));
    read_payload(is, t.data.data(), h.payload_bytes, dtype_word(want), path);
    return t;
}

} // namespace

std::size_t dtype_size(Dtype d) {
    switch (d) {
    case Dtype::f32: return 4;
    case Dtype::c64: return 8;
    case Dtype::u32: return 4;
    case Dtype::f64: return 8;
    }
    throw IoError("unknown dtype");
}

std::string dtype_name(Dtype d) {
    switch (d) {
    case Dtype::f32: return "f32";
    case Dtype::c64: return "c64";
    case Dtype::u32: return "u32";
    case Dtype::f64: return "f64";
    }
    return "?";
}

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open file for checksum: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (n < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

void write_blob(const std::filesystem::path& path, const TensorF& t) {
    write_blob_raw(path, Dtype::f32, t.dims, t.data.data(), t.data.size());
}

void write_blob(const std::filesystem::path& path, const TensorC& t) {
    write_blob_raw(path, Dtype::c64, t.dims, t.data.data(), t.data.size());
}

void write_blob(const std::filesystem::path& path, const TensorU& t) {
    write_blob_raw(path, Dtype::u32, t.dims, t.data.data(), t.data.size());
}

void write_blob(const std::filesystem::path& path, const TensorD& t) {
    write_blob_raw(path, Dtype::f64, t.dims, t.data.data(), t.data.size());
}

TensorF read_blob_f32(const std::filesystem::path& path) {
    return read_blob_typed<TensorF, float>(path, Dtype::f32);
}

TensorC read_blob_c64(const std::filesystem::path& path) {
    return read_blob_typed<TensorC, std::complex<float>>(path, Dtype::c64);
}

TensorU read_blob_u32(const std::filesystem::path& path) {
    return read_blob_typed<TensorU, std::uint32_t>(path, Dtype::u32);
}

TensorD read_blob_f64(const std::filesystem::path& path) {
    return read_blob_typed<TensorD, double>(path, Dtype::f64);
}

BlobInfo blob_info(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open blob: " + path.string());
    Header h = read_header(is, path);
    std::error_code ec;
    std::uintmax_t actual = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat blob: " + path.string());
    if (actual != h.header_bytes + h.payload_bytes)
        throw IoError("blob length mismatch (truncated or padded): " + path.string());
    BlobInfo info;
    info.dtype = h.dtype;
    info.dims = h.dims;
    info.payload_bytes = h.payload_bytes;
    info.checksum = file_checksum(path);
    return info;
}

} // namespace wiom
