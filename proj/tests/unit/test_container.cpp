#include "wiom/container.hpp"
#include "wiom/error.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace wiom;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / "wiom_container_test";
    fs::create_directories(d);
    return d;
}

std::vector<unsigned char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_SUITE("container") {

TEST_CASE("f32 round trip preserves dims and payload") {
    auto p = temp_dir() / "f32.wiom";
    TensorF t;
    t.dims = {2, 3};
    t.data = {1.0f, -2.5f, 3.25f, 0.0f, 1e-7f, 6.5e8f};
    write_blob(p, t);
    auto r = read_blob_f32(p);
    CHECK(r.dims == t.dims);
    CHECK(r.data == t.data);
}

TEST_CASE("c64 round trip preserves interleaved parts") {
    auto p = temp_dir() / "c64.wiom";
    TensorC t;
    t.dims = {4};
    t.data = {{1.0f, 2.0f}, {-0.5f, 0.25f}, {0.0f, -1.0f}, {3.0f, 0.0f}};
    write_blob(p, t);
    auto r = read_blob_c64(p);
    CHECK(r.dims == t.dims);
    CHECK(r.data == t.data);
}

TEST_CASE("u32 and f64 round trips") {
    auto d = temp_dir();
    TensorU u;
    u.dims = {3};
    u.data = {0u, 0xffffffffu, 42u};
    write_blob(d / "u.wiom", u);
    auto ru = read_blob_u32(d / "u.wiom");
    CHECK(ru.dims == u.dims);
    CHECK(ru.data == u.data);

    TensorD f;
    f.dims = {2, 1};
    f.data = {1.0 / 3.0, -2.718281828459045};
    write_blob(d / "d.wiom", f);
    auto rf = read_blob_f64(d / "d.wiom");
    CHECK(rf.dims == f.dims);
    CHECK(rf.data == f.data); // bitwise: doubles must survive untouched
}

TEST_CASE("header layout is byte-exact little-endian") {
    auto p = temp_dir() / "hdr.wiom";
    TensorF t;
    t.dims = {1, 2};
    t.data = {1.0f, 2.0f};
    write_blob(p, t);
    auto bytes = slurp(p);
    REQUIRE(bytes.size() == 16 + 2 * 8 + 2 * 4);
    CHECK(bytes[0] == 'W');
    CHECK(bytes[1] == 'I');
    CHECK(bytes[2] == 'O');
    CHECK(bytes[3] == 'M');
    // version 1 LE
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    // dtype f32 = 0
    CHECK(bytes[8] == 0);
    // rank 2
    CHECK(bytes[12] == 2);
    // dims[0] = 1, dims[1] = 2 as u64 LE
    CHECK(bytes[16] == 1);
    CHECK(bytes[24] == 2);
    // payload: 1.0f = 00 00 80 3f
    CHECK(bytes[32] == 0x00);
    CHECK(bytes[34] == 0x80);
    CHECK(bytes[35] == 0x3f);
}

TEST_CASE("blob_info reports header without decoding") {
    auto p = temp_dir() / "info.wiom";
    TensorC t;
    t.dims = {3, 2};
    t.data.resize(6, {1.0f, -1.0f});
    write_blob(p, t);
    auto info = blob_info(p);
    CHECK(info.dtype == Dtype::c64);
    CHECK(info.dims == std::vector<std::size_t>{3, 2});
    CHECK(info.payload_bytes == 6 * 8);
    CHECK(info.checksum == file_checksum(p));
}

TEST_CASE("corrupted magic raises IoError") {
    auto p = temp_dir() / "badmagic.wiom";
    TensorF t;
    t.dims = {1};
    t.data = {1.0f};
    write_blob(p, t);
    auto bytes = slurp(p);
    bytes[0] = 'X';
    dump(p, bytes);
    CHECK_THROWS_AS(read_blob_f32(p), IoError);
    CHECK_THROWS_AS(blob_info(p), IoError);
}

TEST_CASE("wrong dtype tag raises IoError") {
    auto p = temp_dir() / "dtype.wiom";
    TensorF t;
    t.dims = {2};
    t.data = {1.0f, 2.0f};
    write_blob(p, t);
    CHECK_THROWS_AS(read_blob_c64(p), IoError); // reader asked for c64, file says f32
    auto bytes = slurp(p);
    bytes[8] = 9; // not a valid dtype tag at all
    dump(p, bytes);
    CHECK_THROWS_AS(blob_info(p), IoError);
}

TEST_CASE("unsupported version raises IoError") {
    auto p = temp_dir() / "ver.wiom";
    TensorF t;
    t.dims = {1};
    t.data = {0.0f};
    write_blob(p, t);
    auto bytes = slurp(p);
    bytes[4] = 2;
    dump(p, bytes);
    CHECK_THROWS_AS(read_blob_f32(p), IoError);
}

TEST_CASE("truncated payload raises IoError") {
    auto p = temp_dir() / "trunc.wiom";
    TensorF t;
    t.dims = {4};
    t.data = {1.0f, 2.0f, 3.0f, 4.0f};
    write_blob(p, t);
    auto bytes = slurp(p);
    bytes.resize(bytes.size() - 4);
    dump(p, bytes);
    CHECK_THROWS_AS(read_blob_f32(p), IoError);
    CHECK_THROWS_AS(blob_info(p), IoError);
}

TEST_CASE("trailing garbage raises IoError") {
    auto p = temp_dir() / "trail.wiom";
    TensorF t;
    t.dims = {1};
    t.data = {5.0f};
    write_blob(p, t);
    auto bytes = slurp(p);
    bytes.push_back(0xab);
    dump(p, bytes);
    CHECK_THROWS_AS(read_blob_f32(p), IoError);
}

TEST_CASE("size mismatch between dims and data refuses to write") {
    TensorF t;
    t.dims = {2, 2};
    t.data = {1.0f}; // 1 value for 4 slots
    CHECK_THROWS_AS(write_blob(temp_dir() / "mismatch.wiom", t), IoError);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(read_blob_f32(temp_dir() / "does_not_exist.wiom"), IoError);
    CHECK_THROWS_AS(file_checksum(temp_dir() / "does_not_exist.wiom"), IoError);
}

TEST_CASE("fnv1a64 matches published test vectors") {
    // Reference values from the FNV specification.
    CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("rewriting identical content yields identical bytes") {
    auto d = temp_dir();
    TensorD t;
    t.dims = {3};
    t.data = {0.1, 0.2, 0.3};
    write_blob(d / "a.wiom", t);
    write_blob(d / "b.wiom", t);
    CHECK(slurp(d / "a.wiom") == slurp(d / "b.wiom"));
    CHECK(file_checksum(d / "a.wiom") == file_checksum(d / "b.wiom"));
}

} // TEST_SUITE
