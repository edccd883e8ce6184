#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slidegraph/binary_io.hpp"

using namespace slidegraph;

TEST(Fnv1a64, KnownVectors) {
  EXPECT_EQ(fnv1a64(std::string_view("")), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64(std::string_view("a")), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(std::string_view("foobar")), 0x85944171f73967e8ULL);
}

TEST(Fnv1a64, IncrementalMatchesOneShot) {
  const std::string s = "the quick brown fox";
  Fnv1a64 h;
  h.update(std::as_bytes(std::span(s.data(), 4)));
  h.update(std::as_bytes(std::span(s.data() + 4, s.size() - 4)));
  EXPECT_EQ(h.digest(), fnv1a64(std::string_view(s)));
}

TEST(ByteIo, RoundTripsLittleEndianValues) {
  ByteWriter w;
  w.put_magic("TEST");
  w.put<std::uint16_t>(1);
  w.put<std::uint32_t>(0x01020304);
  w.put<std::int64_t>(-5);
  w.put<double>(0.25);
  const std::vector<std::uint64_t> arr{1, 2, 3};
  w.put_array<std::uint64_t>(arr);
  w.seal();
  const auto bytes = w.take();
  EXPECT_EQ(static_cast<int>(bytes[6]), 0x04);  // low byte first
  ByteReader r(bytes, "test");
  r.expect_magic("TEST");
  r.expect_version(1);
  EXPECT_EQ(r.get<std::uint32_t>(), 0x01020304u);
  EXPECT_EQ(r.get<std::int64_t>(), -5);
  EXPECT_EQ(r.get<double>(), 0.25);
  EXPECT_EQ(r.get_array<std::uint64_t>(3), arr);
  r.verify_checksum();
  r.expect_end();
}

TEST(ByteIo, ReportsTypedErrors) {
  ByteWriter w;
  w.put_magic("TEST");
  w.put<std::uint16_t>(999);
  w.seal();
  const auto bytes = w.take();
  auto kind_of = [&](auto fn) {
    try {
      ByteReader r(bytes, "t");
      fn(r);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::usage;
  };
  EXPECT_EQ(kind_of([](ByteReader& r) { r.expect_magic("NOPE"); }), ErrorKind::bad_magic);
  EXPECT_EQ(kind_of([](ByteReader& r) {
              r.expect_magic("TEST");
              r.expect_version(1);
            }),
            ErrorKind::unsupported_version);
  EXPECT_EQ(kind_of([](ByteReader& r) { r.get_array<std::uint64_t>(100); }), ErrorKind::unexpected_eof);
}

TEST(Files, AtomicWriteAndCountedSequentialRead) {
  oracle::TempDir dir;
  std::vector<std::byte> data(3 << 20);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::byte>(i * 7);
  write_file_atomic(dir / "f.bin", data);
  IoCounter io;
  const auto back = read_file(dir / "f.bin", &io);
  EXPECT_EQ(back, data);
  EXPECT_EQ(io.bytes, data.size());
  EXPECT_EQ(io.files, 1u);
  EXPECT_TRUE(io.sequential);
  std::size_t leftovers = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path)) leftovers += e.path().filename() != "f.bin";
  EXPECT_EQ(leftovers, 0u);
}

TEST(Files, MissingFileIsNotFound) {
  oracle::TempDir dir;
  try {
    read_file(dir / "absent");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
}
