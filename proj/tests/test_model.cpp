#include <gtest/gtest.h>

#include <cstring>

#include "gboc/error.hpp"
#include "gboc/model.hpp"
#include "model_fixtures.hpp"
#include "test_util.hpp"

using namespace gboc;
using gboc::testing::TempDir;

namespace {

ErrorCode load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_model(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "model accepted";
  return ErrorCode::Io;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

TEST(ModelFile, RoundTripIsExact) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = gboc::testing::random_model(seed);
    ASSERT_NO_THROW(m.validate());
    save_model(m, dir.file("a.bin"));
    const auto back = load_model(dir.file("a.bin"));
    EXPECT_EQ(back, m);
    save_model(back, dir.file("b.bin"));
    EXPECT_EQ(gboc::testing::read_file(dir.file("a.bin")), gboc::testing::read_file(dir.file("b.bin")));
  }
}

TEST(ModelFile, HeaderLayout) {
  const auto bytes = serialize_model(gboc::testing::random_model(1));
  EXPECT_EQ(std::memcmp(bytes.data(), "GBOC", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
}

TEST(ModelFile, CorruptionRejected) {
  const auto good = serialize_model(gboc::testing::random_model(2));

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(load_error(magic), ErrorCode::BadMagic);

  auto version = good;
  put_u32(version, 4, 2);
  EXPECT_EQ(load_error(version), ErrorCode::VersionUnsupported);

  auto empty = good;
  put_u32(empty, gboc::testing::kCenterCountOffset, 0);
  EXPECT_EQ(load_error(empty), ErrorCode::InvariantViolation);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(load_error(trailing), ErrorCode::InvariantViolation);

  for (std::size_t len = 8; len < good.size(); len += 1 + len / 7) {
    EXPECT_EQ(load_error({good.begin(), good.begin() + static_cast<std::ptrdiff_t>(len)}), ErrorCode::TruncatedFile)
        << len;
  }
  EXPECT_EQ(load_error({good.begin(), good.end() - 1}), ErrorCode::TruncatedFile);
}

TEST(ModelFile, ShortHeaderAndMissingFile) {
  EXPECT_EQ(load_error({'G', 'B'}), ErrorCode::TruncatedFile);
  try {
    load_model("/nonexistent/model.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFile);
  }
}

TEST(ModelFile, HugeDimensionsRejectedWithoutAllocating) {
  auto bytes = serialize_model(gboc::testing::random_model(3));
  put_u32(bytes, 8, 0xFFFFFFFFu);  // window length
  const auto code = load_error(bytes);
  EXPECT_TRUE(code == ErrorCode::InvariantViolation || code == ErrorCode::TruncatedFile);
}

TEST(ModelFile, ValidateCatchesInconsistentBundles) {
  auto m = gboc::testing::random_model(4);
  m.radii.pop_back();
  EXPECT_THROW(m.validate(), Error);
  m = gboc::testing::random_model(4);
  m.centers.cols += 1;
  EXPECT_THROW(m.validate(), Error);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lambda = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
}
