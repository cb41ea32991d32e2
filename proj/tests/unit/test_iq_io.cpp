#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "dpdlab/errors.hpp"
#include "dpdlab/iq_io.hpp"
#include "test_util.hpp"

using namespace dpdlab;

TEST(Dpdiq1, RoundTripIsBitwise) {
  const auto dir = testutil::scratch_dir("iq_roundtrip");
  auto v = testutil::random_samples(9, 1000);
  v[3] = {-0.0, 5e-324};  // signed zero and a subnormal survive
  const ComplexSequence x(v, 2.5e6);
  serialize_iq(x, dir / "x.iq");
  const ComplexSequence y = deserialize_iq(dir / "x.iq");
  ASSERT_EQ(y.size(), x.size());
  EXPECT_EQ(y.sample_rate_hint(), 2.5e6);
  EXPECT_EQ(std::memcmp(x.samples().data(), y.samples().data(), x.size() * sizeof(cplx)), 0);
  EXPECT_EQ(std::filesystem::file_size(dir / "x.iq"), 24 + 16 * x.size());
}

TEST(Dpdiq1, WrongMagicIsFormatError) {
  const auto dir = testutil::scratch_dir("iq_magic");
  serialize_iq(ComplexSequence({cplx{1, 2}}), dir / "x.iq");
  {
    std::fstream f(dir / "x.iq", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("DPDIQ2", 6);
  }
  EXPECT_THROW(deserialize_iq(dir / "x.iq"), FormatError);
}

TEST(Dpdiq1, TruncatedIsFormatError) {
  const auto dir = testutil::scratch_dir("iq_trunc");
  serialize_iq(ComplexSequence(testutil::random_samples(1, 10)), dir / "x.iq");
  std::filesystem::resize_file(dir / "x.iq", 24 + 16 * 9 + 3);
  EXPECT_THROW(deserialize_iq(dir / "x.iq"), FormatError);
}

TEST(Dpdiq1, EmptyWriteIsArgumentError) {
  const auto dir = testutil::scratch_dir("iq_empty");
  EXPECT_THROW(serialize_iq(std::span<const cplx>{}, 1.0, dir / "x.iq"), ArgumentError);
  EXPECT_FALSE(std::filesystem::exists(dir / "x.iq"));
}

TEST(Dpdiq1, MissingFileIsIoError) {
  EXPECT_THROW(deserialize_iq("/nonexistent/dir/x.iq"), IoError);
}

TEST(IqCsv, RoundTripIsExact) {
  const auto dir = testutil::scratch_dir("iq_csv");
  const ComplexSequence x(testutil::random_samples(4, 257));
  save_samples(x, dir / "x.csv");
  const ComplexSequence y = load_samples(dir / "x.csv");
  EXPECT_EQ(x.to_vector(), y.to_vector());
}

TEST(IqCsv, MalformedLineNamesLine) {
  const auto dir = testutil::scratch_dir("iq_csv_bad");
  {
    std::ofstream f(dir / "x.csv");
    f << "re,im\n1,2\n3;4\n";
  }
  try {
    read_iq_csv(dir / "x.csv");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}
