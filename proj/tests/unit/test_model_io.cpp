#include <gtest/gtest.h>

#include "dpdlab/errors.hpp"
#include "dpdlab/model_io.hpp"
#include "test_util.hpp"

using namespace dpdlab;

namespace {

std::vector<DpdModel> sample_models() {
  MpmCoefficients mpm{MpmSpec{TapWindow{2, 1}, 3, -0.25}, testutil::random_samples(3, 12)};
  return {mpm, random_agmpnn(TapWindow{3, 0}, 2, 3, 4), random_rvftdnn(TapWindow{2, 0}, 5, 4, 5)};
}

void expect_same(const DpdModel& a, const DpdModel& b) {
  ASSERT_EQ(a.index(), b.index());
  const auto x = generate_waveform(9, 512, 0.25);
  const auto ya = apply_dpd(a, x), yb = apply_dpd(b, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(ya[i], yb[i]) << i;
  EXPECT_EQ(params_actual(a), params_actual(b));
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(ModelIo, TextRoundTripIsBitExact) {
  for (const DpdModel& m : sample_models()) {
    const std::string text = model_to_text(m);
    const DpdModel back = model_from_text(text);
    expect_same(m, back);
    EXPECT_EQ(model_to_text(back), text);
  }
}

TEST(ModelIo, FileRoundTrip) {
  const auto dir = testutil::scratch_dir("model_io");
  for (const DpdModel& m : sample_models()) {
    save_model(dir / "m.txt", m);
    expect_same(m, load_model(dir / "m.txt"));
  }
  EXPECT_THROW(load_model(dir / "absent.txt"), IoError);
}

TEST(ModelIo, HeaderChecks) {
  const std::string text = model_to_text(sample_models()[0]);
  EXPECT_NE(text.find("kind = mpm"), std::string::npos);
  EXPECT_NE(text.find("schema_version = 1"), std::string::npos);
  EXPECT_THROW(model_from_text(replace_first(text, "schema_version = 1", "schema_version = 2")), FormatError);
  EXPECT_THROW(model_from_text(replace_first(text, "kind = mpm", "kind = volterra")), FormatError);
  EXPECT_THROW(model_from_text(replace_first(text, "offset_b", "offset_c")), FormatError);
  EXPECT_THROW(model_from_text(""), FormatError);
}

TEST(ModelIo, RowChecks) {
  const std::string text = model_to_text(sample_models()[0]);
  // Missing slot, duplicate slot, short row, out-of-range index.
  const auto first_row = text.find("\n0 0 ") + 1;
  const std::string row = text.substr(first_row, text.find('\n', first_row) - first_row);
  std::string missing = text;
  missing.erase(first_row, row.size() + 1);
  EXPECT_THROW(model_from_text(missing), FormatError);
  EXPECT_THROW(model_from_text(text + row + "\n"), FormatError);
  EXPECT_THROW(model_from_text(text + "0 0 1.0\n"), FormatError);
  EXPECT_THROW(model_from_text(text + "9 0 1.0 2.0\n"), FormatError);
  EXPECT_THROW(model_from_text(replace_first(text, row, "0 0 abc 1.0")), FormatError);
}

TEST(ModelIo, NetworkTensorChecks) {
  const std::string text = model_to_text(sample_models()[2]);
  EXPECT_THROW(model_from_text(text + "w9 0 1.0\n"), FormatError);
  EXPECT_THROW(model_from_text(text + "b3 2 1.0\n"), FormatError);
  const std::string ag = model_to_text(sample_models()[1]);
  EXPECT_THROW(model_from_text(ag + "[extra]\n"), FormatError);
}
