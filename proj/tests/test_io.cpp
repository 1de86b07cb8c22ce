#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "spr/config.hpp"
#include "spr/io.hpp"

namespace {

namespace fs = std::filesystem;
using spr::ConfigFile;
using spr::IoError;
using spr::kIgnoreLabel;
using spr::LabelMap;
using spr::PrototypeState;
using spr::read_labels;
using spr::read_prototypes;
using spr::read_tensor;
using spr::Tensor;
using spr::write_labels;
using spr::write_prototypes;
using spr::write_tensor;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("spr_io_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(IoTest, TensorRoundTripIsBitExact) {
  std::mt19937 rng(71);
  std::uniform_real_distribution<float> dist(-100.0f, 100.0f);
  std::uniform_int_distribution<int> extent(1, 5);
  for (int trial = 0; trial < 12; ++trial) {
    const int rank = 1 + trial % 4;
    std::vector<int> dims;
    for (int i = 0; i < rank; ++i) dims.push_back(extent(rng));
    Tensor t(dims);
    for (size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    const std::string file = path("t" + std::to_string(trial) + ".sprt");
    write_tensor(file, t);
    Tensor back = read_tensor(file);
    ASSERT_EQ(back.dims(), t.dims());
    for (size_t i = 0; i < t.size(); ++i) ASSERT_EQ(back[i], t[i]);
  }
}

TEST_F(IoTest, HeaderBytes) {
  Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  write_tensor(path("h.sprt"), t);
  std::ifstream in(path("h.sprt"), std::ios::binary);
  char buf[14];
  in.read(buf, 14);
  EXPECT_EQ(buf[0], 'S');
  EXPECT_EQ(buf[1], 'P');
  EXPECT_EQ(buf[2], 'R');
  EXPECT_EQ(buf[3], 'T');
  EXPECT_EQ(buf[4], 1);  // version
  EXPECT_EQ(buf[5], 2);  // rank
  EXPECT_EQ(buf[6], 2);  // dim0 little-endian
  EXPECT_EQ(buf[10], 3);
}

TEST_F(IoTest, LabelRoundTripKeepsIgnore) {
  LabelMap labels(3, 2);
  labels(0, 0) = 0;
  labels(0, 1) = 4;
  labels(2, 1) = kIgnoreLabel;
  write_labels(path("y.sprt"), labels);
  LabelMap back = read_labels(path("y.sprt"));
  ASSERT_EQ(back.h, 3);
  ASSERT_EQ(back.w, 2);
  for (size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(back[i], labels[i]);
}

TEST_F(IoTest, PrototypeSidecarRoundTrip) {
  PrototypeState state(2, 3);
  state.p = Tensor({2, 3}, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f});
  state.valid = {true, false, true};
  state.gamma = 0.25f;
  write_prototypes(path("p.sprt"), path("p.valid"), state);
  PrototypeState back = read_prototypes(path("p.sprt"), path("p.valid"));
  EXPECT_EQ(back.valid, state.valid);
  EXPECT_FLOAT_EQ(back.gamma, 0.25f);
  for (size_t i = 0; i < state.p.size(); ++i) EXPECT_EQ(back.p[i], state.p[i]);
}

TEST_F(IoTest, RejectsBadMagicAndTruncation) {
  {
    std::ofstream out(path("bad.sprt"), std::ios::binary);
    out << "NOPE";
  }
  EXPECT_THROW(read_tensor(path("bad.sprt")), IoError);

  Tensor t({2, 2}, {1, 2, 3, 4});
  write_tensor(path("trunc.sprt"), t);
  fs::resize_file(path("trunc.sprt"), fs::file_size(path("trunc.sprt")) - 6);
  EXPECT_THROW(read_tensor(path("trunc.sprt")), IoError);
  EXPECT_THROW(read_tensor(path("missing.sprt")), IoError);
}

TEST_F(IoTest, AtomicWriteLeavesNoTempFile) {
  write_tensor(path("a.sprt"), Tensor({1}, {1.0f}));
  EXPECT_TRUE(fs::exists(path("a.sprt")));
  EXPECT_FALSE(fs::exists(path("a.sprt.tmp")));
}

TEST(Config, ParsesSectionsAndTypes) {
  const std::string text = R"(
# comment
top = 1
[domain]
num_classes = 4     ; trailing comment
spread = 0.65
priors = 0.1, 0.2, 0.3, 0.4
[spr]
decoupled = true
attention = off
)";
  ConfigFile cfg = ConfigFile::parse_string(text);
  EXPECT_EQ(cfg.get_int("", "top", 0), 1);
  EXPECT_EQ(cfg.get_int("domain", "num_classes", 0), 4);
  EXPECT_DOUBLE_EQ(cfg.get_num("domain", "spread", 0.0), 0.65);
  EXPECT_TRUE(cfg.get_bool("spr", "decoupled", false));
  EXPECT_FALSE(cfg.get_bool("spr", "attention", true));
  const auto priors = cfg.get_list("domain", "priors");
  ASSERT_EQ(priors.size(), 4u);
  EXPECT_DOUBLE_EQ(priors[1], 0.2);
  EXPECT_EQ(cfg.get_int("domain", "missing", 7), 7);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(ConfigFile::parse_string("[unterminated\n"), IoError);
  EXPECT_THROW(ConfigFile::parse_string("keyvalue\n"), IoError);
  EXPECT_THROW(ConfigFile::parse_string("= 3\n"), IoError);
  ConfigFile cfg = ConfigFile::parse_string("[a]\nx = notanumber\n");
  EXPECT_THROW(cfg.get_num("a", "x", 0.0), IoError);
  ConfigFile cfg2 = ConfigFile::parse_string("[a]\nx = 1.5\n");
  EXPECT_THROW(cfg2.get_int("a", "x", 0), IoError);
}

}  // namespace
