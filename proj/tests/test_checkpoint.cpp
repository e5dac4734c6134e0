#include "mxm/checkpoint.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace mxm;

TEST(Checkpoint, RoundTripIsBitIdentical) {
  for (auto order : {BlockOrder::GlobalFirst, BlockOrder::LocalFirst}) {
    ModelConfig cfg{12, 2, 3, order};
    auto net = MxmNet::init(cfg, 42);
    std::stringstream buf;
    save_checkpoint(buf, cfg, net.params());
    const std::string first = buf.str();

    auto ck = load_checkpoint(buf);
    EXPECT_EQ(ck.config, cfg);
    auto loaded = MxmNet::bind(ck.config, std::move(ck.params));

    for (const auto &name : {"water.xyz", "methanol.xyz"}) {
      auto f = featurize(read_extxyz(support::fixture(name)), FeatureOptions{});
      const double a = predict(net, f), b = predict(loaded, f);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b));
    }

    std::stringstream again;
    save_checkpoint(again, ck.config, loaded.params());
    EXPECT_EQ(again.str(), first);
  }
}

TEST(Checkpoint, PreservesSpecialValues) {
  ParamStore s;
  s.add("x", ad::Tensor::from({2, 2}, {-0.0, std::numeric_limits<double>::denorm_min(),
                                       std::numeric_limits<double>::infinity(), 1e308}));
  std::stringstream buf;
  save_checkpoint(buf, ModelConfig{1, 1, 0}, s);
  auto ck = load_checkpoint(buf);
  const auto &x = ck.params.get("x");
  EXPECT_TRUE(std::signbit(x.data()[0]));
  EXPECT_EQ(x.data()[1], std::numeric_limits<double>::denorm_min());
  EXPECT_TRUE(std::isinf(x.data()[2]));
}

TEST(Checkpoint, RejectsDamagedInput) {
  auto net = MxmNet::init(ModelConfig{4, 1, 1}, 1);
  std::stringstream buf;
  save_checkpoint(buf, ModelConfig{4, 1, 1}, net.params());
  const std::string good = buf.str();

  std::istringstream truncated(good.substr(0, good.size() / 2));
  EXPECT_THROW(load_checkpoint(truncated), std::runtime_error);
  std::istringstream magic("NOT-A-CHECKPOINT 1\n");
  EXPECT_THROW(load_checkpoint(magic), std::runtime_error);
  std::istringstream version("MXMNET-CHECKPOINT 9 hidden=4 layers=1 residuals=1 "
                             "order=global_first params=0\n");
  EXPECT_THROW(load_checkpoint(version), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(load_checkpoint(empty), std::runtime_error);
  EXPECT_THROW(load_checkpoint(std::filesystem::path("/nonexistent/ck.bin")),
               std::runtime_error);
}
