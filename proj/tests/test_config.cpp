#include "mxm/config.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mxm;

namespace {

RunConfig parse(const std::string &text, const std::filesystem::path &base = {}) {
  std::istringstream in(text);
  return parse_config(in, base);
}

std::string error_of(const std::string &text) {
  try {
    parse(text).validate();
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST(Config, DefaultsAreValid) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.model.hidden, 128u);
  EXPECT_EQ(cfg.model.layers, 6u);
  EXPECT_DOUBLE_EQ(cfg.lr, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.dg, 5.0);
  EXPECT_TRUE(cfg.local_bonds);
}

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  const auto cfg = parse("# comment\n"
                         "  hidden = 32   # trailing\n"
                         "layers=2\r\n"
                         "\n"
                         "local_rule = cutoff\n"
                         "dl = 1.5\n"
                         "order = local_first\n"
                         "loss = mse\n"
                         "bench_degrees = 4, 8,16\n"
                         "target = gap\n");
  EXPECT_EQ(cfg.model.hidden, 32u);
  EXPECT_EQ(cfg.model.layers, 2u);
  EXPECT_FALSE(cfg.local_bonds);
  EXPECT_DOUBLE_EQ(cfg.dl, 1.5);
  EXPECT_EQ(cfg.model.order, BlockOrder::LocalFirst);
  EXPECT_EQ(cfg.loss, LossKind::Mse);
  EXPECT_EQ(cfg.bench_degrees, (std::vector<double>{4, 8, 16}));
  EXPECT_EQ(cfg.target, "gap");
}

TEST(Config, RelativePathsResolveAgainstBase) {
  const auto cfg = parse("manifest = m.txt\natomrefs = /abs/refs.txt\nout = results\n", "/cfg/dir");
  EXPECT_EQ(cfg.manifest, std::filesystem::path("/cfg/dir/m.txt"));
  EXPECT_EQ(*cfg.atomrefs, std::filesystem::path("/abs/refs.txt"));
  EXPECT_EQ(cfg.out, std::filesystem::path("results"));
}

TEST(Config, ReadConfigUsesFileDirectory) {
  const auto cfg = read_config(support::fixture("verify.cfg"));
  EXPECT_EQ(cfg.manifest, support::fixture("manifest.txt"));
  EXPECT_TRUE(std::filesystem::exists(cfg.manifest));
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    parse("hidden = 8\nhiden = 9\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("hiden"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedValuesRejected) {
  EXPECT_THROW(parse("hidden = 3.5\n"), ConfigError);
  EXPECT_THROW(parse("hidden = -1\n"), ConfigError);
  EXPECT_THROW(parse("lr = fast\n"), ConfigError);
  EXPECT_THROW(parse("lr = 1e-3x\n"), ConfigError);
  EXPECT_THROW(parse("local_rule = both\n"), ConfigError);
  EXPECT_THROW(parse("order = sideways\n"), ConfigError);
  EXPECT_THROW(parse("global_excludes_local = maybe\n"), ConfigError);
  EXPECT_THROW(parse("just a line\n"), ConfigError);
  EXPECT_THROW(parse("bench_nodes = 1,,2\n"), ConfigError);
}

TEST(Config, ValidationCatchesBadFields) {
  EXPECT_NE(error_of("hidden = 0\n"), "");
  EXPECT_NE(error_of("layers = 0\n"), "");
  EXPECT_NE(error_of("group = 0\n"), "");
  EXPECT_NE(error_of("lr = 0\n"), "");
  EXPECT_NE(error_of("dg = 0\n"), "");
  EXPECT_NE(error_of("local_rule = cutoff\ndl = 6\ndg = 5\n"), "");
  EXPECT_NE(error_of("split_test = 0\n"), "");
  EXPECT_NE(error_of("split_train = 0.9\nsplit_validation = 0.2\n"), "");
  EXPECT_NE(error_of("ema_decay = 1\n"), "");
  EXPECT_NE(error_of("bench_degrees = 0\n"), "");
  EXPECT_NE(error_of("target = \n"), "");
  // the bond rule ignores dl, so dl >= dg is fine there
  EXPECT_EQ(error_of("dl = 6\ndg = 5\n"), "");
}

TEST(Config, FeatureAndTrainingViews) {
  const auto cfg = parse("local_rule = cutoff\ndl = 1.7\ndg = 4.5\nglobal_excludes_local = true\n"
                         "local_basis_cutoff = 3\ngroup = 4\nlr = 5e-4\nepochs = 7\n"
                         "patience = 3\nseed = 11\ndecay_epochs = 50\nema_decay = 0.9\n");
  const auto f = cfg.features();
  EXPECT_FALSE(f.graph.local.use_bonds);
  EXPECT_DOUBLE_EQ(f.graph.local.cutoff, 1.7);
  EXPECT_DOUBLE_EQ(f.graph.global_cutoff, 4.5);
  EXPECT_TRUE(f.graph.global_excludes_local);
  EXPECT_DOUBLE_EQ(f.local_cutoff(), 1.7);

  const auto t = cfg.training();
  EXPECT_EQ(t.group, 4u);
  EXPECT_DOUBLE_EQ(t.base_lr, 5e-4);
  EXPECT_EQ(t.epochs, 7u);
  EXPECT_EQ(t.patience, 3u);
  EXPECT_EQ(t.seed, 11u);
  EXPECT_DOUBLE_EQ(t.schedule.decay_epochs, 50.0);
  EXPECT_DOUBLE_EQ(t.ema_decay, 0.9);
}

TEST(Config, EveryKeyIsSettable) {
  // a value that parses for each key
  const std::map<std::string, std::string> sample = {
      {"manifest", "m"},        {"target", "U0"},        {"atomrefs", "a"},
      {"split_train", "0.5"},   {"split_validation", "0.2"}, {"split_test", "0.2"},
      {"local_rule", "bonds"},  {"dl", "1"},             {"dg", "4"},
      {"local_basis_cutoff", "4"}, {"global_excludes_local", "false"},
      {"hidden", "4"},          {"layers", "1"},         {"residuals", "1"},
      {"order", "global_first"}, {"group", "1"},         {"lr", "0.1"},
      {"epochs", "1"},          {"patience", "1"},       {"seed", "1"},
      {"loss", "mae"},          {"warmup_epochs", "0"},  {"decay_epochs", "1"},
      {"ema_decay", "0.5"},     {"verify_pairs", "p"},   {"verify_rigid_trials", "1"},
      {"verify_permutation_trials", "1"}, {"bench_nodes", "8"}, {"bench_degrees", "2"},
      {"bench_repeats", "1"},   {"out", "o"}};
  for (const auto &key : config_keys()) {
    ASSERT_TRUE(sample.count(key)) << key;
    RunConfig cfg;
    EXPECT_NO_THROW(cfg.set(key, sample.at(key))) << key;
  }
  EXPECT_EQ(config_keys().size(), sample.size());
}
