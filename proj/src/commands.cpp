#include "mxm/commands.hpp"

#include "mxm/bench.hpp"
#include "mxm/checkpoint.hpp"
#include "mxm/dataset.hpp"
#include "mxm/parallel.hpp"
#include "mxm/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace mxm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::ofstream open_output(const fs::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

Dataset load_data(const RunConfig &cfg) {
  if (cfg.manifest.empty())
    throw ConfigError("no dataset manifest configured");
  return load_manifest(cfg.manifest);
}

void write_rbf(const fs::path &path, const ad::Index &src, const ad::Index &dst,
               const ad::Tensor &rbf) {
  auto out = open_output(path);
  out << "src,dst";
  for (std::size_t c = 0; c < rbf.cols(); ++c)
    out << ",rbf" << c;
  out << '\n';
  for (std::size_t e = 0; e < src.size(); ++e) {
    out << src[e] << ',' << dst[e];
    for (std::size_t c = 0; c < rbf.cols(); ++c)
      out << ',' << num(rbf.at(e, c));
    out << '\n';
  }
}

void write_sbf(const fs::path &path, const std::vector<AngleTriple> &triples,
               const ad::Tensor &sbf) {
  auto out = open_output(path);
  out << "first,center,last";
  for (std::size_t c = 0; c < sbf.cols(); ++c)
    out << ",sbf" << c;
  out << '\n';
  for (std::size_t t = 0; t < triples.size(); ++t) {
    out << triples[t].first << ',' << triples[t].center << ',' << triples[t].last;
    for (std::size_t c = 0; c < sbf.cols(); ++c)
      out << ',' << num(sbf.at(t, c));
    out << '\n';
  }
}

std::vector<Features> featurize_all(const std::vector<Molecule> &molecules,
                                    const FeatureOptions &opt) {
  std::vector<Features> out(molecules.size());
  parallel_for(molecules.size(), [&](std::size_t i) { out[i] = featurize(molecules[i], opt); });
  return out;
}

/// Regression targets for every molecule, after the optional reference
/// subtraction. Fails before any training if a molecule lacks the target.
std::vector<double> load_targets(const Dataset &ds, const RunConfig &cfg) {
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!ds.molecules[i].targets.count(cfg.target))
      throw std::runtime_error("molecule '" + ds.keys[i] + "' has no target '" + cfg.target +
                               "'");
  std::optional<AtomRefs> refs;
  if (cfg.atomrefs)
    refs = read_atomrefs(*cfg.atomrefs);
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    out[i] = refs ? subtract_atomrefs(ds.molecules[i], cfg.target, *refs)
                  : ds.molecules[i].target(cfg.target);
  return out;
}

struct Prepared {
  Dataset data;
  std::vector<double> targets;
  std::vector<Features> features;

  std::vector<Sample> samples(const std::vector<std::size_t> &idx) const {
    std::vector<Sample> out;
    for (auto i : idx)
      out.push_back({&features[i], targets[i]});
    return out;
  }
};

Prepared prepare(const RunConfig &cfg) {
  cfg.validate();
  Prepared p;
  p.data = split_dataset(load_data(cfg), cfg.split, cfg.seed);
  p.targets = load_targets(p.data, cfg);
  p.features = featurize_all(p.data.molecules, cfg.features());
  return p;
}

double mean_abs_error(const MxmNet &net, const std::vector<Sample> &samples) {
  std::vector<double> truth;
  for (const auto &s : samples)
    truth.push_back(s.target);
  return metrics(predict_all(net, samples), truth, 0.0).mae;
}

/// Population std of the training-split targets; 0 when degenerate.
double training_sigma(const Prepared &p) {
  std::vector<double> values;
  for (auto i : p.data.split.train)
    values.push_back(p.targets[i]);
  try {
    return compute_stats(values).std;
  } catch (const DegenerateTarget &) {
    return 0.0;
  }
}

json optional_number(const std::optional<double> &v) {
  return v ? json(*v) : json(nullptr);
}

} // namespace

void cmd_featurize(const RunConfig &cfg, std::ostream &out) {
  cfg.validate();
  const auto ds = load_data(cfg);
  std::set<std::string> names;
  for (const auto &m : ds.molecules)
    if (!names.insert(m.name).second)
      throw std::runtime_error("duplicate molecule name '" + m.name +
                               "' would overwrite its feature files");
  const auto features = featurize_all(ds.molecules, cfg.features());

  fs::create_directories(cfg.out);
  auto summary = open_output(cfg.out / "featurize_summary.csv");
  summary << "name,atoms,local_edges,global_edges,two_hop,one_hop\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto &f = features[i];
    const auto &name = ds.molecules[i].name;
    const auto base = cfg.out / name;
    {
      auto dump = open_output(fs::path(base) += ".graph");
      write_graph_dump(dump, f.graph);
    }
    write_rbf(fs::path(base) += ".rbf_local.csv", f.local_src, f.local_dst, f.rbf_local);
    write_rbf(fs::path(base) += ".rbf_global.csv", f.global_src, f.global_dst, f.rbf_global);
    write_sbf(fs::path(base) += ".sbf_two_hop.csv", f.triples.two_hop, f.sbf_two_hop);
    write_sbf(fs::path(base) += ".sbf_one_hop.csv", f.triples.one_hop, f.sbf_one_hop);

    summary << name << ',' << f.n_atoms << ',' << f.local_src.size() << ','
            << f.global_src.size() << ',' << f.triples.two_hop.size() << ','
            << f.triples.one_hop.size() << '\n';
    out << "N=" << f.n_atoms << " El=" << f.local_src.size() << " Eg=" << f.global_src.size()
        << " T2=" << f.triples.two_hop.size() << " T1=" << f.triples.one_hop.size()
        << " name=" << name << '\n';
  }
}

TrainOutcome cmd_train(const RunConfig &cfg, std::ostream &out) {
  const auto p = prepare(cfg);
  const auto train = p.samples(p.data.split.train);
  const auto validation = p.samples(p.data.split.validation);

  Trainer trainer(cfg.model, cfg.training(), train, validation, cfg.seed);
  TrainOutcome result;
  result.report = trainer.run();
  const auto best = MxmNet::bind(cfg.model, trainer.best_params().clone());
  result.train_mae = mean_abs_error(best, train);
  result.val_mae = mean_abs_error(best, validation);

  fs::create_directories(cfg.out);
  {
    auto csv = open_output(cfg.out / "report.csv");
    result.report.write_csv(csv);
  }
  save_checkpoint(cfg.out / "checkpoint.bin", cfg.model, best.params());

  const auto &epochs = result.report.epochs;
  json summary = {
      {"target", cfg.target},
      {"atomrefs_subtracted", cfg.atomrefs.has_value()},
      {"seed", cfg.seed},
      {"train_size", train.size()},
      {"validation_size", validation.size()},
      {"test_size", p.data.split.test.size()},
      {"epochs_run", epochs.size()},
      {"best_epoch", result.report.best_epoch ? json(epochs[*result.report.best_epoch].epoch)
                                              : json(nullptr)},
      {"train_mae", result.train_mae},
      {"val_mae", result.val_mae},
  };
  auto js = open_output(cfg.out / "summary.json");
  js << summary.dump(2) << '\n';

  out << "trained " << epochs.size() << " epochs on " << train.size() << " molecules";
  if (result.report.best_epoch)
    out << ", best epoch " << epochs[*result.report.best_epoch].epoch;
  out << ", train_mae=" << num(result.train_mae) << " val_mae=" << num(result.val_mae) << '\n';
  return result;
}

void cmd_eval(const RunConfig &cfg, const fs::path &checkpoint, const std::string &split,
              std::ostream &out) {
  static const std::vector<std::string> names{"train", "validation", "test"};
  if (split != "all" && std::find(names.begin(), names.end(), split) == names.end())
    throw std::invalid_argument("unknown split '" + split +
                                "' (expected train, validation, test or all)");
  if (!fs::exists(checkpoint))
    throw std::runtime_error("checkpoint not found: " + checkpoint.string());
  auto ck = load_checkpoint(checkpoint);
  const auto net = MxmNet::bind(ck.config, std::move(ck.params));
  const auto p = prepare(cfg);
  const double sigma = training_sigma(p);

  const std::vector<std::size_t> *lists[] = {&p.data.split.train, &p.data.split.validation,
                                             &p.data.split.test};
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (split != "all" && split != names[k])
      continue;
    const auto samples = p.samples(*lists[k]);
    json line = {{"split", names[k]}, {"n", samples.size()}, {"target", cfg.target}};
    if (samples.empty()) {
      line["mae"] = nullptr;
      line["std_mae"] = nullptr;
      line["pearson_r"] = nullptr;
    } else {
      std::vector<double> truth;
      for (const auto &s : samples)
        truth.push_back(s.target);
      const auto m = metrics(predict_all(net, samples), truth, sigma);
      line["mae"] = m.mae;
      line["std_mae"] = optional_number(m.std_mae);
      line["pearson_r"] = optional_number(m.pearson_r);
    }
    out << line.dump() << '\n';
  }
}

bool cmd_verify(const RunConfig &cfg, std::ostream &out) {
  cfg.validate();
  const auto ds = load_data(cfg);
  std::vector<EquivalentPair> pairs;
  if (cfg.verify_pairs)
    pairs = read_equivalent_pairs(*cfg.verify_pairs);
  const auto results = run_verify(ds.molecules, pairs, cfg);

  std::ostringstream report;
  write_verify_report(report, results);
  fs::create_directories(cfg.out);
  open_output(cfg.out / "verify.txt") << report.str();
  out << report.str();
  return std::all_of(results.begin(), results.end(), [](const auto &r) { return r.passed; });
}

void cmd_bench(const RunConfig &cfg, std::ostream &out) {
  cfg.validate();
  BenchOptions opt;
  opt.nodes = cfg.bench_nodes;
  opt.degrees = cfg.bench_degrees;
  opt.repeats = cfg.bench_repeats;
  opt.dl = cfg.dl;
  opt.dg = cfg.dg;
  opt.seed = cfg.seed;
  const auto rows = run_bench(opt);
  const auto fits = fit_scaling(rows);

  fs::create_directories(cfg.out);
  {
    auto csv = open_output(cfg.out / "bench.csv");
    write_bench_csv(csv, rows);
  }
  auto csv = open_output(cfg.out / "scaling.csv");
  write_scaling_csv(csv, fits);
  for (const auto &f : fits)
    out << "N=" << f.nodes << " slope " << f.quantity << " vs " << f.versus << " = "
        << num(f.slope) << " (" << f.points << " points)\n";
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"mxmnet: multiplex molecular graph network"};
  app.require_subcommand(1);

  struct Overrides {
    std::string config;
    std::map<std::string, std::string> values;
  };
  Overrides ov;
  std::string checkpoint, split = "all";

  auto common = [&](CLI::App *cmd) {
    cmd->add_option("--config", ov.config, "key = value config file");
    for (const char *key : {"seed", "target", "dg", "dl", "layers", "hidden", "lr", "epochs",
                            "out", "manifest"})
      cmd->add_option_function<std::string>(
          std::string("--") + key, [&ov, key](const std::string &v) { ov.values[key] = v; },
          std::string("override '") + key + "' from the config");
  };
  auto *featurize = app.add_subcommand("featurize", "dump graphs and basis matrices");
  auto *train = app.add_subcommand("train", "train a model; writes checkpoint and report");
  auto *eval = app.add_subcommand("eval", "print metrics of a checkpoint as JSON lines");
  auto *verify = app.add_subcommand("verify", "run the property suite");
  auto *bench = app.add_subcommand("bench", "message-count scaling benchmark");
  for (auto *cmd : {featurize, train, eval, verify, bench})
    common(cmd);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/checkpoint.bin)");
  eval->add_option("--split", split, "train, validation, test or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg = ov.config.empty() ? RunConfig{} : read_config(ov.config);
    for (const auto &[key, value] : ov.values) {
      cfg.set(key, value);
      if (key == "dl")
        cfg.set("local_rule", "cutoff");
    }

    if (featurize->parsed()) {
      cmd_featurize(cfg, out);
    } else if (train->parsed()) {
      cmd_train(cfg, out);
    } else if (eval->parsed()) {
      cmd_eval(cfg, checkpoint.empty() ? cfg.out / "checkpoint.bin" : fs::path(checkpoint),
               split, out);
    } else if (verify->parsed()) {
      if (!cmd_verify(cfg, out)) {
        err << "verify: one or more checks failed\n";
        return 1;
      }
    } else if (bench->parsed()) {
      cmd_bench(cfg, out);
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace mxm
