/* Copyright 2026 The SCDNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line driver: synthetic data generation, preprocessing, training,
// sweeps, evaluation, prediction, live UDP capture and heatmaps.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scdnn/io/checkpoint.hpp"
#include "scdnn/io/dataset.hpp"
#include "scdnn/io/heatmap.hpp"
#include "scdnn/io/report.hpp"
#include "scdnn/io/text.hpp"
#include "scdnn/io/udp.hpp"
#include "scdnn/scdnn.hpp"

namespace fs = std::filesystem;
using namespace scdnn;

namespace {

std::atomic<bool> g_interrupted{false};

struct Globals {
  std::string data_dir;
  std::uint64_t seed = 1;
};

// Relative paths live under the data directory when one is configured.
fs::path resolve(const Globals& g, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || g.data_dir.empty()) return path;
  return fs::path(g.data_dir) / path;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::vector<SampleTensor> load_samples(const Globals& g, const std::string& p) {
  io::Dataset ds = io::load_dataset(resolve(g, p));
  if (ds.kind == io::Dataset::Kind::kFrames) ds = io::preprocess_dataset(ds);
  return std::move(ds.samples);
}

io::Dataset samples_dataset(const LabeledSet& set, DomainTag domain, const std::string& name) {
  io::Dataset ds;
  ds.kind = io::Dataset::Kind::kSamples;
  ds.domain = domain;
  ds.domain_name = name;
  for (std::size_t i = 0; i < set.size(); ++i) {
    SampleTensor s;
    const auto r = set.row(i);
    std::copy(r.begin(), r.end(), s.values.begin());
    if (!set.labels.empty()) s.label = activity_from_index(set.labels[i]);
    s.domain = domain;
    ds.samples.push_back(s);
  }
  return ds;
}

// Options shared by every command that trains.
struct TrainOptions {
  std::string source = "source_samples.scd";
  std::string target = "target_samples.scd";
  SplitSizes sizes;
  std::size_t epochs = 1000;
  std::size_t batch = 128;
  double lr = 0.001;
  double l2 = 1e-4;
  double momentum = 0.9;
  std::string arch = "reference";
  std::string schedule = "progressive";
  std::string lr_schedule = "constant";
  bool per_epoch_eval = false;

  void attach(CLI::App* c) {
    c->add_option("--source", source, "source samples (or frames) dataset");
    c->add_option("--target", target, "target samples (or frames) dataset");
    c->add_option("--labeled-per-class", sizes.labeled_per_class, "few-shot target samples per class");
    c->add_option("--unlabeled", sizes.unlabeled, "unlabeled target samples");
    c->add_option("--test", sizes.test, "target test samples");
    c->add_option("--epochs", epochs);
    c->add_option("--batch-size", batch);
    c->add_option("--lr", lr);
    c->add_option("--l2", l2);
    c->add_option("--momentum", momentum);
    c->add_option("--arch", arch, "reference | compact | c1,c2,h1,h2,d")
        ->default_str("reference");
    c->add_option("--grl-schedule", schedule, "progressive | constant:<lambda>");
    c->add_option("--lr-schedule", lr_schedule, "constant | cooldown (lr/10 for the last 10% of epochs)")
        ->check(CLI::IsMember({"constant", "cooldown"}));
    c->add_flag("--eval-each-epoch", per_epoch_eval, "record test metrics every epoch");
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch;
    c.learning_rate = lr;
    c.l2 = l2;
    c.momentum = momentum;
    c.seed = seed;
    c.evaluate_each_epoch = per_epoch_eval;
    if (arch == "reference") {
      c.architecture = Architecture::reference();
    } else if (arch == "compact") {
      c.architecture = Architecture::compact();
    } else {
      std::vector<std::size_t> w;
      std::stringstream ss(arch);
      for (std::string part; std::getline(ss, part, ',');) w.push_back(std::stoul(part));
      if (w.size() != 5) throw CLI::ValidationError("--arch", "expected five widths");
      c.architecture = {w[0], w[1], w[2], w[3], w[4]};
    }
    if (schedule == "progressive") {
      c.grl_schedule = GrlSchedule::progressive();
    } else if (schedule.rfind("constant:", 0) == 0) {
      c.grl_schedule = GrlSchedule::fixed(std::stod(schedule.substr(9)));
    } else {
      throw CLI::ValidationError("--grl-schedule", "unknown schedule " + schedule);
    }
    c.lr_schedule = lr_schedule == "cooldown" ? LrSchedule::cooldown() : LrSchedule::constant();
    c.validate();
    return c;
  }

  DataSplit split(const Globals& g) const {
    const auto src = load_samples(g, source);
    const auto tgt = load_samples(g, target);
    return make_split(src, tgt, sizes, g.seed);
  }
};

void print_epoch(const EpochRecord& r) {
  std::cerr << "epoch " << r.epoch << " lambda " << io::format_number(r.grl_lambda)
            << " src " << io::format_number(r.source_label_loss) << " tgt "
            << io::format_number(r.target_label_loss) << " dom "
            << io::format_number(r.domain_loss);
  if (r.test) std::cerr << " test_acc " << io::format_number(r.test->accuracy);
  std::cerr << '\n';
}

int cmd_gen(const Globals& g, const std::string& domain_name, std::optional<double> ambient,
            std::size_t per_class, const std::string& out, bool preprocess) {
  DomainSpec d;
  if (domain_name == "source") {
    d = DomainSpec::source();
  } else if (domain_name == "target") {
    d = DomainSpec::target();
  } else {
    throw CLI::ValidationError("--domain", "expected source or target");
  }
  if (ambient) d.ambient_celsius = *ambient;
  io::Dataset ds = io::dataset_from_streams(generate_dataset(d, per_class, g.seed), d);
  if (preprocess) ds = io::preprocess_dataset(ds);
  const fs::path path = resolve(g, out.empty() ? domain_name + (preprocess ? "_samples.scd" : "_frames.scd") : out);
  ensure_parent(path);
  io::save_dataset(path, ds);
  std::cout << "wrote " << path.string() << ": " << ds.record_count()
            << (preprocess ? " samples" : " frames") << '\n';
  return 0;
}

int cmd_preprocess(const Globals& g, const std::string& in, const std::string& out,
                   const FilterSpec& spec) {
  const io::Dataset frames = io::load_dataset(resolve(g, in));
  if (frames.kind != io::Dataset::Kind::kFrames) {
    throw std::runtime_error(in + " already holds samples");
  }
  FilterSpec s = spec;
  s.sample_rate_hz = frames.frame_rate_hz;
  const io::Dataset samples = io::preprocess_dataset(frames, s);
  const fs::path path = resolve(g, out);
  ensure_parent(path);
  io::save_dataset(path, samples);
  std::cout << "wrote " << path.string() << ": " << samples.samples.size() << " samples\n";
  return 0;
}

int cmd_train(const Globals& g, const TrainOptions& t, const std::string& mode,
              const std::string& out, const std::string& trainlog, const std::string& test_out) {
  const TrainConfig config = t.config(g.seed);
  const DataSplit split = t.split(g);
  TrainResult r;
  if (mode == "scdnn") {
    r = train_scdnn(split, config, print_epoch);
  } else if (mode == "dann") {
    r = train_dann_mode(split, config, print_epoch);
  } else if (mode == "source-only") {
    r = train_source_only(split.source_labeled, config, &split.target_test, print_epoch);
  } else {
    throw CLI::ValidationError("--mode", "expected scdnn, dann or source-only");
  }
  const fs::path path = resolve(g, out);
  ensure_parent(path);
  io::save_checkpoint(path, r.model,
                      {{"mode", mode},
                       {"epochs", std::to_string(config.epochs)},
                       {"batch_size", std::to_string(config.batch_size)},
                       {"learning_rate", io::format_number(config.learning_rate)},
                       {"l2", io::format_number(config.l2)},
                       {"momentum", io::format_number(config.momentum)},
                       {"grl_schedule", config.grl_schedule.name()},
                       {"lr_schedule", config.lr_schedule.name()}});
  const fs::path log = resolve(g, trainlog.empty() ? path.string() + ".trainlog.jsonl" : trainlog);
  ensure_parent(log);
  std::ofstream lf(log);
  io::write_trainlog(lf, r.history);
  if (!test_out.empty()) {
    const fs::path tp = resolve(g, test_out);
    ensure_parent(tp);
    io::save_dataset(tp, samples_dataset(split.target_test, DomainTag::kTarget, "target-test"));
  }
  const auto report = evaluate(r.model, split.target_test);
  std::cout << "checkpoint " << path.string() << " target test accuracy "
            << io::format_number(report.accuracy) << '\n';
  return 0;
}

int cmd_sweep(const Globals& g, const TrainOptions& t, bool labeled,
              const std::vector<std::size_t>& counts, const std::string& out) {
  const TrainConfig config = t.config(g.seed);
  const DataSplit split = t.split(g);
  const auto rows = labeled ? sweep_labeled(counts, split, config)
                            : sweep_unlabeled(counts, split, config, t.sizes.labeled_per_class);
  std::ostringstream csv;
  io::write_sweep_csv(csv, labeled ? "labeled_per_class" : "unlabeled", rows);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    const fs::path p = resolve(g, out);
    ensure_parent(p);
    std::ofstream(p) << csv.str();
    std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

int cmd_eval(const Globals& g, const std::string& ckpt, const std::string& data,
             const std::string& out) {
  const io::Checkpoint c = io::load_checkpoint(resolve(g, ckpt));
  const LabeledSet test = make_set(load_samples(g, data));
  const auto report = evaluate(c.model, test);
  const fs::path dir = resolve(g, out);
  fs::create_directories(dir);
  io::write_report(dir, report);
  std::cout << "accuracy " << io::format_number(report.accuracy) << " macro_f1 "
            << io::format_number(report.scores.macro_f1) << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_predict(const Globals& g, const std::string& ckpt, const std::string& data,
                const std::string& out) {
  const io::Checkpoint c = io::load_checkpoint(resolve(g, ckpt));
  const auto samples = load_samples(g, data);
  if (samples.empty()) throw std::runtime_error(data + " holds no samples");
  const Tensor probs = predict_probabilities(c.model, stack_samples(samples));
  std::ofstream file;
  if (!out.empty()) {
    const fs::path p = resolve(g, out);
    ensure_parent(p);
    file.open(p);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "index,predicted";
  for (auto name : kActivityNames) os << ",p_" << name;
  os << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double* row = probs.data() + i * kNumActivities;
    const auto best = std::max_element(row, row + kNumActivities) - row;
    os << i << ',' << name_of(activity_from_index(static_cast<int>(best)));
    for (std::size_t k = 0; k < kNumActivities; ++k) os << ',' << io::format_number(row[k]);
    os << '\n';
  }
  return 0;
}

int cmd_listen(const Globals& g, std::uint16_t port, const std::string& host, double seconds,
               std::size_t max_frames, const std::string& out) {
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  io::UdpListener listener(port, 1024, host);
  std::cerr << "listening on " << host << ':' << listener.port() << '\n';
  io::Dataset ds;
  ds.kind = io::Dataset::Kind::kFrames;
  ds.domain_name = "live";
  const auto start = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    if (seconds > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= seconds) {
      break;
    }
    if (max_frames > 0 && ds.frames.size() >= max_frames) break;
    if (auto f = listener.next(std::chrono::milliseconds(100))) ds.frames.push_back({*f, std::nullopt});
  }
  listener.stop();
  while (auto f = listener.next(std::chrono::milliseconds(0))) {
    if (max_frames > 0 && ds.frames.size() >= max_frames) break;
    ds.frames.push_back({*f, std::nullopt});
  }
  const auto c = listener.counters();
  std::cout << "received " << c.received << " rejected " << c.rejected << " dropped "
            << c.dropped << '\n';
  if (!out.empty()) {
    const fs::path p = resolve(g, out);
    ensure_parent(p);
    io::save_dataset(p, ds);
    std::cout << "wrote " << p.string() << ": " << ds.frames.size() << " frames\n";
  }
  return 0;
}

int cmd_heatmap(const Globals& g, const std::string& data, std::size_t index,
                const std::string& out) {
  const io::Dataset ds = io::load_dataset(resolve(g, data));
  if (index >= ds.record_count()) {
    throw std::out_of_range("record " + std::to_string(index) + " of " +
                            std::to_string(ds.record_count()));
  }
  const fs::path p = resolve(g, out);
  ensure_parent(p);
  if (ds.kind == io::Dataset::Kind::kFrames) {
    io::emit_heatmap(p, ds.frames[index].frame);
  } else {
    io::emit_heatmap(p, ds.samples[index]);
  }
  std::cout << "wrote " << p.string() << " and " << p.string() << ".csv\n";
  return 0;
}

int cmd_compare(const Globals& g, const TrainOptions& t, std::size_t k, const std::string& out) {
  const auto results = compare_methods(t.split(g), t.config(g.seed), k);
  std::ostringstream csv;
  io::write_comparison_csv(csv, results);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    const fs::path p = resolve(g, out);
    ensure_parent(p);
    std::ofstream(p) << csv.str();
    std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Semi-supervised cross-domain activity recognition on 8x8 thermal frames"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Globals g;
  app.add_option("--data-dir", g.data_dir, "base directory for relative paths")
      ->envname("SCDNN_DATA_DIR");
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();

  std::function<int()> run;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic frame dataset");
  std::string gen_domain = "source", gen_out;
  std::optional<double> gen_ambient;
  std::size_t gen_per_class = 905;
  bool gen_pre = false;
  gen->add_option("--domain", gen_domain, "source | target")->capture_default_str();
  gen->add_option("--ambient", gen_ambient, "ambient temperature override (C)");
  gen->add_option("--per-class", gen_per_class, "samples per activity")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset (default <domain>_frames.scd)");
  gen->add_flag("--preprocessed", gen_pre, "write preprocessed samples instead of frames");
  gen->callback([&] {
    run = [&] { return cmd_gen(g, gen_domain, gen_ambient, gen_per_class, gen_out, gen_pre); };
  });

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "background-subtract, filter and window frames");
  std::string pre_in, pre_out;
  FilterSpec spec;
  pre->add_option("--in", pre_in, "frame dataset")->required();
  pre->add_option("--out", pre_out, "sample dataset")->required();
  pre->add_option("--cutoff", spec.cutoff_hz, "low-pass cutoff (Hz)")->capture_default_str();
  pre->add_option("--order", spec.order, "Butterworth order")->capture_default_str();
  pre->callback([&] { run = [&] { return cmd_preprocess(g, pre_in, pre_out, spec); }; });

  // train
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  TrainOptions train_opts;
  std::string train_mode = "scdnn", train_out = "model.ckpt", train_log, train_test_out;
  train_opts.attach(train);
  train->add_option("--mode", train_mode, "scdnn | dann | source-only")->capture_default_str();
  train->add_option("--out", train_out, "checkpoint path")->capture_default_str();
  train->add_option("--trainlog", train_log, "epoch log (default <out>.trainlog.jsonl)");
  train->add_option("--test-out", train_test_out, "also save the target test split");
  train->callback([&] {
    run = [&] { return cmd_train(g, train_opts, train_mode, train_out, train_log, train_test_out); };
  });

  // sweeps
  auto* su = app.add_subcommand("sweep-unlabeled", "accuracy against unlabeled target count");
  TrainOptions su_opts;
  std::vector<std::size_t> su_counts{1160, 3480, 5944};
  std::string su_out;
  su_opts.attach(su);
  su->add_option("--counts", su_counts, "unlabeled counts")->delimiter(',');
  su->add_option("--out", su_out, "CSV output (default stdout)");
  su->callback([&] { run = [&] { return cmd_sweep(g, su_opts, false, su_counts, su_out); }; });

  auto* sl = app.add_subcommand("sweep-labeled", "accuracy against few-shot count per class");
  TrainOptions sl_opts;
  sl_opts.sizes.labeled_per_class = 10;
  std::vector<std::size_t> sl_counts{0, 2, 4, 10};
  std::string sl_out;
  sl_opts.attach(sl);
  sl->add_option("--counts", sl_counts, "labeled samples per class")->delimiter(',');
  sl->add_option("--out", sl_out, "CSV output (default stdout)");
  sl->callback([&] { run = [&] { return cmd_sweep(g, sl_opts, true, sl_counts, sl_out); }; });

  // eval / predict
  auto* ev = app.add_subcommand("eval", "write metrics for a checkpoint on labeled samples");
  std::string ev_ckpt, ev_data, ev_out = "report";
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--data", ev_data, "labeled sample dataset")->required();
  ev->add_option("--out", ev_out, "report directory")->capture_default_str();
  ev->callback([&] { run = [&] { return cmd_eval(g, ev_ckpt, ev_data, ev_out); }; });

  auto* pr = app.add_subcommand("predict", "class probabilities for every sample");
  std::string pr_ckpt, pr_data, pr_out;
  pr->add_option("--checkpoint", pr_ckpt)->required();
  pr->add_option("--data", pr_data, "sample or frame dataset")->required();
  pr->add_option("--out", pr_out, "CSV output (default stdout)");
  pr->callback([&] { run = [&] { return cmd_predict(g, pr_ckpt, pr_data, pr_out); }; });

  // listen
  auto* li = app.add_subcommand("listen", "capture wire frames from UDP");
  std::uint16_t li_port = 5005;
  std::string li_host = "0.0.0.0", li_out;
  double li_seconds = 0;
  std::size_t li_max = 0;
  li->add_option("--port", li_port)->capture_default_str();
  li->add_option("--host", li_host)->capture_default_str();
  li->add_option("--seconds", li_seconds, "stop after this long (0 = until SIGINT)");
  li->add_option("--max-frames", li_max, "stop after this many frames");
  li->add_option("--out", li_out, "frame dataset to write");
  li->callback([&] {
    run = [&] { return cmd_listen(g, li_port, li_host, li_seconds, li_max, li_out); };
  });

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "render one frame or sample as PGM plus CSV");
  std::string hm_data, hm_out = "heatmap.pgm";
  std::size_t hm_index = 0;
  hm->add_option("--data", hm_data)->required();
  hm->add_option("--index", hm_index)->capture_default_str();
  hm->add_option("--out", hm_out)->capture_default_str();
  hm->callback([&] { run = [&] { return cmd_heatmap(g, hm_data, hm_index, hm_out); }; });

  // comparison
  auto* cb = app.add_subcommand("compare-baselines", "KNN, source-only, DANN mode and SCDNN");
  TrainOptions cb_opts;
  std::size_t cb_k = 5;
  std::string cb_out;
  cb_opts.attach(cb);
  cb->add_option("--knn-k", cb_k)->capture_default_str();
  cb->add_option("--out", cb_out, "CSV output (default stdout)");
  cb->callback([&] { run = [&] { return cmd_compare(g, cb_opts, cb_k, cb_out); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return run();
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
