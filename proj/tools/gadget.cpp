// Copyright 2026 The Gadget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gadget: command-line driver for every pipeline stage. Each stage reads and
// writes plain files (PNG, JSON, CSV) so stages can be chained or rerun.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gadget/gadget.hpp"

namespace fs = std::filesystem;
using namespace gadget;

namespace {

struct Common {
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_common(CLI::App* app, Common& c, bool with_jobs = true) {
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  if (with_jobs) app->add_option("--jobs", c.jobs, "Worker threads; output does not depend on it")->capture_default_str()->check(CLI::PositiveNumber);
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Regenerates a synthetic dataset from the spec.json next to its manifest.
eval::SynthDataset load_synth_dir(const fs::path& dir) {
  eval::SynthSpec spec = store::read_json_file(dir / "spec.json").get<eval::SynthSpec>();
  eval::SynthDataset ds = eval::synth_dataset(spec);
  const auto m = store::load_manifest(dir / "manifest.json");
  if (m.images.size() != ds.images.size()) {
    throw InvalidArgument(dir.string() + ": manifest does not match spec.json");
  }
  return ds;
}

std::vector<std::pair<std::string, GrayImage>> load_images(const store::DatasetManifest& m) {
  std::vector<std::pair<std::string, GrayImage>> out;
  out.reserve(m.images.size());
  for (const auto& r : m.images) out.emplace_back(r.id, store::load_image(m, r.id));
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_dev(const fs::path& out, const eval::SynthDataset& ds, const fs::path& data_dir,
               const eval::CrowdOutcome& crowd) {
  store::persist_patterns(out, crowd.patterns);
  store::DatasetManifest dm;
  dm.name = ds.spec.name + "-dev";
  dm.task_type = ds.binary() ? store::TaskType::Binary : store::TaskType::MultiClass;
  dm.classes = ds.classes;
  dm.base_dir = data_dir;
  std::vector<store::LabelRow> rows;
  for (const auto& e : crowd.dev.entries()) {
    dm.images.push_back({e.image_id, "images/" + e.image_id + ".png", e.gold_label});
    rows.push_back({e.image_id, e.gold_label});
  }
  store::save_manifest(dm, out / annotate::kDevManifestFile);
  store::write_labels_csv(out / annotate::kDevLabelsFile, rows);
}

// synth ----------------------------------------------------------------------

void add_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic defect dataset");
  static Common c;
  static eval::SynthSpec spec;
  static std::string spec_file, shapes, out;
  add_common(cmd, c, false);
  cmd->add_option("--spec", spec_file, "JSON spec; flags below are ignored when given");
  cmd->add_option("--name", spec.name)->capture_default_str();
  cmd->add_option("--count", spec.count)->capture_default_str();
  cmd->add_option("--defect-rate", spec.defect_rate)->capture_default_str();
  cmd->add_option("--width", spec.width)->capture_default_str();
  cmd->add_option("--height", spec.height)->capture_default_str();
  cmd->add_option("--shapes", shapes, "Comma list of scratch, bubble, stamping");
  cmd->add_option("--noise", spec.noise)->capture_default_str();
  cmd->add_flag("--multiclass", spec.multiclass, "One class per defect shape");
  cmd->add_option("--out", out, "Output directory")->required();
  cmd->callback([] {
    eval::SynthSpec s = spec;
    if (!spec_file.empty()) {
      s = store::read_json_file(spec_file).get<eval::SynthSpec>();
    } else {
      s.seed = c.seed;
      if (!shapes.empty()) {
        s.shapes.clear();
        for (const auto& v : split_list(shapes)) s.shapes.push_back(eval::parse_defect_shape(v));
      }
      s.validate();
    }
    const auto ds = eval::synth_dataset(s);
    eval::write_synth(ds, out);
    std::size_t defects = 0;
    for (const auto& im : ds.images) defects += im.boxes.empty() ? 0 : 1;
    std::cout << "synth " << s.name << ": " << ds.images.size() << " images, " << defects << " defective, classes";
    for (const auto& k : ds.classes) std::cout << ' ' << k;
    std::cout << "\nwrote " << out << '\n';
  });
}

// annotate-serve -------------------------------------------------------------

void add_annotate_serve(CLI::App& app) {
  auto* cmd = app.add_subcommand("annotate-serve", "Serve the annotation HTTP API over a manifest");
  static Common c;
  static std::string manifest, out, strategy = "average", static_dir;
  static annotate::SessionConfig scfg;
  static annotate::ServerOptions sopt;
  add_common(cmd, c, false);
  cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  cmd->add_option("--out", out, "Directory for patterns and the development set")->required();
  cmd->add_option("--threshold", scfg.defect_threshold, "Defective images to collect")->capture_default_str();
  cmd->add_option("--iou", scfg.iou_threshold)->capture_default_str();
  cmd->add_option("--quorum", scfg.quorum, "Review votes per item")->capture_default_str();
  cmd->add_option("--strategy", strategy, "average, union or intersection")->capture_default_str();
  cmd->add_option("--workers-per-task", scfg.workers_per_task)->capture_default_str();
  cmd->add_option("--host", sopt.host)->capture_default_str();
  cmd->add_option("--port", sopt.port, "0 picks a free port")->capture_default_str();
  cmd->add_option("--static", static_dir, "Directory served at /");
  cmd->add_flag("--exit-when-done", sopt.exit_when_done);
  cmd->callback([] {
    annotate::SessionConfig s = scfg;
    s.strategy = annotate::parse_strategy(strategy);
    s.seed = c.seed;
    s.out_dir = out;
    annotate::AnnotationSession session(store::load_manifest(manifest), s);
    annotate::ServerOptions o = sopt;
    o.static_dir = static_dir;
    annotate::AnnotationServer server(session, o);
    const int port = server.bind();
    std::cout << "listening on " << o.host << ':' << port << std::endl;
    server.run();
    std::cout << "session " << (session.done() ? "complete" : "stopped") << ", " << session.patterns().size()
              << " patterns, " << session.dev_set().entries().size() << " development images\n";
  });
}

// simulate-crowd -------------------------------------------------------------

void add_simulate_crowd(CLI::App& app) {
  auto* cmd = app.add_subcommand("simulate-crowd", "Annotate a synthetic dataset with simulated workers");
  static Common c;
  static std::string data, out, strategy = "average", review = "truthful";
  static annotate::SessionConfig scfg = eval::PipelineConfig{}.session;
  static eval::CrowdConfig ccfg;
  add_common(cmd, c, false);
  cmd->add_option("--data", data, "Directory written by synth")->required();
  cmd->add_option("--out", out, "Output directory")->required();
  cmd->add_option("--threshold", scfg.defect_threshold)->capture_default_str();
  cmd->add_option("--strategy", strategy)->capture_default_str();
  cmd->add_option("--workers", ccfg.workers)->capture_default_str();
  cmd->add_option("--jitter", ccfg.jitter)->capture_default_str();
  cmd->add_option("--miss-rate", ccfg.miss_rate)->capture_default_str();
  cmd->add_option("--spurious-rate", ccfg.spurious_rate)->capture_default_str();
  cmd->add_option("--review", review, "truthful or accept-all")->capture_default_str();
  cmd->add_flag("--annotate-all", ccfg.annotate_all, "Annotate every image");
  cmd->callback([] {
    const auto ds = load_synth_dir(data);
    eval::PipelineConfig p;
    p.session = scfg;
    p.session.strategy = annotate::parse_strategy(strategy);
    p.crowd = ccfg;
    if (review == "accept-all") {
      p.crowd.review = eval::ReviewBehavior::AcceptAll;
    } else if (review != "truthful") {
      throw InvalidArgument("--review must be truthful or accept-all");
    }
    p.seed = c.seed;
    const auto crowd = eval::annotate_stage(ds, p);
    write_dev(out, ds, data, crowd);
    std::cout << "crowd: " << crowd.tasks << " tasks, " << crowd.review_items << " review votes, "
              << crowd.dev.entries().size() << " development images (" << crowd.dev.defect_count() << " defective), "
              << crowd.patterns.size() << " patterns\nwrote " << out << '\n';
  });
}

// augment --------------------------------------------------------------------

void add_augment(CLI::App& app) {
  auto* cmd = app.add_subcommand("augment", "Add policy and GAN patterns to a pattern set");
  static Common c;
  static std::string patterns, dev_manifest, out, mode = "both", optimizer = "adam";
  static augment::AugmentConfig acfg = eval::PipelineConfig{}.augment;
  add_common(cmd, c);
  cmd->add_option("--patterns", patterns, "Pattern directory")->required();
  cmd->add_option("--dev-manifest", dev_manifest, "Development-set manifest with labels")->required();
  cmd->add_option("--out", out, "Output pattern directory")->required();
  cmd->add_option("--mode", mode, "none, policy, gan or both")->capture_default_str();
  cmd->add_option("--budget", acfg.budget, "Augmented patterns per mode and class")->capture_default_str();
  cmd->add_option("--per-policy-cap", acfg.search.per_policy_cap)->capture_default_str();
  cmd->add_option("--gan-optimizer", optimizer, "adam or sgd")->capture_default_str();
  cmd->add_option("--gan-epochs", acfg.gan.epochs)->capture_default_str();
  cmd->callback([] {
    augment::AugmentConfig a = acfg;
    a.mode = augment::parse_augment_mode(mode);
    a.gan.optimizer = augment::parse_gan_optimizer(optimizer);
    a.jobs = c.jobs;
    const auto originals = store::load_patterns(patterns);
    const auto m = store::load_manifest(dev_manifest);
    const auto images = load_images(m);
    std::vector<augment::LabeledImage> dev;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (!m.images[i].label) throw InvalidArgument("development manifest lacks a label for '" + m.images[i].id + "'");
      dev.push_back({images[i].first, &images[i].second, *m.images[i].label});
    }
    Rng rng(c.seed);
    const auto r = augment::augment(originals, dev, m.classes, a, rng);
    store::persist_patterns(out, r.patterns);
    std::cout << "augment " << augment::to_string(a.mode) << ": " << originals.size() << " original, "
              << r.patterns.size() - originals.size() << " added";
    if (r.combo) std::cout << ", policy combo " << r.combo->name() << " (held-out F1 " << fmt4(r.combo->f1) << ")";
    std::cout << "\nwrote " << out << '\n';
  });
}

// featurize ------------------------------------------------------------------

void add_featurize(CLI::App& app) {
  auto* cmd = app.add_subcommand("featurize", "Best pattern similarity per image and pattern");
  static Common c;
  static std::string manifest, patterns, out;
  static match::PyramidConfig pcfg;
  add_common(cmd, c);
  cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  cmd->add_option("--patterns", patterns, "Pattern directory")->required();
  cmd->add_option("--out", out, "Feature CSV")->required();
  cmd->add_option("--levels", pcfg.levels, "Pyramid levels (0 = auto)")->capture_default_str();
  cmd->add_option("--candidates", pcfg.candidates, "Coarse candidates refined per level")->capture_default_str();
  cmd->callback([] {
    const auto m = store::load_manifest(manifest);
    const auto images = load_images(m);
    const auto pats = store::load_patterns(patterns);
    store::FeatureTable t;
    for (const auto& p : pats) t.pattern_ids.push_back(p.id);
    t.rows = match::featurize(images, pats, pcfg, c.jobs);
    store::write_features_csv(out, t);
    std::cout << "featurize: " << t.rows.size() << " images x " << t.pattern_ids.size() << " patterns\nwrote " << out
              << '\n';
  });
}

// tune -----------------------------------------------------------------------

std::vector<FeatureVector> select_features(const store::FeatureTable& t, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < t.rows.size(); ++i) at.emplace(t.rows[i].image_id, i);
  std::vector<FeatureVector> out;
  for (const auto& id : ids) {
    const auto it = at.find(id);
    if (it == at.end()) throw InvalidArgument("no feature row for image '" + id + "'");
    out.push_back(t.rows[it->second]);
  }
  return out;
}

void add_tune(CLI::App& app) {
  auto* cmd = app.add_subcommand("tune", "Select and train the labeler on the development set");
  static Common c;
  static std::string features, labels, manifest, classes, out, scores;
  static int max_layers = 3;
  add_common(cmd, c);
  cmd->add_option("--features", features, "Feature CSV")->required();
  cmd->add_option("--labels", labels, "Development labels CSV")->required();
  cmd->add_option("--manifest", manifest, "Manifest that defines the class order");
  cmd->add_option("--classes", classes, "Comma list of classes, normal class first");
  cmd->add_option("--max-layers", max_layers)->capture_default_str();
  cmd->add_option("--out", out, "Model JSON")->required();
  cmd->add_option("--scores", scores, "Per-architecture CSV");
  cmd->callback([] {
    std::vector<std::string> k;
    if (!classes.empty()) {
      k = split_list(classes);
    } else if (!manifest.empty()) {
      k = store::load_manifest(manifest).classes;
    } else {
      throw InvalidArgument("tune needs --classes or --manifest");
    }
    const auto table = store::read_features_csv(features);
    std::vector<std::string> ids, gold;
    for (const auto& r : store::read_labels_csv(labels)) {
      ids.push_back(r.image_id);
      gold.push_back(r.label);
    }
    const auto rows = select_features(table, ids);
    label::TrainConfig tcfg;
    tcfg.seed = c.seed;
    tcfg.jobs = c.jobs;
    label::TuneOptions opts;
    opts.grid = label::architecture_grid(static_cast<int>(table.pattern_ids.size()), static_cast<int>(k.size()),
                                         max_layers);
    const auto r = label::tune(label::to_matrix(rows), label::encode_labels(gold, k), k, tcfg,
                               table.column_names(), opts);
    label::save_model(r.model, out);
    if (!scores.empty()) {
      std::ostringstream os;
      os << "architecture,cv_f1,selected\n";
      for (const auto& s : r.scores) {
        os << s.arch.name() << ',' << store::format_double(s.cv_f1) << ',' << (s.arch == r.best ? 1 : 0) << '\n';
      }
      store::write_text_file(scores, os.str());
    }
    std::cout << "tune: " << r.scores.size() << " architectures, selected " << r.best.name() << " (cv F1 "
              << fmt4(r.cv_f1) << ", " << r.model.iterations << " iterations)\nwrote " << out << '\n';
  });
}

// label ----------------------------------------------------------------------

void add_label(CLI::App& app) {
  auto* cmd = app.add_subcommand("label", "Weak-label images with a trained labeler");
  static std::string model, features, exclude, out;
  cmd->add_option("--model", model, "Model JSON")->required();
  cmd->add_option("--features", features, "Feature CSV")->required();
  cmd->add_option("--exclude", exclude, "Labels CSV of images to skip (the development set)");
  cmd->add_option("--out", out, "Weak-label CSV")->required();
  cmd->callback([] {
    const auto m = label::load_model(model);
    const auto table = store::read_features_csv(features);
    // Reorder columns to the model's feature order.
    const auto names = table.column_names();
    std::vector<std::size_t> col;
    for (const auto& f : m.feature_names) {
      const auto it = std::find(names.begin(), names.end(), f);
      if (it == names.end()) throw InvalidArgument("feature CSV lacks column '" + f + "'");
      col.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    std::set<std::string> skip;
    if (!exclude.empty()) {
      for (const auto& r : store::read_labels_csv(exclude)) skip.insert(r.image_id);
    }
    std::vector<FeatureVector> rows;
    for (const auto& r : table.rows) {
      if (skip.contains(r.image_id)) continue;
      FeatureVector f{r.image_id, {}};
      for (std::size_t j : col) f.values.push_back(r.values[j]);
      rows.push_back(std::move(f));
    }
    const auto weak = label::predict(m, rows);
    store::write_weak_labels_csv(out, weak, m.classes);
    std::map<std::string, std::size_t> counts;
    for (const auto& w : weak) ++counts[w.predicted_class];
    std::cout << "label: " << weak.size() << " images";
    for (const auto& [k, n] : counts) std::cout << ", " << k << ' ' << n;
    std::cout << "\nwrote " << out << '\n';
  });
}

// evaluate -------------------------------------------------------------------

eval::LabelMap gold_for(const store::DatasetManifest& m, const std::vector<WeakLabel>& weak) {
  std::map<std::string, std::string> all;
  for (const auto& r : m.images) {
    if (r.label) all.emplace(r.id, *r.label);
  }
  eval::LabelMap gold;
  for (const auto& w : weak) {
    const auto it = all.find(w.image_id);
    if (it == all.end()) throw InvalidArgument("manifest has no gold label for '" + w.image_id + "'");
    gold.emplace(w.image_id, it->second);
  }
  return gold;
}

void add_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Score weak labels against gold labels");
  static std::string weak_labels, manifest, out;
  cmd->add_option("--weak-labels", weak_labels, "Weak-label CSV")->required();
  cmd->add_option("--manifest", manifest, "Manifest with gold labels")->required();
  cmd->add_option("--out", out, "Metrics CSV");
  cmd->callback([] {
    const auto m = store::load_manifest(manifest);
    const auto [classes, weak] = store::read_weak_labels_csv(weak_labels);
    const auto gold = gold_for(m, weak);
    eval::LabelMap predicted;
    for (const auto& w : weak) predicted.emplace(w.image_id, w.predicted_class);
    std::ostringstream os, text;
    os << "class,precision,recall,f1\n";
    const std::size_t first = m.classes.size() == 2 ? 1 : 0;
    for (std::size_t k = first; k < m.classes.size(); ++k) {
      const auto pr = eval::f1(gold, predicted, m.classes[k]);
      os << m.classes[k] << ',' << store::format_double(pr.precision) << ',' << store::format_double(pr.recall) << ','
         << store::format_double(pr.f1) << '\n';
      text << "  " << m.classes[k] << "  P " << fmt4(pr.precision) << "  R " << fmt4(pr.recall) << "  F1 "
           << fmt4(pr.f1) << '\n';
    }
    double task = 0.0;
    if (m.classes.size() == 2) {
      task = eval::f1(gold, predicted, m.classes[1]).f1;
    } else {
      task = eval::macro_f1(gold, predicted, m.classes);
    }
    os << "task,,," << store::format_double(task) << '\n';
    if (!out.empty()) store::write_text_file(out, os.str());
    std::cout << "evaluate: " << weak.size() << " images, task F1 " << fmt4(task) << '\n' << text.str();
  });
}

// ablate ---------------------------------------------------------------------

void add_ablate(CLI::App& app) {
  auto* cmd = app.add_subcommand("ablate", "Run one ablation over synthetic datasets");
  static Common c;
  static std::string kind, out, mode = "both";
  static std::vector<std::string> data;
  static eval::PipelineConfig base;
  add_common(cmd, c);
  cmd->add_option("--kind", kind, "workflow, strategy, augment or tuning")->required();
  cmd->add_option("--data", data, "Directories written by synth (repeatable)")->required();
  cmd->add_option("--threshold", base.session.defect_threshold)->capture_default_str();
  cmd->add_option("--mode", mode, "Augmentation for non-augment ablations: none, policy, gan or both")
      ->capture_default_str();
  cmd->add_option("--budget", base.augment.budget)->capture_default_str();
  cmd->add_option("--gan-epochs", base.augment.gan.epochs)->capture_default_str();
  cmd->add_option("--out", out, "Report CSV")->required();
  cmd->callback([] {
    std::vector<eval::SynthDataset> sets;
    for (const auto& d : data) sets.push_back(load_synth_dir(d));
    eval::PipelineConfig p = base;
    p.augment.mode = augment::parse_augment_mode(mode);
    p.seed = c.seed;
    p.jobs = c.jobs;
    const auto report = eval::run_ablation(eval::parse_ablation_kind(kind), sets, p);
    store::write_text_file(out, report.to_csv());
    std::cout << report.summary() << "wrote " << out << '\n';
  });
}

// tipping --------------------------------------------------------------------

void add_tipping(CLI::App& app) {
  auto* cmd = app.add_subcommand("tipping", "Development-set size at which gold labels match weak labels");
  static Common c;
  static std::string data, sizes, out;
  static eval::TippingConfig tcfg;
  add_common(cmd, c);
  cmd->add_option("--data", data, "Directory written by synth (default: a generated scarce-defect set)");
  cmd->add_option("--sizes", sizes, "Comma list of development sizes, ascending");
  cmd->add_option("--test-fraction", tcfg.test_fraction)->capture_default_str();
  cmd->add_option("--threshold", tcfg.pipeline.session.defect_threshold)->capture_default_str();
  cmd->add_option("--out", out, "Curve CSV")->required();
  cmd->callback([] {
    eval::TippingConfig t = tcfg;
    t.seed = c.seed;
    t.pipeline.jobs = c.jobs;
    if (!sizes.empty()) {
      t.sizes.clear();
      for (const auto& s : split_list(sizes)) t.sizes.push_back(static_cast<std::size_t>(std::stoull(s)));
    }
    const auto ds = data.empty() ? eval::synth_dataset(eval::tipping_synth_spec(c.seed)) : load_synth_dir(data);
    const auto r = eval::tipping_point(ds, t);
    store::write_text_file(out, eval::tipping_to_csv(r));
    std::cout << "tipping: " << r.annotated << " annotated, " << r.weak_labeled << " weak-labeled (labeler F1 "
              << fmt4(r.labeler_f1) << ")\n  weak-label end model F1 " << fmt4(r.weak_label_f1) << '\n';
    for (const auto& row : r.curve) std::cout << "  dev-only " << row.size << "  F1 " << fmt4(row.dev_only_f1) << '\n';
    std::cout << "  tipping multiplier " << r.multiplier_text() << "\nwrote " << out << '\n';
  });
}

// tag-errors -----------------------------------------------------------------

void add_tag_errors(CLI::App& app) {
  auto* cmd = app.add_subcommand("tag-errors", "Sort weak-label errors into matching failures and the rest");
  static std::string data, weak_labels, features, out;
  static double threshold = -1.0;
  cmd->add_option("--data", data, "Directory written by synth")->required();
  cmd->add_option("--weak-labels", weak_labels, "Weak-label CSV")->required();
  cmd->add_option("--features", features, "Feature CSV")->required();
  cmd->add_option("--threshold", threshold, "Similarity threshold (default: highest over defect-free images)");
  cmd->add_option("--out", out, "Error CSV")->required();
  cmd->callback([] {
    const auto m = store::load_manifest(fs::path(data) / "manifest.json");
    const auto [classes, weak] = store::read_weak_labels_csv(weak_labels);
    const auto gold = gold_for(m, weak);
    eval::LabelMap predicted;
    for (const auto& w : weak) predicted.emplace(w.image_id, w.predicted_class);
    const auto boxes = eval::read_gold_boxes(fs::path(data) / eval::kGoldBoxesFile);
    const auto table = store::read_features_csv(features);
    std::optional<double> th;
    if (threshold >= 0) th = threshold;
    const auto tags = eval::tag_errors(gold, predicted, boxes, table.rows, th);
    store::write_text_file(out, eval::error_tags_to_csv(tags));
    std::cout << "tag-errors: " << tags.total() << " errors, threshold " << fmt4(tags.threshold) << "\n  matching_failure "
              << tags.count(eval::ErrorCategory::MatchingFailure) << "\n  unresolved "
              << tags.count(eval::ErrorCategory::Unresolved) << "\nwrote " << out << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gadget: weak labeling for defect images from crowd-drawn patterns"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress log messages on stderr");
  add_synth(app);
  add_annotate_serve(app);
  add_simulate_crowd(app);
  add_augment(app);
  add_featurize(app);
  add_tune(app);
  add_label(app);
  add_evaluate(app);
  add_ablate(app);
  add_tipping(app);
  add_tag_errors(app);
  app.parse_complete_callback([&] {
    if (quiet) set_log_sink({});
  });
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gadget::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
