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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. `--only <name>` (repeatable) restricts the run.

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../mlp_oracle.hpp"
#include "../ncc_oracle.hpp"
#include "../test_util.hpp"
#include "CLI11.hpp"
#include "gadget/gadget.hpp"

namespace fs = std::filesystem;
using namespace gadget;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// NCC ------------------------------------------------------------------------

Outcome ncc_oracle() {
  Stopwatch sw;
  Rng r(1001);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int W = 1 + static_cast<int>(r.index(32)), H = 1 + static_cast<int>(r.index(32));
    const int w = 1 + static_cast<int>(r.index(std::min(8, W))), h = 1 + static_cast<int>(r.index(std::min(8, H)));
    const GrayImage img = fixture::random_image(r, W, H);
    const GrayImage pat = fixture::random_image(r, w, h);
    if (!(match::match_exhaustive(img, pat) == fixture::oracle_match(img, pat))) ++mismatches;
  }
  const double t = sw.seconds();
  return {mismatches == 0 && t < 30.0,
          std::to_string(mismatches) + " of 500 pairs differ from the brute-force oracle, " + fmt("%.2f s", t)};
}

Outcome pyramid_fidelity() {
  Rng r(1002);
  int close = 0, below = 0, above = 0;
  const int n = 200;
  for (int trial = 0; trial < n; ++trial) {
    const GrayImage img = fixture::smooth_random_image(r, 48 + static_cast<int>(r.index(81)),
                                                       48 + static_cast<int>(r.index(81)));
    const GrayImage pat = fixture::smooth_random_image(r, 12 + static_cast<int>(r.index(37)),
                                                       12 + static_cast<int>(r.index(37)));
    const double ex = match::match_exhaustive(img, pat).similarity;
    const double py = match::match_pyramid(img, pat).similarity;
    if (py > ex) ++above;
    if (py < ex - 0.05) ++below;
    if (std::abs(ex - py) <= 0.02) ++close;
  }
  eval::SynthSpec spec;
  spec.count = 200;
  spec.defect_rate = 0.5;
  spec.seed = 1002;
  const auto ds = eval::synth_dataset(spec);
  int planted = 0, found = 0;
  for (const auto& im : ds.images) {
    if (im.boxes.empty() || planted == 50) continue;
    const BoundingBox& b = im.boxes.front().box;
    const auto m = match::match_pyramid(im.image, im.image.crop(b.x0, b.y0, b.x1, b.y1));
    ++planted;
    if (m.similarity == 1.0 && m.x == b.x0 && m.y == b.y0) ++found;
  }
  const bool ok = close * 100 >= n * 95 && below == 0 && above == 0 && planted == 50 && found == 50;
  return {ok, std::to_string(close) + "/" + std::to_string(n) + " within 0.02, " + std::to_string(below) +
                  " below exhaustive-0.05, " + std::to_string(found) + "/" + std::to_string(planted) +
                  " planted copies at 1.0 and the right location"};
}

Outcome degeneracy() {
  const GrayImage zero_pat = GrayImage::filled(3, 3, 0.0);
  const GrayImage zero_img = GrayImage::filled(8, 8, 0.0);
  Rng r(1003);
  const GrayImage img = fixture::random_image(r, 8, 8);
  const GrayImage pat = fixture::random_image(r, 3, 3);
  const double a = match::ncc_at(img, zero_pat, 2, 2).value;
  const double b = match::ncc_at(zero_img, pat, 2, 2).value;
  const double c = match::match_exhaustive(zero_img, zero_pat).similarity;
  const double d = match::match_pyramid(zero_img, zero_pat).similarity;
  const bool ok = a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0;
  return {ok, "zero pattern " + fmt("%g", a) + ", zero window " + fmt("%g", b) + ", both zero " + fmt("%g", c) +
                  ", pyramid " + fmt("%g", d)};
}

// Metrics --------------------------------------------------------------------

Outcome f1_examples() {
  using eval::PrecisionRecall;
  const auto a = eval::f1(std::set<int>{1, 2, 3}, std::set<int>{2, 3, 4});
  const auto b = eval::f1(std::set<int>{1, 2, 3}, std::set<int>{1, 2, 3});
  const auto c = eval::f1(std::set<int>{1, 2, 3}, std::set<int>{});
  const bool ok = a == PrecisionRecall{2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0} && b == PrecisionRecall{1.0, 1.0, 1.0} &&
                  c == PrecisionRecall{0.0, 0.0, 0.0};
  return {ok, "overlap F1 " + fmt("%.17g", a.f1) + ", identical " + fmt("%g", b.f1) + ", empty prediction " +
                  fmt("%g", c.f1)};
}

// Labeler --------------------------------------------------------------------

Outcome labeler_gradients() {
  double worst = 0.0;
  std::string worst_arch;
  for (int seed = 0; seed < 10; ++seed) {
    Rng r(2000 + static_cast<std::uint64_t>(seed));
    const int layers = 1 + seed % 3;
    const int width = seed < 7 ? 2 << seed : 128;
    const label::MlpArchitecture a{4 + static_cast<int>(r.index(13)), std::vector<int>(layers, width),
                                   2 + static_cast<int>(r.index(3))};
    auto theta = label::glorot_init(a, r);
    for (double& t : theta) t += r.normal(0.0, 0.1);
    const int n = 6;
    label::Matrix x(n, a.inputs);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(static_cast<int>(r.index(static_cast<std::size_t>(a.outputs))));
    std::vector<double> g(theta.size());
    label::mlp_loss_grad(a, theta, x, y, 0.01, g);
    std::vector<std::vector<double>> xr(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < a.inputs; ++j) xr[i].push_back(x(i, j));
    // Every coordinate for small networks, a seeded sample of 400 otherwise.
    std::vector<std::size_t> coords;
    if (theta.size() <= 2000) {
      for (std::size_t k = 0; k < theta.size(); ++k) coords.push_back(k);
    } else {
      for (int k = 0; k < 400; ++k) coords.push_back(r.index(theta.size()));
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k : coords) {
      const double h = 1e-6;
      auto tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fd = (fixture::oracle_mlp_loss(a.sizes(), tp, xr, y, 0.01) -
                         fixture::oracle_mlp_loss(a.sizes(), tm, xr, y, 0.01)) / (2 * h);
      num += (fd - g[k]) * (fd - g[k]);
      den += std::max(fd * fd, g[k] * g[k]);
    }
    const double rel = den == 0.0 ? 0.0 : std::sqrt(num / den);
    if (rel >= worst) {
      worst = rel;
      worst_arch = a.name();
    }
  }
  return {worst < 1e-5, "worst relative error " + fmt("%.3g", worst) + " (" + worst_arch + ") over 10 seeds up to 3x128"};
}

eval::SynthDataset small_dataset() {
  eval::SynthSpec s;
  s.count = 300;
  s.defect_rate = 0.2;
  s.width = 32;
  s.height = 32;
  s.seed = 17;
  return eval::synth_dataset(s);
}

Outcome tuning_grid() {
  const auto g = label::architecture_grid(100, 2);
  std::set<std::pair<std::size_t, int>> seen, expected;
  for (const auto& a : g) seen.insert({a.hidden.size(), a.hidden.front()});
  for (std::size_t l = 1; l <= 3; ++l)
    for (int w = 2; w <= 128; w *= 2) expected.insert({l, w});
  const bool grid_ok = g.size() == 21 && seen == expected;

  const auto ds = small_dataset();
  eval::PipelineConfig cfg;
  cfg.session.defect_threshold = 40;
  cfg.augment.mode = augment::AugmentMode::None;
  cfg.seed = 17;
  const auto report = eval::tuning_ablation(std::span<const eval::SynthDataset>(&ds, 1), cfg);
  const double lo = report.row(ds.spec.name, "min").f1, sel = report.row(ds.spec.name, "selected").f1,
               hi = report.row(ds.spec.name, "max").f1;
  const bool contained = lo <= sel && sel <= hi;
  return {grid_ok && contained, std::to_string(g.size()) + " architectures for 100 inputs; weak F1 min " +
                                    fmt("%.4f", lo) + " <= selected " + fmt("%.4f", sel) + " <= max " +
                                    fmt("%.4f", hi)};
}

// RGAN -----------------------------------------------------------------------

std::vector<Pattern> toy_patterns(Rng& rng, int n, int w, int h) {
  std::vector<Pattern> out;
  for (int i = 0; i < n; ++i) {
    Pattern p;
    p.id = "t" + std::to_string(i);
    p.pixels = fixture::smooth_random_image(rng, w, h);
    p.original_size = p.pixels.size();
    p.defect_class = "defect";
    out.push_back(std::move(p));
  }
  return out;
}

double top_singular(const augment::GanMatrix& m) {
  return Eigen::JacobiSVD<augment::GanMatrix>(m).singularValues()(0);
}

Outcome rgan() {
  using namespace augment;
  Stopwatch sw;
  Rng rng(3001);
  const auto ps = toy_patterns(rng, 4, 7, 6);
  GanConfig cfg;
  cfg.hidden = 64;
  cfg.epochs = 50;
  auto r = train_rgan(ps, cfg, rng);
  const GanMatrix real = square_columns(ps, r.generator.side);

  // Critic fed the same batch as real and fake: both losses are -log(0.5).
  const double sym = std::abs(discriminator_loss_grad(r.discriminator, real, real).loss + std::log(0.5));
  const double s1 = top_singular(r.discriminator.normalized_W1()), s2 = top_singular(r.discriminator.normalized_W2());
  const bool sn = std::abs(s1 - 1.0) <= 1e-3 && std::abs(s2 - 1.0) <= 1e-3;

  const GanMatrix z = noise_matrix(r.generator.noise_dim(), real.cols(), rng);
  const auto lg = generator_loss_grad(r.generator, r.discriminator, real, z);
  GanVector& theta = r.generator.net.theta;
  double worst = 0.0;
  for (int s = 0; s < 300; ++s) {
    const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(theta.size())));
    const double keep = theta(i), h = 1e-6;
    theta(i) = keep + h;
    const double up = generator_loss_grad(r.generator, r.discriminator, real, z).loss;
    theta(i) = keep - h;
    const double down = generator_loss_grad(r.generator, r.discriminator, real, z).loss;
    theta(i) = keep;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(lg.grad(i) - numeric) / std::max(std::abs(numeric), 1e-4));
  }
  const double t = sw.seconds();
  const bool ok = sym <= 1e-9 && sn && worst < 1e-4 && t < 120.0;
  return {ok, "|loss - log 2| " + fmt("%.2g", sym) + ", spectral norms " + fmt("%.6f", s1) + " / " + fmt("%.6f", s2) +
                  ", generator gradient error " + fmt("%.2g", worst) + ", " + fmt("%.1f s", t)};
}

// Pipeline -------------------------------------------------------------------

eval::SynthDataset e2e_dataset() {
  eval::SynthSpec s;
  s.name = "e2e";
  s.count = 1000;
  s.defect_rate = 0.1;
  s.seed = 1;
  return eval::synth_dataset(s);
}

Outcome end_to_end() {
  const auto ds = e2e_dataset();
  eval::PipelineConfig cfg;
  cfg.seed = 1;
  cfg.augment.mode = augment::AugmentMode::Both;
  Stopwatch sw;
  const auto both = eval::run_pipeline(ds, cfg);
  const double t = sw.seconds();
  cfg.augment.mode = augment::AugmentMode::None;
  const auto none = eval::run_pipeline(ds, cfg);
  const double fb = both.learn.weak_f1, fn = none.learn.weak_f1;
  const bool ok = fb >= 0.90 && fb >= fn - 0.02 && t < 15 * 60.0;
  return {ok, "weak-label F1 Both " + fmt("%.4f", fb) + ", None " + fmt("%.4f", fn) + ", Both run " + fmt("%.0f s", t)};
}

Outcome tipping() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto ds = eval::synth_dataset(eval::tipping_synth_spec(seed));
    eval::TippingConfig cfg;
    cfg.seed = seed;
    const auto r = eval::tipping_point(ds, cfg);
    ok = ok && r.multiplier && *r.multiplier > 1.0;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " x" + r.multiplier_text();
  }
  return {ok, "multipliers " + detail};
}

Outcome average_vs_intersection() {
  const auto ds = e2e_dataset();
  eval::PipelineConfig cfg;
  cfg.seed = 1;
  cfg.augment.mode = augment::AugmentMode::None;
  const auto report = eval::run_ablation(eval::AblationKind::Strategy, std::span<const eval::SynthDataset>(&ds, 1), cfg);
  const double avg = report.row("e2e", "average").f1, inter = report.row("e2e", "intersection").f1,
               uni = report.row("e2e", "union").f1;
  return {avg >= inter, "weak-label F1 average " + fmt("%.4f", avg) + ", intersection " + fmt("%.4f", inter) +
                            ", union " + fmt("%.4f", uni)};
}

// CLI determinism ------------------------------------------------------------

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative path -> contents for every regular file under `dir` (or the file itself).
std::map<std::string, std::string> snapshot(const fs::path& path) {
  std::map<std::string, std::string> out;
  if (fs::is_regular_file(path)) {
    out.emplace(path.filename().string(), slurp(path));
    return out;
  }
  if (!fs::exists(path)) return out;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) out.emplace(fs::relative(e.path(), path).generic_string(), slurp(e.path()));
  }
  return out;
}

/// Drives `gadget annotate-serve` with three scripted workers that draw the
/// gold boxes and three reviewers that accept everything.
bool drive_server(const std::string& gadget, const fs::path& data, const fs::path& out) {
  const std::string cmd = gadget + " -q annotate-serve --manifest " + (data / "manifest.json").string() + " --out " +
                          out.string() + " --threshold 8 --port 0 --exit-when-done --seed 4";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return false;
  char line[256] = {0};
  if (!std::fgets(line, sizeof line, pipe)) {
    ::pclose(pipe);
    return false;
  }
  const std::string s(line);
  const auto colon = s.rfind(':');
  const int port = std::stoi(s.substr(colon + 1));
  const auto gold = eval::read_gold_boxes(data / eval::kGoldBoxesFile);
  httplib::Client cli("127.0.0.1", port);
  for (int round = 0; round < 1000; ++round) {
    bool alive = true;
    for (int w = 1; w <= 3 && alive; ++w) {
      const std::string worker = "w" + std::to_string(w);
      auto res = cli.Get("/api/tasks/next?worker_id=" + worker);
      if (!res) {
        alive = false;
        break;
      }
      const json t = json::parse(res->body);
      if (!t.contains("task_id")) continue;
      json boxes = json::array();
      const auto it = gold.find(t.at("image_id").get<std::string>());
      if (it != gold.end()) {
        for (const auto& b : it->second) {
          boxes.push_back({{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"class", b.defect_class}});
        }
      }
      const json body{{"worker_id", worker}, {"boxes", boxes}};
      if (!cli.Post("/api/tasks/" + t.at("task_id").get<std::string>() + "/boxes", body.dump(), "application/json")) {
        alive = false;
      }
    }
    for (int v = 1; v <= 3 && alive; ++v) {
      const std::string reviewer = "r" + std::to_string(v);
      for (;;) {
        auto res = cli.Get("/api/review/next?worker_id=" + reviewer);
        if (!res) {
          alive = false;
          break;
        }
        const json item = json::parse(res->body);
        if (item.contains("empty")) break;
        const json body{{"worker_id", reviewer}, {"vote", "accept"}};
        if (!cli.Post("/api/review/" + item.at("item_id").get<std::string>() + "/vote", body.dump(),
                      "application/json")) {
          alive = false;
          break;
        }
      }
    }
    if (!alive) break;
  }
  return ::pclose(pipe) == 0;
}

Outcome cli_determinism(const std::string& gadget) {
  if (gadget.empty() || !fs::exists(gadget)) return {false, "gadget binary not found: '" + gadget + "'"};
  const fs::path root = fs::temp_directory_path() / ("gadget-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  struct Stage {
    std::string name;
    std::string args;  // {D} is the run directory, {J} the thread count
    std::string output;
  };
  const std::vector<Stage> stages = {
      {"synth", "synth --count 240 --defect-rate 0.25 --width 32 --height 32 --seed 11 --out {D}/data", "data"},
      {"simulate-crowd", "simulate-crowd --data {D}/data --out {D}/crowd --threshold 58 --seed 3", "crowd"},
      {"augment",
       "augment --patterns {D}/crowd --dev-manifest {D}/crowd/dev_manifest.json --out {D}/aug --mode both --budget 20 "
       "--gan-epochs 50 --seed 2 --jobs {J}",
       "aug"},
      {"featurize", "featurize --manifest {D}/data/manifest.json --patterns {D}/aug --out {D}/feat.csv --jobs {J}",
       "feat.csv"},
      {"tune",
       "tune --features {D}/feat.csv --labels {D}/crowd/dev_labels.csv --manifest {D}/data/manifest.json --out "
       "{D}/model.json --scores {D}/scores.csv --seed 5 --jobs {J}",
       "model.json"},
      {"label", "label --model {D}/model.json --features {D}/feat.csv --exclude {D}/crowd/dev_labels.csv --out {D}/weak.csv",
       "weak.csv"},
      {"evaluate", "evaluate --weak-labels {D}/weak.csv --manifest {D}/data/manifest.json --out {D}/metrics.csv",
       "metrics.csv"},
      {"tag-errors", "tag-errors --data {D}/data --weak-labels {D}/weak.csv --features {D}/feat.csv --out {D}/tags.csv",
       "tags.csv"},
      {"ablate",
       "ablate --kind strategy --mode none --data {D}/data --threshold 40 --out {D}/ablate.csv --seed 1 --jobs {J}",
       "ablate.csv"},
      {"synth (tipping data)", "synth --count 1800 --defect-rate 0.15 --width 32 --height 32 --seed 12 --out {D}/tipdata",
       "tipdata"},
      {"tipping", "tipping --data {D}/tipdata --sizes 400,600,800 --seed 6 --out {D}/tipping.csv --jobs {J}",
       "tipping.csv"},
  };
  const std::vector<std::pair<std::string, int>> runs = {{"a", 1}, {"b", 1}, {"c", 3}};
  std::map<std::string, std::vector<std::map<std::string, std::string>>> outputs;
  std::vector<std::string> failed;
  for (const auto& [name, jobs] : runs) {
    const fs::path dir = root / name;
    for (const auto& st : stages) {
      std::string args = st.args;
      for (std::size_t p; (p = args.find("{D}")) != std::string::npos;) args.replace(p, 3, dir.string());
      for (std::size_t p; (p = args.find("{J}")) != std::string::npos;) args.replace(p, 3, std::to_string(jobs));
      if (run(gadget + " -q " + args) != 0) failed.push_back(st.name + " (run " + name + ")");
      outputs[st.name].push_back(snapshot(dir / st.output));
    }
    if (!drive_server(gadget, dir / "data", dir / "served")) failed.push_back("annotate-serve (run " + name + ")");
    outputs["annotate-serve"].push_back(snapshot(dir / "served"));
  }
  std::vector<std::string> differ;
  for (const auto& [stage, snaps] : outputs) {
    if (snaps.front().empty()) differ.push_back(stage + " (no output)");
    for (std::size_t i = 1; i < snaps.size(); ++i) {
      if (snaps[i] != snaps.front()) {
        differ.push_back(stage + " (run " + runs[i].first + ")");
        break;
      }
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(outputs.size()) + " stages, runs a/b at --jobs 1 and c at --jobs 3";
  for (const auto& f : failed) detail += "; failed: " + f;
  for (const auto& d : differ) detail += "; differs: " + d;
  return {failed.empty() && differ.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string gadget;
  std::vector<std::string> only;
  app.add_option("--gadget", gadget, "Path to the gadget binary");
  app.add_option("--only", only, "Run only the named checks");
  CLI11_PARSE(app, argc, argv);
  set_log_sink({});

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"ncc_oracle", ncc_oracle},
      {"pyramid_fidelity", pyramid_fidelity},
      {"ncc_degeneracy", degeneracy},
      {"f1_examples", f1_examples},
      {"labeler_gradients", labeler_gradients},
      {"tuning_grid", tuning_grid},
      {"rgan", rgan},
      {"end_to_end", end_to_end},
      {"tipping_point", tipping},
      {"average_vs_intersection", average_vs_intersection},
      {"cli_determinism", [&] { return cli_determinism(gadget); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Stopwatch sw;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt("%.1f s", sw.seconds()) << "]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
