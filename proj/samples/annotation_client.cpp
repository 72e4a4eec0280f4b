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

// Starts the annotation service on a free port over a synthetic dataset and
// plays one worker through the JSON API with cpp-httplib.

#include <cstdio>
#include <filesystem>
#include <thread>

#include "gadget/annotate/http_service.hpp"
#include "gadget/eval/synth.hpp"

using namespace gadget;

int main() {
  set_log_sink({});
  eval::SynthSpec spec;
  spec.count = 30;
  spec.defect_rate = 0.3;
  spec.width = 32;
  spec.height = 32;
  const auto ds = eval::synth_dataset(spec);
  const auto dir = std::filesystem::temp_directory_path() / "gadget-sample-annotation";
  std::filesystem::remove_all(dir);
  const auto manifest = eval::write_synth(ds, dir / "data");

  annotate::SessionConfig cfg;
  cfg.defect_threshold = 2;
  cfg.workers_per_task = 1;
  cfg.out_dir = dir / "out";
  annotate::AnnotationSession session(manifest, cfg);
  annotate::AnnotationServer server(session, {.host = "127.0.0.1", .port = 0});
  const int port = server.bind();
  std::thread serving([&] { server.run(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 3; ++i) {
    auto next = client.Get("/api/tasks/next?worker_id=alice");
    const json task = json::parse(next->body);
    if (!task.contains("task_id")) break;
    const std::string image_id = task.at("image_id");
    // Draw the gold boxes, as a careful worker would.
    json boxes = json::array();
    for (const auto& g : ds.images[ds.index_of(image_id)].boxes) {
      boxes.push_back({{"x0", g.box.x0}, {"y0", g.box.y0}, {"x1", g.box.x1}, {"y1", g.box.y1}, {"class", "defect"}});
    }
    const json body{{"worker_id", "alice"}, {"boxes", boxes}};
    auto res = client.Post("/api/tasks/" + task.at("task_id").get<std::string>() + "/boxes", body.dump(),
                           "application/json");
    std::printf("POST boxes for %s -> %d %s\n", image_id.c_str(), res->status, res->body.c_str());
  }
  // A lone box has no partner to agree with, so it goes to peer review.
  for (const std::string reviewer : {"bob", "carol", "dave"}) {
    for (;;) {
      const json item = json::parse(client.Get("/api/review/next?worker_id=" + reviewer)->body);
      if (item.contains("empty")) break;
      const json vote{{"worker_id", reviewer}, {"vote", "accept"}};
      auto res = client.Post("/api/review/" + item.at("item_id").get<std::string>() + "/vote", vote.dump(),
                             "application/json");
      std::printf("%s accepts %s -> %s\n", reviewer.c_str(), item.at("item_id").get<std::string>().c_str(),
                  json::parse(res->body).at("resolution").get<std::string>().c_str());
    }
  }
  std::printf("status: %s\n", client.Get("/api/status")->body.c_str());
  server.stop();
  serving.join();
  return 0;
}
