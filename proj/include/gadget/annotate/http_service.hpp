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

#ifndef GADGET_ANNOTATE_HTTP_SERVICE_HPP
#define GADGET_ANNOTATE_HTTP_SERVICE_HPP

#include <httplib.h>

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "gadget/annotate/session.hpp"
#include "gadget/core/json.hpp"
#include "gadget/store/png_io.hpp"

namespace gadget::annotate {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8080;
  /// Served at "/" when set (the browser frontend).
  std::filesystem::path static_dir;
  /// Stop serving once the development set is complete.
  bool exit_when_done = false;
};

/**
 * JSON-over-HTTP front for an AnnotationSession. Errors are returned as
 * {"error": message} with 400 (bad input), 404 (unknown id) or 409 (state
 * conflict). The worker id may come from the JSON body, the X-Worker-Id
 * header or the worker_id query parameter.
 */
class AnnotationServer {
 public:
  AnnotationServer(AnnotationSession& session, ServerOptions options)
      : session_(session), opt_(std::move(options)) {
    routes();
  }

  ~AnnotationServer() { stop(); }

  /// Binds the listening socket and returns the port.
  int bind() {
    if (opt_.port == 0) {
      port_ = svr_.bind_to_any_port(opt_.host);
    } else {
      port_ = svr_.bind_to_port(opt_.host, opt_.port) ? opt_.port : -1;
    }
    if (port_ < 0) throw IoError("cannot bind " + opt_.host + ":" + std::to_string(opt_.port));
    return port_;
  }

  /// Serves until stop() or, with exit_when_done, until the session is done.
  void run() {
    std::thread watcher([this] {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stopping_; });
      svr_.wait_until_ready();
      svr_.stop();
    });
    svr_.listen_after_bind();
    stop();
    watcher.join();
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
  }

  void wait_until_ready() const { svr_.wait_until_ready(); }
  int port() const noexcept { return port_; }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send_json(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  Handler guarded(Handler h) {
    return [this, h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const PendingReviews& e) {
        send_json(res, {{"error", e.what()}, {"pending", e.pending()}}, 409);
      } catch (const NotFound& e) {
        send_json(res, {{"error", e.what()}}, 404);
      } catch (const Conflict& e) {
        send_json(res, {{"error", e.what()}}, 409);
      } catch (const InvalidArgument& e) {
        send_json(res, {{"error", e.what()}}, 400);
      } catch (const json::exception& e) {
        send_json(res, {{"error", std::string("malformed JSON: ") + e.what()}}, 400);
      } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, 500);
      }
      if (opt_.exit_when_done && session_.done()) stop();
    };
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
    return j;
  }

  static std::string worker_of(const httplib::Request& req, const json& body) {
    if (body.contains("worker_id")) return body.at("worker_id").get<std::string>();
    if (req.has_header("X-Worker-Id")) return req.get_header_value("X-Worker-Id");
    if (req.has_param("worker_id")) return req.get_param_value("worker_id");
    throw InvalidArgument("worker id is required");
  }

  static json box_json(const BoundingBox& b) {
    return {{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"class", b.defect_class}};
  }

  static json review_json(const ReviewItem& item) {
    json votes = json::array();
    for (const auto& [w, v] : item.votes) votes.push_back({{"worker_id", w}, {"vote", to_string(v)}});
    return {{"item_id", item.item_id},
            {"task_id", item.task_id},
            {"image_id", item.box.image_id},
            {"box", box_json(item.box)},
            {"votes", votes},
            {"resolution", to_string(item.resolution)},
            {"crop_url", "/api/review/" + item.item_id + "/crop"},
            {"image_url", "/api/images/" + item.box.image_id}};
  }

  json task_json(const AnnotationTask& t) const {
    json j{{"task_id", t.task_id},
           {"image_id", t.image_id},
           {"state", to_string(t.state)},
           {"submissions", t.submissions.size()},
           {"review_items", t.review_items},
           {"pattern_ids", t.pattern_ids}};
    json merged = json::array();
    for (const auto& b : t.merged) merged.push_back(box_json(b));
    j["merged"] = merged;
    return j;
  }

  void routes() {
    svr_.Get("/api/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const NextTask n = session_.next_task(worker_of(req, json::object()));
      if (n.kind == NextTask::Kind::Done) return send_json(res, {{"done", true}});
      if (n.kind == NextTask::Kind::Wait) return send_json(res, {{"done", false}, {"wait", true}});
      send_json(res, {{"task_id", n.task_id},
                      {"image_id", n.image_id},
                      {"image_url", "/api/images/" + n.image_id},
                      {"defect_classes", session_.defect_classes()}});
    }));
    svr_.Get("/api/tasks/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, task_json(session_.task(req.path_params.at("id"))));
    }));
    svr_.Get("/api/images/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto png = store::encode_png(session_.image(req.path_params.at("id")), 8);
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    }));
    svr_.Post("/api/tasks/:id/boxes", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      std::vector<BoundingBox> boxes;
      for (const auto& b : body.value("boxes", json::array())) {
        BoundingBox box;
        box.x0 = b.at("x0").get<int>();
        box.y0 = b.at("y0").get<int>();
        box.x1 = b.at("x1").get<int>();
        box.y1 = b.at("y1").get<int>();
        box.defect_class = b.value("class", std::string());
        boxes.push_back(std::move(box));
      }
      send_json(res, task_json(session_.submit_boxes(req.path_params.at("id"), worker_of(req, body), std::move(boxes))));
    }));
    svr_.Post("/api/tasks/:id/finalize", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto& id = req.path_params.at("id");
      send_json(res, {{"task_id", id}, {"pattern_ids", session_.finalize(id)}});
    }));
    svr_.Get("/api/review/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto item = session_.next_review(worker_of(req, json::object()));
      if (!item) return send_json(res, {{"empty", true}});
      send_json(res, review_json(*item));
    }));
    svr_.Get("/api/review/:id/crop", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const ReviewItem item = session_.review(req.path_params.at("id"));
      const GrayImage img = session_.image(item.box.image_id);
      const auto png = store::encode_png(img.crop(item.box.x0, item.box.y0, item.box.x1, item.box.y1), 8);
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    }));
    svr_.Post("/api/review/:id/vote", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      const Vote v = parse_vote(body.at("vote").get<std::string>());
      send_json(res, review_json(session_.vote(req.path_params.at("id"), worker_of(req, body), v)));
    }));
    svr_.Get("/api/status", guarded([this](const httplib::Request&, httplib::Response& res) {
      const DevelopmentSet dev = session_.dev_set();
      send_json(res, {{"dev_size", dev.size()},
                      {"defect_count", dev.defect_count()},
                      {"threshold", session_.config().defect_threshold},
                      {"patterns", session_.patterns().size()},
                      {"done", session_.done()}});
    }));
    if (!opt_.static_dir.empty()) {
      if (!svr_.set_mount_point("/", opt_.static_dir.string())) {
        throw IoError("static directory '" + opt_.static_dir.string() + "' does not exist");
      }
    }
  }

  AnnotationSession& session_;
  ServerOptions opt_;
  httplib::Server svr_;
  int port_ = -1;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

}  // namespace gadget::annotate

#endif  // GADGET_ANNOTATE_HTTP_SERVICE_HPP
