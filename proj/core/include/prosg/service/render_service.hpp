// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/error.hpp"
#include "prosg/rendering/model.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace prosg::service {

struct ServiceConfig {
  int max_width = 320;
  int max_height = 240;
  /// Requests with more pixels are queued and answered with 202 plus a job id.
  int async_pixels = 160 * 120;
  /// Synchronous renders still running after this long are converted to jobs.
  std::chrono::milliseconds timeout{120000};
  int threads = 1;
  std::string cors_origin = "*";
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// One part of a multipart/mixed render response.
struct Part {
  std::map<std::string, std::string> headers;
  std::string body;
};

inline constexpr const char* kMultipartBoundary = "prosg-layer-boundary";

std::vector<Part> parse_multipart(const std::string& body, const std::string& boundary = kMultipartBoundary);

/// Layer images: RGB premultiplied by alpha, rounded so that the layers of a
/// pixel sum exactly to the 8-bit full render.
std::map<int, std::vector<std::uint8_t>> quantize_layers(const RenderedImage& image);

/// Single-session edit and render backend. Handlers are plain functions of
/// (method, path, body, headers) so they can be exercised without a socket.
class RenderService {
 public:
  explicit RenderService(ServiceConfig cfg = {});
  ~RenderService();
  RenderService(const RenderService&) = delete;
  RenderService& operator=(const RenderService&) = delete;

  void load(SceneModel model, std::string checkpoint_id);
  bool loaded() const;
  int revision() const;

  Response handle(const std::string& method, const std::string& path, const std::string& body = {},
                  const std::map<std::string, std::string>& headers = {});

  /// Blocks serving HTTP on `address` ("host:port") until stop() is called.
  void serve(const std::string& address);
  void stop();
  /// Port chosen by serve() once listening (useful with port 0), else -1.
  int port() const { return port_.load(); }

 private:
  struct Revision {
    int id = 0;
    std::shared_ptr<const SceneModel> model;
    nlohmann::json script;
  };
  struct Job {
    int revision = 0;
    std::shared_future<Response> result;
  };

  std::shared_ptr<const Revision> current() const;
  Response health() const;
  Response graph() const;
  Response revisions() const;
  Response edit(const std::string& body, const std::map<std::string, std::string>& headers);
  Response undo();
  Response render(const std::string& body);
  Response job(const std::string& id);
  static Response render_now(const std::shared_ptr<const Revision>& rev, const nlohmann::json& req,
                             const ServiceConfig& cfg);

  ServiceConfig cfg_;
  std::string checkpoint_;
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<const Revision>> history_;
  int next_revision_ = 0;
  std::map<int, Job> jobs_;
  int next_job_ = 0;
  std::atomic<int> port_{-1};
  std::atomic<void*> server_{nullptr};
};

/// `flag` when set, else $PROSG_BIND, else 127.0.0.1:8080.
std::string bind_address(const std::optional<std::string>& flag);

/// HTTP status for a library error.
int status_for(const Error& e);

}  // namespace prosg::service
