// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/service/render_service.hpp"

#include "prosg/dataio/image_io.hpp"
#include "prosg/scenegraph/edit.hpp"
#include "prosg/scenegraph/graph_json.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace prosg::service {
using nlohmann::json;

namespace {

Response json_response(int status, const json& j) {
  Response r;
  r.status = status;
  r.body = j.dump();
  return r;
}

Response error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

std::string to_bytes(const std::vector<std::uint8_t>& v) { return std::string(v.begin(), v.end()); }

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

int status_for(const Error& e) {
  if (dynamic_cast<const UnresolvedKeyError*>(&e) || dynamic_cast<const LookupError*>(&e)) return 404;
  if (dynamic_cast<const LoadError*>(&e)) return 500;
  if (e.category() == Error::Category::Numeric) return 500;
  return 400;
}

std::string bind_address(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("PROSG_BIND"); env != nullptr && *env != '\0') return env;
  return "127.0.0.1:8080";
}

std::vector<Part> parse_multipart(const std::string& body, const std::string& boundary) {
  std::vector<Part> parts;
  const std::string delim = "--" + boundary;
  std::size_t pos = body.find(delim);
  if (pos == std::string::npos) throw InputError("multipart body has no boundary");
  while (true) {
    pos += delim.size();
    if (body.compare(pos, 2, "--") == 0) break;
    if (body.compare(pos, 2, "\r\n") != 0) throw InputError("malformed multipart boundary line");
    pos += 2;
    const std::size_t head_end = body.find("\r\n\r\n", pos);
    if (head_end == std::string::npos) throw InputError("multipart part without header terminator");
    Part part;
    std::size_t line = pos;
    while (line < head_end) {
      std::size_t eol = body.find("\r\n", line);
      if (eol == std::string::npos || eol > head_end) eol = head_end;
      const std::string h = body.substr(line, eol - line);
      const auto colon = h.find(':');
      if (colon != std::string::npos) {
        std::string value = h.substr(colon + 1);
        value.erase(0, value.find_first_not_of(' '));
        part.headers[h.substr(0, colon)] = value;
      }
      line = eol + 2;
    }
    const std::size_t data = head_end + 4;
    const std::size_t next = body.find("\r\n" + delim, data);
    if (next == std::string::npos) throw InputError("multipart part is not terminated");
    part.body = body.substr(data, next - data);
    parts.push_back(std::move(part));
    pos = next + 2;
  }
  return parts;
}

std::map<int, std::vector<std::uint8_t>> quantize_layers(const RenderedImage& image) {
  const std::size_t px = static_cast<std::size_t>(image.width) * image.height;
  std::vector<int> ids;
  std::map<int, std::vector<std::uint8_t>> out;
  for (const auto& [id, layer] : image.layers) {
    if (layer.size() != px * 4) throw ShapeError("layer " + std::to_string(id) + " has the wrong size");
    ids.push_back(id);
    out[id].assign(px * 4, 0);
  }
  const std::size_t n = ids.size();
  std::vector<int> value(n);
  std::vector<double> rest(n);
  for (std::size_t p = 0; p < px; ++p) {
    for (int c = 0; c < 3; ++c) {
      const int target = to_byte(image.color[p * 3 + c]);
      int sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = std::clamp(static_cast<double>(image.layers.at(ids[i])[p * 4 + c]), 0.0, 1.0) * 255.0;
        value[i] = static_cast<int>(std::floor(v));
        rest[i] = v - value[i];
        sum += value[i];
      }
      // Largest-remainder rounding onto the full-render byte.
      while (sum < target && n > 0) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
          if (value[i] < 255 && (best == n || rest[i] > rest[best])) best = i;
        if (best == n) break;
        ++value[best];
        rest[best] -= 1.0;
        ++sum;
      }
      while (sum > target && n > 0) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
          if (value[i] > 0 && (best == n || rest[i] < rest[best])) best = i;
        if (best == n) break;
        --value[best];
        rest[best] += 1.0;
        --sum;
      }
      for (std::size_t i = 0; i < n; ++i) out[ids[i]][p * 4 + c] = static_cast<std::uint8_t>(value[i]);
    }
    for (std::size_t i = 0; i < n; ++i) out[ids[i]][p * 4 + 3] = to_byte(image.layers.at(ids[i])[p * 4 + 3]);
  }
  return out;
}

RenderService::RenderService(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

RenderService::~RenderService() {
  stop();
  std::lock_guard lock(mutex_);
  for (auto& [id, j] : jobs_) j.result.wait();
}

void RenderService::load(SceneModel model, std::string checkpoint_id) {
  model.validate();
  auto rev = std::make_shared<Revision>();
  std::lock_guard lock(mutex_);
  rev->id = next_revision_++;
  rev->model = std::make_shared<const SceneModel>(std::move(model));
  history_.clear();
  history_.push_back(std::move(rev));
  checkpoint_ = std::move(checkpoint_id);
}

bool RenderService::loaded() const {
  std::lock_guard lock(mutex_);
  return !history_.empty();
}

int RenderService::revision() const {
  const auto rev = current();
  return rev ? rev->id : -1;
}

std::shared_ptr<const RenderService::Revision> RenderService::current() const {
  std::lock_guard lock(mutex_);
  return history_.empty() ? nullptr : history_.back();
}

Response RenderService::handle(const std::string& method, const std::string& path, const std::string& body,
                               const std::map<std::string, std::string>& headers) {
  Response r;
  try {
    if (method == "OPTIONS") {
      r.status = 204;
      r.content_type.clear();
    } else if (path == "/api/health") {
      r = method == "GET" ? health() : error_response(405, "use GET");
    } else if (path == "/api/graph") {
      r = method == "GET" ? graph() : error_response(405, "use GET");
    } else if (path == "/api/revisions") {
      r = method == "GET" ? revisions() : error_response(405, "use GET");
    } else if (path == "/api/edit") {
      r = method == "POST" ? edit(body, headers) : error_response(405, "use POST");
    } else if (path == "/api/undo") {
      r = method == "POST" ? undo() : error_response(405, "use POST");
    } else if (path == "/api/render") {
      r = method == "POST" ? render(body) : error_response(405, "use POST");
    } else if (path.rfind("/api/jobs/", 0) == 0) {
      r = method == "GET" ? job(path.substr(10)) : error_response(405, "use GET");
    } else {
      r = error_response(404, "no endpoint " + path);
    }
  } catch (const Error& e) {
    r = error_response(status_for(e), e.what());
  } catch (const json::exception& e) {
    r = error_response(400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    r = error_response(500, e.what());
  }
  r.headers["Access-Control-Allow-Origin"] = cfg_.cors_origin;
  r.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
  r.headers["Access-Control-Allow-Headers"] = "Content-Type, If-Match";
  r.headers["Access-Control-Expose-Headers"] = "X-Prosg-Revision";
  return r;
}

Response RenderService::health() const {
  const auto rev = current();
  json j = {{"status", "ok"}, {"loaded", rev != nullptr}};
  if (rev) j["revision"] = rev->id;
  return json_response(200, j);
}

Response RenderService::graph() const {
  const auto rev = current();
  if (!rev) return error_response(503, "no checkpoint loaded");
  json j = state_to_json(rev->model->state, checkpoint_);
  j["revision"] = rev->id;
  Response r = json_response(200, j);
  r.headers["X-Prosg-Revision"] = std::to_string(rev->id);
  return r;
}

Response RenderService::revisions() const {
  std::lock_guard lock(mutex_);
  if (history_.empty()) return error_response(503, "no checkpoint loaded");
  json hist = json::array();
  for (const auto& h : history_) hist.push_back({{"revision", h->id}, {"script", h->script}});
  return json_response(200, {{"current", history_.back()->id}, {"history", hist}, {"edits", history_.size() - 1}});
}

Response RenderService::edit(const std::string& body, const std::map<std::string, std::string>& headers) {
  const json script = json::parse(body);
  std::lock_guard lock(mutex_);
  if (history_.empty()) return error_response(503, "no checkpoint loaded");
  const auto& cur = history_.back();
  std::optional<int> base;
  if (script.is_object() && script.contains("base_revision")) base = script.at("base_revision").get<int>();
  if (const auto it = headers.find("If-Match"); it != headers.end()) base = std::stoi(it->second);
  if (base && *base != cur->id) {
    return error_response(409, "edit targets revision " + std::to_string(*base) + " but the current revision is " +
                                   std::to_string(cur->id));
  }
  auto model = std::make_shared<SceneModel>(*cur->model);
  const auto inserted = apply_edit_script(model->state, script);
  auto rev = std::make_shared<Revision>();
  rev->id = next_revision_++;
  rev->model = std::move(model);
  rev->script = script;
  history_.push_back(rev);
  Response r = json_response(200, {{"revision", rev->id}, {"inserted", inserted}});
  r.headers["X-Prosg-Revision"] = std::to_string(rev->id);
  return r;
}

Response RenderService::undo() {
  std::lock_guard lock(mutex_);
  if (history_.empty()) return error_response(503, "no checkpoint loaded");
  if (history_.size() == 1) return error_response(409, "nothing to undo");
  history_.pop_back();
  Response r = json_response(200, {{"revision", history_.back()->id}});
  r.headers["X-Prosg-Revision"] = std::to_string(history_.back()->id);
  return r;
}

Response RenderService::render_now(const std::shared_ptr<const Revision>& rev, const json& req,
                                   const ServiceConfig& cfg) {
  const SceneModel& model = *rev->model;
  const Pose pose = pose_from_json(req.at("pose"));
  pose.validate(1e-6);
  const int frame = req.at("frame").get<int>();
  const int width = req.at("width").get<int>();
  const int height = req.at("height").get<int>();
  Camera cam = model.state.graphs.at(0).graph.camera;
  if (req.contains("K")) {
    const auto& k = req["K"];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cam.K(r, c) = k.at(r).at(c).get<double>();
  } else {
    const double sx = static_cast<double>(width) / cam.width, sy = static_cast<double>(height) / cam.height;
    cam.K.row(0) *= sx;
    cam.K.row(1) *= sy;
  }
  cam.width = width;
  cam.height = height;
  RenderOptions opts;
  opts.layers = req.value("layers", false);
  opts.threads = cfg.threads;
  const RenderedImage img = render_image(model, pose, cam, frame, opts);

  dataio::Image full(width, height, 3);
  full.data = img.color;
  const std::string png = to_bytes(dataio::encode_png(full));
  Response r;
  r.headers["X-Prosg-Revision"] = std::to_string(rev->id);
  if (!opts.layers) {
    r.content_type = "image/png";
    r.body = png;
    return r;
  }
  const std::string delim = std::string("--") + kMultipartBoundary;
  std::string body = delim + "\r\nContent-Type: image/png\r\nX-Prosg-Layer: full\r\n\r\n" + png + "\r\n";
  for (const auto& [id, bytes] : quantize_layers(img)) {
    dataio::Image layer(width, height, 4);
    for (std::size_t i = 0; i < bytes.size(); ++i) layer.data[i] = static_cast<float>(bytes[i]) / 255.0f;
    body += delim + "\r\nContent-Type: image/png\r\nX-Prosg-Layer: " + std::to_string(id) + "\r\n\r\n" +
            to_bytes(dataio::encode_png(layer)) + "\r\n";
  }
  body += delim + "--\r\n";
  r.content_type = std::string("multipart/mixed; boundary=") + kMultipartBoundary;
  r.body = std::move(body);
  return r;
}

Response RenderService::render(const std::string& body) {
  const auto rev = current();
  if (!rev) return error_response(503, "no checkpoint loaded");
  const json req = json::parse(body);
  if (!req.is_object()) throw InputError("render request must be a JSON object");
  for (const char* key : {"pose", "frame", "width", "height"}) {
    if (!req.contains(key)) throw InputError(std::string("render request needs '") + key + "'");
  }
  if (!req["width"].is_number_integer() || !req["height"].is_number_integer() || !req["frame"].is_number_integer()) {
    throw InputError("'frame', 'width' and 'height' must be integers");
  }
  const int width = req["width"].get<int>(), height = req["height"].get<int>();
  if (width <= 0 || height <= 0) throw InputError("render size must be positive");
  if (width > cfg_.max_width || height > cfg_.max_height) {
    return error_response(422, "render size " + std::to_string(width) + "x" + std::to_string(height) +
                                   " exceeds the limit of " + std::to_string(cfg_.max_width) + "x" +
                                   std::to_string(cfg_.max_height));
  }
  // Validate the pose up front so that bad requests fail synchronously.
  pose_from_json(req["pose"]).validate(1e-6);

  const ServiceConfig cfg = cfg_;
  auto task = [rev, req, cfg]() {
    try {
      return render_now(rev, req, cfg);
    } catch (const Error& e) {
      return error_response(status_for(e), e.what());
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
  };
  std::shared_future<Response> fut = std::async(std::launch::async, task).share();
  const bool queue = req.value("async", false) || width * height > cfg_.async_pixels;
  if (!queue && fut.wait_for(cfg_.timeout) == std::future_status::ready) return fut.get();

  std::lock_guard lock(mutex_);
  const int id = next_job_++;
  jobs_[id] = Job{rev->id, fut};
  Response r = json_response(202, {{"job", id}, {"revision", rev->id}, {"poll", "/api/jobs/" + std::to_string(id)}});
  r.headers["X-Prosg-Revision"] = std::to_string(rev->id);
  r.headers["Location"] = "/api/jobs/" + std::to_string(id);
  return r;
}

Response RenderService::job(const std::string& id_text) {
  int id = -1;
  try {
    id = std::stoi(id_text);
  } catch (const std::exception&) {
    return error_response(404, "unknown job '" + id_text + "'");
  }
  std::shared_future<Response> fut;
  int rev = 0;
  {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return error_response(404, "unknown job " + id_text);
    fut = it->second.result;
    rev = it->second.revision;
  }
  if (fut.wait_for(std::chrono::milliseconds(0)) != std::future_status::ready) {
    Response r = json_response(202, {{"job", id}, {"revision", rev}, {"status", "pending"}});
    r.headers["X-Prosg-Revision"] = std::to_string(rev);
    return r;
  }
  return fut.get();
}

void RenderService::serve(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("bind address '" + address + "' is not host:port");
  const std::string host = address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bind address '" + address + "' has no numeric port");
  }
  httplib::Server srv;
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> headers;
    for (const auto& [k, v] : req.headers) headers[k] = v;
    const Response r = handle(req.method, req.path, req.body, headers);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    if (!r.content_type.empty()) res.set_content(r.body, r.content_type);
  };
  srv.Get(R"(/api/.*)", dispatch);
  srv.Post(R"(/api/.*)", dispatch);
  srv.Options(R"(/api/.*)", dispatch);
  srv.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout).count() + 5, 0);

  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ConfigError("cannot bind " + address);
  port_ = bound;
  server_ = &srv;
  srv.listen_after_bind();
  server_ = nullptr;
  port_ = -1;
}

void RenderService::stop() {
  if (void* s = server_.load()) static_cast<httplib::Server*>(s)->stop();
}

}  // namespace prosg::service
