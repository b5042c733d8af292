// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "micro_scene.hpp"
#include "prosg/dataio/image_io.hpp"
#include "prosg/scenegraph/graph_json.hpp"
#include "prosg/service/render_service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <thread>

using namespace prosg;
using namespace prosg::service;
using nlohmann::json;

namespace {

SceneModel service_model() { return testing::micro_model(testing::make_micro_scene()); }

json render_request(int w = 8, int h = 8, bool layers = false) {
  return {{"pose", pose_to_json(Pose{})}, {"frame", 0}, {"width", w}, {"height", h}, {"layers", layers}};
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

Response post(RenderService& svc, const std::string& path, const json& body,
              const std::map<std::string, std::string>& headers = {}) {
  return svc.handle("POST", path, body.dump(), headers);
}

json remove_script(int node) { return {{"ops", json::array({{{"op", "remove"}, {"node", node}}})}}; }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("everything but health is 503 before a checkpoint is loaded") {
    RenderService svc;
    CHECK(svc.handle("GET", "/api/health").status == 200);
    CHECK(svc.handle("GET", "/api/health").json()["loaded"] == false);
    CHECK(svc.handle("GET", "/api/graph").status == 503);
    CHECK(svc.handle("GET", "/api/revisions").status == 503);
    CHECK(post(svc, "/api/render", render_request()).status == 503);
    CHECK(post(svc, "/api/edit", remove_script(0)).status == 503);
    CHECK(svc.handle("GET", "/api/nowhere").status == 404);
  }

  TEST_CASE("graph export round-trips through the scene-graph schema") {
    RenderService svc;
    const auto model = service_model();
    svc.load(model, "micro.ckpt");
    const auto r = svc.handle("GET", "/api/graph");
    REQUIRE(r.status == 200);
    CHECK(r.headers.at("X-Prosg-Revision") == std::to_string(svc.revision()));
    const auto state = state_from_json(r.json());
    REQUIRE(state.graphs.size() == 1);
    CHECK(graph_to_json(state.graphs[0].graph) == graph_to_json(model.state.graphs[0].graph));
  }

  TEST_CASE("edit then undo restores the graph byte for byte") {
    RenderService svc;
    svc.load(service_model(), "micro");
    const std::string before = svc.handle("GET", "/api/graph").body;
    const auto e = post(svc, "/api/edit", remove_script(0));
    REQUIRE(e.status == 200);
    const auto g = svc.handle("GET", "/api/graph").json();
    CHECK(g["revision"] == e.json()["revision"]);
    CHECK(svc.handle("GET", "/api/revisions").json()["edits"] == 1);
    CHECK(g.dump() != before);
    REQUIRE(post(svc, "/api/undo", json::object()).status == 200);
    CHECK(svc.handle("GET", "/api/graph").body == before);
    CHECK(post(svc, "/api/undo", json::object()).status == 409);
  }

  TEST_CASE("edit errors map to status codes and leave the revision alone") {
    RenderService svc;
    svc.load(service_model(), "micro");
    const int rev = svc.revision();
    json skew = json::array({1.0, 0.2, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0});
    const auto bad_pose = post(svc, "/api/edit", {{"ops", json::array({{{"op", "set_pose"}, {"node", 0}, {"pose", skew}}})}});
    CHECK(bad_pose.status == 400);
    CHECK(bad_pose.json()["error"].get<std::string>().find("orthonormal") != std::string::npos);
    const json insert = {{"ops", json::array({{{"op", "insert"},
                                               {"class", "truck"},
                                               {"decoder_key", "truck"},
                                               {"box", {2, 2, 4}},
                                               {"pose", pose_to_json(Pose{})}}})}};
    CHECK(post(svc, "/api/edit", insert).status == 404);
    CHECK(post(svc, "/api/edit", remove_script(42)).status == 404);
    CHECK(svc.handle("POST", "/api/edit", "{not json").status == 400);
    CHECK(post(svc, "/api/edit", {{"steps", 1}}).status == 400);
    CHECK(post(svc, "/api/edit", {{"ops", json::array({{{"op", "explode"}}})}}).status == 400);
    CHECK(svc.revision() == rev);
  }

  TEST_CASE("stale revision preconditions are rejected with 409") {
    RenderService svc;
    svc.load(service_model(), "micro");
    const int first = svc.revision();
    json script = {{"ops", json::array({{{"op", "set_pose"}, {"node", 0}, {"pose", pose_to_json(Pose{})}}})}};
    REQUIRE(post(svc, "/api/edit", script).status == 200);
    CHECK(post(svc, "/api/edit", script, {{"If-Match", std::to_string(first)}}).status == 409);
    script["base_revision"] = first;
    CHECK(post(svc, "/api/edit", script).status == 409);
    script["base_revision"] = svc.revision();
    CHECK(post(svc, "/api/edit", script).status == 200);
  }

  TEST_CASE("render validation") {
    RenderService svc;
    svc.load(service_model(), "micro");
    CHECK(post(svc, "/api/render", render_request(321, 10)).status == 422);
    CHECK(post(svc, "/api/render", render_request(10, 241)).status == 422);
    CHECK(post(svc, "/api/render", render_request(320, 240, false)).status != 422);
    CHECK(post(svc, "/api/render", render_request(0, 8)).status == 400);
    json missing = render_request();
    missing.erase("frame");
    CHECK(post(svc, "/api/render", missing).status == 400);
    json skew = render_request();
    skew["pose"] = json::array({1.0, 0.3, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0});
    CHECK(post(svc, "/api/render", skew).status == 400);
    CHECK(svc.handle("GET", "/api/render").status == 405);
  }

  TEST_CASE("identical requests give identical bytes") {
    RenderService svc;
    svc.load(service_model(), "micro");
    const auto a = post(svc, "/api/render", render_request());
    const auto b = post(svc, "/api/render", render_request());
    REQUIRE(a.status == 200);
    CHECK(a.content_type == "image/png");
    CHECK(a.body == b.body);
    CHECK(a.headers.at("X-Prosg-Revision") == std::to_string(svc.revision()));
    const auto img = dataio::decode_png(bytes_of(a.body));
    CHECK(img.width == 8);
    CHECK(img.height == 8);
  }

  TEST_CASE("removing a node changes only pixels where it carried weight") {
    const auto model = service_model();
    RenderOptions opt;
    opt.layers = true;
    const auto ref = render_image(model, Pose{}, model.state.graphs[0].graph.camera, 0, opt);
    const auto& node_layer = ref.layers.at(0);

    RenderService svc;
    svc.load(model, "micro");
    const auto before = dataio::decode_png(bytes_of(post(svc, "/api/render", render_request()).body));
    REQUIRE(post(svc, "/api/edit", remove_script(0)).status == 200);
    const auto after = dataio::decode_png(bytes_of(post(svc, "/api/render", render_request()).body));
    int changed = 0, outside = 0;
    for (std::size_t p = 0; p < before.pixels(); ++p) {
      bool diff = false;
      for (int c = 0; c < 3; ++c) diff |= before.data[p * 3 + c] != after.data[p * 3 + c];
      changed += diff;
      if (diff && !(node_layer[p * 4 + 3] > 0.0f)) ++outside;
    }
    CHECK(changed > 0);
    CHECK(outside == 0);
  }

  TEST_CASE("per-node layers reconstruct the full render") {
    RenderService svc;
    const auto model = service_model();
    svc.load(model, "micro");
    const auto r = post(svc, "/api/render", render_request(8, 8, true));
    REQUIRE(r.status == 200);
    CHECK(r.content_type.find("multipart/mixed") == 0);
    const auto parts = parse_multipart(r.body);
    REQUIRE(parts.size() >= 3);
    CHECK(parts[0].headers.at("X-Prosg-Layer") == "full");
    const auto full = dataio::decode_png(bytes_of(parts[0].body));
    std::vector<float> sum(full.data.size(), 0.0f);
    bool has_background = false, has_node = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const std::string id = parts[i].headers.at("X-Prosg-Layer");
      has_background |= id == std::to_string(kBackgroundNode);
      has_node |= id == "0";
      const auto layer = dataio::decode_png(bytes_of(parts[i].body), 4);
      for (std::size_t p = 0; p < full.pixels(); ++p)
        for (int c = 0; c < 3; ++c) sum[p * 3 + c] += layer.data[p * 4 + c];
    }
    CHECK(has_background);
    CHECK(has_node);
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) worst = std::max(worst, std::abs(double(sum[i]) - full.data[i]));
    CHECK(worst <= 1.0 / 255.0 + 1e-6);
    // The plain render carries the same pixels as the full part.
    CHECK(post(svc, "/api/render", render_request()).body == parts[0].body);
  }

  TEST_CASE("large or async renders answer 202 and can be polled") {
    ServiceConfig cfg;
    cfg.async_pixels = 16;
    RenderService svc(cfg);
    svc.load(service_model(), "micro");
    RenderService plain;
    plain.load(service_model(), "micro");
    const auto sync = post(plain, "/api/render", render_request());
    REQUIRE(sync.status == 200);
    const auto queued = post(svc, "/api/render", render_request(8, 8));
    REQUIRE(queued.status == 202);
    const std::string poll = queued.json()["poll"];
    CHECK(queued.headers.at("Location") == poll);
    Response done;
    for (int k = 0; k < 2000; ++k) {
      done = svc.handle("GET", poll);
      if (done.status != 202) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    CHECK(done.status == 200);
    CHECK(done.body == sync.body);
    CHECK(svc.handle("GET", "/api/jobs/999").status == 404);
    CHECK(svc.handle("GET", "/api/jobs/abc").status == 404);
  }

  TEST_CASE("exported graph imported into a fresh model renders identically") {
    RenderService svc;
    auto model = service_model();
    svc.load(model, "micro");
    json move = {{"ops", json::array({{{"op", "set_pose"},
                                       {"node", 0},
                                       {"frame", 0},
                                       {"pose", pose_to_json(Pose{axis_angle(Vec3::UnitY(), 0.4), Vec3(0.5, 0.0, 6.0)})}}})}};
    REQUIRE(post(svc, "/api/edit", move).status == 200);
    const auto served = post(svc, "/api/render", render_request());
    model.state = state_from_json(svc.handle("GET", "/api/graph").json());
    const auto local = render_image(model, Pose{}, model.state.graphs[0].graph.camera, 0);
    dataio::Image img(8, 8, 3);
    img.data = local.color;
    CHECK(bytes_of(served.body) == dataio::encode_png(img));
  }

  TEST_CASE("renders racing an edit stay consistent with their revision") {
    RenderService svc;
    svc.load(service_model(), "micro");
    const int rev0 = svc.revision();
    const std::string png0 = post(svc, "/api/render", render_request()).body;
    std::vector<Response> results(6);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < results.size(); ++i) {
      threads.emplace_back([&, i] { results[i] = post(svc, "/api/render", render_request()); });
      if (i == 2) REQUIRE(post(svc, "/api/edit", remove_script(0)).status == 200);
    }
    for (auto& t : threads) t.join();
    const std::string png1 = post(svc, "/api/render", render_request()).body;
    REQUIRE(png0 != png1);
    for (const auto& r : results) {
      REQUIRE(r.status == 200);
      const int rev = std::stoi(r.headers.at("X-Prosg-Revision"));
      CHECK(r.body == (rev == rev0 ? png0 : png1));
    }
  }

  TEST_CASE("real HTTP on an ephemeral port with CORS headers") {
    RenderService svc;
    svc.load(service_model(), "micro");
    std::thread server([&] { svc.serve("127.0.0.1:0"); });
    for (int k = 0; k < 500 && svc.port() <= 0; ++k) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    REQUIRE(svc.port() > 0);
    httplib::Client client("127.0.0.1", svc.port());
    const auto health = client.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto pre = client.Options("/api/render");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    const auto png = client.Post("/api/render", render_request().dump(), "application/json");
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->body == post(svc, "/api/render", render_request()).body);
    const auto big = client.Post("/api/render", render_request(640, 480).dump(), "application/json");
    REQUIRE(big);
    CHECK(big->status == 422);
    svc.stop();
    server.join();
  }

  TEST_CASE("bind address: flag, then PROSG_BIND, then loopback default") {
    ::unsetenv("PROSG_BIND");
    CHECK(bind_address(std::nullopt) == "127.0.0.1:8080");
    ::setenv("PROSG_BIND", "0.0.0.0:9000", 1);
    CHECK(bind_address(std::nullopt) == "0.0.0.0:9000");
    CHECK(bind_address(std::string("127.0.0.1:7000")) == "127.0.0.1:7000");
    ::unsetenv("PROSG_BIND");
    RenderService svc;
    CHECK_THROWS_AS(svc.serve("localhost"), ConfigError);
    CHECK_THROWS_AS(svc.serve("localhost:http"), ConfigError);
  }
}
