/*
 * Copyright (c) 2026 The Apprentice Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <thread>

#include "core/error.hpp"
#include "service/http.hpp"
#include "service/service.hpp"
#include "support.hpp"

using namespace apprentice;
using nlohmann::json;

namespace {

std::string create_body(const std::string& student, const std::string& mock_rel = "eda/mock.json") {
    json b;
    b["student_id"] = student;
    b["config_path"] = testsupport::fixture("eda/config.json").string();
    b["mock_script"] = json::parse(testsupport::read(mock_rel));
    return b.dump();
}

std::string event(const std::string& type, const std::string& id = "") {
    json e = {{"type", type}};
    if (!id.empty()) e["id"] = id;
    return e.dump();
}

}  // namespace

TEST_CASE("routes and status codes") {
    testsupport::TempDir dir("service");
    service::Service svc({dir.path, "", ".", true});

    CHECK(svc.dispatch("GET", "/health", "").status == 200);
    CHECK(svc.dispatch("GET", "/nowhere", "").status == 404);
    CHECK(svc.dispatch("GET", "/sessions/nope", "").status == 404);
    CHECK(svc.dispatch("POST", "/sessions", "{not json").status == 400);
    CHECK(svc.dispatch("POST", "/sessions", R"({"config_path":"x"})").status == 400);
    CHECK(svc.dispatch("POST", "/sessions", R"({"student_id":"../up","config_path":"x"})").status == 400);
    CHECK(svc.dispatch("GET", "/sessions/x/next?wait_ms=abc", "").status == 400);

    const auto created = svc.dispatch("POST", "/sessions", create_body("ana"));
    REQUIRE(created.status == 201);
    CHECK(created.body["queue_size"] == 18);
    CHECK(created.body["status"] == "active");
    const std::string id = created.body["session_id"];
    const std::string base = "/sessions/" + id;

    auto next = svc.dispatch("GET", base + "/next", "");
    CHECK(next.status == 200);
    CHECK(next.body["envelope"]["type"] == "play_clip");
    CHECK(svc.dispatch("GET", base + "/next", "").body["status"] == "blocked");

    // Answering before anything was asked is a phase conflict.
    const auto early = svc.dispatch("POST", base + "/events", R"({"type":"student_response","text":"hi"})");
    CHECK(early.status == 409);
    CHECK(early.body["error"] == "phase");
    CHECK(svc.dispatch("POST", base + "/events", R"({"type":"jump"})").status == 400);

    const auto ack = svc.dispatch("POST", base + "/events", event("video_finished", "ev-1"));
    CHECK(ack.status == 200);
    CHECK(ack.body["advanced"] == true);
    CHECK_FALSE(ack.body.contains("duplicate"));
    const auto again = svc.dispatch("POST", base + "/events", event("video_finished", "ev-1"));
    CHECK(again.body["duplicate"] == true);
    CHECK(again.body["advanced"] == true);

    CHECK(svc.dispatch("GET", base + "/next", "").body["status"] == "message");
    const auto dsl = svc.dispatch("GET", base + "/dsl", "");
    CHECK(dsl.status == 200);
    CHECK(dsl.body.size() == 4);
    CHECK(dsl.body.contains("Visualize the data - 509"));
    const auto info = svc.dispatch("GET", base, "");
    CHECK(info.body["student_id"] == "ana");
    CHECK(info.body["video_label"] == "College majors and earnings");
    CHECK(svc.dispatch("GET", "/students/ana/model", "").status == 200);
}

TEST_CASE("a failing pipeline reports its stage") {
    testsupport::TempDir dir("service-fail");
    service::Service svc({dir.path, "", ".", true});
    json b = json::parse(create_body("bo"));
    b["mock_script"] = json::array();
    const auto r = svc.dispatch("POST", "/sessions", b.dump());
    CHECK(r.status == 422);
    CHECK(r.body["stage"] == "segmentation");
    CHECK(r.body["status"] == "failed");
    CHECK(svc.dispatch("GET", "/sessions/" + r.body["session_id"].get<std::string>() + "/next", "").status == 409);
}

TEST_CASE("long poll wakes on the next event") {
    testsupport::TempDir dir("service-poll");
    service::Service svc({dir.path, "", ".", true});
    const auto created = svc.dispatch("POST", "/sessions", create_body("cy"));
    REQUIRE(created.status == 201);
    const std::string base = "/sessions/" + created.body["session_id"].get<std::string>();
    svc.dispatch("GET", base + "/next", "");  // the clip

    std::thread poster([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        svc.dispatch("POST", base + "/events", event("video_finished"));
    });
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = svc.dispatch("GET", base + "/next?wait_ms=5000", "");
    const auto waited = std::chrono::steady_clock::now() - t0;
    poster.join();
    CHECK(r.body["status"] == "message");
    CHECK(waited >= std::chrono::milliseconds(90));
    CHECK(waited < std::chrono::milliseconds(4000));
}

TEST_CASE("HTTP front with a bearer token") {
    testsupport::TempDir dir("service-http");
    service::ServiceOptions o;
    o.data_dir = dir.path;
    o.offline = true;
    o.token = "sesame";
    service::Service svc(o);
    service::HttpServer server(svc);
    const int port = server.start("127.0.0.1", 0);
    REQUIRE(port > 0);

    httplib::Client client("127.0.0.1", port);
    const auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    const auto denied = client.Get("/sessions/x");
    REQUIRE(denied);
    CHECK(denied->status == 401);

    const httplib::Headers auth = {{"Authorization", "Bearer sesame"}};
    const auto missing = client.Get("/sessions/x", auth);
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"] == "not_found");

    const auto created = client.Post("/sessions", auth, create_body("di"), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    server.stop();
}
