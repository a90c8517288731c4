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
#include "service/http.hpp"

#include <httplib.h>

#include "core/error.hpp"

namespace apprentice::service {

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    server_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        const auto& token = service_.options().token;
        if (token.empty() || req.path == "/health") return httplib::Server::HandlerResponse::Unhandled;
        if (req.get_header_value("Authorization") == "Bearer " + token)
            return httplib::Server::HandlerResponse::Unhandled;
        res.status = 401;
        res.set_content(R"({"error":"unauthorized","message":"missing or wrong bearer token"})", "application/json");
        return httplib::Server::HandlerResponse::Handled;
    });
    auto handle = [this](const httplib::Request& req, httplib::Response& res) {
        std::string path = req.path;
        if (req.has_param("wait_ms")) path += "?wait_ms=" + req.get_param_value("wait_ms");
        const auto reply = service_.dispatch(req.method, path, req.body);
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    server_->Get(".*", handle);
    server_->Post(".*", handle);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void HttpServer::run(const std::string& host, int port) {
    port_ = port;
    if (!server_->listen(host, port)) fail(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace apprentice::service
