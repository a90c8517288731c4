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
#pragma once

#include <memory>
#include <string>
#include <thread>

#include "service/service.hpp"

namespace httplib {
class Server;
}

namespace apprentice::service {

/// JSON-over-HTTP front for a Service. Every route except /health requires
/// "Authorization: Bearer <token>" when the service has a token.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds (port 0 picks a free one) and serves on a background thread.
    int start(const std::string& host, int port);
    // Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();
    int port() const noexcept { return port_; }

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace apprentice::service
