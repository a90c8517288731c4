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
// Command-line front end. Talks to the engine only through the C API.

#include <apprentice/apprentice.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <pthread.h>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace {

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void check(apprentice_status s) {
    if (s != APPRENTICE_OK)
        throw CliError(static_cast<int>(s), std::string(apprentice_status_name(s)) + ": " + apprentice_last_error());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError(APPRENTICE_E_IO, "cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Owns a string returned by the library.
struct Owned {
    char* p = nullptr;
    ~Owned() { apprentice_string_free(p); }
};

void emit(const char* text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CliError(APPRENTICE_E_IO, "cannot write " + out_path);
    out << text;
    if (std::string_view(text).empty() || std::string_view(text).back() != '\n') out << "\n";
}

struct Config {
    apprentice_config* c = nullptr;
    Config(const std::string& path, bool offline) {
        check(apprentice_config_load(path.c_str(), &c));
        check(apprentice_config_set_offline(c, offline ? 1 : 0));
    }
    ~Config() { apprentice_config_free(c); }
};

struct Gateway {
    apprentice_gateway* g = nullptr;
    Gateway(const Config& cfg, const std::string& mock) {
        check(apprentice_gateway_from_config(cfg.c, mock.empty() ? nullptr : mock.c_str(), &g));
    }
    ~Gateway() { apprentice_gateway_free(g); }
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"apprentice: turns a tutorial video into a one-on-one tutoring session"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(apprentice_version()));

    std::string config_path, transcript, mock, out, segments, knowledge, plans, mastery, history, dsl, events,
        data_dir = "data", student = "student", pred, gold, topic = "corpus", host = "127.0.0.1", token,
        config_root = ".";
    bool offline = false, detailed = false;
    double margin = 5.0;
    int port = 8080;

    auto* seg = app.add_subcommand("segment", "Split a transcript into learning-goal segments");
    seg->add_option("--config", config_path, "Expert config JSON")->required()->check(CLI::ExistingFile);
    seg->add_option("--transcript", transcript, "Transcript JSON; defaults to the config's source");
    seg->add_option("--mock", mock, "Mock gateway script");
    seg->add_option("--out", out, "Output file; stdout when omitted");
    seg->add_flag("--detailed", detailed, "Include summaries and sentence ranges");
    seg->add_flag("--offline", offline, "Forbid remote sources");

    auto* ext = app.add_subcommand("extract", "Extract templated knowledge for each segment");
    ext->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    ext->add_option("--segments", segments, "Segment JSON from 'segment'")->required()->check(CLI::ExistingFile);
    ext->add_option("--mock", mock);
    ext->add_option("--out", out);
    ext->add_flag("--offline", offline);

    auto* pln = app.add_subcommand("plan", "Choose mentor moves for every knowledge item");
    pln->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    pln->add_option("--knowledge", knowledge, "Knowledge JSON from 'extract'")->required()->check(CLI::ExistingFile);
    pln->add_option("--mastery", mastery, "{\"<knowledge id>\": p} overrides")->check(CLI::ExistingFile);
    pln->add_option("--history", history, "Earlier move history")->check(CLI::ExistingFile);
    pln->add_option("--out", out);

    auto* cmp = app.add_subcommand("compile-dsl", "Compile knowledge and plans into the conversation DSL");
    cmp->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    cmp->add_option("--knowledge", knowledge)->required()->check(CLI::ExistingFile);
    cmp->add_option("--plans", plans, "Plans JSON from 'plan'")->required()->check(CLI::ExistingFile);
    cmp->add_option("--out", out);

    auto* rep = app.add_subcommand("replay", "Drive a whole session from an event script");
    rep->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    rep->add_option("--events", events, "Event script JSON")->required()->check(CLI::ExistingFile);
    rep->add_option("--dsl", dsl, "Compiled DSL; the full pipeline runs when omitted")->check(CLI::ExistingFile);
    rep->add_option("--segments", segments, "Segments for video clips (with --dsl)")->check(CLI::ExistingFile);
    rep->add_option("--mock", mock);
    rep->add_option("--data", data_dir, "Student model directory");
    rep->add_option("--student", student, "Student id");
    rep->add_option("--out", out);
    rep->add_flag("--offline", offline);

    auto* ev = app.add_subcommand("eval", "Evaluation harness");
    ev->require_subcommand(1);
    auto* ev_seg = ev->add_subcommand("segmentation", "Segment accuracy within a time margin");
    ev_seg->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
    ev_seg->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
    ev_seg->add_option("--margin", margin, "Seconds")->capture_default_str();
    ev_seg->add_option("--out", out);
    auto* ev_int = ev->add_subcommand("intents", "Per-layer precision, recall and F1 of intent labels");
    ev_int->add_option("--pred", pred, "Annotated labels")->required()->check(CLI::ExistingFile);
    ev_int->add_option("--gold", gold, "Labels taken from the DSL")->required()->check(CLI::ExistingFile);
    ev_int->add_option("--topic", topic);
    ev_int->add_option("--out", out);

    auto* srv = app.add_subcommand("serve", "Run the HTTP service");
    srv->add_option("--port", port)->capture_default_str();
    srv->add_option("--host", host)->capture_default_str();
    srv->add_option("--data", data_dir, "Student model directory")->capture_default_str();
    srv->add_option("--mock", mock, "Mock script used by every session");
    srv->add_option("--token", token, "Bearer token; falls back to $APPRENTICE_TOKEN");
    srv->add_option("--config-root", config_root, "Base for relative paths in uploaded configs");
    srv->add_flag("--offline", offline);

    CLI11_PARSE(app, argc, argv);

    try {
        Owned result;
        if (*seg) {
            Config cfg(config_path, offline);
            Gateway gw(cfg, mock);
            check(apprentice_segment(cfg.c, gw.g, opt(transcript), detailed ? 1 : 0, &result.p));
            emit(result.p, out);
        } else if (*ext) {
            Config cfg(config_path, offline);
            Gateway gw(cfg, mock);
            check(apprentice_extract(cfg.c, gw.g, slurp(segments).c_str(), &result.p));
            emit(result.p, out);
        } else if (*pln) {
            Config cfg(config_path, false);
            const auto m = mastery.empty() ? std::string() : slurp(mastery);
            const auto h = history.empty() ? std::string() : slurp(history);
            check(apprentice_plan(cfg.c, slurp(knowledge).c_str(), opt(m), opt(h), &result.p));
            emit(result.p, out);
        } else if (*cmp) {
            Config cfg(config_path, false);
            check(apprentice_compile_dsl(cfg.c, slurp(knowledge).c_str(), slurp(plans).c_str(), &result.p));
            emit(result.p, out);
        } else if (*rep) {
            Config cfg(config_path, offline);
            Gateway gw(cfg, mock);
            const auto d = dsl.empty() ? std::string() : slurp(dsl);
            const auto s = segments.empty() ? std::string() : slurp(segments);
            check(apprentice_replay(cfg.c, gw.g, opt(d), opt(s), slurp(events).c_str(), data_dir.c_str(),
                                    student.c_str(), &result.p));
            emit(result.p, out);
        } else if (*ev_seg) {
            check(apprentice_eval_segmentation(slurp(pred).c_str(), slurp(gold).c_str(), margin, &result.p));
            emit(result.p, out);
        } else if (*ev_int) {
            check(apprentice_eval_intents(slurp(pred).c_str(), slurp(gold).c_str(), topic.c_str(), &result.p));
            emit(result.p, out);
        } else if (*srv) {
            if (token.empty())
                if (const char* env = std::getenv("APPRENTICE_TOKEN")) token = env;
            const nlohmann::json o = {{"data_dir", data_dir}, {"config_root", config_root}, {"mock_script", mock},
                                      {"token", token},       {"offline", offline}};
            apprentice_service* service = nullptr;
            check(apprentice_service_create(o.dump().c_str(), &service));
            // Signals go to a waiter thread, which may take locks safely.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&set, &sig);
                apprentice_service_stop(service);
            });
            std::cerr << "serving on " << host << ":" << port << "\n";
            const auto s = apprentice_service_run(service, host.c_str(), port);
            if (waiter.joinable()) {
                pthread_kill(waiter.native_handle(), SIGTERM);
                waiter.join();
            }
            apprentice_service_free(service);
            check(s);
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code == 0 ? 1 : 2;
    }
    return 0;
}
