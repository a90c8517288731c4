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
#include "knowledge/knowledge.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"
#include "gateway/reply_parse.hpp"

namespace apprentice::knowledge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kDeclarativeLabel = "declarative knowledge:";
constexpr std::string_view kProceduralLabel = "procedural knowledge:";

std::string strip_period(std::string_view s) {
    s = text::trim(s);
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

std::string strip_quotes(std::string_view s) {
    s = text::trim(s);
    auto drop = [&](std::string_view q) {
        if (s.starts_with(q)) s.remove_prefix(q.size());
    };
    auto drop_back = [&](std::string_view q) {
        if (s.ends_with(q)) s.remove_suffix(q.size());
    };
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        s.remove_prefix(1);
        s.remove_suffix(1);
    }
    drop("\xE2\x80\x9C");  // curly double quotes
    drop_back("\xE2\x80\x9D");
    return std::string(text::trim(s));
}

// Earliest occurrence of any needle in `lower` at or after `from`.
std::pair<std::size_t, std::size_t> find_first(std::string_view lower, std::initializer_list<std::string_view> needles,
                                               std::size_t from = 0) {
    std::size_t best = std::string_view::npos;
    std::size_t len = 0;
    for (auto n : needles) {
        const auto at = lower.find(n, from);
        if (at != std::string_view::npos && (best == std::string_view::npos || at < best)) {
            best = at;
            len = n.size();
        }
    }
    return {best, len};
}

struct Prepared {
    std::string text;
    std::optional<std::string> marked;
};

// Removes one &...& pair, keeping its content as the explicit anchor.
Prepared remove_markers(std::string_view raw) {
    Prepared p;
    const auto a = raw.find('&');
    const auto b = a == std::string_view::npos ? a : raw.find('&', a + 1);
    if (b == std::string_view::npos) {
        p.text = std::string(raw);
        return p;
    }
    p.marked = std::string(text::trim(raw.substr(a + 1, b - a - 1)));
    p.text = std::string(raw.substr(0, a)) + std::string(raw.substr(a + 1, b - a - 1)) + std::string(raw.substr(b + 1));
    if (p.marked->empty()) p.marked.reset();
    return p;
}

using Parse = std::optional<TemplateMatch>;

Parse parse_declarative_concept(const Prepared& p, std::string& why) {
    const auto lower = text::to_lower(p.text);
    if (lower.starts_with("the task is ")) {
        why = "reads as the programming task template ('The task is ...')";
        return std::nullopt;
    }
    const auto that = lower.find(" that ");
    if (that == std::string::npos) {
        why = "missing the 'that' connective of '<subject> <verb phrase> that <clause>'";
        return std::nullopt;
    }
    TemplateMatch m;
    m.kind = KnowledgeKind::Declarative;
    m.domain = Domain::ConceptRelated;
    m.text = p.text;
    m.slots["subject"] = std::string(text::trim(std::string_view(p.text).substr(0, that)));
    m.slots["clause"] = strip_period(std::string_view(p.text).substr(that + 6));
    if (m.slots["subject"].empty() || m.slots["clause"].empty()) {
        why = "empty subject or clause around 'that'";
        return std::nullopt;
    }
    m.anchor_span = p.marked.value_or(m.slots["clause"]);
    m.marked = p.marked.has_value();
    return m;
}

Parse parse_declarative_programming(const Prepared& p, std::string& why) {
    const auto lower = text::to_lower(p.text);
    if (!lower.starts_with("the task is ")) {
        why = "does not open with 'The task is'";
        return std::nullopt;
    }
    const auto using_at = lower.find(" using ", 12);
    if (using_at == std::string::npos) {
        why = "missing the 'using' connective after the final goal";
        return std::nullopt;
    }
    TemplateMatch m;
    m.kind = KnowledgeKind::Declarative;
    m.domain = Domain::ProgrammingRelated;
    m.text = p.text;
    const std::string_view t = p.text;
    m.slots["goal"] = std::string(text::trim(t.substr(12, using_at - 12)));
    const auto tail = t.substr(using_at + 7);
    const auto and_at = text::to_lower(tail).find(" and ");
    if (and_at == std::string::npos) {
        m.slots["method"] = strip_period(tail);
        m.slots["enhancement"] = "";
    } else {
        m.slots["method"] = std::string(text::trim(tail.substr(0, and_at)));
        m.slots["enhancement"] = strip_period(tail.substr(and_at + 5));
    }
    if (m.slots["goal"].empty() || m.slots["method"].empty()) {
        why = "empty final goal or method slot";
        return std::nullopt;
    }
    m.anchor_span = p.marked.value_or(m.slots["goal"]);
    m.marked = p.marked.has_value();
    return m;
}

struct ProceduralHead {
    std::string goal;
    std::size_t rest_at = 0;
};

std::optional<ProceduralHead> procedural_head(const std::string& t, std::string& why) {
    const auto lower = text::to_lower(t);
    if (!lower.starts_with("to ")) {
        why = "does not open with 'To achieve/understand'";
        return std::nullopt;
    }
    const auto [at, len] = find_first(lower, {", one must ", " one must ", ", one needs to ", " one needs to ",
                                              ", one need to ", " one need to "});
    if (at == std::string::npos) {
        why = "missing the 'one must' connective";
        return std::nullopt;
    }
    ProceduralHead h;
    h.goal = strip_period(std::string_view(t).substr(3, at - 3));
    h.rest_at = at + len;
    if (h.goal.empty()) {
        why = "empty goal slot";
        return std::nullopt;
    }
    return h;
}

Parse parse_procedural_concept(const Prepared& p, std::string& why) {
    const auto head = procedural_head(p.text, why);
    if (!head) return std::nullopt;
    const std::string_view rest = std::string_view(p.text).substr(head->rest_at);
    const auto lower = text::to_lower(rest);
    auto [end, len] = find_first(lower, {",", " considering ", " using ", " and consider "});
    (void)len;
    TemplateMatch m;
    m.kind = KnowledgeKind::Procedural;
    m.domain = Domain::ConceptRelated;
    m.text = p.text;
    m.slots["goal"] = head->goal;
    m.slots["actions"] = strip_period(rest.substr(0, end));
    m.slots["details"] = end == std::string::npos ? "" : strip_period(text::trim(rest.substr(end + 1)));
    if (p.marked) m.slots["actions"] = *p.marked;
    if (m.slots["actions"].empty()) {
        why = "empty actions slot";
        return std::nullopt;
    }
    m.anchor_span = m.slots["actions"];
    m.marked = p.marked.has_value();
    return m;
}

Parse parse_procedural_programming(const Prepared& p, std::string& why) {
    const auto head = procedural_head(p.text, why);
    if (!head) return std::nullopt;
    const std::string_view rest = std::string_view(p.text).substr(head->rest_at);
    const auto lower = text::to_lower(rest);
    const auto [reason_at, reason_len] = find_first(lower, {" because ", ", "});
    const auto body = rest.substr(0, reason_at);
    const auto on = text::to_lower(body).find(" on ");
    TemplateMatch m;
    m.kind = KnowledgeKind::Procedural;
    m.domain = Domain::ProgrammingRelated;
    m.text = p.text;
    m.slots["goal"] = head->goal;
    m.slots["action"] = strip_period(on == std::string::npos ? body : body.substr(0, on));
    m.slots["object"] = on == std::string::npos ? "" : strip_period(body.substr(on + 4));
    m.slots["reason"] = reason_at == std::string::npos ? "" : strip_period(rest.substr(reason_at + reason_len));
    if (m.slots["action"].empty()) {
        why = "empty action/tool slot";
        return std::nullopt;
    }
    m.anchor_span = p.marked.value_or(m.slots["action"]);
    m.marked = p.marked.has_value();
    return m;
}

Parse parse_with(KnowledgeKind kind, Domain domain, const Prepared& p, std::string& why) {
    if (kind == KnowledgeKind::Declarative)
        return domain == Domain::ConceptRelated ? parse_declarative_concept(p, why)
                                                : parse_declarative_programming(p, why);
    return domain == Domain::ConceptRelated ? parse_procedural_concept(p, why) : parse_procedural_programming(p, why);
}

std::string template_name(KnowledgeKind kind, Domain domain) {
    return std::string(to_string(kind)) + "/" + std::string(to_string(domain));
}

// A procedural sentence naming a quoted tool or an " on <target>" reads as
// programming knowledge.
Domain guess_procedural_domain(const Prepared& p) {
    const auto lower = text::to_lower(p.text);
    const auto [at, len] = find_first(lower, {" one must ", " one needs to ", " one need to "});
    if (at == std::string::npos) return Domain::ConceptRelated;
    const auto rest = std::string_view(p.text).substr(at + len);
    const auto [end, elen] = find_first(text::to_lower(rest), {" because ", ", "});
    (void)elen;
    const auto body = rest.substr(0, end);
    if (!text::quoted_tokens(body).empty() || text::to_lower(body).find(" on ") != std::string::npos)
        return Domain::ProgrammingRelated;
    return Domain::ConceptRelated;
}

}  // namespace

std::string labelled_text(KnowledgeKind kind, std::string_view body) {
    return std::string(kind == KnowledgeKind::Declarative ? "Declarative knowledge: " : "Procedural knowledge: ") +
           std::string(body);
}

std::pair<std::optional<KnowledgeKind>, std::string> strip_label(std::string_view raw) {
    auto s = strip_quotes(raw);
    const auto lower = text::to_lower(s);
    if (lower.starts_with(kDeclarativeLabel))
        return {KnowledgeKind::Declarative, strip_quotes(std::string_view(s).substr(kDeclarativeLabel.size()))};
    if (lower.starts_with(kProceduralLabel))
        return {KnowledgeKind::Procedural, strip_quotes(std::string_view(s).substr(kProceduralLabel.size()))};
    return {std::nullopt, s};
}

FormatCheck validate_format(std::string_view raw, KnowledgeKind kind, Domain domain) {
    const auto [label, body] = strip_label(raw);
    FormatCheck out;
    if (label && *label != kind) {
        out.diagnostic = "labelled " + std::string(to_string(*label)) + " but " +
                         template_name(kind, domain) + " was requested";
        return out;
    }
    const auto prepared = remove_markers(body);
    std::string why;
    out.match = parse_with(kind, domain, prepared, why);
    if (out.match) return out;

    out.diagnostic = "does not match the " + template_name(kind, domain) + " template: " + why;
    for (auto k : {KnowledgeKind::Declarative, KnowledgeKind::Procedural})
        for (auto d : {Domain::ConceptRelated, Domain::ProgrammingRelated}) {
            if (k == kind && d == domain) continue;
            std::string ignored;
            if (parse_with(k, d, prepared, ignored)) {
                out.diagnostic += "; nearest template is " + template_name(k, d);
                return out;
            }
        }
    return out;
}

FormatCheck classify(std::string_view raw, std::optional<Domain> domain) {
    const auto [label, body] = strip_label(raw);
    const auto prepared = remove_markers(body);
    const auto lower = text::to_lower(prepared.text);

    std::vector<KnowledgeKind> kinds;
    if (label) {
        kinds.push_back(*label);
    } else if (lower.starts_with("to ")) {
        kinds = {KnowledgeKind::Procedural, KnowledgeKind::Declarative};
    } else {
        kinds = {KnowledgeKind::Declarative, KnowledgeKind::Procedural};
    }
    std::vector<Domain> domains;
    if (domain) {
        domains.push_back(*domain);
    } else {
        domains = {Domain::ConceptRelated, Domain::ProgrammingRelated};
    }

    FormatCheck out;
    std::string first_why;
    for (auto k : kinds) {
        auto ordered = domains;
        if (!domain) {
            const Domain guess = k == KnowledgeKind::Procedural
                                     ? guess_procedural_domain(prepared)
                                     : (lower.starts_with("the task is ") ? Domain::ProgrammingRelated
                                                                          : Domain::ConceptRelated);
            std::stable_partition(ordered.begin(), ordered.end(), [&](Domain d) { return d == guess; });
        }
        for (auto d : ordered) {
            std::string why;
            if (auto m = parse_with(k, d, prepared, why)) {
                out.match = std::move(m);
                return out;
            }
            if (first_why.empty()) first_why = template_name(k, d) + ": " + why;
        }
    }
    out.diagnostic = "matches no knowledge template (expected a connective such as 'one must', '... that ...' "
                     "or 'The task is'); closest attempt " + first_why;
    return out;
}

std::string anchor_of(const KnowledgeItem& item) {
    if (!item.anchor_span.empty()) return item.anchor_span;
    const auto check = validate_format(item.text, item.kind, item.domain);
    if (!check) fail(ErrorCode::Validation, "knowledge item " + item.id + " " + check.diagnostic);
    return check.match->anchor_span;
}

namespace {

std::string knowledge_prompt(const seg::VideoSegment& segment, std::string_view segment_text, Domain domain,
                             const ingest::CodeArtifact* code, const ExtractOptions& options) {
    std::ostringstream p;
    p << "Knowledge extraction for the segment \"" << segment.key() << "\" of a " << to_string(domain)
      << " video about " << options.topic << ". The segment serves the learning goal \"" << segment.goal_name
      << "\".\n\n";
    if (domain == Domain::ConceptRelated) {
        p << "Write exactly one procedural sentence and at most " << (options.max_items > 0 ? options.max_items - 1 : 0)
          << " declarative sentences, ordered the way a learner should meet them.\n"
             "Procedural form: To understand <outcome>, one must &<core actions>&, <extra detail>, considering "
             "<factors or tools>. Wrap the core actions in a pair of & signs.\n"
             "Declarative form: <subject> <verb phrase> that <self-contained fact>.\n";
    } else {
        p << "Write at most " << options.max_items
          << " sentences, ordered the way a learner should meet them.\n"
             "Procedural form: To achieve <goal>, one must <verb> '<function or tool>' on <target> because <reason>.\n"
             "Declarative form: The task is <final goal> using <main method> and <refinement>.\n";
    }
    p << "Start each sentence with \"Declarative knowledge: \" or \"Procedural knowledge: \".\n"
         "Answer with a list of strings and nothing else: ['...', '...']\n\n"
         "Segment transcript:\n"
      << segment_text << '\n';
    if (code != nullptr && !code->empty()) {
        p << "\nCode:\n";
        for (const auto& cell : code->cells) p << cell.text << "\n\n";
    }
    return p.str();
}

}  // namespace

Extraction summarize_knowledge(const seg::VideoSegment& segment, const ingest::Transcript& transcript, Domain domain,
                               const ingest::CodeArtifact* code, const ExtractOptions& options,
                               gateway::Gateway& gw) {
    Extraction out;
    if (transcript.empty() || segment.last_index >= transcript.size()) return out;
    const auto segment_text = text::trim(ingest::join_text(transcript, segment.first_index, segment.last_index));
    if (segment_text.empty()) return out;
    if (domain == Domain::ProgrammingRelated && (code == nullptr || code->empty()))
        fail(ErrorCode::InvalidArgument, "programming segment " + segment.key() + " needs code");

    gateway::GenerationRequest req;
    req.stage = "knowledge.summarize";
    req.system_prompt = "You condense tutorial segments into templated knowledge sentences.";
    req.user_prompt = knowledge_prompt(segment, segment_text, domain, code, options);
    const auto reply = gw.generate(req);
    const auto list = gateway::parse_list_reply(reply);

    std::vector<TemplateMatch> valid;
    for (const auto& entry : list) {
        std::string raw;
        if (entry.is_string()) {
            raw = entry.get<std::string>();
        } else if (entry.is_object() && entry.contains("text") && entry["text"].is_string()) {
            raw = entry["text"].get<std::string>();
            if (entry.contains("kind") && entry["kind"].is_string())
                raw = labelled_text(parse_knowledge_kind(entry["kind"].get<std::string>())
                                        .value_or(KnowledgeKind::Declarative),
                                    raw);
        } else {
            out.rejections.push_back({entry.dump(), "not a string"});
            continue;
        }
        const auto [label, body] = strip_label(raw);
        auto check = label ? validate_format(raw, *label, domain) : classify(raw, domain);
        if (!check) {
            out.rejections.push_back({raw, check.diagnostic});
            continue;
        }
        valid.push_back(std::move(*check.match));
    }

    std::vector<TemplateMatch> kept;
    if (domain == Domain::ConceptRelated) {
        const auto proc = std::find_if(valid.begin(), valid.end(),
                                       [](const auto& m) { return m.kind == KnowledgeKind::Procedural; });
        const bool have_proc = proc != valid.end();
        if (!have_proc) out.rejections.push_back({"", "reply has no procedural item for a concept segment"});
        std::size_t declarative_budget = options.max_items - (have_proc && options.max_items > 0 ? 1 : 0);
        for (auto it = valid.begin(); it != valid.end(); ++it) {
            if (it->kind == KnowledgeKind::Procedural) {
                if (it == proc && options.max_items > 0) {
                    kept.push_back(*it);
                } else {
                    out.rejections.push_back({it->text, "concept segments keep a single procedural item"});
                }
            } else if (declarative_budget > 0) {
                kept.push_back(*it);
                --declarative_budget;
            } else {
                out.rejections.push_back({it->text, "over the item limit"});
            }
        }
    } else {
        for (auto& m : valid) {
            if (kept.size() < options.max_items) {
                kept.push_back(std::move(m));
            } else {
                out.rejections.push_back({m.text, "over the item limit"});
            }
        }
    }

    const auto key = segment.key();
    for (auto& m : kept) {
        KnowledgeItem item;
        item.order_index = out.items.size();
        item.id = key + "#" + std::to_string(item.order_index);
        item.segment_key = key;
        item.goal_name = segment.goal_name;
        item.kind = m.kind;
        item.domain = domain;
        item.text = m.text;
        item.anchor_span = m.anchor_span;
        out.items.push_back(std::move(item));
    }
    return out;
}

VideoExtraction extract_video(const std::vector<seg::VideoSegment>& segments, const ingest::Transcript& transcript,
                              const ingest::ExpertConfig& config, const ingest::CodeArtifact& code,
                              gateway::Gateway& gw) {
    VideoExtraction out;
    ExtractOptions options{config.topic, config.max_knowledge_items};
    for (const auto& s : segments) {
        const auto* goal = config.find_goal(s.goal_name);
        if (goal == nullptr) fail(ErrorCode::Validation, "segment goal '" + s.goal_name + "' is not configured");
        const auto key = s.key();
        if (out.knowledge.contains(key)) fail(ErrorCode::Validation, "duplicate segment key '" + key + "'");
        auto ex = summarize_knowledge(s, transcript, config.domain_of(*goal), &code, options, gw);
        out.knowledge[key] = std::move(ex.items);
        if (!ex.rejections.empty()) out.rejections[key] = std::move(ex.rejections);
        out.segment_order.push_back(key);
    }
    return out;
}

ordered_json to_json(const KnowledgeItem& item) {
    ordered_json j;
    j["id"] = item.id;
    j["goal"] = item.goal_name;
    j["kind"] = to_string(item.kind);
    j["domain"] = to_string(item.domain);
    j["text"] = item.text;
    j["anchor"] = item.anchor_span;
    j["order_index"] = item.order_index;
    return j;
}

KnowledgeItem item_from_json(const json& j) {
    auto str = [&](const char* k) -> std::string {
        if (!j.contains(k) || !j[k].is_string()) fail(ErrorCode::Validation, std::string("knowledge item needs string '") + k + "'");
        return j[k].get<std::string>();
    };
    KnowledgeItem item;
    item.id = str("id");
    item.goal_name = j.contains("goal") && j["goal"].is_string() ? j["goal"].get<std::string>() : "";
    const auto kind = parse_knowledge_kind(str("kind"));
    const auto domain = parse_domain(str("domain"));
    if (!kind || !domain) fail(ErrorCode::Validation, "knowledge item " + item.id + " has an unknown kind or domain");
    item.kind = *kind;
    item.domain = *domain;
    item.text = str("text");
    item.order_index = j.value("order_index", std::size_t{0});
    const auto check = validate_format(item.text, item.kind, item.domain);
    if (!check) fail(ErrorCode::Validation, "knowledge item " + item.id + " " + check.diagnostic);
    item.anchor_span = j.contains("anchor") && j["anchor"].is_string() ? j["anchor"].get<std::string>()
                                                                         : check.match->anchor_span;
    return item;
}

ordered_json to_json(const KnowledgeMap& map, const std::vector<std::string>& order) {
    ordered_json doc = ordered_json::object();
    for (const auto& key : order) {
        ordered_json arr = ordered_json::array();
        if (auto it = map.find(key); it != map.end())
            for (const auto& item : it->second) arr.push_back(to_json(item));
        doc[key] = std::move(arr);
    }
    return doc;
}

std::pair<KnowledgeMap, std::vector<std::string>> parse_knowledge(const json& doc) {
    if (!doc.is_object()) fail(ErrorCode::Validation, "knowledge file must be an object keyed by segment");
    // nlohmann::json sorts keys; recover the written order from the items' start seconds.
    KnowledgeMap map;
    std::vector<std::string> order;
    for (const auto& [key, arr] : doc.items()) {
        if (!arr.is_array()) fail(ErrorCode::Validation, "knowledge for '" + key + "' must be an array");
        auto& items = map[key];
        for (const auto& j : arr) {
            auto item = item_from_json(j);
            item.segment_key = key;
            items.push_back(std::move(item));
        }
        std::stable_sort(items.begin(), items.end(),
                         [](const auto& a, const auto& b) { return a.order_index < b.order_index; });
        order.push_back(key);
    }
    auto start_of = [](const std::string& key) {
        const auto dash = key.rfind(" - ");
        try {
            return dash == std::string::npos ? 0LL : std::stoll(key.substr(dash + 3));
        } catch (const std::exception&) {
            return 0LL;
        }
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](const auto& a, const auto& b) { return start_of(a) < start_of(b); });
    return {map, order};
}

}  // namespace apprentice::knowledge
