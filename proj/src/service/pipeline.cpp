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
#include "service/pipeline.hpp"

#include "core/error.hpp"

namespace apprentice::service {

PipelineResult run_pipeline(const ingest::ExpertConfig& config, gateway::Gateway& gw,
                            student::StudentStore& store, const std::string& student_id,
                            const ingest::SourceOptions& sources) {
    PipelineResult r;
    std::string stage = "ingestion";
    try {
        r.transcript = ingest::load_transcript(config.transcript_source, sources);
        r.code = config.code_source.empty() ? ingest::code_from_text("", config.video_type)
                                            : ingest::load_code(config.code_source, config.video_type, sources);

        stage = "segmentation";
        r.segmentation = seg::segment_video(r.transcript, config, gw);

        stage = "knowledge";
        r.extraction = knowledge::extract_video(r.segmentation.segments, r.transcript, config, r.code, gw);

        stage = "planning";
        const auto options = planner::options_from(config);
        std::vector<knowledge::KnowledgeItem> items;
        for (const auto& key : r.extraction.segment_order) {
            const auto it = r.extraction.knowledge.find(key);
            if (it == r.extraction.knowledge.end()) continue;
            for (const auto& item : it->second) {
                const auto p = store.mastery_of(student_id, knowledge::anchor_of(item), gw);
                if (p && student::mastered(*p, config.thresholds)) {
                    r.skipped_mastered.push_back(item.id);
                    continue;
                }
                r.mastery[item.id] = p.value_or(options.default_mastery);
                items.push_back(item);
            }
        }
        r.plans = planner::plan(items, r.mastery, r.history, options);

        stage = "compile";
        r.dsl = dsl::compile(r.plans, r.extraction.knowledge, r.extraction.segment_order, config.action_set);
    } catch (const Error& e) {
        throw PipelineError(stage, e);
    }
    return r;
}

}  // namespace apprentice::service
