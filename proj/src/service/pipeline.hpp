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

#include <string>
#include <vector>

#include "core/error.hpp"
#include "dsl/dsl.hpp"
#include "gateway/gateway.hpp"
#include "ingestion/code.hpp"
#include "ingestion/config.hpp"
#include "ingestion/transcript.hpp"
#include "knowledge/knowledge.hpp"
#include "planner/planner.hpp"
#include "segmentation/segmentation.hpp"
#include "student/student_model.hpp"

namespace apprentice::service {

struct PipelineResult {
    ingest::Transcript transcript;
    ingest::CodeArtifact code;
    seg::SegmentationResult segmentation;
    knowledge::VideoExtraction extraction;
    std::vector<std::string> skipped_mastered;  // knowledge ids the student already masters
    planner::MasteryMap mastery;
    std::vector<planner::MovePlan> plans;
    planner::MoveHistory history;
    dsl::DslDocument dsl;
};

// Failure inside the pipeline, tagged with the stage that raised it.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const Error& cause)
        : Error(cause.code(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Segments, extracts, plans and compiles one video for one student. Items
/// the student has mastered (p > strong) are left out; the rest are planned
/// with the student's restored mastery, or the configured default.
PipelineResult run_pipeline(const ingest::ExpertConfig& config, gateway::Gateway& gw,
                            student::StudentStore& store, const std::string& student_id,
                            const ingest::SourceOptions& sources);

}  // namespace apprentice::service
