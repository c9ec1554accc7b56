#pragma once

#include <string>

#include <json.hpp>

#include "planacq/dialogue_moves.hpp"
#include "planacq/plan_graph.hpp"
#include "planacq/predictors.hpp"
#include "planacq/session.hpp"

namespace planacq {

// Insertion-ordered JSON keeps emitted files byte-stable across runs.
using Json = nlohmann::ordered_json;

struct PlanRecord {
    std::string id;
    KnowledgeSplit split;
};

Json plan_record_to_json(const PlanRecord& record);
PlanRecord plan_record_from_json(const Json& j);

Json session_to_json(const SessionLog& log);
SessionLog session_from_json(const Json& j);

Json vocabulary_to_json(const SlotVocabulary& vocab);
SlotVocabulary vocabulary_from_json(const Json& j);

Json linear_model_to_json(const LinearModel& m);
LinearModel linear_model_from_json(const Json& j);

Json staged_model_to_json(const StagedModel& m);
StagedModel staged_model_from_json(const Json& j);

}  // namespace planacq
