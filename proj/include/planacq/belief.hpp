#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "planacq/dialogue_moves.hpp"
#include "planacq/plan_graph.hpp"

namespace planacq {

enum class EventKind : std::uint8_t { CreateBlock, CombineBlocks };

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& name);

struct ActionEvent {
    AgentId actor = AgentId::A;
    EventKind kind = EventKind::CreateBlock;
    NodeId target = 0;
    int turn = 0;

    bool operator==(const ActionEvent&) const = default;
};

enum class CompletionStatus : std::uint8_t { Incomplete = 0, DoneBySelf = 1, DoneByPartner = 2 };

struct PendingInquiry {
    MoveCategory category = MoveCategory::InquiryRecipe;
    std::optional<NodeId> node;
};

// One agent's tracked state: what it knows, and a sound lower bound on what
// its partner knows. Updated only through apply_move/apply_event so a
// recorded session replays to identical states.
struct BeliefState {
    AgentId owner = AgentId::A;
    EdgeSet known_edges;
    std::vector<CompletionStatus> completed;
    std::optional<NodeId> intention;
    std::optional<NodeId> partner_intention;
    EdgeSet partner_known_edges_lower_bound;
    std::set<NodeId> partner_lacks;
    std::set<std::string> partner_tools;
    // One-deep inquiry bookkeeping: what the partner asked me, and what I
    // asked the partner.
    std::optional<PendingInquiry> inquiry_from_partner;
    std::optional<PendingInquiry> inquiry_to_partner;

    static BeliefState initial(const KnowledgeSplit& split, AgentId agent);

    bool knows_full_recipe(const JointPlan& plan, NodeId v) const;
};

struct DialogueHistory {
    std::vector<DialogueMove> moves;  // turn indices non-decreasing
};

// Move semantics rule table. `b` may belong to the speaker or the hearer;
// both sides of the conversation run the same update.
BeliefState apply_move(const BeliefState& b, const DialogueMove& m, const JointPlan& plan);

// Action semantics: completion bookkeeping, plus the inference that a partner
// combining a node must know all of its incoming edges (the engine gates
// combines on full recipe knowledge, so the inference is sound).
BeliefState apply_event(const BeliefState& b, const ActionEvent& ev, const JointPlan& plan);

struct OracleLabels {
    NodeId intention = 0;                     // partner's current sub-goal
    std::vector<CompletionStatus> status;     // partner's believed completion, per node
    std::vector<bool> knowledge;              // partner knows all incoming edges of node
    EdgeSet own_missing;
    EdgeSet partner_missing;

    bool operator==(const OracleLabels&) const = default;
};

// Ground-truth labels for agent `agent` about its partner, computed from the
// omniscient pair of belief states. Missing-knowledge labels are taken
// against the initial partial plans unless `missing_from_current` is set.
OracleLabels oracle_labels(const KnowledgeSplit& split, const BeliefState& agent_state,
                           const BeliefState& partner_state, bool missing_from_current = false);

}  // namespace planacq
