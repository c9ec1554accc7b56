#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planacq/belief.hpp"
#include "planacq/dialogue_moves.hpp"
#include "planacq/plan_graph.hpp"
#include "planacq/rng.hpp"

namespace planacq {

enum class PolicyKind : std::uint8_t {
    Silent,
    RandomAsk,
    ReactiveTell,
    ProactiveTellAndPrompt,
    FullTelling,
};

const char* to_string(PolicyKind k);
std::optional<PolicyKind> policy_kind_from_string(const std::string& name);

struct Policy {
    PolicyKind kind = PolicyKind::Silent;
    std::uint64_t rng_seed = 0;
    double ask_probability = 0.5;  // RandomAsk
    int tell_budget = 1;           // recipe statements per turn cap
};

struct SessionConfig {
    int max_turns = 60;
    std::uint64_t seed = 0;
    bool missing_labels_from_current = false;
    bool record_beliefs = false;  // dump per-turn belief snapshots into the log
};

enum class SessionOutcome : std::uint8_t { Completed, MaxTurnsReached };

const char* to_string(SessionOutcome o);

struct TurnRecord {
    int t = 0;
    AgentId speaker = AgentId::A;
    std::optional<DialogueMove> move;
    std::optional<ActionEvent> event;
    OracleLabels labels_a;  // for agent A, about partner B
    OracleLabels labels_b;
};

struct SessionLog {
    KnowledgeSplit split;
    SessionConfig config;
    Policy policy_a;
    Policy policy_b;
    std::vector<TurnRecord> turns;
    SessionOutcome outcome = SessionOutcome::MaxTurnsReached;
    std::string plan_id;
};

// What a policy sees when choosing its turn. `executable` holds nodes whose
// ingredients are all complete and whose full recipe the agent knows,
// deepest first.
struct PolicyContext {
    const JointPlan& plan;
    const BeliefState& belief;
    const DialogueHistory& history;
    std::vector<NodeId> executable;
};

struct PolicyDecision {
    std::optional<DialogueMove> move;
    std::optional<ActionEvent> event;
};

PolicyDecision policy_step(const Policy& policy, const PolicyContext& ctx, Rng& rng);

// Turn-based loop: A speaks on even t, B on odd t; a turn may carry a move
// and an event. Ends when the goal node is completed or max_turns is hit.
SessionLog run_session(const KnowledgeSplit& split, const Policy& policy_a,
                       const Policy& policy_b, const SessionConfig& config);

struct ReplayResult {
    bool verified = false;
    int divergence_turn = -1;
    std::string detail;
};

// Re-derives belief states and labels from the recorded moves/events and
// compares them with the stored label streams.
ReplayResult replay(const SessionLog& log);

}  // namespace planacq
