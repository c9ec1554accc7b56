#include "planacq/session.hpp"

#include <algorithm>
#include <stdexcept>

namespace planacq {

const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Silent: return "silent";
        case PolicyKind::RandomAsk: return "random-ask";
        case PolicyKind::ReactiveTell: return "reactive";
        case PolicyKind::ProactiveTellAndPrompt: return "proactive";
        case PolicyKind::FullTelling: return "full-telling";
    }
    return "?";
}

std::optional<PolicyKind> policy_kind_from_string(const std::string& name) {
    if (name == "silent") return PolicyKind::Silent;
    if (name == "random-ask") return PolicyKind::RandomAsk;
    if (name == "reactive") return PolicyKind::ReactiveTell;
    if (name == "proactive") return PolicyKind::ProactiveTellAndPrompt;
    if (name == "full-telling") return PolicyKind::FullTelling;
    return std::nullopt;
}

const char* to_string(SessionOutcome o) {
    return o == SessionOutcome::Completed ? "completed" : "max_turns_reached";
}

namespace {

bool is_done(const BeliefState& b, NodeId v) {
    return b.completed[v] != CompletionStatus::Incomplete;
}

// Deepest first, ids break ties: prerequisite work surfaces before the work
// that depends on it.
std::vector<NodeId> by_priority(const JointPlan& plan, std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end(), [&](NodeId x, NodeId y) {
        if (plan.depth(x) != plan.depth(y)) return plan.depth(x) > plan.depth(y);
        return x < y;
    });
    return nodes;
}

// An agent follows its partial plan: it only works on nodes it can trace to
// the goal through edges it knows, and only when it knows the full recipe and
// every ingredient is built.
std::vector<NodeId> executable_nodes(const JointPlan& plan, const BeliefState& belief) {
    std::vector<bool> contributes(plan.node_count(), false);
    contributes[plan.goal()] = true;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Edge& e : belief.known_edges) {
            if (contributes[e.second] && !contributes[e.first]) {
                contributes[e.first] = true;
                grew = true;
            }
        }
    }

    std::vector<NodeId> out;
    for (NodeId v = 0; v < plan.node_count(); ++v) {
        if (is_done(belief, v) || !contributes[v]) continue;
        bool ready = true;
        for (NodeId u : plan.incoming(v)) {
            if (!is_done(belief, u)) {
                ready = false;
                break;
            }
        }
        if (ready && belief.knows_full_recipe(plan, v)) out.push_back(v);
    }
    return by_priority(plan, out);
}

DialogueMove make_move(MoveCategory cat, std::vector<Slot> slots = {}) {
    DialogueMove m;
    m.category = cat;
    for (std::size_t i = 0; i < slots.size() && i < 3; ++i) m.slots[i] = std::move(slots[i]);
    return m;
}

// Recipe statements carry exactly a target and an ingredient pair, so
// ingredient lists are told two at a time; a lone ingredient fills both pair
// slots with itself.
DialogueMove recipe_move(const JointPlan& plan, NodeId v, NodeId u1, NodeId u2) {
    return make_move(MoveCategory::StatementRecipe,
                     {Slot::material(plan.nodes()[v].material),
                      Slot::material(plan.nodes()[u1].material),
                      Slot::material(plan.nodes()[u2].material)});
}

struct TellChunk {
    NodeId target;
    NodeId first;
    NodeId second;
};

// Next pair of known incoming edges of `v` the partner has not been shown.
std::optional<TellChunk> chunk_for(const JointPlan& plan, const BeliefState& b, NodeId v) {
    std::vector<NodeId> untold;
    for (NodeId u : plan.incoming(v)) {
        Edge e{u, v};
        if (b.known_edges.count(e) && !b.partner_known_edges_lower_bound.count(e)) {
            untold.push_back(u);
        }
    }
    if (untold.empty()) return std::nullopt;
    std::sort(untold.begin(), untold.end());
    return TellChunk{v, untold[0], untold.size() > 1 ? untold[1] : untold[0]};
}

std::optional<TellChunk> next_tell(const JointPlan& plan, const BeliefState& b,
                                   bool skip_completed) {
    std::vector<NodeId> all(plan.node_count());
    for (NodeId v = 0; v < plan.node_count(); ++v) all[v] = v;
    for (NodeId v : by_priority(plan, all)) {
        if (skip_completed && is_done(b, v)) continue;
        if (auto chunk = chunk_for(plan, b, v)) return chunk;
    }
    return std::nullopt;
}

// Nodes the agent clearly lacks knowledge about: non-leaf (the shared node
// table marks leaves via their mine label) with no known incoming edge.
std::vector<NodeId> blind_nodes(const JointPlan& plan, const BeliefState& b) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < plan.node_count(); ++v) {
        if (plan.nodes()[v].mine.has_value()) continue;
        if (is_done(b, v)) continue;
        bool any_known = false;
        for (const Edge& e : b.known_edges) {
            if (e.second == v) {
                any_known = true;
                break;
            }
        }
        if (!any_known) out.push_back(v);
    }
    return by_priority(plan, out);
}

std::optional<DialogueMove> answer_pending(const JointPlan& plan, const BeliefState& b) {
    if (!b.inquiry_from_partner) return std::nullopt;
    const PendingInquiry& q = *b.inquiry_from_partner;
    if (q.category == MoveCategory::InquiryRecipe && q.node) {
        if (auto chunk = chunk_for(plan, b, *q.node)) {
            return recipe_move(plan, chunk->target, chunk->first, chunk->second);
        }
        // Everything known is already shared; restate the first known pair so
        // the inquiry still gets a recipe answer.
        std::vector<NodeId> known;
        for (NodeId u : plan.incoming(*q.node)) {
            if (b.known_edges.count(Edge{u, *q.node})) known.push_back(u);
        }
        if (!known.empty()) {
            std::sort(known.begin(), known.end());
            return recipe_move(plan, *q.node, known[0], known.size() > 1 ? known[1] : known[0]);
        }
        return make_move(MoveCategory::StatementLackKnowledge,
                         {Slot::material(plan.nodes()[*q.node].material)});
    }
    return make_move(MoveCategory::AnsOth);
}

std::optional<ActionEvent> act_step(const JointPlan& plan, const PolicyContext& ctx) {
    if (ctx.executable.empty()) return std::nullopt;
    NodeId v = ctx.executable.front();
    ActionEvent ev;
    ev.actor = ctx.belief.owner;
    ev.kind = plan.is_leaf(v) ? EventKind::CreateBlock : EventKind::CombineBlocks;
    ev.target = v;
    return ev;
}

}  // namespace

PolicyDecision policy_step(const Policy& policy, const PolicyContext& ctx, Rng& rng) {
    const JointPlan& plan = ctx.plan;
    const BeliefState& b = ctx.belief;
    PolicyDecision d;
    d.event = act_step(plan, ctx);

    switch (policy.kind) {
        case PolicyKind::Silent:
            break;

        case PolicyKind::RandomAsk: {
            std::vector<NodeId> blind = blind_nodes(plan, b);
            if (!blind.empty() && rng.chance(policy.ask_probability)) {
                NodeId v = blind[rng.below(blind.size())];
                d.move = make_move(MoveCategory::InquiryRecipe,
                                   {Slot::material(plan.nodes()[v].material)});
            }
            break;
        }

        case PolicyKind::ReactiveTell: {
            d.move = answer_pending(plan, b);
            if (!d.move && !d.event) d.move = make_move(MoveCategory::Backchannel);
            break;
        }

        case PolicyKind::ProactiveTellAndPrompt: {
            if (policy.tell_budget > 0) {
                // Recipes for nodes already built are moot for the running
                // task, so proactive telling passes over them.
                if (auto chunk = next_tell(plan, b, true)) {
                    d.move = recipe_move(plan, chunk->target, chunk->first, chunk->second);
                }
            }
            if (!d.move && !b.inquiry_to_partner) {
                std::vector<NodeId> blind = blind_nodes(plan, b);
                std::erase_if(blind, [&](NodeId v) { return b.partner_lacks.count(v) > 0; });
                if (!blind.empty()) {
                    d.move = make_move(MoveCategory::InquiryRecipe,
                                       {Slot::material(plan.nodes()[blind.front()].material)});
                }
            }
            if (!d.move && !d.event) d.move = make_move(MoveCategory::Backchannel);
            break;
        }

        case PolicyKind::FullTelling: {
            if (auto chunk = next_tell(plan, b, false)) {
                d.move = recipe_move(plan, chunk->target, chunk->first, chunk->second);
            }
            if (!d.move && !d.event) d.move = make_move(MoveCategory::Backchannel);
            break;
        }
    }
    return d;
}

SessionLog run_session(const KnowledgeSplit& split, const Policy& policy_a,
                       const Policy& policy_b, const SessionConfig& config) {
    if (config.max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");

    SessionLog log;
    log.split = split;
    log.config = config;
    log.policy_a = policy_a;
    log.policy_b = policy_b;

    const JointPlan& plan = split.joint;
    const NodeId goal = plan.goal();

    BeliefState state_a = BeliefState::initial(split, AgentId::A);
    BeliefState state_b = BeliefState::initial(split, AgentId::B);
    Rng rng_a(derive_seed(config.seed ^ policy_a.rng_seed, "policy", 0));
    Rng rng_b(derive_seed(config.seed ^ policy_b.rng_seed, "policy", 1));
    DialogueHistory history;

    for (int t = 0; t < config.max_turns; ++t) {
        const AgentId speaker = t % 2 == 0 ? AgentId::A : AgentId::B;
        BeliefState& own = speaker == AgentId::A ? state_a : state_b;
        Rng& rng = speaker == AgentId::A ? rng_a : rng_b;
        const Policy& policy = speaker == AgentId::A ? policy_a : policy_b;

        PolicyContext ctx{plan, own, history, executable_nodes(plan, own)};
        PolicyDecision d = policy_step(policy, ctx, rng);

        TurnRecord rec;
        rec.t = t;
        rec.speaker = speaker;
        if (d.move) {
            d.move->speaker = speaker;
            d.move->turn = t;
            state_a = apply_move(state_a, *d.move, plan);
            state_b = apply_move(state_b, *d.move, plan);
            history.moves.push_back(*d.move);
            rec.move = d.move;
        }
        if (d.event) {
            d.event->actor = speaker;
            d.event->turn = t;
            state_a = apply_event(state_a, *d.event, plan);
            state_b = apply_event(state_b, *d.event, plan);
            rec.event = d.event;
        }
        rec.labels_a = oracle_labels(split, state_a, state_b, config.missing_labels_from_current);
        rec.labels_b = oracle_labels(split, state_b, state_a, config.missing_labels_from_current);
        log.turns.push_back(std::move(rec));

        if (is_done(state_a, goal)) {
            log.outcome = SessionOutcome::Completed;
            return log;
        }
    }
    log.outcome = SessionOutcome::MaxTurnsReached;
    return log;
}

ReplayResult replay(const SessionLog& log) {
    const JointPlan& plan = log.split.joint;
    BeliefState state_a = BeliefState::initial(log.split, AgentId::A);
    BeliefState state_b = BeliefState::initial(log.split, AgentId::B);

    int last_t = -1;
    for (const TurnRecord& rec : log.turns) {
        if (rec.t <= last_t) {
            return {false, rec.t, "turn indices not strictly increasing"};
        }
        last_t = rec.t;
        try {
            if (rec.move) {
                state_a = apply_move(state_a, *rec.move, plan);
                state_b = apply_move(state_b, *rec.move, plan);
            }
            if (rec.event) {
                state_a = apply_event(state_a, *rec.event, plan);
                state_b = apply_event(state_b, *rec.event, plan);
            }
        } catch (const std::exception& e) {
            return {false, rec.t, e.what()};
        }
        OracleLabels a = oracle_labels(log.split, state_a, state_b,
                                       log.config.missing_labels_from_current);
        OracleLabels b = oracle_labels(log.split, state_b, state_a,
                                       log.config.missing_labels_from_current);
        if (!(a == rec.labels_a)) return {false, rec.t, "labels_a mismatch"};
        if (!(b == rec.labels_b)) return {false, rec.t, "labels_b mismatch"};
    }
    return {true, -1, ""};
}

}  // namespace planacq
