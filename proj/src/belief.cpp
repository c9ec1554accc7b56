#include "planacq/belief.hpp"

#include <stdexcept>

namespace planacq {

const char* to_string(EventKind k) {
    return k == EventKind::CreateBlock ? "CreateBlock" : "CombineBlocks";
}

std::optional<EventKind> event_kind_from_string(const std::string& name) {
    if (name == "CreateBlock") return EventKind::CreateBlock;
    if (name == "CombineBlocks") return EventKind::CombineBlocks;
    return std::nullopt;
}

BeliefState BeliefState::initial(const KnowledgeSplit& split, AgentId agent) {
    BeliefState b;
    b.owner = agent;
    b.known_edges = split.partial(agent).edges;
    b.completed.assign(split.joint.node_count(), CompletionStatus::Incomplete);
    return b;
}

bool BeliefState::knows_full_recipe(const JointPlan& plan, NodeId v) const {
    for (NodeId u : plan.incoming(v)) {
        if (!known_edges.count(Edge{u, v})) return false;
    }
    return true;
}

namespace {

NodeId resolve_node(const JointPlan& plan, const Slot& slot) {
    auto id = plan.node_by_material(slot.value);
    if (!id) throw std::out_of_range("unknown node material: " + slot.value);
    return *id;
}

std::optional<NodeId> try_resolve(const JointPlan& plan, const Slot& slot) {
    if (slot.kind != SlotKind::Material) return std::nullopt;
    return plan.node_by_material(slot.value);
}

}  // namespace

BeliefState apply_move(const BeliefState& b, const DialogueMove& m, const JointPlan& plan) {
    MoveValidation check = validate_move(m);
    if (!check.ok) throw std::invalid_argument("apply_move: " + check.message);

    BeliefState out = b;
    const bool spoke = m.speaker == b.owner;

    switch (m.category) {
        case MoveCategory::StatementRecipe: {
            NodeId v = resolve_node(plan, m.slots[0]);
            EdgeSet revealed;
            revealed.insert(Edge{resolve_node(plan, m.slots[1]), v});
            revealed.insert(Edge{resolve_node(plan, m.slots[2]), v});
            // Stated edges become common: the hearer learns them, and both
            // sides know the other now holds them.
            for (const Edge& e : revealed) {
                if (!spoke) out.known_edges.insert(e);
                out.partner_known_edges_lower_bound.insert(e);
            }
            out.partner_lacks.erase(v);
            if (spoke && out.inquiry_from_partner && out.inquiry_from_partner->node == v) {
                out.inquiry_from_partner.reset();
            }
            if (!spoke && out.inquiry_to_partner && out.inquiry_to_partner->node == v) {
                out.inquiry_to_partner.reset();
            }
            break;
        }
        case MoveCategory::StatementLackKnowledge: {
            if (m.filled_slots() == 1) {
                NodeId v = resolve_node(plan, m.slots[0]);
                if (!spoke) out.partner_lacks.insert(v);
                if (spoke && out.inquiry_from_partner && out.inquiry_from_partner->node == v) {
                    out.inquiry_from_partner.reset();
                }
                if (!spoke && out.inquiry_to_partner && out.inquiry_to_partner->node == v) {
                    out.inquiry_to_partner.reset();
                }
            }
            break;
        }
        case MoveCategory::StatementPossession: {
            if (!spoke) out.partner_tools.insert(m.slots[0].value);
            break;
        }
        case MoveCategory::StatementStepDone: {
            NodeId v = resolve_node(plan, m.slots[0]);
            if (!spoke) out.completed[v] = CompletionStatus::DoneByPartner;
            break;
        }
        case MoveCategory::StatementRequirement:
            // Requirement talk carries no plan-graph content to track.
            break;
        case MoveCategory::StatementNextStep:
        case MoveCategory::StatementOwnAct:
        case MoveCategory::StatementGoal: {
            if (m.filled_slots() >= 1) {
                NodeId v = resolve_node(plan, m.slots[0]);
                if (spoke) {
                    out.intention = v;
                } else {
                    out.partner_intention = v;
                }
            }
            break;
        }
        case MoveCategory::DirectiveMake:
        case MoveCategory::DirectivePickUp:
        case MoveCategory::DirectivePutDown:
        case MoveCategory::DirectivePutOn: {
            if (m.filled_slots() >= 1) {
                NodeId v = resolve_node(plan, m.slots[0]);
                if (!spoke) out.intention = v;  // directives steer the hearer
            }
            break;
        }
        case MoveCategory::InquiryRecipe: {
            NodeId v = resolve_node(plan, m.slots[0]);
            if (spoke) {
                out.inquiry_to_partner = PendingInquiry{m.category, v};
            } else {
                // Asking signals ignorance, sound under scripted policies
                // that only ask about unknown nodes.
                out.partner_lacks.insert(v);
                out.inquiry_from_partner = PendingInquiry{m.category, v};
            }
            break;
        }
        case MoveCategory::InquiryAct:
        case MoveCategory::InquiryGoal:
        case MoveCategory::InquiryNextStep:
        case MoveCategory::InquiryOwnAct:
        case MoveCategory::InquiryPossession:
        case MoveCategory::InquiryRequirement: {
            PendingInquiry q{m.category, std::nullopt};
            if (m.filled_slots() >= 1) q.node = try_resolve(plan, m.slots[0]);
            if (spoke) {
                out.inquiry_to_partner = q;
            } else {
                out.inquiry_from_partner = q;
            }
            break;
        }
        case MoveCategory::AnsNeg: {
            if (!spoke && out.inquiry_to_partner) {
                if (out.inquiry_to_partner->category == MoveCategory::InquiryRecipe &&
                    out.inquiry_to_partner->node) {
                    out.partner_lacks.insert(*out.inquiry_to_partner->node);
                }
            }
            if (spoke) out.inquiry_from_partner.reset();
            else out.inquiry_to_partner.reset();
            break;
        }
        case MoveCategory::AnsAff:
        case MoveCategory::AnsOth: {
            if (spoke) out.inquiry_from_partner.reset();
            else out.inquiry_to_partner.reset();
            break;
        }
        // Epistemic no-ops.
        case MoveCategory::DirectiveOther:
        case MoveCategory::StatementInability:
        case MoveCategory::StatementOther:
        case MoveCategory::Backchannel:
        case MoveCategory::Opinion:
        case MoveCategory::Agreement:
        case MoveCategory::Closing:
        case MoveCategory::Acknowledgment:
        case MoveCategory::Opening:
        case MoveCategory::OrClause:
        case MoveCategory::Apology:
        case MoveCategory::GameSpec:
        case MoveCategory::Other:
            break;
    }
    return out;
}

BeliefState apply_event(const BeliefState& b, const ActionEvent& ev, const JointPlan& plan) {
    if (ev.target >= plan.node_count()) {
        throw std::out_of_range("event target out of range");
    }
    const bool leaf = plan.is_leaf(ev.target);
    if (ev.kind == EventKind::CreateBlock && !leaf) {
        throw std::invalid_argument("CreateBlock is only legal on leaf nodes");
    }
    if (ev.kind == EventKind::CombineBlocks && leaf) {
        throw std::invalid_argument("CombineBlocks is only legal on non-leaf nodes");
    }

    BeliefState out = b;
    if (ev.actor == b.owner) {
        out.completed[ev.target] = CompletionStatus::DoneBySelf;
        out.intention = ev.target;
    } else {
        out.completed[ev.target] = CompletionStatus::DoneByPartner;
        out.partner_intention = ev.target;
        if (ev.kind == EventKind::CombineBlocks) {
            // Acting reveals knowing.
            for (NodeId u : plan.incoming(ev.target)) {
                out.partner_known_edges_lower_bound.insert(Edge{u, ev.target});
            }
            out.partner_lacks.erase(ev.target);
        }
    }
    return out;
}

OracleLabels oracle_labels(const KnowledgeSplit& split, const BeliefState& agent_state,
                           const BeliefState& partner_state, bool missing_from_current) {
    const JointPlan& plan = split.joint;
    const std::size_t n = plan.node_count();

    OracleLabels labels;
    labels.intention = partner_state.intention.value_or(plan.goal());
    labels.status = partner_state.completed;
    labels.knowledge.resize(n);
    for (NodeId v = 0; v < n; ++v) {
        labels.knowledge[v] = partner_state.knows_full_recipe(plan, v);
    }

    const EdgeSet& own = missing_from_current ? agent_state.known_edges
                                              : split.partial(agent_state.owner).edges;
    const EdgeSet& partner = missing_from_current ? partner_state.known_edges
                                                  : split.partial(partner_state.owner).edges;
    for (const Edge& e : plan.edges()) {
        if (!own.count(e)) labels.own_missing.insert(e);
        if (!partner.count(e)) labels.partner_missing.insert(e);
    }
    return labels;
}

}  // namespace planacq
