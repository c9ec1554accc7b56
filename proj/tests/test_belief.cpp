#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "planacq/belief.hpp"
#include "planacq/session.hpp"

using namespace planacq;

namespace {

DialogueMove spoken(AgentId speaker, MoveCategory cat, std::vector<Slot> slots = {},
                    int turn = 0) {
    DialogueMove m;
    m.category = cat;
    m.speaker = speaker;
    m.turn = turn;
    for (std::size_t i = 0; i < slots.size(); ++i) m.slots[i] = slots[i];
    return m;
}

DialogueMove recipe(AgentId speaker, const char* v, const char* u1, const char* u2) {
    return spoken(speaker, MoveCategory::StatementRecipe,
                  {Slot::material(v), Slot::material(u1), Slot::material(u2)});
}

}  // namespace

TEST_CASE("initial state mirrors the partial plan") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    CHECK(a.owner == AgentId::A);
    CHECK(a.known_edges == split.partial_a.edges);
    CHECK(a.completed.size() == 6);
    for (auto s : a.completed) CHECK(s == CompletionStatus::Incomplete);
    CHECK(a.partner_known_edges_lower_bound.empty());
    CHECK_FALSE(a.intention.has_value());
}

TEST_CASE("hearing a recipe statement teaches its edges") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    // B tells A the recipe of c: edges d->c and e->c
    BeliefState after = apply_move(a, recipe(AgentId::B, "c", "d", "e"), split.joint);
    CHECK(after.known_edges.count(Edge{3, 2}) == 1);
    CHECK(after.known_edges.count(Edge{4, 2}) == 1);
    CHECK(after.known_edges.size() == a.known_edges.size() + 2);
    // the speaker demonstrated the edges, so they land in the lower bound too
    CHECK(after.partner_known_edges_lower_bound.count(Edge{3, 2}) == 1);
    CHECK(after.partner_known_edges_lower_bound.count(Edge{4, 2}) == 1);
    // the original state is untouched
    CHECK(a.known_edges.count(Edge{3, 2}) == 0);
}

TEST_CASE("speaking a recipe raises the partner lower bound only") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(a, recipe(AgentId::A, "d", "e", "f"), split.joint);
    CHECK(after.known_edges == a.known_edges);
    CHECK(after.partner_known_edges_lower_bound ==
          EdgeSet{{4, 3}, {5, 3}});
}

TEST_CASE("lack-knowledge statements mark partner ignorance") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(
        a, spoken(AgentId::B, MoveCategory::StatementLackKnowledge, {Slot::material("d")}),
        split.joint);
    CHECK(after.partner_lacks == std::set<NodeId>{3});
}

TEST_CASE("backchannel is an epistemic no-op") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(a, spoken(AgentId::B, MoveCategory::Backchannel), split.joint);
    CHECK(after.known_edges == a.known_edges);
    CHECK(after.partner_known_edges_lower_bound.empty());
    CHECK(after.partner_lacks.empty());
    CHECK(after.completed == a.completed);
}

TEST_CASE("inquiries signal ignorance and set the pending slot") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState heard = apply_move(
        a, spoken(AgentId::B, MoveCategory::InquiryRecipe, {Slot::material("c")}), split.joint);
    CHECK(heard.partner_lacks == std::set<NodeId>{2});
    REQUIRE(heard.inquiry_from_partner.has_value());
    CHECK(heard.inquiry_from_partner->node == NodeId{2});

    BeliefState asked = apply_move(
        a, spoken(AgentId::A, MoveCategory::InquiryRecipe, {Slot::material("c")}), split.joint);
    REQUIRE(asked.inquiry_to_partner.has_value());
    CHECK(asked.partner_lacks.empty());

    // an answering recipe clears the open inquiry
    BeliefState answered = apply_move(asked, recipe(AgentId::B, "c", "d", "e"), split.joint);
    CHECK_FALSE(answered.inquiry_to_partner.has_value());
}

TEST_CASE("AnsNeg resolves a pending recipe inquiry as ignorance") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    a = apply_move(a, spoken(AgentId::A, MoveCategory::InquiryRecipe, {Slot::material("c")}),
                   split.joint);
    a = apply_move(a, spoken(AgentId::B, MoveCategory::AnsNeg), split.joint);
    CHECK_FALSE(a.inquiry_to_partner.has_value());
    CHECK(a.partner_lacks == std::set<NodeId>{2});
}

TEST_CASE("statements about next steps move intentions") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(
        a, spoken(AgentId::B, MoveCategory::StatementNextStep, {Slot::material("d")}),
        split.joint);
    CHECK(after.partner_intention == NodeId{3});
    CHECK_FALSE(after.intention.has_value());

    after = apply_move(after, spoken(AgentId::B, MoveCategory::DirectiveMake,
                                     {Slot::material("f")}),
                       split.joint);
    CHECK(after.intention == NodeId{5});  // directives steer the hearer
}

TEST_CASE("possession statements record partner tools") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(
        a, spoken(AgentId::B, MoveCategory::StatementPossession, {Slot::tool("t0")}),
        split.joint);
    CHECK(after.partner_tools == std::set<std::string>{"t0"});
}

TEST_CASE("step-done statements complete nodes for the hearer") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState after = apply_move(
        a, spoken(AgentId::B, MoveCategory::StatementStepDone, {Slot::material("b")}),
        split.joint);
    CHECK(after.completed[1] == CompletionStatus::DoneByPartner);
}

TEST_CASE("unknown materials raise unknown-node errors") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    CHECK_THROWS_AS(apply_move(a, recipe(AgentId::B, "zzz", "d", "e"), split.joint),
                    std::out_of_range);
    CHECK_THROWS_AS(
        apply_move(a, spoken(AgentId::B, MoveCategory::DirectiveMake), split.joint),
        std::invalid_argument);  // arity violation surfaces too
}

TEST_CASE("events update completion and reveal partner knowledge") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);

    SUBCASE("partner combine") {
        ActionEvent ev{AgentId::B, EventKind::CombineBlocks, 3, 4};
        BeliefState after = apply_event(a, ev, split.joint);
        CHECK(after.completed[3] == CompletionStatus::DoneByPartner);
        // acting reveals knowing: both incoming edges of d
        CHECK(after.partner_known_edges_lower_bound == EdgeSet{{4, 3}, {5, 3}});
    }
    SUBCASE("own create") {
        ActionEvent ev{AgentId::A, EventKind::CreateBlock, 5, 0};
        BeliefState after = apply_event(a, ev, split.joint);
        CHECK(after.completed[5] == CompletionStatus::DoneBySelf);
        CHECK(after.intention == NodeId{5});
        CHECK(after.partner_known_edges_lower_bound.empty());
    }
    SUBCASE("illegal events throw") {
        CHECK_THROWS_AS(apply_event(a, {AgentId::A, EventKind::CombineBlocks, 1, 0}, split.joint),
                        std::invalid_argument);  // b is a leaf
        CHECK_THROWS_AS(apply_event(a, {AgentId::A, EventKind::CreateBlock, 3, 0}, split.joint),
                        std::invalid_argument);  // d is not
        CHECK_THROWS_AS(apply_event(a, {AgentId::A, EventKind::CreateBlock, 99, 0}, split.joint),
                        std::out_of_range);
    }
}

TEST_CASE("oracle labels report the partner's mental state") {
    KnowledgeSplit split = testing::fixture_split();
    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState b = BeliefState::initial(split, AgentId::B);

    OracleLabels for_a = oracle_labels(split, a, b);
    CHECK(for_a.intention == split.joint.goal());
    CHECK(for_a.own_missing == EdgeSet{{3, 2}, {4, 2}});
    CHECK(for_a.partner_missing == EdgeSet{{4, 3}, {5, 3}});
    // B knows full recipes for leaves (trivially), a, and c; not d
    CHECK(for_a.knowledge[0]);
    CHECK(for_a.knowledge[1]);
    CHECK(for_a.knowledge[2]);
    CHECK_FALSE(for_a.knowledge[3]);

    SUBCASE("full overlap splits know everything at the start") {
        KnowledgeSplit full = split_plan(split.joint, 1.0, 3);
        BeliefState fa = BeliefState::initial(full, AgentId::A);
        BeliefState fb = BeliefState::initial(full, AgentId::B);
        OracleLabels labels = oracle_labels(full, fa, fb);
        for (std::size_t v = 0; v < full.joint.node_count(); ++v) CHECK(labels.knowledge[v]);
        CHECK(labels.own_missing.empty());
        CHECK(labels.partner_missing.empty());
    }

    SUBCASE("after a full recipe exchange the knowledge map is all true") {
        BeliefState cur_a = a, cur_b = b;
        auto tell_both = [&](const DialogueMove& m) {
            cur_a = apply_move(cur_a, m, split.joint);
            cur_b = apply_move(cur_b, m, split.joint);
        };
        tell_both(recipe(AgentId::A, "a", "b", "c"));
        tell_both(recipe(AgentId::A, "d", "e", "f"));
        tell_both(recipe(AgentId::B, "c", "d", "e"));
        OracleLabels labels = oracle_labels(split, cur_a, cur_b);
        for (std::size_t v = 0; v < 6; ++v) {
            CAPTURE(v);
            CHECK(labels.knowledge[v]);
        }
        // initial-plan missing labels do not move with acquired knowledge
        CHECK(labels.own_missing == EdgeSet{{3, 2}, {4, 2}});
        // ... unless asked for the current view
        OracleLabels current = oracle_labels(split, cur_a, cur_b, true);
        CHECK(current.own_missing.empty());
    }
}

TEST_CASE("belief soundness and monotonicity over random sessions") {
    Rng rng(2024);
    for (int i = 0; i < 120; ++i) {
        JointPlan plan = generate_joint_plan(2 + rng.below(9), 2, rng.next_u64());
        KnowledgeSplit split = split_plan(plan, rng.real(), rng.next_u64());
        PolicyKind kinds[] = {PolicyKind::Silent, PolicyKind::RandomAsk, PolicyKind::ReactiveTell,
                              PolicyKind::ProactiveTellAndPrompt, PolicyKind::FullTelling};
        Policy pa{kinds[rng.below(5)], rng.next_u64()};
        Policy pb{kinds[rng.below(5)], rng.next_u64()};
        SessionConfig config;
        config.max_turns = 40;
        config.seed = rng.next_u64();
        SessionLog log = run_session(split, pa, pb, config);

        BeliefState sa = BeliefState::initial(split, AgentId::A);
        BeliefState sb = BeliefState::initial(split, AgentId::B);
        for (const TurnRecord& rec : log.turns) {
            EdgeSet prev_a = sa.known_edges;
            if (rec.move) {
                sa = apply_move(sa, *rec.move, plan);
                sb = apply_move(sb, *rec.move, plan);
            }
            if (rec.event) {
                sa = apply_event(sa, *rec.event, plan);
                sb = apply_event(sb, *rec.event, plan);
            }
            // monotone knowledge
            for (const Edge& e : prev_a) REQUIRE(sa.known_edges.count(e) == 1);
            // sound lower bounds, both directions
            for (const Edge& e : sa.partner_known_edges_lower_bound) {
                REQUIRE(sb.known_edges.count(e) == 1);
            }
            for (const Edge& e : sb.partner_known_edges_lower_bound) {
                REQUIRE(sa.known_edges.count(e) == 1);
            }
        }
    }
}
