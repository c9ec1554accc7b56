#pragma once

#include "planacq/plan_graph.hpp"

namespace planacq::testing {

// Canonical six-node plan used across the test suites. Nodes are labelled by
// single-letter materials with `a` as the goal:
//
//   edges: b->a, c->a, d->c, e->c, e->d, f->d
//   A holds everything except {d->c, e->c}
//   B holds everything except {e->d, f->d}
//
// so A's missing knowledge is {d->c, e->c} and B's is {e->d, f->d}.
inline KnowledgeSplit fixture_split() {
    // ids: a=0 b=1 c=2 d=3 e=4 f=5
    std::vector<PlanNode> nodes(6);
    const char* materials[] = {"a", "b", "c", "d", "e", "f"};
    for (NodeId i = 0; i < 6; ++i) {
        nodes[i].id = i;
        nodes[i].kind = i == 0 ? NodeKind::Goal : NodeKind::Landmark;
        nodes[i].material = materials[i];
    }
    nodes[1].mine = "mine0";  // b, e, f are leaves
    nodes[4].mine = "mine1";
    nodes[5].mine = "mine2";
    nodes[3].tool = "t0";

    std::vector<Edge> edges{{1, 0}, {2, 0}, {3, 2}, {4, 2}, {4, 3}, {5, 3}};

    KnowledgeSplit split;
    split.joint = JointPlan(std::move(nodes), edges);
    split.seed = 0;
    split.partial_a.owner = AgentId::A;
    split.partial_a.edges = {{1, 0}, {2, 0}, {4, 3}, {5, 3}};
    split.partial_b.owner = AgentId::B;
    split.partial_b.edges = {{1, 0}, {2, 0}, {3, 2}, {4, 2}};
    return split;
}

}  // namespace planacq::testing
