#include "planacq/plan_graph.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "planacq/rng.hpp"

namespace planacq {

const char* to_string(AgentId a) { return a == AgentId::A ? "A" : "B"; }

JointPlan::JointPlan(std::vector<PlanNode> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    const std::size_t n = nodes_.size();
    incoming_.resize(n);
    outgoing_.resize(n);
    for (const auto& [u, v] : edges_) {
        if (u >= n || v >= n) continue;  // validate_joint_plan reports these
        outgoing_[u].push_back(v);
        incoming_[v].push_back(u);
    }
    // Longest path to the goal, -1 while unknown. Cycles leave depth at -1;
    // valid plans never hit that case.
    depths_.assign(n, -1);
    std::function<int(NodeId, int)> walk = [&](NodeId v, int guard) -> int {
        if (guard > static_cast<int>(n)) return -1;
        if (depths_[v] >= 0) return depths_[v];
        int best = 0;
        for (NodeId w : outgoing_[v]) {
            int d = walk(w, guard + 1);
            if (d >= 0) best = std::max(best, d + 1);
        }
        depths_[v] = best;
        return best;
    };
    for (NodeId v = 0; v < n; ++v) walk(v, 0);
}

int JointPlan::max_depth() const {
    int best = 0;
    for (int d : depths_) best = std::max(best, d);
    return best;
}

NodeId JointPlan::goal() const {
    for (const auto& node : nodes_) {
        if (node.kind == NodeKind::Goal) return node.id;
    }
    throw std::logic_error("plan has no goal node");
}

std::optional<NodeId> JointPlan::node_by_material(const std::string& material) const {
    for (const auto& node : nodes_) {
        if (node.material == material) return node.id;
    }
    return std::nullopt;
}

JointPlan generate_joint_plan(std::size_t n_nodes, std::size_t max_ingredients,
                              std::uint64_t seed, const GenOptions& opts) {
    if (n_nodes == 0) throw std::invalid_argument("n_nodes must be >= 1");
    if (max_ingredients == 0) throw std::invalid_argument("max_ingredients must be >= 1");

    Rng rng(seed);
    std::vector<PlanNode> nodes(n_nodes);
    for (NodeId i = 0; i < n_nodes; ++i) {
        nodes[i].id = i;
        nodes[i].kind = i == 0 ? NodeKind::Goal : NodeKind::Landmark;
        nodes[i].material = "m" + std::to_string(i);
    }

    std::vector<Edge> edges;
    std::vector<std::size_t> level(n_nodes, 0);
    if (n_nodes > 1) {
        // Layered construction: the goal sits at level 0 and every edge runs
        // from a strictly deeper level to a shallower one, so the graph is
        // acyclic and every node reaches the goal through its mandatory
        // parent chain.
        std::size_t depth_cap = std::min<std::size_t>(n_nodes - 1, 6);
        std::size_t n_levels = max_ingredients == 1 ? n_nodes - 1
                                                    : 1 + rng.below(depth_cap);
        std::vector<std::size_t> level_size(n_levels + 1, 0);
        level_size[0] = 1;
        NodeId next = 1;
        for (std::size_t k = 1; k <= n_levels && next < n_nodes; ++k) {
            level[next] = k;
            ++level_size[k];
            ++next;
        }
        while (next < n_nodes) {
            std::vector<std::size_t> open;
            for (std::size_t k = 1; k < level_size.size(); ++k) {
                if (level_size[k] < max_ingredients * level_size[k - 1]) open.push_back(k);
            }
            if (open.empty()) {
                level_size.push_back(0);
                open.push_back(level_size.size() - 1);
            }
            std::size_t k = open[rng.below(open.size())];
            level[next] = k;
            ++level_size[k];
            ++next;
        }

        std::vector<std::size_t> in_deg(n_nodes, 0);
        for (std::size_t k = 1; k < level_size.size(); ++k) {
            for (NodeId u = 1; u < n_nodes; ++u) {
                if (level[u] != k) continue;
                std::vector<NodeId> parents;
                for (NodeId p = 0; p < n_nodes; ++p) {
                    if (level[p] == k - 1 && in_deg[p] < max_ingredients) parents.push_back(p);
                }
                NodeId p = parents[rng.below(parents.size())];
                edges.emplace_back(u, p);
                ++in_deg[p];
            }
        }
        // Thicken: nodes that already have ingredients may draw more from any
        // strictly deeper level, up to the cap. Leaves stay leaves.
        for (NodeId v = 0; v < n_nodes; ++v) {
            if (in_deg[v] == 0) continue;
            std::size_t target = 1 + rng.below(max_ingredients);
            if (target <= in_deg[v]) continue;
            std::vector<NodeId> pool;
            for (NodeId u = 1; u < n_nodes; ++u) {
                if (level[u] > level[v] &&
                    std::find(edges.begin(), edges.end(), Edge{u, v}) == edges.end()) {
                    pool.push_back(u);
                }
            }
            rng.shuffle(pool);
            for (NodeId u : pool) {
                if (in_deg[v] >= target) break;
                edges.emplace_back(u, v);
                ++in_deg[v];
            }
        }

        for (NodeId v = 0; v < n_nodes; ++v) {
            if (in_deg[v] == 0) {
                nodes[v].mine = "mine" + std::to_string(rng.below(opts.n_mines));
            }
            if (rng.chance(opts.tool_probability)) {
                nodes[v].tool = "t" + std::to_string(rng.below(opts.n_tools));
            }
        }
    } else {
        nodes[0].mine = "mine" + std::to_string(rng.below(opts.n_mines));
    }

    return JointPlan(std::move(nodes), std::move(edges));
}

std::vector<Violation> validate_joint_plan(const JointPlan& plan) {
    std::vector<Violation> out;
    const auto& nodes = plan.nodes();
    const auto& edges = plan.edges();
    const std::size_t n = nodes.size();

    std::size_t goals = 0;
    for (const auto& node : nodes) {
        if (node.kind == NodeKind::Goal) ++goals;
    }
    if (goals == 0) out.push_back({PlanViolation::NoGoal, "no node has kind=goal"});
    if (goals > 1) {
        out.push_back({PlanViolation::MultipleGoals,
                       std::to_string(goals) + " nodes have kind=goal"});
    }

    auto edge_name = [&](const Edge& e) {
        return std::to_string(e.first) + "->" + std::to_string(e.second);
    };

    bool ids_ok = true;
    for (const auto& e : edges) {
        if (e.first >= n || e.second >= n) {
            out.push_back({PlanViolation::EdgeOutOfRange, edge_name(e)});
            ids_ok = false;
        } else if (e.first == e.second) {
            out.push_back({PlanViolation::SelfLoop, edge_name(e)});
        }
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i] == edges[i - 1]) {
            out.push_back({PlanViolation::DuplicateEdge, edge_name(edges[i])});
        }
    }
    if (!ids_ok) return out;  // adjacency is unreliable past this point

    if (goals == 1) {
        NodeId g = plan.goal();
        if (!plan.outgoing(g).empty()) {
            out.push_back({PlanViolation::GoalHasOutgoingEdge,
                           "goal node " + std::to_string(g)});
        }
        // Every node must reach the goal along outgoing edges; walk backwards
        // from the goal over incoming edges instead.
        std::vector<bool> seen(n, false);
        std::vector<NodeId> stack{g};
        seen[g] = true;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId u : plan.incoming(v)) {
                if (!seen[u]) {
                    seen[u] = true;
                    stack.push_back(u);
                }
            }
        }
        for (NodeId v = 0; v < n; ++v) {
            if (!seen[v]) {
                out.push_back({PlanViolation::UnreachableNode, std::to_string(v)});
            }
        }
    }

    // Kahn's algorithm; leftover nodes sit on a cycle.
    {
        std::vector<std::size_t> in_deg(n, 0);
        for (const auto& e : edges) ++in_deg[e.second];
        std::vector<NodeId> queue;
        for (NodeId v = 0; v < n; ++v) {
            if (in_deg[v] == 0) queue.push_back(v);
        }
        std::size_t removed = 0;
        while (!queue.empty()) {
            NodeId u = queue.back();
            queue.pop_back();
            ++removed;
            for (NodeId v : plan.outgoing(u)) {
                if (--in_deg[v] == 0) queue.push_back(v);
            }
        }
        if (removed != n) {
            out.push_back({PlanViolation::Cycle,
                           std::to_string(n - removed) + " nodes on cycles"});
        }
    }

    for (NodeId v = 0; v < n; ++v) {
        if (plan.incoming(v).empty() && !nodes[v].mine.has_value()) {
            out.push_back({PlanViolation::LeafWithoutMine, std::to_string(v)});
        }
    }
    return out;
}

KnowledgeSplit split_plan(const JointPlan& plan, double overlap, std::uint64_t seed) {
    if (!(overlap >= 0.0 && overlap <= 1.0)) {
        throw std::invalid_argument("overlap must be in [0,1]");
    }
    Rng rng(seed);
    KnowledgeSplit split;
    split.joint = plan;
    split.seed = seed;
    split.partial_a.owner = AgentId::A;
    split.partial_b.owner = AgentId::B;

    for (const Edge& e : plan.edges()) {
        double r = rng.real();
        if (r < overlap) {
            split.partial_a.edges.insert(e);
            split.partial_b.edges.insert(e);
        } else if (rng.below(2) == 0) {
            split.partial_a.edges.insert(e);
        } else {
            split.partial_b.edges.insert(e);
        }
    }
    // Repair pass: any edge left out of both plans breaks solvability and is
    // assigned to one side uniformly. Unreachable with the trichotomy above,
    // kept as the contract's coverage guarantee.
    for (const Edge& e : plan.edges()) {
        if (!split.partial_a.edges.count(e) && !split.partial_b.edges.count(e)) {
            (rng.below(2) == 0 ? split.partial_a : split.partial_b).edges.insert(e);
        }
    }
    return split;
}

MissingEdgeSet missing_edges(const KnowledgeSplit& split, AgentId agent) {
    MissingEdgeSet out;
    out.agent = agent;
    const EdgeSet& own = split.partial(agent).edges;
    for (const Edge& e : split.joint.edges()) {
        if (!own.count(e)) out.edges.insert(e);
    }
    return out;
}

std::vector<Edge> candidate_edges(const KnowledgeSplit& split, AgentId agent,
                                  CandidateTask task) {
    const EdgeSet& own = split.partial(agent).edges;
    std::vector<Edge> out;
    if (task == CandidateTask::Partner) {
        out.assign(own.begin(), own.end());
        return out;
    }
    const std::size_t n = split.joint.node_count();
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = 0; v < n; ++v) {
            if (u == v) continue;
            Edge e{u, v};
            if (!own.count(e)) out.push_back(e);
        }
    }
    return out;
}

}  // namespace planacq
