#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace planacq {

using NodeId = std::uint32_t;

// Directed edge (u, v): u must be achieved before v, u is an ingredient of v.
using Edge = std::pair<NodeId, NodeId>;
using EdgeSet = std::set<Edge>;

enum class AgentId : std::uint8_t { A = 0, B = 1 };

inline AgentId other(AgentId a) { return a == AgentId::A ? AgentId::B : AgentId::A; }
const char* to_string(AgentId a);

enum class NodeKind : std::uint8_t { Goal, Landmark };

struct PlanNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::Landmark;
    std::string material;                 // unique symbolic label, grounds dialogue slots
    std::optional<std::string> tool;
    std::optional<std::string> mine;      // set on leaf nodes only
};

// Joint plan as a directed AND-graph: achieving a node requires all of its
// incoming-edge sources first. Immutable after construction.
class JointPlan {
public:
    JointPlan() = default;
    JointPlan(std::vector<PlanNode> nodes, std::vector<Edge> edges);

    const std::vector<PlanNode>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }  // sorted, may hold duplicates if constructed so
    EdgeSet edge_set() const { return EdgeSet(edges_.begin(), edges_.end()); }
    std::size_t node_count() const { return nodes_.size(); }

    const std::vector<NodeId>& incoming(NodeId v) const { return incoming_.at(v); }
    const std::vector<NodeId>& outgoing(NodeId u) const { return outgoing_.at(u); }
    bool is_leaf(NodeId v) const { return incoming_.at(v).empty(); }

    // Longest path length from v to the goal node; 0 for the goal itself.
    int depth(NodeId v) const { return depths_.at(v); }
    int max_depth() const;
    NodeId goal() const;

    // Material label -> node id, or nullopt if no node carries the label.
    std::optional<NodeId> node_by_material(const std::string& material) const;

private:
    std::vector<PlanNode> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> incoming_;
    std::vector<std::vector<NodeId>> outgoing_;
    std::vector<int> depths_;
};

struct PartialPlan {
    AgentId owner = AgentId::A;
    EdgeSet edges;  // subset of the joint plan's edges, same node set
};

struct KnowledgeSplit {
    JointPlan joint;
    PartialPlan partial_a;
    PartialPlan partial_b;
    std::uint64_t seed = 0;

    const PartialPlan& partial(AgentId a) const {
        return a == AgentId::A ? partial_a : partial_b;
    }
};

struct MissingEdgeSet {
    AgentId agent = AgentId::A;
    EdgeSet edges;  // joint.edges \ partial(agent).edges
};

enum class PlanViolation : std::uint8_t {
    NoGoal,
    MultipleGoals,
    GoalHasOutgoingEdge,
    SelfLoop,
    DuplicateEdge,
    EdgeOutOfRange,
    Cycle,
    UnreachableNode,
    LeafWithoutMine,
};

struct Violation {
    PlanViolation kind;
    std::string detail;
};

struct GenOptions {
    std::size_t n_tools = 3;
    std::size_t n_mines = 3;
    double tool_probability = 0.5;
};

JointPlan generate_joint_plan(std::size_t n_nodes, std::size_t max_ingredients,
                              std::uint64_t seed, const GenOptions& opts = {});

std::vector<Violation> validate_joint_plan(const JointPlan& plan);

KnowledgeSplit split_plan(const JointPlan& plan, double overlap, std::uint64_t seed);

MissingEdgeSet missing_edges(const KnowledgeSplit& split, AgentId agent);

enum class CandidateTask : std::uint8_t { Own, Partner };

// Own task: all ordered node pairs minus the diagonal minus the agent's own
// edges. Partner task: exactly the agent's own edges. Lexicographic order.
std::vector<Edge> candidate_edges(const KnowledgeSplit& split, AgentId agent,
                                  CandidateTask task);

}  // namespace planacq
