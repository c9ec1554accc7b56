#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "planacq/experiment.hpp"

namespace py = pybind11;
using namespace planacq;

namespace {

AgentId agent_from(const std::string& name) {
    if (name == "A" || name == "a") return AgentId::A;
    if (name == "B" || name == "b") return AgentId::B;
    throw py::value_error("agent must be 'A' or 'B'");
}

AugmentationSet aug_from(const std::vector<std::string>& names) {
    AugmentationSet aug;
    for (const std::string& name : names) {
        if (name == "status") aug.status = true;
        else if (name == "knowledge") aug.knowledge = true;
        else if (name == "intention") aug.intention = true;
        else if (name == "dlg-move" || name == "dlg_move") aug.dlg_move = true;
        else throw py::value_error("unknown augmentation: " + name);
    }
    return aug;
}

std::vector<std::string> violations_to_strings(const std::vector<Violation>& violations) {
    static const char* names[] = {
        "no-goal",        "multiple-goals", "goal-has-outgoing-edge",
        "self-loop",      "duplicate-edge", "edge-out-of-range",
        "cycle",          "unreachable-node", "leaf-without-mine",
    };
    std::vector<std::string> out;
    for (const Violation& v : violations) {
        out.push_back(std::string(names[static_cast<int>(v.kind)]) + ": " + v.detail);
    }
    return out;
}

Policy policy_from(const std::string& kind, std::uint64_t seed, double ask_probability,
                   int tell_budget) {
    Policy p = make_policy(kind, seed);
    p.ask_probability = ask_probability;
    p.tell_budget = tell_budget;
    return p;
}

}  // namespace

PYBIND11_MODULE(_planacq, m) {
    m.doc() = "Two-agent collaborative plan acquisition simulator and evaluation harness";

    py::class_<JointPlan>(m, "JointPlan")
        .def_property_readonly("n_nodes", &JointPlan::node_count)
        .def_property_readonly("edges", [](const JointPlan& p) { return p.edges(); })
        .def_property_readonly("goal", &JointPlan::goal)
        .def_property_readonly("max_depth", &JointPlan::max_depth)
        .def("depth", &JointPlan::depth)
        .def("is_leaf", &JointPlan::is_leaf)
        .def("material", [](const JointPlan& p, NodeId v) { return p.nodes().at(v).material; })
        .def("validate",
             [](const JointPlan& p) { return violations_to_strings(validate_joint_plan(p)); });

    py::class_<KnowledgeSplit>(m, "KnowledgeSplit")
        .def_property_readonly("joint", [](const KnowledgeSplit& s) { return s.joint; })
        .def_property_readonly("partial_a",
                               [](const KnowledgeSplit& s) { return s.partial_a.edges; })
        .def_property_readonly("partial_b",
                               [](const KnowledgeSplit& s) { return s.partial_b.edges; })
        .def_property_readonly("seed", [](const KnowledgeSplit& s) { return s.seed; });

    py::class_<SessionLog>(m, "SessionLog")
        .def_property_readonly("plan_id", [](const SessionLog& s) { return s.plan_id; })
        .def_property_readonly("n_turns", [](const SessionLog& s) { return s.turns.size(); })
        .def_property_readonly("outcome",
                               [](const SessionLog& s) { return std::string(to_string(s.outcome)); })
        .def_property_readonly("split", [](const SessionLog& s) { return s.split; })
        .def("moves",
             [](const SessionLog& s) {
                 std::vector<std::string> out;
                 for (const TurnRecord& rec : s.turns) {
                     if (rec.move) out.push_back(serialize_move(*rec.move));
                 }
                 return out;
             })
        .def("to_json", [](const SessionLog& s) { return session_to_json(s).dump(); })
        .def_static("from_json", [](const std::string& text) {
            return session_from_json(Json::parse(text));
        });

    py::class_<PredictionTrace>(m, "PredictionTrace")
        .def_property_readonly("candidates",
                               [](const PredictionTrace& t) { return t.candidates; })
        .def_property_readonly("truth", [](const PredictionTrace& t) { return t.truth; })
        .def_property_readonly("probs", [](const PredictionTrace& t) { return t.probs; })
        .def_property_readonly("threshold", [](const PredictionTrace& t) { return t.threshold; })
        .def("mind_changes",
             [](const PredictionTrace& t) { return mind_changes(t, t.threshold); })
        .def("confidence_change", [](const PredictionTrace& t) { return confidence_change(t); });

    py::class_<StagedModel>(m, "StagedModel")
        .def_property_readonly("config_hash", [](const StagedModel& s) { return s.config_hash; })
        .def_property_readonly("n_nodes", [](const StagedModel& s) { return s.n_nodes; })
        .def("to_json", [](const StagedModel& s) { return staged_model_to_json(s).dump(); })
        .def_static("from_json", [](const std::string& text) {
            return staged_model_from_json(Json::parse(text));
        });

    py::class_<GenOptions>(m, "GenOptions").def(py::init<>());
    m.def("generate_plan", &generate_joint_plan, py::arg("n_nodes"), py::arg("max_ingredients"),
          py::arg("seed"), py::arg("options") = GenOptions{});

    m.def("split_plan", &split_plan, py::arg("plan"), py::arg("overlap"), py::arg("seed"));
    m.def(
        "missing_edges",
        [](const KnowledgeSplit& split, const std::string& agent) {
            return missing_edges(split, agent_from(agent)).edges;
        },
        py::arg("split"), py::arg("agent"));
    m.def(
        "candidate_edges",
        [](const KnowledgeSplit& split, const std::string& agent, const std::string& task) {
            if (task != "own" && task != "partner") {
                throw py::value_error("task must be 'own' or 'partner'");
            }
            return candidate_edges(split, agent_from(agent),
                                   task == "own" ? CandidateTask::Own : CandidateTask::Partner);
        },
        py::arg("split"), py::arg("agent"), py::arg("task"));

    m.def("move_categories", [] {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < kMoveCategoryCount; ++i) {
            names.push_back(to_string(static_cast<MoveCategory>(i)));
        }
        return names;
    });
    m.def(
        "parse_move",
        [](const std::string& text) {
            MoveParseResult r = parse_move(text);
            if (!r.ok()) {
                std::ostringstream err;
                err << "parse error at offset " << r.error->offset << ": expected "
                    << r.error->expected;
                throw py::value_error(err.str());
            }
            return serialize_move(*r.move);  // canonical form
        },
        py::arg("text"));

    m.def(
        "run_session",
        [](const KnowledgeSplit& split, const std::string& policy_a, const std::string& policy_b,
           int max_turns, std::uint64_t seed) {
            SessionConfig config;
            config.max_turns = max_turns;
            config.seed = seed;
            Policy pa = policy_from(policy_a, derive_seed(seed, "policy-a"), 0.5, 1);
            Policy pb = policy_from(policy_b, derive_seed(seed, "policy-b"), 0.5, 1);
            return run_session(split, pa, pb, config);
        },
        py::arg("split"), py::arg("policy_a"), py::arg("policy_b"), py::arg("max_turns") = 60,
        py::arg("seed") = 0);

    m.def(
        "replay",
        [](const SessionLog& log) {
            ReplayResult r = replay(log);
            if (!r.verified) {
                throw py::value_error("replay divergence at turn " +
                                      std::to_string(r.divergence_turn) + ": " + r.detail);
            }
            return true;
        },
        py::arg("log"));

    m.def(
        "train_staged",
        [](const std::vector<SessionLog>& corpus, const std::vector<std::string>& aug,
           std::uint64_t seed, int epochs) {
            StagedConfig config;
            config.aug = aug_from(aug);
            config.seed = seed;
            config.stage1.epochs = epochs;
            config.stage2.epochs = epochs;
            config.stage3.epochs = epochs;
            return train_staged(corpus, config);
        },
        py::arg("corpus"), py::arg("aug") = std::vector<std::string>{}, py::arg("seed") = 0,
        py::arg("epochs") = 200);

    m.def(
        "evaluate_over_time",
        [](const StagedModel& model, const SessionLog& log, const std::string& agent,
           const std::string& task) {
            if (task != "own-missing" && task != "partner-missing") {
                throw py::value_error("task must be 'own-missing' or 'partner-missing'");
            }
            return evaluate_over_time(model, log, agent_from(agent),
                                      task == "own-missing" ? Stage3Task::OwnMissing
                                                            : Stage3Task::PartnerMissing);
        },
        py::arg("model"), py::arg("log"), py::arg("agent"), py::arg("task"));

    m.def(
        "mind_changes",
        [](const std::vector<std::vector<double>>& probs, double threshold) {
            PredictionTrace trace;
            trace.threshold = threshold;
            if (!probs.empty()) {
                for (std::size_t j = 0; j < probs[0].size(); ++j) {
                    trace.candidates.push_back(Edge{static_cast<NodeId>(j), 0});
                    trace.truth.push_back(false);
                }
            }
            trace.probs = probs;
            return mind_changes(trace, threshold);
        },
        py::arg("probs"), py::arg("threshold") = 0.5);
    m.def(
        "confidence_change",
        [](const std::vector<std::vector<double>>& probs) {
            PredictionTrace trace;
            if (!probs.empty()) {
                for (std::size_t j = 0; j < probs[0].size(); ++j) {
                    trace.candidates.push_back(Edge{static_cast<NodeId>(j), 0});
                    trace.truth.push_back(false);
                }
            }
            trace.probs = probs;
            return confidence_change(trace);
        },
        py::arg("probs"));

    m.def(
        "cmd_gen",
        [](int plans, std::size_t nodes, std::size_t max_ingredients, double overlap,
           std::uint64_t seed, const std::string& out, const std::string& vocab_out) {
            GenArgs args;
            args.n_plans = plans;
            args.n_nodes = nodes;
            args.max_ingredients = max_ingredients;
            args.overlap = overlap;
            args.seed = seed;
            args.out = out;
            args.vocab_out = vocab_out;
            GenSummary s = cmd_gen(args);
            return py::make_tuple(s.n_plans, s.total_nodes, s.total_edges);
        },
        py::arg("plans"), py::arg("nodes") = 8, py::arg("max_ingredients") = 2,
        py::arg("overlap") = 0.4, py::arg("seed") = 7, py::arg("out") = "plans.jsonl",
        py::arg("vocab_out") = "");
    m.def(
        "cmd_simulate",
        [](const std::string& plans, const std::string& policy_a, const std::string& policy_b,
           int max_turns, int repeats, std::uint64_t seed, const std::string& out) {
            SimArgs args;
            args.plans_path = plans;
            args.policy_a = policy_a;
            args.policy_b = policy_b;
            args.max_turns = max_turns;
            args.repeats = repeats;
            args.seed = seed;
            args.out = out;
            SimSummary s = cmd_simulate(args);
            return py::make_tuple(s.n_sessions, s.n_completed);
        },
        py::arg("plans"), py::arg("policy_a") = "proactive", py::arg("policy_b") = "reactive",
        py::arg("max_turns") = 60, py::arg("repeats") = 1, py::arg("seed") = 0,
        py::arg("out") = "sessions.jsonl");
    m.def("read_sessions", &read_sessions, py::arg("path"));
}
