#include "planacq/serialize.hpp"

#include <stdexcept>

namespace planacq {

namespace {

Json edges_to_json(const EdgeSet& edges) {
    Json arr = Json::array();
    for (const Edge& e : edges) arr.push_back({e.first, e.second});
    return arr;
}

Json edges_to_json(const std::vector<Edge>& edges) {
    Json arr = Json::array();
    for (const Edge& e : edges) arr.push_back({e.first, e.second});
    return arr;
}

EdgeSet edges_from_json(const Json& arr) {
    EdgeSet out;
    for (const auto& e : arr) {
        out.insert(Edge{e.at(0).get<NodeId>(), e.at(1).get<NodeId>()});
    }
    return out;
}

Json split_to_json(const KnowledgeSplit& split) {
    Json j;
    j["seed"] = split.seed;
    Json nodes = Json::array();
    for (const PlanNode& n : split.joint.nodes()) {
        Json node;
        node["id"] = n.id;
        node["kind"] = n.kind == NodeKind::Goal ? "goal" : "landmark";
        node["material"] = n.material;
        node["tool"] = n.tool ? Json(*n.tool) : Json(nullptr);
        node["mine"] = n.mine ? Json(*n.mine) : Json(nullptr);
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    j["edges"] = edges_to_json(split.joint.edges());
    j["partial_a"] = edges_to_json(split.partial_a.edges);
    j["partial_b"] = edges_to_json(split.partial_b.edges);
    return j;
}

KnowledgeSplit split_from_json(const Json& j) {
    std::vector<PlanNode> nodes;
    for (const auto& node : j.at("nodes")) {
        PlanNode n;
        n.id = node.at("id").get<NodeId>();
        const std::string kind = node.at("kind").get<std::string>();
        if (kind == "goal") n.kind = NodeKind::Goal;
        else if (kind == "landmark") n.kind = NodeKind::Landmark;
        else throw std::runtime_error("unknown node kind: " + kind);
        n.material = node.at("material").get<std::string>();
        if (!node.at("tool").is_null()) n.tool = node.at("tool").get<std::string>();
        if (!node.at("mine").is_null()) n.mine = node.at("mine").get<std::string>();
        nodes.push_back(std::move(n));
    }
    EdgeSet edges = edges_from_json(j.at("edges"));
    KnowledgeSplit split;
    split.joint = JointPlan(std::move(nodes), std::vector<Edge>(edges.begin(), edges.end()));
    split.partial_a.owner = AgentId::A;
    split.partial_a.edges = edges_from_json(j.at("partial_a"));
    split.partial_b.owner = AgentId::B;
    split.partial_b.edges = edges_from_json(j.at("partial_b"));
    split.seed = j.at("seed").get<std::uint64_t>();
    return split;
}

Json labels_to_json(const OracleLabels& labels) {
    Json j;
    j["intention"] = labels.intention;
    Json status = Json::array();
    for (CompletionStatus s : labels.status) status.push_back(static_cast<int>(s));
    j["status"] = std::move(status);
    Json knowledge = Json::array();
    for (bool k : labels.knowledge) knowledge.push_back(k ? 1 : 0);
    j["knowledge"] = std::move(knowledge);
    j["own_missing"] = edges_to_json(labels.own_missing);
    j["partner_missing"] = edges_to_json(labels.partner_missing);
    return j;
}

OracleLabels labels_from_json(const Json& j) {
    OracleLabels labels;
    labels.intention = j.at("intention").get<NodeId>();
    for (const auto& s : j.at("status")) {
        labels.status.push_back(static_cast<CompletionStatus>(s.get<int>()));
    }
    for (const auto& k : j.at("knowledge")) labels.knowledge.push_back(k.get<int>() != 0);
    labels.own_missing = edges_from_json(j.at("own_missing"));
    labels.partner_missing = edges_from_json(j.at("partner_missing"));
    return labels;
}

Json policy_to_json(const Policy& p) {
    Json j;
    j["kind"] = to_string(p.kind);
    j["seed"] = p.rng_seed;
    j["ask_probability"] = p.ask_probability;
    j["tell_budget"] = p.tell_budget;
    return j;
}

Policy policy_from_json(const Json& j) {
    Policy p;
    auto kind = policy_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown policy kind");
    p.kind = *kind;
    p.rng_seed = j.at("seed").get<std::uint64_t>();
    p.ask_probability = j.at("ask_probability").get<double>();
    p.tell_budget = j.at("tell_budget").get<int>();
    return p;
}

AgentId agent_from_json(const Json& j) {
    const std::string s = j.get<std::string>();
    if (s == "A") return AgentId::A;
    if (s == "B") return AgentId::B;
    throw std::runtime_error("unknown agent id: " + s);
}

}  // namespace

Json plan_record_to_json(const PlanRecord& record) {
    Json j;
    j["id"] = record.id;
    Json split = split_to_json(record.split);
    j["seed"] = split.at("seed");
    j["nodes"] = split.at("nodes");
    j["edges"] = split.at("edges");
    j["partial_a"] = split.at("partial_a");
    j["partial_b"] = split.at("partial_b");
    return j;
}

PlanRecord plan_record_from_json(const Json& j) {
    PlanRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.split = split_from_json(j);
    return rec;
}

Json session_to_json(const SessionLog& log) {
    Json j;
    j["plan_id"] = log.plan_id;
    Json seeds;
    seeds["split"] = log.split.seed;
    seeds["session"] = log.config.seed;
    seeds["policy_a"] = log.policy_a.rng_seed;
    seeds["policy_b"] = log.policy_b.rng_seed;
    j["seeds"] = std::move(seeds);
    j["policy_a"] = policy_to_json(log.policy_a);
    j["policy_b"] = policy_to_json(log.policy_b);
    Json config;
    config["max_turns"] = log.config.max_turns;
    config["missing_labels_from_current"] = log.config.missing_labels_from_current;
    config["record_beliefs"] = log.config.record_beliefs;
    j["config"] = std::move(config);
    j["split"] = split_to_json(log.split);

    // Belief snapshots are derived data; they are replayed here on demand
    // rather than stored on the log.
    BeliefState dbg_a = BeliefState::initial(log.split, AgentId::A);
    BeliefState dbg_b = BeliefState::initial(log.split, AgentId::B);
    auto belief_json = [](const BeliefState& b) {
        Json out;
        out["known_edges"] = edges_to_json(b.known_edges);
        out["partner_known_lower_bound"] = edges_to_json(b.partner_known_edges_lower_bound);
        Json lacks = Json::array();
        for (NodeId v : b.partner_lacks) lacks.push_back(v);
        out["partner_lacks"] = std::move(lacks);
        out["intention"] = b.intention ? Json(*b.intention) : Json(nullptr);
        return out;
    };

    Json turns = Json::array();
    for (const TurnRecord& rec : log.turns) {
        Json t;
        t["t"] = rec.t;
        t["speaker"] = to_string(rec.speaker);
        t["move"] = rec.move ? Json(serialize_move(*rec.move)) : Json(nullptr);
        if (rec.event) {
            Json ev;
            ev["actor"] = to_string(rec.event->actor);
            ev["kind"] = to_string(rec.event->kind);
            ev["target"] = rec.event->target;
            t["event"] = std::move(ev);
        } else {
            t["event"] = nullptr;
        }
        t["labels_a"] = labels_to_json(rec.labels_a);
        t["labels_b"] = labels_to_json(rec.labels_b);
        if (log.config.record_beliefs) {
            if (rec.move) {
                dbg_a = apply_move(dbg_a, *rec.move, log.split.joint);
                dbg_b = apply_move(dbg_b, *rec.move, log.split.joint);
            }
            if (rec.event) {
                dbg_a = apply_event(dbg_a, *rec.event, log.split.joint);
                dbg_b = apply_event(dbg_b, *rec.event, log.split.joint);
            }
            Json dbg;
            dbg["a"] = belief_json(dbg_a);
            dbg["b"] = belief_json(dbg_b);
            t["debug_beliefs"] = std::move(dbg);
        }
        turns.push_back(std::move(t));
    }
    j["turns"] = std::move(turns);
    j["outcome"] = to_string(log.outcome);
    return j;
}

SessionLog session_from_json(const Json& j) {
    SessionLog log;
    log.plan_id = j.at("plan_id").get<std::string>();
    log.split = split_from_json(j.at("split"));
    log.policy_a = policy_from_json(j.at("policy_a"));
    log.policy_b = policy_from_json(j.at("policy_b"));
    log.config.seed = j.at("seeds").at("session").get<std::uint64_t>();
    log.config.max_turns = j.at("config").at("max_turns").get<int>();
    log.config.missing_labels_from_current =
        j.at("config").at("missing_labels_from_current").get<bool>();
    log.config.record_beliefs = j.at("config").value("record_beliefs", false);

    for (const auto& t : j.at("turns")) {
        TurnRecord rec;
        rec.t = t.at("t").get<int>();
        rec.speaker = agent_from_json(t.at("speaker"));
        if (!t.at("move").is_null()) {
            MoveParseResult parsed = parse_move(t.at("move").get<std::string>());
            if (!parsed.ok()) {
                throw std::runtime_error("bad move at turn " + std::to_string(rec.t) + ": " +
                                         parsed.error->expected);
            }
            parsed.move->speaker = rec.speaker;
            parsed.move->turn = rec.t;
            rec.move = std::move(parsed.move);
        }
        if (!t.at("event").is_null()) {
            const Json& ev = t.at("event");
            ActionEvent e;
            e.actor = agent_from_json(ev.at("actor"));
            auto kind = event_kind_from_string(ev.at("kind").get<std::string>());
            if (!kind) throw std::runtime_error("unknown event kind");
            e.kind = *kind;
            e.target = ev.at("target").get<NodeId>();
            e.turn = rec.t;
            rec.event = e;
        }
        rec.labels_a = labels_from_json(t.at("labels_a"));
        rec.labels_b = labels_from_json(t.at("labels_b"));
        log.turns.push_back(std::move(rec));
    }
    const std::string outcome = j.at("outcome").get<std::string>();
    log.outcome = outcome == "completed" ? SessionOutcome::Completed
                                         : SessionOutcome::MaxTurnsReached;
    return log;
}

Json vocabulary_to_json(const SlotVocabulary& vocab) {
    Json j;
    j["materials"] = vocab.materials;
    j["tools"] = vocab.tools;
    j["mines"] = vocab.mines;
    return j;
}

SlotVocabulary vocabulary_from_json(const Json& j) {
    SlotVocabulary v;
    v.materials = j.at("materials").get<std::vector<std::string>>();
    v.tools = j.at("tools").get<std::vector<std::string>>();
    v.mines = j.at("mines").get<std::vector<std::string>>();
    return v;
}

Json linear_model_to_json(const LinearModel& m) {
    Json j;
    j["task"] = m.task;
    j["layout"] = m.layout;
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    return j;
}

LinearModel linear_model_from_json(const Json& j) {
    LinearModel m;
    m.task = j.at("task").get<std::string>();
    m.layout = j.at("layout").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
}

namespace {

Json hyper_to_json(const Hyper& h) {
    Json j;
    j["lr"] = h.lr;
    j["epochs"] = h.epochs;
    j["l2"] = h.l2;
    j["batch"] = h.batch;
    j["seed"] = h.seed;
    j["class_weight"] = h.class_weight;
    return j;
}

Hyper hyper_from_json(const Json& j) {
    Hyper h;
    h.lr = j.at("lr").get<double>();
    h.epochs = j.at("epochs").get<int>();
    h.l2 = j.at("l2").get<double>();
    h.batch = j.at("batch").get<int>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.class_weight = j.at("class_weight").get<bool>();
    return h;
}

}  // namespace

Json staged_model_to_json(const StagedModel& m) {
    Json j;
    j["config_hash"] = m.config_hash;
    j["n_nodes"] = m.n_nodes;
    Json config;
    Json aug;
    aug["status"] = m.config.aug.status;
    aug["knowledge"] = m.config.aug.knowledge;
    aug["intention"] = m.config.aug.intention;
    aug["dlg_move"] = m.config.aug.dlg_move;
    config["aug"] = std::move(aug);
    Json features;
    features["recency_decay"] = m.config.features.recency_decay;
    features["snapshot_stride"] = m.config.features.snapshot_stride;
    features["threshold"] = m.config.features.threshold;
    features["oracle_leak"] = m.config.features.oracle_leak;
    features["stage1_predicts_next"] = m.config.features.stage1_predicts_next;
    config["features"] = std::move(features);
    config["stage1"] = hyper_to_json(m.config.stage1);
    config["stage2"] = hyper_to_json(m.config.stage2);
    config["stage3"] = hyper_to_json(m.config.stage3);
    config["seed"] = m.config.seed;
    j["config"] = std::move(config);
    Json heads;
    heads["stage1_move"] = linear_model_to_json(m.stage1_move);
    heads["intention"] = linear_model_to_json(m.intention);
    heads["status"] = linear_model_to_json(m.status);
    heads["knowledge"] = linear_model_to_json(m.knowledge);
    heads["own_missing"] = linear_model_to_json(m.own_missing);
    heads["partner_missing"] = linear_model_to_json(m.partner_missing);
    j["heads"] = std::move(heads);
    return j;
}

StagedModel staged_model_from_json(const Json& j) {
    StagedModel m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.n_nodes = j.at("n_nodes").get<std::size_t>();
    const Json& config = j.at("config");
    const Json& aug = config.at("aug");
    m.config.aug.status = aug.at("status").get<bool>();
    m.config.aug.knowledge = aug.at("knowledge").get<bool>();
    m.config.aug.intention = aug.at("intention").get<bool>();
    m.config.aug.dlg_move = aug.at("dlg_move").get<bool>();
    const Json& features = config.at("features");
    m.config.features.recency_decay = features.at("recency_decay").get<double>();
    m.config.features.snapshot_stride = features.at("snapshot_stride").get<int>();
    m.config.features.threshold = features.at("threshold").get<double>();
    m.config.features.oracle_leak = features.at("oracle_leak").get<bool>();
    m.config.features.stage1_predicts_next = features.at("stage1_predicts_next").get<bool>();
    m.config.stage1 = hyper_from_json(config.at("stage1"));
    m.config.stage2 = hyper_from_json(config.at("stage2"));
    m.config.stage3 = hyper_from_json(config.at("stage3"));
    m.config.seed = config.at("seed").get<std::uint64_t>();
    const Json& heads = j.at("heads");
    m.stage1_move = linear_model_from_json(heads.at("stage1_move"));
    m.intention = linear_model_from_json(heads.at("intention"));
    m.status = linear_model_from_json(heads.at("status"));
    m.knowledge = linear_model_from_json(heads.at("knowledge"));
    m.own_missing = linear_model_from_json(heads.at("own_missing"));
    m.partner_missing = linear_model_from_json(heads.at("partner_missing"));
    return m;
}

}  // namespace planacq
