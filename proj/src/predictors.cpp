#include "planacq/predictors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "planacq/rng.hpp"

namespace planacq {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_p(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }

double saturate(double c) { return c / (1.0 + c); }

}  // namespace

const char* to_string(Stage3Task t) {
    return t == Stage3Task::OwnMissing ? "own-missing" : "partner-missing";
}

LinearModel LinearModel::zeros(std::string task, std::vector<std::string> layout,
                               std::size_t n_classes) {
    if (n_classes < 2) throw std::invalid_argument("n_classes must be >= 2");
    LinearModel m;
    m.task = std::move(task);
    m.layout = std::move(layout);
    const std::size_t rows = n_classes == 2 ? 1 : n_classes;  // binary keeps one row
    m.weights.assign(rows, std::vector<double>(m.layout.size(), 0.0));
    m.bias.assign(rows, 0.0);
    return m;
}

std::vector<double> predict(const LinearModel& model, const FeatureVector& fv) {
    if (fv.size() != model.n_features()) {
        throw std::invalid_argument("predict: feature dimension mismatch (" +
                                    std::to_string(fv.size()) + " vs " +
                                    std::to_string(model.n_features()) + ")");
    }
    std::vector<double> z(model.weights.size());
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        double acc = model.bias[k];
        const auto& row = model.weights[k];
        for (std::size_t i = 0; i < fv.size(); ++i) acc += row[i] * fv[i];
        z[k] = acc;
    }
    if (model.binary()) return {sigmoid(z[0])};
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

std::vector<double> class_weights_for(const Dataset& data, bool enabled) {
    std::vector<double> w(data.n_classes, 1.0);
    if (!enabled || data.labels.empty()) return w;
    std::vector<std::size_t> counts(data.n_classes, 0);
    for (int y : data.labels) ++counts[static_cast<std::size_t>(y)];
    const double n = static_cast<double>(data.labels.size());
    const double k = static_cast<double>(data.n_classes);
    for (std::size_t c = 0; c < w.size(); ++c) {
        w[c] = counts[c] > 0 ? n / (k * static_cast<double>(counts[c])) : 1.0;
    }
    return w;
}

LossGrad loss_and_gradient(const LinearModel& model, const Dataset& data,
                           const std::vector<std::size_t>& indices, double l2,
                           const std::vector<double>& class_weights) {
    if (data.layout.size() != model.n_features()) {
        throw std::invalid_argument("loss_and_gradient: feature dimension mismatch");
    }
    LossGrad out;
    out.grad_weights.assign(model.weights.size(),
                            std::vector<double>(model.n_features(), 0.0));
    out.grad_bias.assign(model.bias.size(), 0.0);
    if (indices.empty()) return out;

    const double inv_n = 1.0 / static_cast<double>(indices.size());
    for (std::size_t idx : indices) {
        const FeatureVector& x = data.features[idx];
        const int y = data.labels[idx];
        const double cw = class_weights[static_cast<std::size_t>(y)];
        std::vector<double> p = predict(model, x);
        if (model.binary()) {
            const double py = clamp_p(p[0]);
            out.loss += -cw * (y == 1 ? std::log(py) : std::log(1.0 - py));
            const double dz = cw * (p[0] - static_cast<double>(y)) * inv_n;
            for (std::size_t i = 0; i < x.size(); ++i) out.grad_weights[0][i] += dz * x[i];
            out.grad_bias[0] += dz;
        } else {
            out.loss += -cw * std::log(clamp_p(p[static_cast<std::size_t>(y)]));
            for (std::size_t k = 0; k < p.size(); ++k) {
                const double dz =
                    cw * (p[k] - (static_cast<int>(k) == y ? 1.0 : 0.0)) * inv_n;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    out.grad_weights[k][i] += dz * x[i];
                }
                out.grad_bias[k] += dz;
            }
        }
    }
    out.loss *= inv_n;
    if (l2 > 0.0) {
        double reg = 0.0;
        for (std::size_t k = 0; k < model.weights.size(); ++k) {
            for (std::size_t i = 0; i < model.weights[k].size(); ++i) {
                reg += model.weights[k][i] * model.weights[k][i];
                out.grad_weights[k][i] += l2 * model.weights[k][i];
            }
        }
        out.loss += 0.5 * l2 * reg;
    }
    return out;
}

TrainResult train(LinearModel model, const Dataset& data, const Hyper& hyper) {
    if (data.features.empty()) throw std::invalid_argument("train: empty dataset");
    if (data.layout.size() != model.n_features()) {
        throw std::invalid_argument("train: feature dimension mismatch");
    }
    for (const auto& x : data.features) {
        if (x.size() != model.n_features()) {
            throw std::invalid_argument("train: feature dimension mismatch");
        }
    }

    const std::vector<double> cw = class_weights_for(data, hyper.class_weight);
    Rng rng(hyper.seed);
    std::vector<std::size_t> order(data.features.size());
    std::iota(order.begin(), order.end(), 0);

    double epoch_loss = 0.0;
    const std::size_t batch = std::max(1, hyper.batch);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
            LossGrad lg = loss_and_gradient(model, data, idx, hyper.l2, cw);
            for (std::size_t k = 0; k < model.weights.size(); ++k) {
                for (std::size_t i = 0; i < model.weights[k].size(); ++i) {
                    model.weights[k][i] -= hyper.lr * lg.grad_weights[k][i];
                }
                model.bias[k] -= hyper.lr * lg.grad_bias[k];
            }
            epoch_loss += lg.loss;
            ++batches;
        }
        epoch_loss /= static_cast<double>(std::max<std::size_t>(1, batches));
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train: non-finite loss (diverging learning rate?)");
        }
    }
    model.seed = hyper.seed;
    return {std::move(model), epoch_loss};
}

// --- feature extraction ------------------------------------------------------

namespace {

struct Decayed {
    double value = 0.0;
    int last = 0;

    double at(int t, double g) const {
        if (value == 0.0) return 0.0;
        return value * std::pow(g, t - last);
    }
    void bump(int t, double g, double amount) {
        value = at(t, g) + amount;
        last = t;
    }
};

struct MentionStat {
    std::array<std::array<double, kMoveGroupCount>, 2> count{};  // [self/partner][group]
    std::array<Decayed, 2> recency{};
};

Edge norm_pair(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Walks one session from one agent's perspective, maintaining the replayed
// belief state and the dialogue aggregates every stage draws features from.
class Featurizer {
public:
    Featurizer(const SessionLog& log, AgentId agent, const FeatureParams& params)
        : log_(log),
          plan_(log.split.joint),
          agent_(agent),
          params_(params),
          belief_(BeliefState::initial(log.split, agent)) {
        const std::size_t n = plan_.node_count();
        nodes_.resize(n);
        own_in_deg_.assign(n, 0.0);
        own_out_deg_.assign(n, 0.0);
        std::vector<std::vector<NodeId>> own_out(n);
        for (const Edge& e : log.split.partial(agent).edges) {
            own_out_deg_[e.first] += 1.0;
            own_in_deg_[e.second] += 1.0;
            own_out[e.first].push_back(e.second);
        }
        // Longest forward chain through the agent's own initial edges. Joint
        // depths are off limits here: the agent only sees its partial plan.
        own_depth_.assign(n, -1);
        std::function<int(NodeId, std::size_t)> walk = [&](NodeId v, std::size_t guard) -> int {
            if (guard > n) return 0;
            if (own_depth_[v] >= 0) return own_depth_[v];
            int best = 0;
            for (NodeId w : own_out[v]) best = std::max(best, walk(w, guard + 1) + 1);
            own_depth_[v] = best;
            return best;
        };
        own_max_depth_ = 1;
        for (NodeId v = 0; v < n; ++v) own_max_depth_ = std::max(own_max_depth_, walk(v, 0));
        stage1_cache_ = stage1_input();
    }

    int turn() const { return consumed_ - 1; }
    std::size_t remaining() const { return log_.turns.size() - consumed_; }
    bool done() const { return remaining() == 0; }
    const BeliefState& belief() const { return belief_; }
    const TurnRecord& last_record() const { return log_.turns.at(consumed_ - 1); }
    const FeatureVector& stage1_at_turn() const { return stage1_cache_; }

    void consume() {
        const TurnRecord& rec = log_.turns.at(consumed_);
        stage1_cache_ = stage1_input();  // history strictly before this turn
        if (rec.move) {
            const DialogueMove& m = *rec.move;
            belief_ = apply_move(belief_, m, plan_);
            if (m.category == MoveCategory::StatementRecipe) {
                auto v = plan_.node_by_material(m.slots[0].value);
                auto u1 = plan_.node_by_material(m.slots[1].value);
                auto u2 = plan_.node_by_material(m.slots[2].value);
                if (v && u1 && u2) {
                    observed_partner_knows_.insert(Edge{*u1, *v});
                    observed_partner_knows_.insert(Edge{*u2, *v});
                }
            }
            const std::size_t spk = m.speaker == agent_ ? 0 : 1;
            const std::size_t grp = static_cast<std::size_t>(group_of(m.category));
            cat_rec_[spk][static_cast<std::size_t>(m.category)].bump(
                rec.t, params_.recency_decay, 1.0);
            std::vector<NodeId> mentioned;
            for (const Slot& s : m.slots) {
                if (s.kind != SlotKind::Material) continue;
                auto id = plan_.node_by_material(s.value);
                if (id && std::find(mentioned.begin(), mentioned.end(), *id) == mentioned.end()) {
                    mentioned.push_back(*id);
                }
            }
            for (NodeId v : mentioned) {
                nodes_[v].count[spk][grp] += 1.0;
                nodes_[v].recency[spk].bump(rec.t, params_.recency_decay, 1.0);
            }
            for (std::size_t i = 0; i < mentioned.size(); ++i) {
                for (std::size_t j = i + 1; j < mentioned.size(); ++j) {
                    MentionStat& ps = pairs_[norm_pair(mentioned[i], mentioned[j])];
                    ps.count[spk][grp] += 1.0;
                    ps.recency[spk].bump(rec.t, params_.recency_decay, 1.0);
                }
            }
        }
        if (rec.event) {
            belief_ = apply_event(belief_, *rec.event, plan_);
            if (rec.event->actor != agent_ && rec.event->kind == EventKind::CombineBlocks) {
                // Watching a combine certifies only the recipe edges the
                // watcher can itself name; the rest of the recipe stays
                // hidden. The belief oracle knows more, features may not.
                for (NodeId u : plan_.incoming(rec.event->target)) {
                    Edge e{u, rec.event->target};
                    if (belief_.known_edges.count(e)) observed_partner_knows_.insert(e);
                }
            }
        }
        ++consumed_;
    }

    FeatureVector stage1_input() const {
        const int t = consumed_ == 0 ? 0 : log_.turns.at(consumed_ - 1).t + 1;
        FeatureVector fv;
        fv.reserve(2 * kMoveCategoryCount + 3);
        const double scale = 1.0 - params_.recency_decay;
        for (std::size_t spk = 0; spk < 2; ++spk) {
            for (std::size_t c = 0; c < kMoveCategoryCount; ++c) {
                fv.push_back(cat_rec_[spk][c].at(t, params_.recency_decay) * scale);
            }
        }
        fv.push_back(turn_norm(t));
        fv.push_back(belief_.inquiry_from_partner ? 1.0 : 0.0);
        fv.push_back(belief_.inquiry_to_partner ? 1.0 : 0.0);
        return fv;
    }

    FeatureVector stage2_node_input(NodeId v, const FeatureVector& s1dist) const {
        const int t = now();
        FeatureVector fv;
        fv.reserve(15 + s1dist.size());
        fv.push_back(depth_norm(v));
        fv.push_back(plan_.is_leaf(v) ? 1.0 : 0.0);
        fv.push_back(own_in_deg_[v] / 4.0);
        const MentionStat& ns = nodes_[v];
        fv.push_back(ns.recency[1].at(t, params_.recency_decay) * (1.0 - params_.recency_decay));
        fv.push_back(ns.recency[0].at(t, params_.recency_decay) * (1.0 - params_.recency_decay));
        fv.push_back(saturate(ns.count[1][static_cast<std::size_t>(MoveGroup::Statement)]));
        fv.push_back(saturate(ns.count[1][static_cast<std::size_t>(MoveGroup::Inquiry)]));
        fv.push_back(saturate(ns.count[0][static_cast<std::size_t>(MoveGroup::Statement)]));
        fv.push_back(saturate(ns.count[0][static_cast<std::size_t>(MoveGroup::Inquiry)]));
        const CompletionStatus st = belief_.completed[v];
        fv.push_back(st == CompletionStatus::Incomplete ? 1.0 : 0.0);
        fv.push_back(st == CompletionStatus::DoneBySelf ? 1.0 : 0.0);
        fv.push_back(st == CompletionStatus::DoneByPartner ? 1.0 : 0.0);
        fv.push_back(belief_.partner_lacks.count(v) ? 1.0 : 0.0);
        fv.push_back(klb_cover(v));
        fv.push_back(turn_norm(t));
        fv.insert(fv.end(), s1dist.begin(), s1dist.end());
        return fv;
    }

    FeatureVector stage2_intention_input(const FeatureVector& s1dist) const {
        const int t = now();
        FeatureVector fv;
        fv.reserve(5 * plan_.node_count() + s1dist.size() + 1);
        const double scale = 1.0 - params_.recency_decay;
        for (NodeId v = 0; v < plan_.node_count(); ++v) {
            const MentionStat& ns = nodes_[v];
            fv.push_back(ns.recency[1].at(t, params_.recency_decay) * scale);
            fv.push_back(ns.recency[0].at(t, params_.recency_decay) * scale);
            fv.push_back(belief_.completed[v] != CompletionStatus::Incomplete ? 1.0 : 0.0);
            fv.push_back(belief_.completed[v] == CompletionStatus::DoneByPartner ? 1.0 : 0.0);
            fv.push_back(belief_.partner_intention == v ? 1.0 : 0.0);
        }
        fv.insert(fv.end(), s1dist.begin(), s1dist.end());
        fv.push_back(turn_norm(t));
        return fv;
    }

    // Structural layout plus speaker-agnostic mention aggregates. Finer
    // distinctions (who said it, completion state, tracked intentions) reach
    // stage 3 only through the frozen stage-1/2 outputs.
    FeatureVector stage3_base(Edge cand) const {
        const int t = now();
        const NodeId u = cand.first;
        const NodeId v = cand.second;
        FeatureVector fv;
        fv.reserve(25);
        fv.push_back(log_.split.partial(agent_).edges.count(cand) ? 1.0 : 0.0);
        fv.push_back(depth_norm(u));
        fv.push_back(depth_norm(v));
        fv.push_back(own_in_deg_[u] / 4.0);
        fv.push_back(own_out_deg_[u] / 4.0);
        fv.push_back(own_in_deg_[v] / 4.0);
        fv.push_back(own_out_deg_[v] / 4.0);
        fv.push_back(plan_.is_leaf(u) ? 1.0 : 0.0);
        fv.push_back(plan_.is_leaf(v) ? 1.0 : 0.0);

        const MentionStat* ps = nullptr;
        auto it = pairs_.find(norm_pair(u, v));
        if (it != pairs_.end()) ps = &it->second;
        static const MentionStat empty_stat{};
        if (!ps) ps = &empty_stat;
        for (std::size_t grp = 0; grp < kMoveGroupCount; ++grp) {
            fv.push_back(nodes_[u].count[0][grp] + nodes_[u].count[1][grp]);
            fv.push_back(nodes_[v].count[0][grp] + nodes_[v].count[1][grp]);
            fv.push_back(ps->count[0][grp] + ps->count[1][grp]);
        }
        auto rec_both = [&](const MentionStat& ms) {
            return ms.recency[0].at(t, params_.recency_decay) +
                   ms.recency[1].at(t, params_.recency_decay);
        };
        fv.push_back(rec_both(nodes_[u]));
        fv.push_back(rec_both(nodes_[v]));
        fv.push_back(rec_both(*ps));
        fv.push_back(belief_.partner_lacks.count(v) ? 1.0 : 0.0);
        return fv;
    }

private:
    int now() const { return consumed_ == 0 ? 0 : log_.turns.at(consumed_ - 1).t; }

    double turn_norm(int t) const { return static_cast<double>(t) / (t + 20.0); }

    double depth_norm(NodeId v) const {
        return static_cast<double>(own_depth_[v]) / own_max_depth_;
    }

    double klb_cover(NodeId v) const {
        double known = 0.0, covered = 0.0;
        for (NodeId u : plan_.incoming(v)) {
            Edge e{u, v};
            if (belief_.known_edges.count(e)) {
                known += 1.0;
                if (observed_partner_knows_.count(e)) covered += 1.0;
            }
        }
        return known > 0.0 ? covered / known : 0.0;
    }

    const SessionLog& log_;
    const JointPlan& plan_;
    AgentId agent_;
    FeatureParams params_;
    BeliefState belief_;
    std::vector<MentionStat> nodes_;
    std::map<Edge, MentionStat> pairs_;
    std::array<std::array<Decayed, kMoveCategoryCount>, 2> cat_rec_{};
    EdgeSet observed_partner_knows_;
    std::vector<double> own_in_deg_, own_out_deg_;
    std::vector<int> own_depth_;
    int own_max_depth_ = 1;
    FeatureVector stage1_cache_;
    std::size_t consumed_ = 0;
};

bool is_snapshot(const SessionLog& log, std::size_t turn_index, int stride) {
    if (turn_index + 1 == log.turns.size()) return true;
    const int s = std::max(1, stride);
    return (static_cast<int>(turn_index) % s) == s - 1;
}

// Frozen-stage outputs shared by every candidate at one evaluation point.
struct StageOutputs {
    FeatureVector s1dist;
    std::vector<double> knowledge_p;          // per node
    std::vector<std::array<double, 3>> status_p;  // per node
    std::vector<double> intention_p;          // per node
};

// The downstream heads see temporally smoothed stage outputs rather than the
// instantaneous values: sequence models integrate latents across time, and an
// exponential moving average is the linear-head counterpart.
constexpr double kStageOutputEma = 0.1;

class FrozenOutputTracker {
public:
    FrozenOutputTracker(const StagedModel* frozen, const AugmentationSet& aug,
                        std::size_t n_nodes)
        : frozen_(frozen), aug_(aug), n_nodes_(n_nodes) {
        need_any_ = aug.dlg_move || aug.status || aug.knowledge || aug.intention;
        if (!frozen_ && need_any_) {
            throw std::invalid_argument("augmented features require frozen earlier stages");
        }
    }

    // Call once per consumed turn, in order.
    const StageOutputs& update(const Featurizer& fz) {
        if (!need_any_) return acc_;
        StageOutputs now;
        now.s1dist = predict(frozen_->stage1_move, fz.stage1_at_turn());
        if (aug_.knowledge) {
            now.knowledge_p.resize(n_nodes_);
            for (NodeId v = 0; v < n_nodes_; ++v) {
                now.knowledge_p[v] =
                    predict(frozen_->knowledge, fz.stage2_node_input(v, now.s1dist))[0];
            }
        }
        if (aug_.status) {
            now.status_p.resize(n_nodes_);
            for (NodeId v = 0; v < n_nodes_; ++v) {
                auto p = predict(frozen_->status, fz.stage2_node_input(v, now.s1dist));
                now.status_p[v] = {p[0], p[1], p[2]};
            }
        }
        if (aug_.intention) {
            now.intention_p = predict(frozen_->intention, fz.stage2_intention_input(now.s1dist));
        }
        ++turns_seen_;
        if (turns_seen_ == 1) {
            acc_ = std::move(now);
            return acc_;
        }
        auto blend = [](std::vector<double>& acc, const std::vector<double>& cur) {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += kStageOutputEma * (cur[i] - acc[i]);
            }
        };
        blend(acc_.s1dist, now.s1dist);
        blend(acc_.knowledge_p, now.knowledge_p);
        blend(acc_.intention_p, now.intention_p);
        for (std::size_t v = 0; v < acc_.status_p.size(); ++v) {
            for (std::size_t k = 0; k < 3; ++k) {
                acc_.status_p[v][k] += kStageOutputEma * (now.status_p[v][k] - acc_.status_p[v][k]);
            }
        }
        return acc_;
    }

private:
    const StagedModel* frozen_;
    AugmentationSet aug_;
    std::size_t n_nodes_;
    bool need_any_ = false;
    std::size_t turns_seen_ = 0;
    StageOutputs acc_;
};

FeatureVector assemble_stage3(const Featurizer& fz, Edge cand, const AugmentationSet& aug,
                              const StageOutputs& so, bool oracle_leak, bool leak_label) {
    FeatureVector fv = fz.stage3_base(cand);
    if (aug.status) {
        for (double p : so.status_p[cand.second]) fv.push_back(p);
    }
    if (aug.knowledge) fv.push_back(so.knowledge_p[cand.second]);
    if (aug.intention) {
        fv.push_back(so.intention_p[cand.first]);
        fv.push_back(so.intention_p[cand.second]);
    }
    if (aug.dlg_move) {
        std::array<double, kMoveGroupCount> groups{};
        for (std::size_t c = 0; c < so.s1dist.size(); ++c) {
            groups[static_cast<std::size_t>(group_of(static_cast<MoveCategory>(c)))] +=
                so.s1dist[c];
        }
        fv.insert(fv.end(), groups.begin(), groups.end());
    }
    if (oracle_leak) fv.push_back(leak_label ? 1.0 : 0.0);
    return fv;
}

const OracleLabels& labels_for(const TurnRecord& rec, AgentId agent) {
    return agent == AgentId::A ? rec.labels_a : rec.labels_b;
}

std::string hash_config(const StagedConfig& c) {
    std::string s;
    auto add = [&s](const std::string& k, const std::string& v) {
        s += k;
        s += '=';
        s += v;
        s += ';';
    };
    add("aug", std::string(c.aug.status ? "S" : "") + (c.aug.knowledge ? "K" : "") +
                   (c.aug.intention ? "I" : "") + (c.aug.dlg_move ? "D" : ""));
    add("decay", std::to_string(c.features.recency_decay));
    add("stride", std::to_string(c.features.snapshot_stride));
    add("threshold", std::to_string(c.features.threshold));
    add("leak", c.features.oracle_leak ? "1" : "0");
    add("s1next", c.features.stage1_predicts_next ? "1" : "0");
    for (const Hyper* h : {&c.stage1, &c.stage2, &c.stage3}) {
        add("lr", std::to_string(h->lr));
        add("epochs", std::to_string(h->epochs));
        add("l2", std::to_string(h->l2));
        add("batch", std::to_string(h->batch));
        add("cw", h->class_weight ? "1" : "0");
    }
    add("seed", std::to_string(c.seed));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(s)));
    return std::string(buf);
}

}  // namespace

std::vector<std::string> stage1_layout() {
    std::vector<std::string> names;
    for (const char* spk : {"self", "partner"}) {
        for (std::size_t c = 0; c < kMoveCategoryCount; ++c) {
            names.push_back(std::string("cat_rec_") + spk + "_" + std::to_string(c));
        }
    }
    names.push_back("turn_norm");
    names.push_back("inquiry_from_partner");
    names.push_back("inquiry_to_partner");
    return names;
}

std::vector<std::string> stage2_node_layout() {
    std::vector<std::string> names = {
        "depth_norm",    "leaf",          "own_in_deg",     "rec_partner",
        "rec_self",      "cnt_p_stmt",    "cnt_p_inq",      "cnt_s_stmt",
        "cnt_s_inq",     "st_incomplete", "st_done_self",   "st_done_partner",
        "partner_lacks", "klb_cover",     "turn_norm",
    };
    for (std::size_t c = 0; c < kMoveCategoryCount; ++c) {
        names.push_back("s1_move_" + std::to_string(c));
    }
    return names;
}

std::vector<std::string> stage2_intention_layout(std::size_t n_nodes) {
    std::vector<std::string> names;
    for (std::size_t v = 0; v < n_nodes; ++v) {
        const std::string p = "n" + std::to_string(v) + "_";
        names.push_back(p + "rec_partner");
        names.push_back(p + "rec_self");
        names.push_back(p + "done");
        names.push_back(p + "done_partner");
        names.push_back(p + "tracked_intention");
    }
    for (std::size_t c = 0; c < kMoveCategoryCount; ++c) {
        names.push_back("s1_move_" + std::to_string(c));
    }
    names.push_back("turn_norm");
    return names;
}

std::vector<std::string> stage3_layout(const AugmentationSet& aug, bool oracle_leak) {
    std::vector<std::string> names = {
        "in_own_plan", "depth_u", "depth_v", "in_deg_u", "out_deg_u",
        "in_deg_v",    "out_deg_v", "leaf_u", "leaf_v",
    };
    for (const char* grp : {"dir", "inq", "stmt", "gen"}) {
        for (const char* tgt : {"u", "v", "pair"}) {
            names.push_back(std::string("cnt_") + grp + "_" + tgt);
        }
    }
    for (const char* tgt : {"u", "v", "pair"}) {
        names.push_back(std::string("rec_") + tgt);
    }
    names.push_back("partner_lacks_v");
    if (aug.status) {
        names.insert(names.end(), {"s2_status_v_0", "s2_status_v_1", "s2_status_v_2"});
    }
    if (aug.knowledge) names.push_back("s2_know_v");
    if (aug.intention) names.insert(names.end(), {"s2_int_u", "s2_int_v"});
    if (aug.dlg_move) {
        for (const char* grp : {"dir", "inq", "stmt", "gen"}) {
            names.push_back(std::string("s1_grp_") + grp);
        }
    }
    if (oracle_leak) names.push_back("oracle_leak");
    return names;
}

StagedModel train_staged(const std::vector<SessionLog>& corpus, const StagedConfig& config) {
    if (corpus.empty()) throw std::invalid_argument("train_staged: empty corpus");
    const std::size_t n_nodes = corpus.front().split.joint.node_count();
    for (const SessionLog& log : corpus) {
        if (log.split.joint.node_count() != n_nodes) {
            throw std::invalid_argument("train_staged: inconsistent node counts in corpus");
        }
    }

    StagedModel model;
    model.config = config;
    model.config_hash = hash_config(config);
    model.n_nodes = n_nodes;
    const FeatureParams& fp = config.features;

    // Stage 1: the partner's move category, from the hearer's side.
    {
        Dataset data;
        data.layout = stage1_layout();
        data.n_classes = kMoveCategoryCount;
        for (const SessionLog& log : corpus) {
            for (AgentId agent : {AgentId::A, AgentId::B}) {
                Featurizer fz(log, agent, fp);
                std::vector<FeatureVector> inputs;
                std::vector<int> cats;
                while (!fz.done()) {
                    fz.consume();
                    const TurnRecord& rec = fz.last_record();
                    if (rec.move && rec.move->speaker != agent) {
                        inputs.push_back(fz.stage1_at_turn());
                        cats.push_back(static_cast<int>(rec.move->category));
                    }
                }
                const std::size_t shift = fp.stage1_predicts_next ? 1 : 0;
                for (std::size_t i = 0; i + shift < inputs.size(); ++i) {
                    data.features.push_back(std::move(inputs[i]));
                    data.labels.push_back(cats[i + shift]);
                }
            }
        }
        Hyper h = config.stage1;
        h.seed = derive_seed(config.seed, "stage1");
        model.stage1_move =
            train(LinearModel::zeros("dialogue-move", data.layout, kMoveCategoryCount),
                  data, h).model;
        model.stage1_move.config_hash = model.config_hash;
    }

    // Stage 2: mental-state heads on top of the frozen stage 1.
    {
        Dataset know, stat, inten;
        know.layout = stage2_node_layout();
        know.n_classes = 2;
        stat.layout = stage2_node_layout();
        stat.n_classes = 3;
        inten.layout = stage2_intention_layout(n_nodes);
        inten.n_classes = n_nodes;
        for (const SessionLog& log : corpus) {
            for (AgentId agent : {AgentId::A, AgentId::B}) {
                Featurizer fz(log, agent, fp);
                for (std::size_t i = 0; i < log.turns.size(); ++i) {
                    fz.consume();
                    if (!is_snapshot(log, i, fp.snapshot_stride)) continue;
                    const OracleLabels& labels = labels_for(log.turns[i], agent);
                    FeatureVector s1 = predict(model.stage1_move, fz.stage1_at_turn());
                    for (NodeId v = 0; v < n_nodes; ++v) {
                        FeatureVector fv = fz.stage2_node_input(v, s1);
                        know.features.push_back(fv);
                        know.labels.push_back(labels.knowledge[v] ? 1 : 0);
                        stat.features.push_back(std::move(fv));
                        stat.labels.push_back(static_cast<int>(labels.status[v]));
                    }
                    inten.features.push_back(fz.stage2_intention_input(s1));
                    inten.labels.push_back(static_cast<int>(labels.intention));
                }
            }
        }
        Hyper h = config.stage2;
        h.seed = derive_seed(config.seed, "stage2-knowledge");
        model.knowledge =
            train(LinearModel::zeros("task-knowledge", know.layout, 2), know, h).model;
        h.seed = derive_seed(config.seed, "stage2-status");
        model.status = train(LinearModel::zeros("task-status", stat.layout, 3), stat, h).model;
        h.seed = derive_seed(config.seed, "stage2-intention");
        model.intention =
            train(LinearModel::zeros("task-intention", inten.layout, n_nodes), inten, h).model;
        model.knowledge.config_hash = model.config_hash;
        model.status.config_hash = model.config_hash;
        model.intention.config_hash = model.config_hash;
    }

    // Stage 3: missing-knowledge heads over the selected frozen outputs.
    {
        const std::vector<std::string> layout = stage3_layout(config.aug, fp.oracle_leak);
        Dataset own, partner;
        own.layout = layout;
        own.n_classes = 2;
        partner.layout = layout;
        partner.n_classes = 2;
        for (const SessionLog& log : corpus) {
            for (AgentId agent : {AgentId::A, AgentId::B}) {
                const auto own_cands = candidate_edges(log.split, agent, CandidateTask::Own);
                const auto partner_cands =
                    candidate_edges(log.split, agent, CandidateTask::Partner);
                Featurizer fz(log, agent, fp);
                FrozenOutputTracker tracker(&model, config.aug, n_nodes);
                for (std::size_t i = 0; i < log.turns.size(); ++i) {
                    fz.consume();
                    const StageOutputs& so = tracker.update(fz);
                    if (!is_snapshot(log, i, fp.snapshot_stride)) continue;
                    const OracleLabels& labels = labels_for(log.turns[i], agent);
                    for (const Edge& cand : own_cands) {
                        const bool y = labels.own_missing.count(cand) > 0;
                        own.features.push_back(
                            assemble_stage3(fz, cand, config.aug, so, fp.oracle_leak, y));
                        own.labels.push_back(y ? 1 : 0);
                    }
                    for (const Edge& cand : partner_cands) {
                        const bool y = labels.partner_missing.count(cand) > 0;
                        partner.features.push_back(
                            assemble_stage3(fz, cand, config.aug, so, fp.oracle_leak, y));
                        partner.labels.push_back(y ? 1 : 0);
                    }
                }
            }
        }
        Hyper h = config.stage3;
        h.seed = derive_seed(config.seed, "stage3-own");
        h.class_weight = true;  // own-missing positives are sparse
        model.own_missing = train(LinearModel::zeros("own-missing", layout, 2), own, h).model;
        h.seed = derive_seed(config.seed, "stage3-partner");
        h.class_weight = config.stage3.class_weight;
        model.partner_missing =
            train(LinearModel::zeros("partner-missing", layout, 2), partner, h).model;
        model.own_missing.config_hash = model.config_hash;
        model.partner_missing.config_hash = model.config_hash;
    }
    return model;
}

FeatureVector extract_features(const SessionLog& log, AgentId agent, int t, Edge candidate,
                               const AugmentationSet& aug, const FeatureParams& params,
                               const StagedModel* frozen) {
    if (t < 0 || static_cast<std::size_t>(t) >= log.turns.size()) {
        throw std::out_of_range("extract_features: turn out of range");
    }
    if (candidate.first >= log.split.joint.node_count() ||
        candidate.second >= log.split.joint.node_count()) {
        throw std::out_of_range("extract_features: unknown candidate");
    }
    Featurizer fz(log, agent, params);
    FrozenOutputTracker tracker(frozen, aug, log.split.joint.node_count());
    StageOutputs so;
    for (int i = 0; i <= t; ++i) {
        fz.consume();
        so = tracker.update(fz);
    }
    const OracleLabels& labels = labels_for(log.turns[static_cast<std::size_t>(t)], agent);
    const bool leak_label = labels.own_missing.count(candidate) > 0;
    return assemble_stage3(fz, candidate, aug, so, params.oracle_leak, leak_label);
}

PredictionTrace evaluate_over_time(const StagedModel& model, const SessionLog& log,
                                   AgentId agent, Stage3Task task) {
    if (log.split.joint.node_count() != model.n_nodes) {
        throw std::invalid_argument("evaluate_over_time: node count mismatch with model");
    }
    if (log.turns.empty()) throw std::invalid_argument("evaluate_over_time: empty session");
    PredictionTrace trace;
    trace.task = task;
    trace.agent = agent;
    trace.plan_id = log.plan_id;
    trace.threshold = model.config.features.threshold;
    trace.candidates = candidate_edges(
        log.split, agent,
        task == Stage3Task::OwnMissing ? CandidateTask::Own : CandidateTask::Partner);

    const LinearModel& head =
        task == Stage3Task::OwnMissing ? model.own_missing : model.partner_missing;
    const AugmentationSet& aug = model.config.aug;
    const FeatureParams& fp = model.config.features;

    Featurizer fz(log, agent, fp);
    FrozenOutputTracker tracker(&model, aug, model.n_nodes);
    for (std::size_t i = 0; i < log.turns.size(); ++i) {
        fz.consume();
        const StageOutputs& so = tracker.update(fz);
        const OracleLabels& labels = labels_for(log.turns[i], agent);
        std::vector<double> row;
        row.reserve(trace.candidates.size());
        for (const Edge& cand : trace.candidates) {
            const bool y = (task == Stage3Task::OwnMissing ? labels.own_missing
                                                           : labels.partner_missing)
                               .count(cand) > 0;
            row.push_back(predict(head, assemble_stage3(fz, cand, aug, so,
                                                        fp.oracle_leak, y))[0]);
        }
        trace.probs.push_back(std::move(row));
    }

    const OracleLabels& final_labels = labels_for(log.turns.back(), agent);
    const EdgeSet& truth_set = task == Stage3Task::OwnMissing ? final_labels.own_missing
                                                              : final_labels.partner_missing;
    trace.truth.reserve(trace.candidates.size());
    for (const Edge& cand : trace.candidates) {
        trace.truth.push_back(truth_set.count(cand) > 0);
    }
    return trace;
}

ToMEval evaluate_tom(const StagedModel& model, const SessionLog& log, AgentId agent) {
    if (log.split.joint.node_count() != model.n_nodes) {
        throw std::invalid_argument("evaluate_tom: node count mismatch with model");
    }
    if (log.turns.empty()) throw std::invalid_argument("evaluate_tom: empty session");
    ToMEval out;
    const std::size_t n = model.n_nodes;
    Featurizer fz(log, agent, model.config.features);
    for (std::size_t i = 0; i < log.turns.size(); ++i) {
        fz.consume();
        const OracleLabels& labels = labels_for(log.turns[i], agent);
        FeatureVector s1 = predict(model.stage1_move, fz.stage1_at_turn());
        auto ip = predict(model.intention, fz.stage2_intention_input(s1));
        out.intention_pred.push_back(static_cast<int>(
            std::max_element(ip.begin(), ip.end()) - ip.begin()));
        out.intention_true.push_back(static_cast<int>(labels.intention));
        for (NodeId v = 0; v < n; ++v) {
            FeatureVector fv = fz.stage2_node_input(v, s1);
            auto sp = predict(model.status, fv);
            out.status_pred.push_back(static_cast<int>(
                std::max_element(sp.begin(), sp.end()) - sp.begin()));
            out.status_true.push_back(static_cast<int>(labels.status[v]));
            out.knowledge_pred.push_back(predict(model.knowledge, fv)[0] >= 0.5 ? 1 : 0);
            out.knowledge_true.push_back(labels.knowledge[v] ? 1 : 0);
        }
    }
    return out;
}

}  // namespace planacq
