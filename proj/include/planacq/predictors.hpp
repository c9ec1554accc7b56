#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planacq/session.hpp"

namespace planacq {

using FeatureVector = std::vector<double>;

struct Hyper {
    double lr = 0.1;
    int epochs = 200;
    double l2 = 1e-4;
    int batch = 32;
    std::uint64_t seed = 0;
    bool class_weight = false;  // inverse-frequency weighting in the loss
};

// Single linear head: one weight row with a sigmoid for binary tasks,
// a row per class with a softmax otherwise.
struct LinearModel {
    std::string task;
    std::vector<std::string> layout;
    std::vector<std::vector<double>> weights;  // [classes][features]
    std::vector<double> bias;                  // [classes]
    std::string config_hash;
    std::uint64_t seed = 0;

    bool binary() const { return weights.size() == 1; }
    std::size_t n_features() const { return layout.size(); }

    static LinearModel zeros(std::string task, std::vector<std::string> layout,
                             std::size_t n_classes);
};

struct Dataset {
    std::vector<std::string> layout;
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    std::size_t n_classes = 2;
};

std::vector<double> predict(const LinearModel& model, const FeatureVector& fv);

struct LossGrad {
    double loss = 0.0;
    std::vector<std::vector<double>> grad_weights;
    std::vector<double> grad_bias;
};

// Mean cross-entropy over the given examples plus an L2 term, with its
// analytic gradient. Shared by training and the finite-difference checks.
LossGrad loss_and_gradient(const LinearModel& model, const Dataset& data,
                           const std::vector<std::size_t>& indices, double l2,
                           const std::vector<double>& class_weights);

std::vector<double> class_weights_for(const Dataset& data, bool enabled);

struct TrainResult {
    LinearModel model;
    double final_loss = 0.0;
};

TrainResult train(LinearModel model, const Dataset& data, const Hyper& hyper);

// --- staged model -----------------------------------------------------------

struct AugmentationSet {
    bool status = false;
    bool knowledge = false;
    bool intention = false;
    bool dlg_move = false;

    bool operator==(const AugmentationSet&) const = default;
};

struct FeatureParams {
    double recency_decay = 0.9;
    int snapshot_stride = 2;    // turns between stage-2/3 training snapshots
    double threshold = 0.5;     // decision threshold for edge predictions
    bool oracle_leak = false;   // append the label itself; sanity ceiling only
    bool stage1_predicts_next = false;  // current-turn classification unless set
};

struct StagedConfig {
    AugmentationSet aug;
    FeatureParams features;
    Hyper stage1;
    Hyper stage2;
    Hyper stage3;
    std::uint64_t seed = 0;

    // The own-missing head always rebalances its sparse positives; this flag
    // extends the same weighting to the partner head.
    StagedConfig() {
        stage3.class_weight = true;
        stage1.l2 = stage2.l2 = stage3.l2 = 5e-3;
    }
};

struct StagedModel {
    LinearModel stage1_move;
    LinearModel intention;
    LinearModel status;
    LinearModel knowledge;
    LinearModel own_missing;
    LinearModel partner_missing;
    StagedConfig config;
    std::string config_hash;
    std::size_t n_nodes = 0;
};

enum class Stage3Task : std::uint8_t { OwnMissing, PartnerMissing };
const char* to_string(Stage3Task t);

std::vector<std::string> stage1_layout();
std::vector<std::string> stage2_node_layout();      // status / knowledge heads
std::vector<std::string> stage2_intention_layout(std::size_t n_nodes);
std::vector<std::string> stage3_layout(const AugmentationSet& aug, bool oracle_leak);

// Stage 1 learns the partner's move category, stage 2 the three mental-state
// tasks, stage 3 the two missing-knowledge tasks; each stage trains against
// the earlier stages' frozen outputs.
StagedModel train_staged(const std::vector<SessionLog>& corpus, const StagedConfig& config);

// Per-turn features for one edge candidate, matching stage3_layout. `frozen`
// supplies stage-1/2 outputs and may be null when no augmentation is active.
FeatureVector extract_features(const SessionLog& log, AgentId agent, int t, Edge candidate,
                               const AugmentationSet& aug, const FeatureParams& params,
                               const StagedModel* frozen);

struct PredictionTrace {
    Stage3Task task = Stage3Task::OwnMissing;
    AgentId agent = AgentId::A;
    std::string plan_id;
    std::vector<Edge> candidates;
    std::vector<bool> truth;                  // initial missing-edge labels
    std::vector<std::vector<double>> probs;   // [turn][candidate]
    double threshold = 0.5;

    std::size_t n_turns() const { return probs.size(); }
};

PredictionTrace evaluate_over_time(const StagedModel& model, const SessionLog& log,
                                   AgentId agent, Stage3Task task);

// Stage-2 evaluation on one session: per-turn predictions with their oracle
// labels, used for the mental-state report rows.
struct ToMEval {
    std::vector<int> intention_pred, intention_true;          // per turn
    std::vector<int> status_pred, status_true;                // per (turn, node)
    std::vector<int> knowledge_pred, knowledge_true;          // per (turn, node)
};

ToMEval evaluate_tom(const StagedModel& model, const SessionLog& log, AgentId agent);

}  // namespace planacq
