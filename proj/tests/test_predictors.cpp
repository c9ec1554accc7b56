#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "planacq/predictors.hpp"
#include "planacq/serialize.hpp"

using namespace planacq;

namespace {

std::vector<std::string> fake_layout(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
    return names;
}

Dataset random_dataset(Rng& rng, std::size_t n_examples, std::size_t n_features,
                       std::size_t n_classes) {
    Dataset d;
    d.layout = fake_layout(n_features);
    d.n_classes = n_classes;
    for (std::size_t i = 0; i < n_examples; ++i) {
        FeatureVector x(n_features);
        for (double& v : x) v = rng.real() * 2.0 - 1.0;
        d.features.push_back(std::move(x));
        d.labels.push_back(static_cast<int>(rng.below(n_classes)));
    }
    return d;
}

LinearModel random_model(Rng& rng, std::size_t n_features, std::size_t n_classes) {
    LinearModel m = LinearModel::zeros("test", fake_layout(n_features), n_classes);
    for (auto& row : m.weights) {
        for (double& w : row) w = rng.real() - 0.5;
    }
    for (double& b : m.bias) b = rng.real() - 0.5;
    return m;
}

// Independent oracle: central finite differences of the loss surface.
double loss_only(const LinearModel& m, const Dataset& d,
                 const std::vector<std::size_t>& idx, double l2,
                 const std::vector<double>& cw) {
    return loss_and_gradient(m, d, idx, l2, cw).loss;
}

double max_rel_grad_error(LinearModel model, const Dataset& data, double l2, double h) {
    std::vector<std::size_t> idx(data.features.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto cw = class_weights_for(data, false);
    LossGrad lg = loss_and_gradient(model, data, idx, l2, cw);

    double worst = 0.0;
    auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = loss_only(model, data, idx, l2, cw);
        param = keep - h;
        const double down = loss_only(model, data, idx, l2, cw);
        param = keep;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(analytic - fd) /
                           std::max({1.0, std::abs(analytic), std::abs(fd)});
        worst = std::max(worst, rel);
    };
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        for (std::size_t i = 0; i < model.weights[k].size(); ++i) {
            probe(model.weights[k][i], lg.grad_weights[k][i]);
        }
        probe(model.bias[k], lg.grad_bias[k]);
    }
    return worst;
}

std::vector<SessionLog> fixture_corpus(int n_sessions, std::uint64_t seed) {
    std::vector<SessionLog> corpus;
    Rng rng(seed);
    for (int i = 0; i < n_sessions; ++i) {
        KnowledgeSplit split = testing::fixture_split();
        Policy pa{PolicyKind::FullTelling, rng.next_u64()};
        Policy pb{PolicyKind::FullTelling, rng.next_u64()};
        SessionConfig config;
        config.max_turns = 40;
        config.seed = rng.next_u64();
        SessionLog log = run_session(split, pa, pb, config);
        log.plan_id = "fixture-" + std::to_string(i);
        corpus.push_back(std::move(log));
    }
    return corpus;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
    Rng rng(555);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n_features = 2 + rng.below(6);
        const std::size_t n_classes = 2 + rng.below(4);
        Dataset d = random_dataset(rng, 4 + rng.below(12), n_features, n_classes);
        LinearModel m = random_model(rng, n_features, n_classes);
        const double l2 = rng.chance(0.5) ? 0.01 : 0.0;
        CAPTURE(i);
        CHECK(max_rel_grad_error(m, d, l2, 1e-5) < 1e-4);
    }
}

TEST_CASE("predict on zero weights is maximally uncertain") {
    LinearModel binary = LinearModel::zeros("bin", fake_layout(4), 2);
    auto p = predict(binary, {1.0, -2.0, 3.0, 0.5});
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(0.5));

    LinearModel multi = LinearModel::zeros("multi", fake_layout(4), 35);
    auto q = predict(multi, {1.0, -2.0, 3.0, 0.5});
    REQUIRE(q.size() == 35);
    double sum = 0.0;
    for (double v : q) {
        CHECK(v == doctest::Approx(1.0 / 35.0));
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("raising a positively weighted feature raises the probability") {
    LinearModel m = LinearModel::zeros("bin", fake_layout(2), 2);
    m.weights[0][0] = 2.0;
    double low = predict(m, {0.0, 1.0})[0];
    double high = predict(m, {1.0, 1.0})[0];
    CHECK(high > low);
}

TEST_CASE("predict rejects dimension mismatches") {
    LinearModel m = LinearModel::zeros("bin", fake_layout(3), 2);
    CHECK_THROWS_AS(predict(m, {1.0}), std::invalid_argument);
}

TEST_CASE("two separable points train to perfect accuracy") {
    Dataset d;
    d.layout = fake_layout(2);
    d.n_classes = 2;
    d.features = {{1.0, 0.0}, {0.0, 1.0}};
    d.labels = {1, 0};
    Hyper h;
    h.lr = 0.5;
    h.epochs = 500;
    h.l2 = 0.0;
    h.seed = 9;
    TrainResult r = train(LinearModel::zeros("bin", d.layout, 2), d, h);
    CHECK((predict(r.model, d.features[0])[0] >= 0.5));
    CHECK((predict(r.model, d.features[1])[0] < 0.5));
    CHECK(r.final_loss < 0.3);
}

TEST_CASE("zero learning rate leaves weights untouched") {
    Rng rng(13);
    Dataset d = random_dataset(rng, 20, 4, 2);
    LinearModel init = random_model(rng, 4, 2);
    Hyper h;
    h.lr = 0.0;
    h.epochs = 50;
    h.seed = 3;
    TrainResult r = train(init, d, h);
    CHECK(r.model.weights == init.weights);
    CHECK(r.model.bias == init.bias);
}

TEST_CASE("training is deterministic per seed") {
    Rng rng(17);
    Dataset d = random_dataset(rng, 64, 5, 3);
    Hyper h;
    h.epochs = 40;
    h.seed = 1234;
    TrainResult a = train(LinearModel::zeros("m", d.layout, 3), d, h);
    TrainResult b = train(LinearModel::zeros("m", d.layout, 3), d, h);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.model.bias == b.model.bias);
    CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("diverging learning rates raise non-finite-loss") {
    Rng rng(19);
    Dataset d = random_dataset(rng, 16, 3, 2);
    Hyper h;
    h.lr = 1e300;
    h.epochs = 5;
    h.seed = 2;
    CHECK_THROWS_AS(train(LinearModel::zeros("m", d.layout, 2), d, h), std::runtime_error);
}

TEST_CASE("train rejects empty and mismatched datasets") {
    Dataset empty;
    empty.layout = fake_layout(2);
    Hyper h;
    CHECK_THROWS_AS(train(LinearModel::zeros("m", empty.layout, 2), empty, h),
                    std::invalid_argument);

    Rng rng(23);
    Dataset d = random_dataset(rng, 8, 3, 2);
    CHECK_THROWS_AS(train(LinearModel::zeros("m", fake_layout(5), 2), d, h),
                    std::invalid_argument);
}

TEST_CASE("class weights rebalance sparse positives") {
    Dataset d;
    d.layout = fake_layout(1);
    d.n_classes = 2;
    for (int i = 0; i < 9; ++i) {
        d.features.push_back({0.0});
        d.labels.push_back(0);
    }
    d.features.push_back({0.0});
    d.labels.push_back(1);
    auto flat = class_weights_for(d, false);
    CHECK(flat == std::vector<double>{1.0, 1.0});
    auto weighted = class_weights_for(d, true);
    CHECK(weighted[0] == doctest::Approx(10.0 / (2.0 * 9.0)));
    CHECK(weighted[1] == doctest::Approx(10.0 / (2.0 * 1.0)));
}

TEST_CASE("stage-3 feature vectors match their layout descriptor") {
    std::vector<SessionLog> corpus = fixture_corpus(2, 77);
    const SessionLog& log = corpus[0];
    Rng rng(31);
    AugmentationSet none;
    FeatureParams params;
    for (int i = 0; i < 100; ++i) {
        const int t = static_cast<int>(rng.below(log.turns.size()));
        const auto candidates = candidate_edges(
            log.split, AgentId::A, rng.chance(0.5) ? CandidateTask::Own : CandidateTask::Partner);
        const Edge cand = candidates[rng.below(candidates.size())];
        FeatureVector fv = extract_features(log, AgentId::A, t, cand, none, params, nullptr);
        REQUIRE(fv.size() == stage3_layout(none, params.oracle_leak).size());
        for (double v : fv) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("history features start at zero and count co-mentions") {
    std::vector<SessionLog> corpus = fixture_corpus(1, 78);
    const SessionLog& log = corpus[0];
    AugmentationSet none;
    FeatureParams params;
    const auto layout = stage3_layout(none, false);

    // Turn 0 carries A's first recipe statement; B's perspective sees a
    // partner statement co-mentioning the told pair.
    REQUIRE(log.turns[0].move.has_value());
    REQUIRE(log.turns[0].move->category == MoveCategory::StatementRecipe);
    const NodeId v = *log.split.joint.node_by_material(log.turns[0].move->slots[0].value);
    const NodeId u = *log.split.joint.node_by_material(log.turns[0].move->slots[1].value);

    FeatureVector fv = extract_features(log, AgentId::B, 0, Edge{u, v}, none, params, nullptr);
    auto at = [&](const std::string& name) {
        for (std::size_t i = 0; i < layout.size(); ++i) {
            if (layout[i] == name) return fv[i];
        }
        FAIL("missing feature ", name);
        return 0.0;
    };
    CHECK(at("cnt_stmt_pair") == doctest::Approx(1.0));  // one co-mention so far
    CHECK(at("cnt_inq_pair") == 0.0);
    CHECK(at("partner_lacks_v") == 0.0);

    // a candidate with unmentioned endpoints has untouched history features
    FeatureVector quiet =
        extract_features(log, AgentId::B, 0, Edge{1, 2}, none, params, nullptr);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].rfind("cnt_", 0) == 0 || layout[i].rfind("rec_", 0) == 0) {
            CHECK(quiet[i] == 0.0);
        }
    }
}

TEST_CASE("staged training freezes earlier stages") {
    std::vector<SessionLog> corpus = fixture_corpus(6, 99);
    StagedConfig config;
    config.aug.intention = true;
    config.aug.dlg_move = true;
    config.seed = 41;
    config.stage1.epochs = 30;
    config.stage2.epochs = 30;
    config.stage3.epochs = 30;

    StagedModel m1 = train_staged(corpus, config);

    StagedConfig shifted = config;
    shifted.stage3.lr = config.stage3.lr * 0.5;  // stage-3 hyper change only
    StagedModel m2 = train_staged(corpus, shifted);

    // stage-1 and stage-2 parameters are untouched by anything downstream
    auto params_equal = [](const LinearModel& x, const LinearModel& y) {
        return x.weights == y.weights && x.bias == y.bias;
    };
    CHECK(params_equal(m1.stage1_move, m2.stage1_move));
    CHECK(params_equal(m1.intention, m2.intention));
    CHECK(params_equal(m1.status, m2.status));
    CHECK(params_equal(m1.knowledge, m2.knowledge));
    CHECK_FALSE(params_equal(m1.own_missing, m2.own_missing));

    // training is deterministic end to end
    StagedModel m3 = train_staged(corpus, config);
    CHECK(staged_model_to_json(m1).dump() == staged_model_to_json(m3).dump());
}

TEST_CASE("augmentation config widens the stage-3 layout") {
    AugmentationSet none;
    AugmentationSet best;
    best.intention = true;
    best.dlg_move = true;
    const auto base = stage3_layout(none, false);
    const auto aug = stage3_layout(best, false);
    CHECK(aug.size() == base.size() + 2 + kMoveGroupCount);

    std::vector<SessionLog> corpus = fixture_corpus(4, 17);
    StagedConfig config;
    config.seed = 5;
    config.stage1.epochs = 10;
    config.stage2.epochs = 10;
    config.stage3.epochs = 10;
    StagedModel base_model = train_staged(corpus, config);
    CHECK(base_model.own_missing.layout == base);

    config.aug = best;
    StagedModel aug_model = train_staged(corpus, config);
    CHECK(aug_model.partner_missing.layout == aug);
    CHECK(aug_model.config_hash != base_model.config_hash);
}

TEST_CASE("evaluation traces cover every turn and candidate deterministically") {
    std::vector<SessionLog> corpus = fixture_corpus(4, 33);
    StagedConfig config;
    config.seed = 21;
    config.stage1.epochs = 20;
    config.stage2.epochs = 20;
    config.stage3.epochs = 20;
    StagedModel model = train_staged(corpus, config);

    const SessionLog& log = corpus[0];
    PredictionTrace own = evaluate_over_time(model, log, AgentId::A, Stage3Task::OwnMissing);
    CHECK(own.n_turns() == log.turns.size());
    CHECK(own.candidates.size() == 26);
    for (const auto& row : own.probs) {
        REQUIRE(row.size() == own.candidates.size());
        for (double p : row) {
            REQUIRE(p >= 0.0);
            REQUIRE(p <= 1.0);
        }
    }
    PredictionTrace again = evaluate_over_time(model, log, AgentId::A, Stage3Task::OwnMissing);
    CHECK(own.probs == again.probs);
}

TEST_CASE("oracle leak pushes partner-missing probabilities onto the truth") {
    std::vector<SessionLog> corpus = fixture_corpus(8, 55);
    StagedConfig config;
    config.seed = 61;
    config.features.oracle_leak = true;
    config.stage1.epochs = 10;
    config.stage2.epochs = 10;
    config.stage3.epochs = 300;
    config.stage3.lr = 0.5;
    StagedModel model = train_staged(corpus, config);

    PredictionTrace trace =
        evaluate_over_time(model, corpus[0], AgentId::A, Stage3Task::PartnerMissing);
    const auto& last = trace.probs.back();
    for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
        const bool missing = testing::fixture_split().partial_b.edges.count(
                                 trace.candidates[j]) == 0;
        CAPTURE(j);
        CHECK((last[j] > 0.5) == missing);
    }
}

TEST_CASE("model JSON round-trips") {
    std::vector<SessionLog> corpus = fixture_corpus(3, 44);
    StagedConfig config;
    config.seed = 777;
    config.aug.knowledge = true;
    config.stage1.epochs = 5;
    config.stage2.epochs = 5;
    config.stage3.epochs = 5;
    StagedModel model = train_staged(corpus, config);
    Json j = staged_model_to_json(model);
    StagedModel back = staged_model_from_json(j);
    CHECK(staged_model_to_json(back).dump() == j.dump());

    PredictionTrace t1 = evaluate_over_time(model, corpus[0], AgentId::B,
                                            Stage3Task::PartnerMissing);
    PredictionTrace t2 = evaluate_over_time(back, corpus[0], AgentId::B,
                                            Stage3Task::PartnerMissing);
    CHECK(t1.probs == t2.probs);
}
