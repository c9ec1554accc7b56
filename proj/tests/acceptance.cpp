// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier end-to-end checks than the unit suites; expected
// runtime is a few minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "metric_oracle.hpp"
#include "planacq/experiment.hpp"

using namespace planacq;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", index, what.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// --- criterion 1: graph invariants over 10^4 seeded pairs ---------------------

void criterion_graph_invariants() {
    auto start = std::chrono::steady_clock::now();
    Rng rng(424242);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        JointPlan plan = generate_joint_plan(2 + rng.below(11), 1 + rng.below(3), rng.next_u64());
        KnowledgeSplit split = split_plan(plan, rng.real(), rng.next_u64());
        if (!validate_joint_plan(plan).empty()) ++bad;
        EdgeSet unioned = split.partial_a.edges;
        unioned.insert(split.partial_b.edges.begin(), split.partial_b.edges.end());
        if (unioned != plan.edge_set()) ++bad;
    }
    double elapsed = seconds_since(start);
    report(1, bad == 0 && elapsed < 10.0,
           "graph invariants on 10^4 seeded (plan, split) pairs; " + std::to_string(bad) +
               " violations, " + fmt(elapsed) + "s (< 10s)");
}

// --- criterion 2: fixture fidelity --------------------------------------------

void criterion_fixture() {
    KnowledgeSplit split = testing::fixture_split();
    EdgeSet own_a = missing_edges(split, AgentId::A).edges;

    BeliefState a = BeliefState::initial(split, AgentId::A);
    BeliefState b = BeliefState::initial(split, AgentId::B);
    OracleLabels labels = oracle_labels(split, a, b);

    const EdgeSet want_own{{3, 2}, {4, 2}};      // d->c, e->c
    const EdgeSet want_partner{{4, 3}, {5, 3}};  // e->d, f->d
    bool ok = own_a == want_own && labels.own_missing == want_own &&
              labels.partner_missing == want_partner;
    report(2, ok, "fixture missing edges: A misses {d->c, e->c}, partner view {e->d, f->d}");
}

// --- criterion 3: full-telling convergence -------------------------------------

void criterion_convergence() {
    Rng rng(1303);
    int converged = 0;
    for (int i = 0; i < 100; ++i) {
        JointPlan plan = generate_joint_plan(2 + rng.below(11), 2, rng.next_u64());
        KnowledgeSplit split = split_plan(plan, rng.real(), rng.next_u64());
        Policy pa{PolicyKind::FullTelling, rng.next_u64()};
        Policy pb{PolicyKind::FullTelling, rng.next_u64()};
        SessionConfig config;
        config.max_turns = 500;
        config.seed = rng.next_u64();
        SessionLog log = run_session(split, pa, pb, config);

        BeliefState sa = BeliefState::initial(split, AgentId::A);
        BeliefState sb = BeliefState::initial(split, AgentId::B);
        for (const TurnRecord& rec : log.turns) {
            if (rec.move) {
                sa = apply_move(sa, *rec.move, plan);
                sb = apply_move(sb, *rec.move, plan);
            }
            if (rec.event) {
                sa = apply_event(sa, *rec.event, plan);
                sb = apply_event(sb, *rec.event, plan);
            }
        }
        const std::size_t bound = 2 * (plan.edges().size() + plan.node_count()) + 4;
        if (log.outcome == SessionOutcome::Completed && sa.known_edges == plan.edge_set() &&
            sb.known_edges == plan.edge_set() && log.turns.size() <= bound) {
            ++converged;
        }
    }
    report(3, converged == 100,
           "full-telling convergence within 2(|E|+|V|)+4 turns: " +
               std::to_string(converged) + "/100 plans");
}

// --- criterion 4: metric oracle equivalence ------------------------------------

void criterion_metric_oracle() {
    Rng rng(4444);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        PredictionTrace trace = testing::random_trace(rng);
        worst = std::max(worst, std::abs(mind_changes(trace, 0.5) -
                                         testing::oracle_mind_changes(trace, 0.5)));
        worst = std::max(worst, std::abs(confidence_change(trace) -
                                         testing::oracle_confidence_change(trace)));
        std::vector<EdgeEvalResult> results;
        for (int s = 0; s < 3; ++s) {
            results.push_back(end_of_session_result(testing::random_trace(rng)));
        }
        worst = std::max(worst, std::abs(per_edge_f1(results) -
                                         testing::oracle_per_edge_f1(results)));
        worst = std::max(worst, std::abs(per_task_f1(results) -
                                         testing::oracle_per_task_f1(results)));
    }
    PredictionTrace hand;
    hand.threshold = 0.5;
    hand.candidates = {Edge{0, 1}};
    hand.truth = {true};
    for (double p : {0.3, 0.6, 0.55, 0.4}) hand.probs.push_back({p});
    const bool hand_ok = mind_changes(hand, 0.5) == 2.0 &&
                         std::abs(confidence_change(hand) - 0.5) < 1e-12;
    report(4, worst < 1e-12 && hand_ok,
           "metrics vs brute-force recomputation on 100 random traces, max |diff| = " +
               fmt(worst) + "; hand case [0.3,0.6,0.55,0.4] -> 2 flips, 0.5 drift");
}

// --- criterion 5: gradient check ------------------------------------------------

void criterion_gradients() {
    Rng rng(5555);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t n_features = 2 + rng.below(6);
        const std::size_t n_classes = 2 + rng.below(4);
        Dataset d;
        for (std::size_t f = 0; f < n_features; ++f) d.layout.push_back("f" + std::to_string(f));
        d.n_classes = n_classes;
        const std::size_t n = 4 + rng.below(10);
        for (std::size_t k = 0; k < n; ++k) {
            FeatureVector x(n_features);
            for (double& v : x) v = rng.real() * 2.0 - 1.0;
            d.features.push_back(std::move(x));
            d.labels.push_back(static_cast<int>(rng.below(n_classes)));
        }
        LinearModel m = LinearModel::zeros("probe", d.layout, n_classes);
        for (auto& row : m.weights) {
            for (double& w : row) w = rng.real() - 0.5;
        }
        for (double& bval : m.bias) bval = rng.real() - 0.5;

        std::vector<std::size_t> idx(n);
        for (std::size_t k = 0; k < n; ++k) idx[k] = k;
        const double l2 = 0.01;
        const auto cw = class_weights_for(d, false);
        LossGrad lg = loss_and_gradient(m, d, idx, l2, cw);
        const double h = 1e-5;
        auto probe = [&](double& param, double analytic) {
            const double keep = param;
            param = keep + h;
            const double up = loss_and_gradient(m, d, idx, l2, cw).loss;
            param = keep - h;
            const double down = loss_and_gradient(m, d, idx, l2, cw).loss;
            param = keep;
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(analytic - fd) /
                                        std::max({1.0, std::abs(analytic), std::abs(fd)}));
        };
        for (std::size_t k = 0; k < m.weights.size(); ++k) {
            for (std::size_t f = 0; f < m.weights[k].size(); ++f) {
                probe(m.weights[k][f], lg.grad_weights[k][f]);
            }
            probe(m.bias[k], lg.grad_bias[k]);
        }
    }
    report(5, worst < 1e-4,
           "analytic vs finite-difference gradients on 50 instances, max rel err = " +
               fmt(worst) + " (< 1e-4)");
}

// --- criteria 6, 7, 9: the synthetic benchmark ---------------------------------

struct BenchRun {
    StagedModel base;
    StagedModel augmented;
    std::vector<SessionLog> test;
};

StagedConfig bench_config(std::uint64_t seed, bool augmented) {
    StagedConfig config;
    config.seed = seed;
    if (augmented) {
        config.aug.intention = true;
        config.aug.dlg_move = true;
    }
    return config;
}

void run_benchmark() {
    auto start = std::chrono::steady_clock::now();
    const int n_seeds = 5;
    std::vector<BenchRun> runs;
    std::size_t replay_failures = 0, n_logs = 0;

    double own_sum = 0.0, partner_sum = 0.0;
    double crit6_elapsed = 0.0;

    for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t seed = derive_seed(7777, "bench-seed", s);
        BenchRun run;

        GenArgs gen;
        gen.n_plans = 200;
        gen.n_nodes = 8;
        gen.max_ingredients = 2;
        gen.overlap = 0.4;
        gen.seed = seed;
        std::vector<SessionLog> sessions;
        for (int i = 0; i < gen.n_plans; ++i) {
            PlanRecord rec = make_plan_record(gen, i);
            const std::uint64_t session_seed = derive_seed(rec.split.seed, "session", 0);
            Policy pa = make_policy("proactive", derive_seed(session_seed, "policy-a"));
            Policy pb = make_policy("reactive", derive_seed(session_seed, "policy-b"));
            SessionLog log = simulate_plan(rec, pa, pb, 16, session_seed);
            ++n_logs;
            if (!replay(log).verified) ++replay_failures;
            sessions.push_back(std::move(log));
        }

        SplitCorpus corpus = split_corpus(sessions, 0.3, seed);
        run.test = corpus.test;
        run.base = train_staged(corpus.train, bench_config(seed, false));

        MetricReport own =
            evaluate_traces(traces_for(run.base, run.test, Stage3Task::OwnMissing), false);
        MetricReport partner =
            evaluate_traces(traces_for(run.base, run.test, Stage3Task::PartnerMissing), false);
        own_sum += own.per_task_f1;
        partner_sum += partner.per_task_f1;
        crit6_elapsed = seconds_since(start);

        run.augmented = train_staged(corpus.train, bench_config(seed, true));
        runs.push_back(std::move(run));
    }

    const double own_mean = own_sum / n_seeds;
    const double partner_mean = partner_sum / n_seeds;
    const double margin = partner_mean - own_mean;
    report(6, margin >= 0.15 && crit6_elapsed < 300.0,
           "task ordering: mean per-task F1 partner-missing " + fmt(partner_mean) +
               " vs own-missing " + fmt(own_mean) + ", margin " + fmt(margin) +
               " (>= 0.15); " + fmt(crit6_elapsed) + "s (< 300s)");

    int wins = 0;
    std::string detail;
    for (int s = 0; s < n_seeds; ++s) {
        const BenchRun& run = runs[s];
        MetricReport base = evaluate_traces(
            traces_for(run.base, run.test, Stage3Task::PartnerMissing), false);
        MetricReport aug = evaluate_traces(
            traces_for(run.augmented, run.test, Stage3Task::PartnerMissing), false);
        const bool f1_ok = aug.per_edge_f1 >= base.per_edge_f1;
        const bool mind_ok = aug.mind_changes < base.mind_changes;
        const bool conf_ok = aug.confidence_change < base.confidence_change;
        if (f1_ok && mind_ok && conf_ok) ++wins;
        detail += std::string("\n    seed ") + std::to_string(s) +
                  (f1_ok && mind_ok && conf_ok ? " pass" : " fail") + ": f1 " +
                  fmt(aug.per_edge_f1) + " vs " + fmt(base.per_edge_f1) + ", mind " +
                  fmt(aug.mind_changes) + " vs " + fmt(base.mind_changes) + ", conf " +
                  fmt(aug.confidence_change) + " vs " + fmt(base.confidence_change);
    }
    report(7, wins >= 4,
           "augmentation helps and stabilizes in " + std::to_string(wins) +
               "/5 seeds (need >= 4)" + detail);

    report(9, replay_failures == 0,
           "replay verification on " + std::to_string(n_logs) + " emitted session logs, " +
               std::to_string(replay_failures) + " divergences");
}

// --- criterion 8: byte-identical pipeline rerun ---------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    fs::path root = fs::temp_directory_path() / "planacq_acceptance";
    fs::remove_all(root);
    auto run_pipeline = [&](const fs::path& dir) {
        fs::create_directories(dir);
        GenArgs gen;
        gen.n_plans = 12;
        gen.n_nodes = 6;
        gen.overlap = 0.4;
        gen.seed = 99;
        gen.out = (dir / "plans.jsonl").string();
        cmd_gen(gen);
        SimArgs sim;
        sim.plans_path = gen.out;
        sim.max_turns = 16;
        sim.out = (dir / "sessions.jsonl").string();
        cmd_simulate(sim);
        TrainArgs train;
        train.sessions_path = sim.out;
        train.config.seed = 99;
        train.config.stage1.epochs = 40;
        train.config.stage2.epochs = 40;
        train.config.stage3.epochs = 40;
        train.out = (dir / "model.json").string();
        cmd_train(train);
        EvalArgs eval;
        eval.sessions_path = sim.out;
        eval.model_path = train.out;
        eval.out_report = (dir / "report.csv").string();
        eval.out_curves = (dir / "curves.csv").string();
        cmd_eval(eval);
    };
    run_pipeline(root / "one");
    run_pipeline(root / "two");
    bool ok = true;
    for (const char* name : {"plans.jsonl", "sessions.jsonl", "model.json", "report.csv",
                             "curves.csv"}) {
        if (slurp(root / "one" / name) != slurp(root / "two" / name)) ok = false;
    }
    fs::remove_all(root);
    report(8, ok, "full pipeline rerun reproduces plans/sessions/model/report byte-identically");
}

}  // namespace

int main() {
    criterion_graph_invariants();
    criterion_fixture();
    criterion_convergence();
    criterion_metric_oracle();
    criterion_gradients();
    run_benchmark();
    criterion_determinism();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
