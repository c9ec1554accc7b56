#include "planacq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "planacq/rng.hpp"

namespace planacq {

namespace {

std::string plan_id_for(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "plan-%06d", index);
    return buf;
}

double micro_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty()) return 1.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double binary_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && truth[i] == 1) ++tp;
        else if (pred[i] == 1) ++fp;
        else if (truth[i] == 1) ++fn;
    }
    return f1_from_counts(tp, fp, fn);
}

}  // namespace

PlanRecord make_plan_record(const GenArgs& args, int index) {
    PlanRecord rec;
    rec.id = plan_id_for(index);
    const std::uint64_t plan_seed = derive_seed(args.seed, "plan", index);
    JointPlan plan = generate_joint_plan(args.n_nodes, args.max_ingredients, plan_seed);
    rec.split = split_plan(plan, args.overlap, derive_seed(args.seed, "split", index));
    return rec;
}

GenSummary cmd_gen(const GenArgs& args) {
    if (args.n_plans < 1) throw std::invalid_argument("--plans must be >= 1");
    GenSummary summary;
    std::string out;
    SlotVocabulary vocab;
    auto merge_unique = [](std::vector<std::string>& dst, const std::vector<std::string>& src) {
        for (const std::string& s : src) {
            if (std::find(dst.begin(), dst.end(), s) == dst.end()) dst.push_back(s);
        }
        std::sort(dst.begin(), dst.end());
    };
    for (int i = 0; i < args.n_plans; ++i) {
        PlanRecord rec = make_plan_record(args, i);
        summary.total_nodes += rec.split.joint.node_count();
        summary.total_edges += rec.split.joint.edges().size();
        if (!args.vocab_out.empty()) {
            SlotVocabulary v = SlotVocabulary::from_plan(rec.split.joint);
            if (i == 0) vocab.materials = v.materials;
            merge_unique(vocab.tools, v.tools);
            merge_unique(vocab.mines, v.mines);
        }
        out += plan_record_to_json(rec).dump();
        out += '\n';
    }
    summary.n_plans = args.n_plans;
    write_text_atomic(args.out, out);
    if (!args.vocab_out.empty()) {
        write_text_atomic(args.vocab_out, vocabulary_to_json(vocab).dump(2) + "\n");
    }
    return summary;
}

Policy make_policy(const std::string& name, std::uint64_t seed) {
    auto kind = policy_kind_from_string(name);
    if (!kind) throw std::invalid_argument("unknown policy: " + name);
    Policy p;
    p.kind = *kind;
    p.rng_seed = seed;
    return p;
}

SessionLog simulate_plan(const PlanRecord& record, const Policy& policy_a,
                         const Policy& policy_b, int max_turns, std::uint64_t session_seed) {
    SessionConfig config;
    config.max_turns = max_turns;
    config.seed = session_seed;
    SessionLog log = run_session(record.split, policy_a, policy_b, config);
    log.plan_id = record.id;
    return log;
}

SimSummary cmd_simulate(const SimArgs& args) {
    if (args.max_turns < 1) throw std::invalid_argument("--max-turns must be >= 1");
    if (args.repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
    std::vector<PlanRecord> plans = read_plans(args.plans_path);

    SimSummary summary;
    std::string out;
    for (const PlanRecord& rec : plans) {
        for (int r = 0; r < args.repeats; ++r) {
            const std::uint64_t session_seed =
                derive_seed(rec.split.seed ^ args.seed, "session", r);
            Policy pa = make_policy(args.policy_a, derive_seed(session_seed, "policy-a"));
            Policy pb = make_policy(args.policy_b, derive_seed(session_seed, "policy-b"));
            SessionLog log = simulate_plan(rec, pa, pb, args.max_turns, session_seed);
            ReplayResult check = replay(log);
            if (!check.verified) {
                throw std::runtime_error("replay divergence in " + rec.id + " at turn " +
                                         std::to_string(check.divergence_turn) + ": " +
                                         check.detail);
            }
            if (log.outcome == SessionOutcome::Completed) ++summary.n_completed;
            ++summary.n_sessions;
            out += session_to_json(log).dump();
            out += '\n';
        }
    }
    write_text_atomic(args.out, out);
    return summary;
}

SplitCorpus split_corpus(const std::vector<SessionLog>& sessions, double test_fraction,
                         std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test fraction must be in [0,1)");
    }
    std::vector<std::string> plan_ids;
    for (const SessionLog& log : sessions) {
        if (std::find(plan_ids.begin(), plan_ids.end(), log.plan_id) == plan_ids.end()) {
            plan_ids.push_back(log.plan_id);
        }
    }
    Rng rng(derive_seed(seed, "plan-split"));
    rng.shuffle(plan_ids);
    const std::size_t n_test =
        static_cast<std::size_t>(test_fraction * static_cast<double>(plan_ids.size()) + 0.5);
    std::set<std::string> test_ids(plan_ids.end() - n_test, plan_ids.end());

    SplitCorpus out;
    out.test_plan_ids.assign(test_ids.begin(), test_ids.end());
    for (const SessionLog& log : sessions) {
        (test_ids.count(log.plan_id) ? out.test : out.train).push_back(log);
    }
    return out;
}

void cmd_train(const TrainArgs& args) {
    std::vector<SessionLog> sessions = read_sessions(args.sessions_path);
    if (sessions.empty()) throw std::runtime_error("no sessions in " + args.sessions_path);
    SplitCorpus corpus = split_corpus(sessions, args.test_fraction, args.config.seed);
    if (corpus.train.empty()) throw std::runtime_error("empty training split");

    StagedModel model = train_staged(corpus.train, args.config);
    Json j = staged_model_to_json(model);
    j["test_plans"] = corpus.test_plan_ids;
    write_text_atomic(args.out, j.dump(2) + "\n");
}

std::vector<PredictionTrace> traces_for(const StagedModel& model,
                                        const std::vector<SessionLog>& sessions,
                                        Stage3Task task) {
    std::vector<PredictionTrace> traces;
    traces.reserve(sessions.size() * 2);
    for (const SessionLog& log : sessions) {
        for (AgentId agent : {AgentId::A, AgentId::B}) {
            traces.push_back(evaluate_over_time(model, log, agent, task));
        }
    }
    return traces;
}

std::vector<ReportRow> evaluate_model(const StagedModel& model,
                                      const std::vector<SessionLog>& sessions,
                                      const std::string& task_filter) {
    std::vector<ReportRow> rows;
    auto wants = [&](const std::string& task) {
        return task_filter.empty() || task_filter == task;
    };

    for (Stage3Task task : {Stage3Task::OwnMissing, Stage3Task::PartnerMissing}) {
        if (!wants(to_string(task))) continue;
        std::vector<PredictionTrace> traces = traces_for(model, sessions, task);
        MetricReport report = evaluate_traces(traces, false);
        ReportRow row;
        row.config = model.config_hash;
        row.task = to_string(task);
        row.per_edge_f1 = report.per_edge_f1;
        row.per_task_f1 = report.per_task_f1;
        row.mind_changes = report.mind_changes;
        row.confidence_change = report.confidence_change;
        row.n_sessions = sessions.size();
        row.seed = model.config.seed;
        rows.push_back(std::move(row));
    }

    struct ToMAgg {
        std::vector<double> per_session;
        std::vector<int> pred, truth;
        bool f1 = false;
    };
    std::map<std::string, ToMAgg> tom;
    tom["intention"].f1 = false;
    tom["status"].f1 = false;
    tom["knowledge"].f1 = true;
    bool any_tom = wants("intention") || wants("status") || wants("knowledge");
    if (any_tom) {
        for (const SessionLog& log : sessions) {
            for (AgentId agent : {AgentId::A, AgentId::B}) {
                ToMEval ev = evaluate_tom(model, log, agent);
                tom["intention"].per_session.push_back(
                    micro_accuracy(ev.intention_pred, ev.intention_true));
                tom["status"].per_session.push_back(
                    micro_accuracy(ev.status_pred, ev.status_true));
                tom["knowledge"].per_session.push_back(
                    binary_f1(ev.knowledge_pred, ev.knowledge_true));
                auto append = [](std::vector<int>& dst, const std::vector<int>& src) {
                    dst.insert(dst.end(), src.begin(), src.end());
                };
                append(tom["intention"].pred, ev.intention_pred);
                append(tom["intention"].truth, ev.intention_true);
                append(tom["status"].pred, ev.status_pred);
                append(tom["status"].truth, ev.status_true);
                append(tom["knowledge"].pred, ev.knowledge_pred);
                append(tom["knowledge"].truth, ev.knowledge_true);
            }
        }
        for (const char* task : {"intention", "status", "knowledge"}) {
            if (!wants(task)) continue;
            const ToMAgg& agg = tom[task];
            ReportRow row;
            row.config = model.config_hash;
            row.task = task;
            row.per_edge_f1 = agg.f1 ? binary_f1(agg.pred, agg.truth)
                                     : micro_accuracy(agg.pred, agg.truth);
            row.per_task_f1 =
                agg.per_session.empty()
                    ? 1.0
                    : std::accumulate(agg.per_session.begin(), agg.per_session.end(), 0.0) /
                          static_cast<double>(agg.per_session.size());
            row.n_sessions = sessions.size();
            row.seed = model.config.seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void cmd_eval(const EvalArgs& args) {
    std::ifstream model_file(args.model_path);
    if (!model_file) throw std::runtime_error("cannot open " + args.model_path);
    Json mj = Json::parse(model_file);
    StagedModel model = staged_model_from_json(mj);
    std::set<std::string> test_ids;
    if (mj.contains("test_plans")) {
        for (const auto& id : mj.at("test_plans")) test_ids.insert(id.get<std::string>());
    }

    std::vector<SessionLog> sessions = read_sessions(args.sessions_path);
    std::vector<SessionLog> eval_set;
    for (SessionLog& log : sessions) {
        if (test_ids.empty() || test_ids.count(log.plan_id)) eval_set.push_back(std::move(log));
    }
    if (eval_set.empty()) throw std::runtime_error("no sessions selected for evaluation");

    std::vector<ReportRow> rows = evaluate_model(model, eval_set, args.task_filter);
    std::string report = "config,task,per_edge_f1,per_task_f1,mind_changes,"
                         "confidence_change,n_sessions,seed\n";
    for (const ReportRow& row : rows) {
        report += row.config + ',' + row.task + ',' + format_double(row.per_edge_f1) + ',' +
                  format_double(row.per_task_f1) + ',';
        report += row.mind_changes ? format_double(*row.mind_changes) : std::string();
        report += ',';
        report += row.confidence_change ? format_double(*row.confidence_change) : std::string();
        report += ',' + std::to_string(row.n_sessions) + ',' + std::to_string(row.seed) + '\n';
    }
    write_text_atomic(args.out_report, report);

    if (!args.out_curves.empty()) {
        std::string curves = "turn,metric,value,n_sessions_alive\n";
        for (Stage3Task task : {Stage3Task::OwnMissing, Stage3Task::PartnerMissing}) {
            if (!args.task_filter.empty() && args.task_filter != to_string(task)) continue;
            std::vector<PredictionTrace> traces = traces_for(model, eval_set, task);
            TimeCurves tc = cross_time_curves(traces);
            std::vector<std::vector<double>> mind_cum, conf_cum;
            for (const auto& tr : traces) {
                mind_cum.push_back(mind_changes_series(tr, tr.threshold));
                conf_cum.push_back(confidence_change_series(tr));
            }
            const std::string prefix = std::string(to_string(task)) + ".";
            for (std::size_t t = 0; t < tc.per_edge_f1.size(); ++t) {
                auto emit = [&](const std::string& metric, double value) {
                    curves += std::to_string(t) + ',' + prefix + metric + ',' +
                              format_double(value) + ',' +
                              std::to_string(tc.n_sessions_alive[t]) + '\n';
                };
                emit("per_edge_f1", tc.per_edge_f1[t]);
                emit("per_task_f1", tc.per_task_f1[t]);
                double mind = 0.0, conf = 0.0;
                std::size_t alive = 0;
                for (std::size_t i = 0; i < traces.size(); ++i) {
                    if (t >= traces[i].n_turns()) continue;
                    mind += mind_cum[i][t];
                    conf += conf_cum[i][t];
                    ++alive;
                }
                if (alive > 0) {
                    mind /= static_cast<double>(alive);
                    conf /= static_cast<double>(alive);
                }
                emit("mind_changes", mind);
                emit("confidence_change", conf);
            }
        }
        write_text_atomic(args.out_curves, curves);
    }
}

void cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    struct Key {
        std::string config, task;
        bool operator<(const Key& o) const {
            return std::tie(config, task) < std::tie(o.config, o.task);
        }
    };
    struct Agg {
        std::vector<double> edge, task_f1, mind, conf;
    };
    std::map<Key, Agg> groups;

    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            std::stringstream ss(line);
            std::string col;
            while (std::getline(ss, col, ',')) cols.push_back(col);
            cols.resize(8);
            Agg& agg = groups[Key{cols[0], cols[1]}];
            agg.edge.push_back(std::stod(cols[2]));
            agg.task_f1.push_back(std::stod(cols[3]));
            if (!cols[4].empty()) agg.mind.push_back(std::stod(cols[4]));
            if (!cols[5].empty()) agg.conf.push_back(std::stod(cols[5]));
        }
    }

    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) /
                                     static_cast<double>(v.size());
    };
    auto stddev = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };

    std::string csv =
        "config,task,n_runs,per_edge_f1_mean,per_edge_f1_std,per_task_f1_mean,"
        "per_task_f1_std,mind_changes_mean,mind_changes_std,confidence_change_mean,"
        "confidence_change_std\n";
    for (const auto& [key, agg] : groups) {
        csv += key.config + ',' + key.task + ',' + std::to_string(agg.edge.size()) + ',';
        csv += format_double(mean(agg.edge)) + ',' + format_double(stddev(agg.edge)) + ',';
        csv += format_double(mean(agg.task_f1)) + ',' + format_double(stddev(agg.task_f1)) + ',';
        csv += (agg.mind.empty() ? "" : format_double(mean(agg.mind))) + ',';
        csv += (agg.mind.empty() ? "" : format_double(stddev(agg.mind))) + ',';
        csv += (agg.conf.empty() ? "" : format_double(mean(agg.conf))) + ',';
        csv += (agg.conf.empty() ? "" : format_double(stddev(agg.conf))) + '\n';
    }
    if (out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        write_text_atomic(out, csv);
    }
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::vector<Json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<PlanRecord> read_plans(const std::string& path) {
    std::vector<PlanRecord> out;
    for (const Json& j : read_jsonl(path)) out.push_back(plan_record_from_json(j));
    return out;
}

std::vector<SessionLog> read_sessions(const std::string& path) {
    std::vector<SessionLog> out;
    for (const Json& j : read_jsonl(path)) out.push_back(session_from_json(j));
    return out;
}

}  // namespace planacq
