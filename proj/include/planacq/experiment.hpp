#pragma once

#include <optional>
#include <string>
#include <vector>

#include "planacq/metrics.hpp"
#include "planacq/predictors.hpp"
#include "planacq/serialize.hpp"
#include "planacq/session.hpp"

namespace planacq {

struct GenArgs {
    int n_plans = 100;
    std::size_t n_nodes = 8;
    std::size_t max_ingredients = 2;
    double overlap = 0.4;
    std::uint64_t seed = 7;
    std::string out;
    std::string vocab_out;  // optional vocabulary dump
};

struct GenSummary {
    int n_plans = 0;
    std::size_t total_nodes = 0;
    std::size_t total_edges = 0;
};

// Every sub-seed flows from the master seed through tagged derivations, so
// commands replay byte-identically.
PlanRecord make_plan_record(const GenArgs& args, int index);
GenSummary cmd_gen(const GenArgs& args);

struct SimArgs {
    std::string plans_path;
    std::string policy_a = "proactive";
    std::string policy_b = "reactive";
    int max_turns = 60;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::string out;
};

struct SimSummary {
    int n_sessions = 0;
    int n_completed = 0;
};

Policy make_policy(const std::string& name, std::uint64_t seed);
SessionLog simulate_plan(const PlanRecord& record, const Policy& policy_a,
                         const Policy& policy_b, int max_turns, std::uint64_t session_seed);
SimSummary cmd_simulate(const SimArgs& args);

struct TrainArgs {
    std::string sessions_path;
    StagedConfig config;
    double test_fraction = 0.3;
    std::string out;
};

struct SplitCorpus {
    std::vector<SessionLog> train;
    std::vector<SessionLog> test;
    std::vector<std::string> test_plan_ids;
};

// Plan-level train/test split; sessions of one plan never straddle the split.
SplitCorpus split_corpus(const std::vector<SessionLog>& sessions, double test_fraction,
                         std::uint64_t seed);

void cmd_train(const TrainArgs& args);

struct ReportRow {
    std::string config;
    std::string task;
    double per_edge_f1 = 0.0;
    double per_task_f1 = 0.0;
    std::optional<double> mind_changes;
    std::optional<double> confidence_change;
    std::size_t n_sessions = 0;
    std::uint64_t seed = 0;
};

std::vector<PredictionTrace> traces_for(const StagedModel& model,
                                        const std::vector<SessionLog>& sessions,
                                        Stage3Task task);

std::vector<ReportRow> evaluate_model(const StagedModel& model,
                                      const std::vector<SessionLog>& sessions,
                                      const std::string& task_filter);

struct EvalArgs {
    std::string sessions_path;
    std::string model_path;
    std::string out_report;
    std::string out_curves;
    std::string task_filter;  // empty = all tasks
};

void cmd_eval(const EvalArgs& args);

void cmd_report(const std::vector<std::string>& inputs, const std::string& out);

// --- file helpers ------------------------------------------------------------

// Temp-file-then-rename so partially written outputs never land.
void write_text_atomic(const std::string& path, const std::string& content);
std::vector<Json> read_jsonl(const std::string& path);
std::string format_double(double v);

std::vector<PlanRecord> read_plans(const std::string& path);
std::vector<SessionLog> read_sessions(const std::string& path);

}  // namespace planacq
