#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "planacq/plan_graph.hpp"
#include "planacq/predictors.hpp"

namespace planacq {

// End-of-session decisions for one (session, agent, task) unit.
struct EdgeEvalResult {
    EdgeSet predicted;
    EdgeSet truth;
    std::map<Edge, double> probabilities;
};

EdgeEvalResult end_of_session_result(const PredictionTrace& trace);

// F1 with the empty/empty convention: nothing to find and nothing claimed
// counts as perfect.
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

// Micro-F1 pooling every (session, edge) decision.
double per_edge_f1(const std::vector<EdgeEvalResult>& results);

// Macro average of per-session F1 scores.
double per_task_f1(const std::vector<EdgeEvalResult>& results);

// Mean number of thresholded-prediction flips per edge across consecutive
// turns; `series` gives the cumulative mean up to each turn.
double mind_changes(const PredictionTrace& trace, double threshold);
std::vector<double> mind_changes_series(const PredictionTrace& trace, double threshold);

// Mean per edge of the summed absolute probability deltas between turns.
double confidence_change(const PredictionTrace& trace);
std::vector<double> confidence_change_series(const PredictionTrace& trace);

struct TimeCurves {
    std::vector<double> per_edge_f1;
    std::vector<double> per_task_f1;
    std::vector<std::size_t> n_sessions_alive;
};

// Metrics evaluated at each turn index; sessions shorter than t drop out of
// the pool at t.
TimeCurves cross_time_curves(const std::vector<PredictionTrace>& traces);

struct MetricReport {
    double per_edge_f1 = 0.0;
    double per_task_f1 = 0.0;
    double mind_changes = 0.0;
    double confidence_change = 0.0;
    std::size_t n_sessions = 0;
    TimeCurves curves;
};

MetricReport evaluate_traces(const std::vector<PredictionTrace>& traces, bool with_curves);

}  // namespace planacq
