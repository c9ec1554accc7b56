#include "planacq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace planacq {

namespace {

struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
};

Counts count_result(const EdgeEvalResult& r) {
    Counts c;
    for (const Edge& e : r.predicted) {
        if (r.truth.count(e)) ++c.tp;
        else ++c.fp;
    }
    for (const Edge& e : r.truth) {
        if (!r.predicted.count(e)) ++c.fn;
    }
    return c;
}

Counts count_at_turn(const PredictionTrace& trace, std::size_t t) {
    Counts c;
    for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
        const bool pred = trace.probs[t][j] >= trace.threshold;
        const bool truth = trace.truth[j];
        if (pred && truth) ++c.tp;
        else if (pred) ++c.fp;
        else if (truth) ++c.fn;
    }
    return c;
}

}  // namespace

EdgeEvalResult end_of_session_result(const PredictionTrace& trace) {
    if (trace.probs.empty()) throw std::invalid_argument("trace covers no turns");
    EdgeEvalResult r;
    const auto& last = trace.probs.back();
    for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
        r.probabilities[trace.candidates[j]] = last[j];
        if (last[j] >= trace.threshold) r.predicted.insert(trace.candidates[j]);
        if (trace.truth[j]) r.truth.insert(trace.candidates[j]);
    }
    return r;
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double per_edge_f1(const std::vector<EdgeEvalResult>& results) {
    if (results.empty()) throw std::invalid_argument("per_edge_f1: no results");
    Counts total;
    for (const auto& r : results) {
        Counts c = count_result(r);
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn += c.fn;
    }
    return f1_from_counts(total.tp, total.fp, total.fn);
}

double per_task_f1(const std::vector<EdgeEvalResult>& results) {
    if (results.empty()) throw std::invalid_argument("per_task_f1: no results");
    double sum = 0.0;
    for (const auto& r : results) {
        Counts c = count_result(r);
        sum += f1_from_counts(c.tp, c.fp, c.fn);
    }
    return sum / static_cast<double>(results.size());
}

double mind_changes(const PredictionTrace& trace, double threshold) {
    if (trace.probs.empty()) throw std::invalid_argument("trace covers no turns");
    if (trace.candidates.empty()) return 0.0;
    std::size_t flips = 0;
    for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
        for (std::size_t t = 1; t < trace.probs.size(); ++t) {
            const bool prev = trace.probs[t - 1][j] >= threshold;
            const bool cur = trace.probs[t][j] >= threshold;
            if (prev != cur) ++flips;
        }
    }
    return static_cast<double>(flips) / static_cast<double>(trace.candidates.size());
}

std::vector<double> mind_changes_series(const PredictionTrace& trace, double threshold) {
    if (trace.probs.empty()) throw std::invalid_argument("trace covers no turns");
    std::vector<double> series(trace.probs.size(), 0.0);
    if (trace.candidates.empty()) return series;
    double running = 0.0;
    for (std::size_t t = 0; t < trace.probs.size(); ++t) {
        if (t > 0) {
            for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
                const bool prev = trace.probs[t - 1][j] >= threshold;
                const bool cur = trace.probs[t][j] >= threshold;
                if (prev != cur) running += 1.0;
            }
        }
        series[t] = running / static_cast<double>(trace.candidates.size());
    }
    return series;
}

double confidence_change(const PredictionTrace& trace) {
    if (trace.probs.empty()) throw std::invalid_argument("trace covers no turns");
    if (trace.candidates.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
        for (std::size_t t = 1; t < trace.probs.size(); ++t) {
            total += std::abs(trace.probs[t][j] - trace.probs[t - 1][j]);
        }
    }
    return total / static_cast<double>(trace.candidates.size());
}

std::vector<double> confidence_change_series(const PredictionTrace& trace) {
    if (trace.probs.empty()) throw std::invalid_argument("trace covers no turns");
    std::vector<double> series(trace.probs.size(), 0.0);
    if (trace.candidates.empty()) return series;
    double running = 0.0;
    for (std::size_t t = 0; t < trace.probs.size(); ++t) {
        if (t > 0) {
            for (std::size_t j = 0; j < trace.candidates.size(); ++j) {
                running += std::abs(trace.probs[t][j] - trace.probs[t - 1][j]);
            }
        }
        series[t] = running / static_cast<double>(trace.candidates.size());
    }
    return series;
}

TimeCurves cross_time_curves(const std::vector<PredictionTrace>& traces) {
    TimeCurves curves;
    std::size_t max_turns = 0;
    for (const auto& tr : traces) max_turns = std::max(max_turns, tr.n_turns());
    for (std::size_t t = 0; t < max_turns; ++t) {
        Counts pooled;
        double f1_sum = 0.0;
        std::size_t alive = 0;
        for (const auto& tr : traces) {
            if (t >= tr.n_turns()) continue;
            ++alive;
            Counts c = count_at_turn(tr, t);
            pooled.tp += c.tp;
            pooled.fp += c.fp;
            pooled.fn += c.fn;
            f1_sum += f1_from_counts(c.tp, c.fp, c.fn);
        }
        curves.per_edge_f1.push_back(f1_from_counts(pooled.tp, pooled.fp, pooled.fn));
        curves.per_task_f1.push_back(alive > 0 ? f1_sum / static_cast<double>(alive) : 1.0);
        curves.n_sessions_alive.push_back(alive);
    }
    return curves;
}

MetricReport evaluate_traces(const std::vector<PredictionTrace>& traces, bool with_curves) {
    if (traces.empty()) throw std::invalid_argument("evaluate_traces: no traces");
    MetricReport report;
    report.n_sessions = traces.size();
    std::vector<EdgeEvalResult> results;
    results.reserve(traces.size());
    double mc = 0.0, cc = 0.0;
    for (const auto& tr : traces) {
        results.push_back(end_of_session_result(tr));
        mc += mind_changes(tr, tr.threshold);
        cc += confidence_change(tr);
    }
    report.per_edge_f1 = per_edge_f1(results);
    report.per_task_f1 = per_task_f1(results);
    report.mind_changes = mc / static_cast<double>(traces.size());
    report.confidence_change = cc / static_cast<double>(traces.size());
    if (with_curves) report.curves = cross_time_curves(traces);
    return report;
}

}  // namespace planacq
