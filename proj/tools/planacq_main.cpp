#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planacq/experiment.hpp"

namespace {

// Relative output paths land under PLANACQ_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
    if (path.empty()) return path;
    const char* dir = std::getenv("PLANACQ_OUT_DIR");
    if (!dir || *dir == '\0' || std::filesystem::path(path).is_absolute()) return path;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / path).string();
}

planacq::AugmentationSet parse_aug(const std::string& spec) {
    planacq::AugmentationSet aug;
    if (spec.empty()) return aug;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t end = spec.find(',', start);
        if (end == std::string::npos) end = spec.size();
        const std::string name = spec.substr(start, end - start);
        if (name == "status") aug.status = true;
        else if (name == "knowledge") aug.knowledge = true;
        else if (name == "intention") aug.intention = true;
        else if (name == "dlg-move") aug.dlg_move = true;
        else if (!name.empty()) {
            throw CLI::ValidationError("--aug", "unknown augmentation '" + name +
                                                    "' (expected status, knowledge, "
                                                    "intention, dlg-move)");
        }
        start = end + 1;
    }
    return aug;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collaborative plan acquisition simulator and evaluation harness"};
    app.require_subcommand(1);

    planacq::GenArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "Generate joint plans and knowledge splits");
    cmd_gen->add_option("--plans", gen.n_plans, "Number of plans")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--nodes", gen.n_nodes, "Nodes per plan")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--max-ingredients", gen.max_ingredients, "Max incoming edges per node")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--overlap", gen.overlap, "Fraction of edges shared by both agents")
        ->check(CLI::Range(0.0, 1.0));
    cmd_gen->add_option("--seed", gen.seed, "Master seed");
    cmd_gen->add_option("--out", gen.out, "Output plans JSONL")->required();
    cmd_gen->add_option("--vocab", gen.vocab_out, "Optional vocabulary JSON output");

    planacq::SimArgs sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Run coordination sessions over plans");
    cmd_sim->add_option("--plans", sim.plans_path, "Plans JSONL")->required();
    cmd_sim->add_option("--policy-a", sim.policy_a,
                        "Policy for agent A (silent, random-ask, reactive, proactive, "
                        "full-telling)");
    cmd_sim->add_option("--policy-b", sim.policy_b, "Policy for agent B");
    cmd_sim->add_option("--max-turns", sim.max_turns, "Turn cap per session")
        ->check(CLI::PositiveNumber);
    cmd_sim->add_option("--repeats", sim.repeats, "Sessions per plan")
        ->check(CLI::PositiveNumber);
    cmd_sim->add_option("--seed", sim.seed, "Extra seed folded into session seeds");
    cmd_sim->add_option("--out", sim.out, "Output sessions JSONL")->required();

    planacq::TrainArgs train;
    std::string aug_spec;
    CLI::App* cmd_train = app.add_subcommand("train", "Train the staged predictor");
    cmd_train->add_option("--sessions", train.sessions_path, "Sessions JSONL")->required();
    cmd_train->add_option("--aug", aug_spec,
                          "Comma-separated augmentations: status,knowledge,intention,dlg-move");
    cmd_train->add_option("--lr", train.config.stage3.lr, "Learning rate (all stages)");
    cmd_train->add_option("--epochs", train.config.stage3.epochs,
                          "Training epochs (all stages)")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--l2", train.config.stage3.l2, "L2 penalty (all stages)");
    cmd_train->add_option("--batch", train.config.stage3.batch, "Mini-batch size (all stages)")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--stride", train.config.features.snapshot_stride,
                          "Turns between training snapshots")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--test-fraction", train.test_fraction,
                          "Fraction of plans held out for evaluation")
        ->check(CLI::Range(0.0, 0.99));
    cmd_train->add_option("--seed", train.config.seed, "Master training seed");
    cmd_train->add_flag("--oracle-leak", train.config.features.oracle_leak,
                        "Leak labels into features (sanity ceiling only)");
    cmd_train->add_option("--out", train.out, "Output model JSON")->required();

    planacq::EvalArgs eval;
    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate a trained model");
    cmd_eval->add_option("--sessions", eval.sessions_path, "Sessions JSONL")->required();
    cmd_eval->add_option("--model", eval.model_path, "Model JSON")->required();
    cmd_eval->add_option("--task", eval.task_filter,
                         "Restrict to one task (own-missing, partner-missing, intention, "
                         "status, knowledge)");
    cmd_eval->add_option("--out-report", eval.out_report, "Report CSV")->required();
    cmd_eval->add_option("--out-curves", eval.out_curves, "Per-turn curves CSV");

    std::vector<std::string> report_inputs;
    std::string report_out;
    CLI::App* cmd_report = app.add_subcommand("report", "Aggregate report CSVs across seeds");
    cmd_report->add_option("--inputs", report_inputs, "Report CSV files")->required();
    cmd_report->add_option("--out", report_out, "Summary CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // any usage problem exits 2
    }

    try {
        if (*cmd_gen) {
            gen.out = resolve_out(gen.out);
            gen.vocab_out = resolve_out(gen.vocab_out);
            planacq::GenSummary s = planacq::cmd_gen(gen);
            std::printf("wrote %d plans (%zu nodes, %zu edges) to %s\n", s.n_plans,
                        s.total_nodes, s.total_edges, gen.out.c_str());
        } else if (*cmd_sim) {
            sim.out = resolve_out(sim.out);
            planacq::SimSummary s = planacq::cmd_simulate(sim);
            std::printf("wrote %d sessions (%d completed) to %s\n", s.n_sessions,
                        s.n_completed, sim.out.c_str());
        } else if (*cmd_train) {
            train.config.aug = parse_aug(aug_spec);
            for (planacq::Hyper* h : {&train.config.stage1, &train.config.stage2}) {
                h->lr = train.config.stage3.lr;
                h->epochs = train.config.stage3.epochs;
                h->l2 = train.config.stage3.l2;
                h->batch = train.config.stage3.batch;
            }
            train.out = resolve_out(train.out);
            planacq::cmd_train(train);
            std::printf("wrote model to %s\n", train.out.c_str());
        } else if (*cmd_eval) {
            if (!eval.task_filter.empty() && eval.task_filter != "own-missing" &&
                eval.task_filter != "partner-missing" && eval.task_filter != "intention" &&
                eval.task_filter != "status" && eval.task_filter != "knowledge") {
                std::fprintf(stderr, "error: --task: unknown task '%s'\n",
                             eval.task_filter.c_str());
                return 2;
            }
            eval.out_report = resolve_out(eval.out_report);
            eval.out_curves = resolve_out(eval.out_curves);
            planacq::cmd_eval(eval);
            std::printf("wrote report to %s\n", eval.out_report.c_str());
        } else if (*cmd_report) {
            planacq::cmd_report(report_inputs, resolve_out(report_out));
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
