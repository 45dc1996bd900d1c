// ptg: batch generator and evaluator of machine-made periodic tables.
//
//   ptg generate  --config cfg [--seed S] [--restarts R] [--out DIR] ...
//   ptg evaluate  --run DIR --compounds data.csv
//   ptg landscape --run DIR --feature melting_point|all [--table I]
//   ptg resume    --run DIR
//
// Exit codes: 0 success, 1 numerical failure, 2 input error.

#include "ptg/config.hpp"
#include "ptg/errors.hpp"
#include "ptg/pipeline.hpp"

#include <CLI11.hpp>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"periodic table generator"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "run the full pipeline, write a run directory");
    std::string gen_config, gen_out, gen_elements;
    long long gen_seed = -1;
    int gen_restarts = 0, gen_workers = -1, gen_iters = 0;
    gen->add_option("--config", gen_config, "config file (defaults used when omitted)");
    gen->add_option("--seed", gen_seed, "master seed override");
    gen->add_option("--restarts", gen_restarts, "restart count override");
    gen->add_option("--out", gen_out, "output directory override");
    gen->add_option("--elements", gen_elements, "element CSV override");
    gen->add_option("--workers", gen_workers, "worker pool size (0 = hardware)");
    gen->add_option("--iters", gen_iters, "chain iterations override (burn-in scales to half)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "cross-validate every table in a run directory");
    std::string eval_run, eval_compounds;
    int eval_workers = 0;
    eval->add_option("--run", eval_run, "run directory")->required();
    eval->add_option("--compounds", eval_compounds, "compound CSV (formula,target)")->required();
    eval->add_option("--workers", eval_workers, "worker pool size");

    // landscape
    auto* land = app.add_subcommand("landscape", "render property landscapes for a table");
    std::string land_run, land_feature = "all";
    int land_table = -1;
    land->add_option("--run", land_run, "run directory")->required();
    land->add_option("--feature", land_feature, "feature name or 'all'");
    land->add_option("--table", land_table, "restart index (default: selected/best table)");

    // resume
    auto* res = app.add_subcommand("resume", "complete an interrupted generate run");
    std::string res_run;
    res->add_option("--run", res_run, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            ptg::RunConfig config =
                gen_config.empty() ? ptg::RunConfig{} : ptg::load_config(gen_config);
            if (gen_seed >= 0) config.seed = static_cast<std::uint64_t>(gen_seed);
            if (gen_restarts > 0) config.restarts = gen_restarts;
            if (!gen_out.empty()) config.out_dir = gen_out;
            if (!gen_elements.empty()) config.elements_path = gen_elements;
            if (gen_workers >= 0) config.workers = gen_workers;
            if (gen_iters > 0) {
                config.chain.iters = gen_iters;
                config.chain.burn_in = gen_iters / 2;
            }
            std::string dir = ptg::cmd_generate(config);
            std::cout << "run directory: " << dir << "\n";
        } else if (eval->parsed()) {
            ptg::cmd_evaluate(eval_run, eval_compounds, eval_workers);
            std::cout << "evaluation written to " << eval_run << "/eval\n";
        } else if (land->parsed()) {
            ptg::cmd_landscape(land_run, land_feature, land_table);
            std::cout << "landscapes written to " << land_run << "/landscapes\n";
        } else if (res->parsed()) {
            ptg::cmd_resume(res_run);
            std::cout << "run completed: " << res_run << "\n";
        }
    } catch (const ptg::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ptg::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
