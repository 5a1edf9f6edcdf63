// tinylab command-line front end: train, sweep, eval, generate, report.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "tinylab/checkpoint.hpp"
#include "tinylab/commands.hpp"
#include "tinylab/errors.hpp"

using namespace tinylab;

namespace {

struct RunFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool fast = false;
    std::string out;
    bool overwrite = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_path, "key=value run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "override the config's seed");
    cmd->add_flag("--fast", f.fast, "quick profile: 5k train / 1k eval positions, 1 epoch");
    cmd->add_option("--out", f.out, "override the config's output directory");
    cmd->add_flag("--overwrite", f.overwrite, "replace an existing run directory or sweep file");
}

ExperimentConfig resolve(const RunFlags& f) {
    ExperimentConfig config = load_config(f.config_path);
    if (f.seed) config.train.seed = *f.seed;
    if (!f.out.empty()) config.out_dir = f.out;
    if (f.overwrite) config.overwrite = true;
    if (f.fast) apply_fast_profile(config);
    return config;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text_file(out_path, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tinylab: small language models on a CPU"};
    app.require_subcommand(1);

    RunFlags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "train one configuration");
    add_run_flags(train_cmd, train_flags);

    RunFlags sweep_flags;
    std::string family;
    std::size_t sweep_epochs = 2;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "train a family's three-point grid");
    sweep_cmd->add_option("family", family, "linear, mlp, attention or transformer")->required();
    add_run_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--epochs", sweep_epochs, "epochs per grid point")->capture_default_str();

    std::string eval_ckpt;
    std::string eval_split = "test";
    std::string eval_config;
    CLI::App* eval_cmd = app.add_subcommand("eval", "mean NLL of a checkpoint on the fixed val/test stream");
    eval_cmd->add_option("checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--split", eval_split, "val or test")->capture_default_str();
    eval_cmd->add_option("--config", eval_config, "config that must describe the same model")
        ->check(CLI::ExistingFile);

    std::string gen_ckpt;
    SamplerConfig sampler;
    std::optional<std::string> prompt;
    std::string gen_out;
    CLI::App* gen_cmd = app.add_subcommand("generate", "sample a continuation from a checkpoint");
    gen_cmd->add_option("checkpoint", gen_ckpt)->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--n", sampler.n_tokens, "tokens to generate")->capture_default_str();
    gen_cmd->add_option("--temperature", sampler.temperature, "softmax temperature")->capture_default_str();
    gen_cmd->add_option("--seed", sampler.seed, "sampling seed")->capture_default_str();
    gen_cmd->add_option("--prompt", prompt, "prompt text (default HAMLET: for char models, empty for word models)");
    gen_cmd->add_option("--out", gen_out, "write the text to this file instead of stdout");

    std::vector<std::string> report_dirs;
    std::string report_out;
    CLI::App* report_cmd = app.add_subcommand("report", "merge compute.csv of run directories, sorted by FLOPs");
    report_cmd->add_option("runs", report_dirs, "run directories")->required()->check(CLI::ExistingDirectory);
    report_cmd->add_option("--out", report_out, "write the CSV to this file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            const TrainOutputs out = cmd_train(resolve(train_flags), std::cerr);
            std::cout << out.run_dir << '\n';
        } else if (*sweep_cmd) {
            const std::vector<SweepPoint> points =
                cmd_sweep(parse_arch(family), resolve(sweep_flags), sweep_flags.fast ? 1 : sweep_epochs, std::cerr);
            std::cout << sweep_csv(points);
        } else if (*eval_cmd) {
            std::optional<ExperimentConfig> config;
            if (!eval_config.empty()) config = load_config(eval_config);
            std::cout << format_double(cmd_eval(eval_ckpt, parse_split(eval_split), config)) << '\n';
        } else if (*gen_cmd) {
            if (prompt) {
                sampler.prompt = *prompt;
            } else {
                sampler.prompt = load_checkpoint(gen_ckpt).vocab.mode() == VocabMode::Char ? "HAMLET:" : "";
            }
            std::string text = cmd_generate(gen_ckpt, sampler);
            text += '\n';
            emit(gen_out, text);
        } else if (*report_cmd) {
            emit(report_out, compute_csv(cmd_report(report_dirs)));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
