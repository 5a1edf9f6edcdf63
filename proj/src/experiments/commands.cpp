#include "tinylab/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "tinylab/checkpoint.hpp"
#include "tinylab/errors.hpp"

namespace fs = std::filesystem;

namespace tinylab {

LoadedData load_data(const DataConfig& data) {
    const auto paths = split_paths(data);
    CorpusText text;
    text.train = read_text_file(paths[0]);
    text.val = read_text_file(paths[1]);
    text.test = read_text_file(paths[2]);

    LoadedData out;
    if (data.vocab == VocabMode::Char) {
        const std::vector<std::string> all{text.train, text.val, text.test};
        out.vocab = build_char_vocab(all);
    } else {
        out.vocab = build_word_vocab(text.train, data.unk_token);
    }
    out.splits.train = encode(out.vocab, text.train);
    out.splits.val = encode(out.vocab, text.val);
    out.splits.test = encode(out.vocab, text.test);
    return out;
}

void write_text_file(const std::string& path, std::string_view text) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string report_csv(const RunReport& report) {
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const EpochRecord& e : report.epochs) {
        out += std::to_string(e.epoch) + ',' + format_double(e.train_nll) + ',' + format_double(e.val_nll) + ',' +
               (e.epoch == report.best_epoch ? "1" : "0") + '\n';
    }
    return out;
}

namespace {

void claim_output(const std::string& path, bool overwrite, const char* what) {
    const bool taken = fs::is_directory(path) ? !fs::is_empty(path) : fs::exists(path);
    if (taken && !overwrite) {
        throw IoError(std::string(what) + " '" + path + "' already exists (set overwrite = true or pass --overwrite)");
    }
}

ModelConfig sized_model(const ExperimentConfig& config, const Vocab& vocab) {
    if (config.vocab_size_declared && config.model.vocab_size != vocab.size()) {
        throw VocabError("config declares vocab_size = " + std::to_string(config.model.vocab_size) +
                         " but the data has " + std::to_string(vocab.size()) + " tokens");
    }
    ModelConfig model = config.model;
    model.vocab_size = vocab.size();
    return model;
}

}  // namespace

TrainOutputs cmd_train(ExperimentConfig config, std::ostream& log) {
    config.model.validate();
    config.train.validate();
    TrainOutputs out;
    out.run_dir = run_directory(config);
    claim_output(out.run_dir, config.overwrite, "run directory");

    const LoadedData data = load_data(config.data);
    config.model = sized_model(config, data.vocab);
    config.vocab_size_declared = true;
    Model model(config.model, config.train.seed);
    log << "run " << config.run_name << ": " << to_string(config.model.arch) << ", " << count_params(model)
        << " parameters, V = " << data.vocab.size() << '\n';

    TrainResult result = train(model, data.splits, config.train, [&](const EpochRecord& e) {
        log << "epoch " << e.epoch << "  train_nll " << e.train_nll << "  val_nll " << e.val_nll << '\n';
    });
    out.report = result.report;
    out.compute = make_compute_report(result.best, config.train, result.report.test_nll, config.data.dataset,
                                      result.report.positions_per_epoch, result.report.epochs.size());
    log << "best epoch " << out.report.best_epoch << "  test_nll " << out.report.test_nll << "  flops "
        << format_scientific(out.compute.flops) << "  (" << out.report.seconds << " s)\n";

    fs::create_directories(out.run_dir);
    const fs::path dir(out.run_dir);
    write_text_file((dir / "report.csv").string(), report_csv(out.report));
    write_text_file((dir / "compute.csv").string(), compute_csv({out.compute}));
    write_text_file((dir / "config.cfg").string(), to_config_text(config));
    save_checkpoint((dir / "best.ckpt").string(), config, data.vocab, result.best, out.report.best_val_nll);
    return out;
}

std::vector<SweepSetting> sweep_settings(Arch family, const ModelConfig& base) {
    std::vector<SweepSetting> out;
    const auto point = [&](std::string label, auto&& edit) {
        ModelConfig m = ModelConfig::preset(family, base.vocab_size);
        m.context_length = base.context_length;
        edit(m);
        out.push_back({std::move(label), m});
    };
    switch (family) {
        case Arch::Linear:
            for (std::size_t T : {32, 64, 128}) point("T=" + std::to_string(T), [&](ModelConfig& m) { m.context_length = T; });
            break;
        case Arch::Mlp:
            for (std::size_t h : {128, 256, 512}) point("hidden=" + std::to_string(h), [&](ModelConfig& m) { m.mlp_hidden = h; });
            break;
        case Arch::Attention:
            for (std::size_t H : {1, 2, 4}) point("heads=" + std::to_string(H), [&](ModelConfig& m) { m.heads = H; });
            break;
        case Arch::Transformer:
            for (std::size_t L : {2, 3, 4}) point("layers=" + std::to_string(L), [&](ModelConfig& m) { m.layers = L; });
            break;
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out(kSweepCsvHeader);
    out += '\n';
    for (const SweepPoint& p : points) {
        out += p.setting + ',' + std::to_string(p.params) + ',' + format_double(p.flops) + ',' +
               format_double(p.test_nll) + '\n';
    }
    return out;
}

std::vector<SweepPoint> cmd_sweep(Arch family, ExperimentConfig base, std::size_t epochs, std::ostream& log) {
    base.train.epochs = epochs;
    base.train.validate();
    const std::string csv_path = (fs::path(base.out_dir) / ("sweep_" + std::string(to_string(family)) + ".csv")).string();
    claim_output(csv_path, base.overwrite, "sweep file");

    const LoadedData data = load_data(base.data);
    ModelConfig sized = base.model;
    sized.vocab_size = data.vocab.size();

    std::vector<SweepPoint> points;
    for (const SweepSetting& s : sweep_settings(family, sized)) {
        Model model(s.model, base.train.seed);
        log << "sweep " << to_string(family) << ' ' << s.label << ": " << count_params(model) << " parameters\n";
        const TrainResult r = train(model, data.splits, base.train);
        const ComputeReport c = make_compute_report(r.best, base.train, r.report.test_nll, base.data.dataset,
                                                    r.report.positions_per_epoch, r.report.epochs.size());
        points.push_back({s.label, c.params, c.flops, c.test_nll});
        log << "  test_nll " << c.test_nll << "  flops " << format_scientific(c.flops) << '\n';
    }
    write_text_file(csv_path, sweep_csv(points));
    return points;
}

double cmd_eval(const std::string& checkpoint_path, Split split, const std::optional<ExperimentConfig>& config) {
    if (split == Split::Train) throw ValueError("eval: choose the val or test split");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    DataConfig data = ckpt.config.data;
    TrainConfig recipe = ckpt.config.train;
    if (config) {
        ModelConfig expected = config->model;
        expected.vocab_size = ckpt.model.config().vocab_size;
        if (!(expected == ckpt.model.config())) {
            throw ValueError("eval: the given config describes a different model than " + checkpoint_path);
        }
        data = config->data;
        recipe = config->train;
    }
    const LoadedData loaded = load_data(data);
    if (!(loaded.vocab == ckpt.vocab)) {
        throw VocabError("eval: the data's vocabulary differs from the one stored in " + checkpoint_path);
    }
    const auto& ids = split == Split::Val ? loaded.splits.val : loaded.splits.test;
    const WindowStream stream = eval_stream(ids, ckpt.model.config().context_length, split, recipe);
    return evaluate_nll(ckpt.model, stream, recipe.batch_size);
}

std::string cmd_generate(const std::string& checkpoint_path, const SamplerConfig& sampler) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    return generate(ckpt.model, ckpt.vocab, sampler);
}

std::vector<ComputeReport> cmd_report(const std::vector<std::string>& run_dirs) {
    std::vector<ComputeReport> rows;
    for (const std::string& dir : run_dirs) {
        const std::string path = (fs::path(dir) / "compute.csv").string();
        std::vector<ComputeReport> part;
        try {
            part = parse_compute_csv(read_text_file(path));
        } catch (const IoError& e) {
            throw IoError(path + ": " + e.what());
        }
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ComputeReport& a, const ComputeReport& b) { return a.flops < b.flops; });
    return rows;
}

}  // namespace tinylab
