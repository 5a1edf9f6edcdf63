#include "tinylab/compute.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "tinylab/errors.hpp"

namespace tinylab {

std::size_t closed_form_param_count(const ModelConfig& config) {
    config.validate();
    const std::size_t T = config.context_length;
    const std::size_t V = config.vocab_size;
    const std::size_t d = config.d_model;
    const auto dense = [](std::size_t in, std::size_t out) { return in * out + out; };

    const std::size_t embedding = V * d;
    switch (config.arch) {
        case Arch::Linear:
            return embedding + dense(T * d, V);
        case Arch::Mlp:
            return embedding + dense(T * d, config.mlp_hidden) + dense(config.mlp_hidden, config.mlp_hidden) +
                   dense(config.mlp_hidden, V);
        case Arch::Attention:
        case Arch::Transformer: {
            const std::size_t norm = 2 * d;
            const std::size_t block =
                2 * norm + 4 * dense(d, d) + dense(d, config.ff_width) + dense(config.ff_width, d);
            const std::size_t positional = config.positional == Positional::Learned ? T * d : 0;
            return embedding + positional + config.block_count() * block + norm + dense(d, V);
        }
    }
    return 0;
}

double estimate_flops(std::size_t params, std::size_t positions_per_epoch, std::size_t context_length,
                      std::size_t epochs) {
    return 2.0 * static_cast<double>(params) * static_cast<double>(positions_per_epoch) *
           static_cast<double>(context_length) * static_cast<double>(epochs);
}

std::string format_scientific(double value, int digits) {
    if (value == 0) return "0";
    int exponent = static_cast<int>(std::floor(std::log10(std::fabs(value))));
    double mantissa = value / std::pow(10.0, exponent);
    const double rounding = std::pow(10.0, digits - 1);
    mantissa = std::round(mantissa * rounding) / rounding;
    if (std::fabs(mantissa) >= 10.0) {
        mantissa /= 10.0;
        ++exponent;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*fe%d", digits - 1, mantissa, exponent);
    return buf;
}

ComputeReport make_compute_report(const Model& model, const TrainConfig& train_config, double test_nll,
                                  std::string dataset, std::size_t positions_per_epoch, std::size_t epochs) {
    ComputeReport r;
    r.arch = to_string(model.config().arch);
    if (model.config().positional == Positional::Rope) r.arch += "-rope";
    r.dataset = std::move(dataset);
    r.params = count_params(model);
    r.context_length = model.config().context_length;
    r.positions_per_epoch = positions_per_epoch ? positions_per_epoch : train_config.train_cap;
    r.epochs = epochs ? epochs : train_config.epochs;
    r.train_tokens = r.positions_per_epoch * r.context_length * r.epochs;
    r.flops = estimate_flops(r.params, r.positions_per_epoch, r.context_length, r.epochs);
    r.test_nll = test_nll;
    return r;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw IoError("cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    double value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw IoError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

namespace {

std::size_t parse_size(std::string_view text) {
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw IoError("not a non-negative integer: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string to_csv_row(const ComputeReport& r) {
    return r.arch + ',' + r.dataset + ',' + std::to_string(r.params) + ',' + std::to_string(r.context_length) + ',' +
           std::to_string(r.positions_per_epoch) + ',' + std::to_string(r.epochs) + ',' +
           std::to_string(r.train_tokens) + ',' + format_double(r.flops) + ',' + format_double(r.test_nll);
}

ComputeReport parse_compute_row(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = split_commas(line);
    if (f.size() != 9) throw IoError("compute row needs 9 fields, got " + std::to_string(f.size()));
    ComputeReport r;
    r.arch = f[0];
    r.dataset = f[1];
    r.params = parse_size(f[2]);
    r.context_length = parse_size(f[3]);
    r.positions_per_epoch = parse_size(f[4]);
    r.epochs = parse_size(f[5]);
    r.train_tokens = parse_size(f[6]);
    r.flops = parse_double(f[7]);
    r.test_nll = parse_double(f[8]);
    return r;
}

std::string compute_csv(const std::vector<ComputeReport>& reports) {
    std::string out(kComputeCsvHeader);
    out += '\n';
    for (const ComputeReport& r : reports) out += to_csv_row(r) + '\n';
    return out;
}

std::vector<ComputeReport> parse_compute_csv(std::string_view text) {
    std::vector<ComputeReport> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (line_no == 1) {
            if (line.substr(0, kComputeCsvHeader.size()) != kComputeCsvHeader) {
                throw IoError("compute csv: unexpected header '" + std::string(line) + "'");
            }
            continue;
        }
        try {
            out.push_back(parse_compute_row(line));
        } catch (const IoError& e) {
            throw IoError("compute csv line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace tinylab
