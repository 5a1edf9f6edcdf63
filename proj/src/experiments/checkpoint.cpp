#include "tinylab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tinylab/errors.hpp"

namespace tinylab {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'A', 'B'};

class Writer {
public:
    template <typename U>
    void uint(U value) {
        for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
    void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        uint<std::uint64_t>(s.size());
        bytes_.append(s);
    }
    void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

class Reader {
public:
    Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

    template <typename U>
    U uint() {
        need(sizeof(U));
        U value = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            value |= static_cast<U>(static_cast<unsigned char>(bytes_[at_ + i])) << (8 * i);
        }
        at_ += sizeof(U);
        return value;
    }
    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
    std::string str() {
        const auto n = uint<std::uint64_t>();
        need(n);
        std::string s = bytes_.substr(at_, n);
        at_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        std::string_view s(bytes_.data() + at_, n);
        at_ += n;
        return s;
    }
    bool done() const { return at_ == bytes_.size(); }
    [[noreturn]] void fail(const std::string& what) const { throw IoError(path_ + ": " + what); }

private:
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - at_) fail("truncated checkpoint (offset " + std::to_string(at_) + ")");
    }

    std::string bytes_;
    std::string path_;
    std::size_t at_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const ExperimentConfig& config, const Vocab& vocab, const Model& model,
                     double best_val_nll) {
    if (vocab.size() != model.config().vocab_size) {
        throw VocabError("save_checkpoint: vocabulary has " + std::to_string(vocab.size()) +
                         " tokens, model expects " + std::to_string(model.config().vocab_size));
    }
    ExperimentConfig echo = config;
    echo.model = model.config();
    echo.vocab_size_declared = true;

    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.uint(kCheckpointVersion);
    w.str(to_config_text(echo));
    w.uint<std::uint64_t>(config.train.seed);
    w.f64(best_val_nll);
    w.uint<std::uint8_t>(vocab.mode() == VocabMode::Char ? 0 : 1);
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(vocab.unk_id() ? std::int64_t{*vocab.unk_id()} : -1));
    w.uint<std::uint64_t>(vocab.size());
    for (const std::string& token : vocab.tokens()) w.str(token);
    w.uint<std::uint64_t>(model.parameters().size());
    for (const NamedParameter& p : model.parameters()) {
        w.str(p.name);
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.tensor.rank()));
        for (std::size_t d : p.tensor.shape()) w.uint<std::uint64_t>(d);
        w.uint<std::uint64_t>(p.tensor.numel());
        for (Real v : p.tensor.data()) w.f32(static_cast<float>(v));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(read_text_file(path), path);
    if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) r.fail("not a tinylab checkpoint");
    const auto version = r.uint<std::uint32_t>();
    if (version != kCheckpointVersion) {
        r.fail("unsupported checkpoint version " + std::to_string(version) + " (this build reads version " +
               std::to_string(kCheckpointVersion) + ")");
    }
    ExperimentConfig config = parse_config(r.str(), path + " (config echo)");
    const auto seed = r.uint<std::uint64_t>();
    if (seed != config.train.seed) r.fail("seed does not match the config echo");
    const double best_val_nll = r.f64();

    const auto mode_byte = r.uint<std::uint8_t>();
    if (mode_byte > 1) r.fail("bad vocabulary mode " + std::to_string(mode_byte));
    const auto unk = static_cast<std::int64_t>(r.uint<std::uint64_t>());
    const auto token_count = r.uint<std::uint64_t>();
    if (token_count != config.model.vocab_size) r.fail("vocabulary size does not match the config echo");
    std::vector<std::string> tokens;
    tokens.reserve(token_count);
    for (std::uint64_t i = 0; i < token_count; ++i) tokens.push_back(r.str());
    Vocab vocab(mode_byte == 0 ? VocabMode::Char : VocabMode::Word, std::move(tokens),
                unk < 0 ? std::nullopt : std::optional<TokenId>(static_cast<TokenId>(unk)));

    Model model(config.model, config.train.seed);
    const auto param_count = r.uint<std::uint64_t>();
    if (param_count != model.parameters().size()) {
        r.fail("has " + std::to_string(param_count) + " parameters, the configured model has " +
               std::to_string(model.parameters().size()));
    }
    for (NamedParameter& p : model.parameters()) {
        const std::string name = r.str();
        if (name != p.name) r.fail("expected parameter '" + p.name + "', found '" + name + "'");
        Shape shape(r.uint<std::uint32_t>());
        for (std::size_t& d : shape) d = r.uint<std::uint64_t>();
        if (shape != p.tensor.shape()) {
            r.fail("parameter '" + name + "' has shape " + shape_to_string(shape) + ", expected " +
                   shape_to_string(p.tensor.shape()));
        }
        if (r.uint<std::uint64_t>() != p.tensor.numel()) r.fail("parameter '" + name + "' has a bad element count");
        for (Real& v : p.tensor.data()) v = static_cast<Real>(r.f32());
    }
    if (!r.done()) r.fail("trailing bytes after the last parameter");
    return Checkpoint{std::move(config), std::move(vocab), best_val_nll, std::move(model)};
}

}  // namespace tinylab
