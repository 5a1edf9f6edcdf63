#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "tinylab/compute.hpp"
#include "tinylab/errors.hpp"

using namespace tinylab;

namespace {

struct FlopsCase {
    const char* name;
    std::uint64_t params, positions, T, epochs;
    const char* published;  // as printed in the results tables
    int digits;             // significant digits printed there
    bool truncated = false; // printed by truncation rather than rounding
};

// Published budgets: 50k positions per epoch at T = 128 for the character
// models, 80k at T = 64 for the word-level transformer.
const FlopsCase kPublished[] = {
    {"linear", 1'073'345, 50'000, 128, 3, "4.1e13", 2},
    {"mlp", 4'285'377, 50'000, 128, 3, "1.6e14", 2},
    {"attention", 231'617, 50'000, 128, 4, "1.2e13", 2},
    {"transformer", 430'785, 50'000, 128, 4, "2.2e13", 2},
    {"transformer (3 digits)", 430'785, 50'000, 128, 4, "2.21e13", 3},
    {"transformer rope", 414'401, 50'000, 128, 4, "2.12e13", 3},
    {"ptb", 2'975'631, 80'000, 64, 8, "2.44e14", 3},
    // 7.3385e14 appears truncated to 7.33e14, while the ptb row's 2.4376e14
    // is rounded to 2.44e14; no single rule gives both.
    {"wikitext2", 8'958'077, 80'000, 64, 8, "7.33e14", 3, true},
};

}  // namespace

TEST(Flops, ReproducesPublishedEstimates) {
    for (const FlopsCase& c : kPublished) {
        const double flops = estimate_flops(c.params, c.positions, c.T, c.epochs);
        // Exact integer oracle; every product here fits in 64 bits.
        const std::uint64_t exact = 2 * c.params * c.positions * c.T * c.epochs;
        EXPECT_EQ(flops, static_cast<double>(exact)) << c.name;
        if (!c.truncated) {
            EXPECT_EQ(format_scientific(flops, c.digits), c.published) << c.name;
        } else {
            // Truncated print: the published value is a lower bound within one
            // unit of its last digit.
            const double published = parse_double(c.published);
            const double unit = std::pow(10.0, std::floor(std::log10(published)) - (c.digits - 1));
            EXPECT_GE(flops, published) << c.name;
            EXPECT_LT(flops, published + unit) << c.name;
        }
    }
}

TEST(Flops, ThreeDigitValues) {
    EXPECT_EQ(format_scientific(estimate_flops(1'073'345, 50'000, 128, 3)), "4.12e13");
    EXPECT_EQ(format_scientific(estimate_flops(4'285'377, 50'000, 128, 3)), "1.65e14");
    EXPECT_EQ(format_scientific(estimate_flops(231'617, 50'000, 128, 4)), "1.19e13");
}

// Reading "training tokens" as window count times epochs, without the
// window length, misses every published value by exactly a factor of T.
TEST(Flops, TokenCountWithoutWindowLengthFailsEveryRow) {
    for (const FlopsCase& c : kPublished) {
        const double without_T = 2.0 * c.params * c.positions * c.epochs;
        EXPECT_NE(format_scientific(without_T, c.digits), c.published) << c.name;
        EXPECT_EQ(estimate_flops(c.params, c.positions, c.T, c.epochs) / without_T, static_cast<double>(c.T));
    }
}

TEST(Flops, SmallestCase) { EXPECT_EQ(estimate_flops(1, 1, 1, 1), 2.0); }

TEST(FormatScientific, RoundingCarriesIntoExponent) {
    EXPECT_EQ(format_scientific(9.996e13), "1.00e14");
    EXPECT_EQ(format_scientific(1.0), "1.00e0");
    EXPECT_EQ(format_scientific(0.0), "0");
    EXPECT_EQ(format_scientific(1234.0, 2), "1.2e3");
}

TEST(ComputeReport, FromModelMatchesPublishedTransformerRow) {
    Model m(ModelConfig::preset(Arch::Transformer, 65), 1);
    TrainConfig t;  // 50k positions, 4 epochs
    const ComputeReport r = make_compute_report(m, t, 2.01, "tinyshakespeare");
    EXPECT_EQ(r.arch, "transformer");
    EXPECT_EQ(r.params, 430'785u);
    EXPECT_EQ(r.train_tokens, 50'000u * 128u * 4u);
    EXPECT_EQ(format_scientific(r.flops), "2.21e13");
    // Internal consistency: recompute from the report's own fields.
    EXPECT_EQ(r.flops, 2.0 * static_cast<double>(r.params) * static_cast<double>(r.train_tokens));
    EXPECT_EQ(r.flops, estimate_flops(r.params, r.positions_per_epoch, r.context_length, r.epochs));
}

TEST(ComputeReport, RealizedCountsOverrideConfig) {
    ModelConfig c = ModelConfig::preset(Arch::Transformer, 65);
    c.positional = Positional::Rope;
    Model m(c, 1);
    const ComputeReport r = make_compute_report(m, TrainConfig{}, 2.0, "toy", 1'000, 2);
    EXPECT_EQ(r.arch, "transformer-rope");
    EXPECT_EQ(r.positions_per_epoch, 1'000u);
    EXPECT_EQ(r.epochs, 2u);
    EXPECT_EQ(r.train_tokens, 1'000u * 128u * 2u);
}

TEST(ComputeCsv, RoundTripsLosslessly) {
    std::vector<ComputeReport> rows;
    ComputeReport a{"linear", "tinyshakespeare", 1'073'345, 128, 50'000, 3, 19'200'000, 0, 3.0512345678901234};
    a.flops = estimate_flops(a.params, a.positions_per_epoch, a.context_length, a.epochs);
    ComputeReport b{"mlp", "toy", 7, 4, 9, 1, 36, 504, 0.1 + 0.2};
    rows.push_back(a);
    rows.push_back(b);
    const std::string text = compute_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), kComputeCsvHeader);
    EXPECT_EQ(parse_compute_csv(text), rows);
}

TEST(ComputeCsv, ErrorsNameTheLine) {
    const std::string text = std::string(kComputeCsvHeader) + "\nlinear,x,1,2,3,4,24,48,1.5\nlinear,x,1,2\n";
    try {
        parse_compute_csv(text);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_compute_csv("a,b,c\n"), IoError);
    EXPECT_THROW(parse_double("1.5x"), IoError);
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(2.2055e13), "2.2055e+13");
    const double tricky = 0.1 + 0.2;
    EXPECT_EQ(parse_double(format_double(tricky)), tricky);
}
