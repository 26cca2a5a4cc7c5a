#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "reclab/errors.hpp"
#include "reclab/noisy_choice.hpp"

using namespace reclab;

namespace {

const NoiseModel kFlip75{ConstantFlip{0.75}};
const NoiseModel kBounded{BoundedResponse{0.6, 0.9, 0.5}};

std::string line_of(const std::string& text, std::size_t index) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < index; ++i) {
        start = text.find('\n', start) + 1;
    }
    return text.substr(start, text.find('\n', start) - start);
}

} // namespace

TEST(NoiseModel, Validates) {
    EXPECT_THROW(NoiseModel(ConstantFlip{0.5}), ConfigError);
    EXPECT_THROW(NoiseModel(ConstantFlip{1.0}), ConfigError);
    EXPECT_THROW(NoiseModel(BoundedResponse{0.7, 0.6, 0.5}), ConfigError);
    EXPECT_THROW(NoiseModel(BoundedResponse{0.6, 0.9, 0.0}), ConfigError);
}

TEST(QEval, Examples) {
    EXPECT_EQ(q_eval(kFlip75, 0.8, 0.2), 0.75);
    EXPECT_EQ(q_eval(kFlip75, 0.4, 0.4), 0.5);
    EXPECT_EQ(q_eval(kBounded, 0.4, 0.4), 0.5);
    EXPECT_NEAR(q_eval(kBounded, 0.75, 0.25), 0.6 + 0.3 * std::tanh(1.0), 1e-15);
    EXPECT_NEAR(q_eval(kBounded, 0.75, 0.25), 0.82848, 1e-5);
}

TEST(QEval, ComplementaryAndAboveFloor) {
    Stream rng(21, 0);
    for (int t = 0; t < 2000; ++t) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        for (const auto& noise : {kFlip75, kBounded}) {
            EXPECT_EQ(q_eval(noise, a, b) + q_eval(noise, b, a), 1.0);
            if (a > b) {
                EXPECT_GE(q_eval(noise, a, b), noise.floor());
                EXPECT_GT(noise.floor(), 0.5);
            }
        }
    }
}

TEST(GenerateDataset, EmptyAndReproducible) {
    const auto box = Domain::unit_box(2);
    const auto u = WaldUtility::linear({0.5, 0.5});
    const auto empty = generate_dataset(box, u, kFlip75, 0, 1);
    EXPECT_EQ(empty.size(), 0u);
    EXPECT_EQ(parse_dataset(serialize_dataset(empty)), empty);

    const auto a = generate_dataset(box, u, kFlip75, 50, 9);
    const auto b = generate_dataset(box, u, kFlip75, 50, 9);
    EXPECT_EQ(serialize_dataset(a), serialize_dataset(b));
    const auto prefix = generate_dataset(box, u, kFlip75, 20, 9);
    EXPECT_TRUE(std::equal(prefix.records.begin(), prefix.records.end(), a.records.begin()));
}

TEST(GenerateDataset, NearlyNoiselessFollowsUtility) {
    const auto box = Domain::unit_box(2);
    const auto u = WaldUtility::cobb_douglas({0.4, 0.6});
    const NoiseModel sharp(ConstantFlip{0.999});
    const auto ds = generate_dataset(box, u, sharp, 1000, 17);
    std::size_t agree = 0;
    for (const auto& r : ds.records) {
        agree += u_value(u, box, r.chosen) >= u_value(u, box, r.rejected) ? 1 : 0;
    }
    EXPECT_GE(agree, 990u);
}

TEST(GenerateDataset, ChoiceFrequencyMatchesTheta) {
    const auto box = Domain::unit_box(2);
    const auto u = WaldUtility::linear({0.3, 0.7});
    const std::size_t n = 100000;
    const auto ds = generate_dataset(box, u, kFlip75, n, 23);
    std::size_t follow = 0;
    for (const auto& r : ds.records) {
        follow += u_value(u, box, r.chosen) > u_value(u, box, r.rejected) ? 1 : 0;
    }
    const double freq = static_cast<double>(follow) / n;
    EXPECT_NEAR(freq, 0.75, 3.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST(DatasetFormat, RoundTrip) {
    const auto d = Domain(ConeDomain{0.1, 1.0, 2});
    const auto ds = generate_dataset(d, WaldUtility::ces({0.3, 0.7}, 0.5), kBounded, 3, 4);
    const auto text = serialize_dataset(ds);
    EXPECT_EQ(parse_dataset(text), ds);
    EXPECT_EQ(serialize_dataset(parse_dataset(text)), text);

    const auto path = std::filesystem::temp_directory_path() / "reclab_roundtrip.jsonl";
    write_dataset(ds, path);
    EXPECT_EQ(read_dataset(path), ds);
    std::filesystem::remove(path);
}

TEST(DatasetFormat, TruncatedLastLineNamesLine) {
    const auto ds =
        generate_dataset(Domain::unit_box(2), WaldUtility::linear({0.5, 0.5}), kFlip75, 4, 2);
    auto text = serialize_dataset(ds);
    // Line 5 is the last record; cut it in half.
    const std::string last = line_of(text, 4);
    text = text.substr(0, text.size() - 1 - last.size() / 2);
    try {
        parse_dataset(text);
        FAIL() << "expected a parse error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
    }
}

TEST(DatasetFormat, RejectsInconsistentRecords) {
    const auto ds =
        generate_dataset(Domain::unit_box(2), WaldUtility::linear({0.5, 0.5}), kFlip75, 2, 2);
    const auto text = serialize_dataset(ds);
    const std::string meta = line_of(text, 0);
    EXPECT_THROW(parse_dataset(meta + "\n{\"chosen\":[0.1,0.2],\"rejected\":[0.1,0.2]}\n"),
                 ConfigError);
    EXPECT_THROW(parse_dataset(meta + "\n{\"chosen\":[0.1],\"rejected\":[0.1,0.2]}\n"),
                 ConfigError);
    EXPECT_THROW(parse_dataset(meta + "\n" + line_of(text, 1) + "\n"), ConfigError);
}

TEST(FormatDouble, RoundTripsExactly) {
    Stream rng(3, 3);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-1e3, 1e3);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}
