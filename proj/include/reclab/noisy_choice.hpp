#pragma once

// Stochastic choice from two-element problems {x, y} drawn i.i.d. from the
// uniform law on a Wald environment, and the JSONL dataset format.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reclab/wald_env.hpp"

namespace reclab {

struct ConstantFlip {
    double theta = 0.75;
};

struct BoundedResponse {
    double theta_min = 0.6;
    double theta_max = 0.9;
    double tau = 0.5;
};

class NoiseModel {
  public:
    /// Validates 1/2 < theta < 1.
    explicit NoiseModel(ConstantFlip m);
    /// Validates 1/2 < theta_min <= theta_max < 1 and tau > 0.
    explicit NoiseModel(BoundedResponse m);

    const std::variant<ConstantFlip, BoundedResponse>& model() const { return model_; }

    /// Infimum of q over strict pairs.
    double floor() const;

    nlohmann::json to_json() const;
    static NoiseModel from_json(const nlohmann::json& j);

  private:
    std::variant<ConstantFlip, BoundedResponse> model_;
};

/// Probability that x is chosen from {x, y} when u(x) = ux and u(y) = uy.
/// q(x, y) + q(y, x) == 1 holds exactly.
double q_eval(const NoiseModel& noise, double ux, double uy);

struct ChoiceRecord {
    Bundle chosen;
    Bundle rejected;

    friend bool operator==(const ChoiceRecord&, const ChoiceRecord&) = default;
};

struct DatasetMeta {
    nlohmann::json domain;
    nlohmann::json noise;
    nlohmann::json truth;
    std::uint64_t seed = 0;
    std::size_t n = 0;

    friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<ChoiceRecord> records;

    std::size_t size() const { return records.size(); }
    std::size_t dim() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Record i draws (x, y) and the choice from Stream(seed, i), so datasets
/// are prefix-stable in n.
Dataset generate_dataset(const Domain& domain, const WaldUtility& truth, const NoiseModel& noise,
                         std::size_t n, std::uint64_t seed);

/// Builds a dataset directly from records (meta.n is set from the count).
Dataset make_dataset(std::vector<ChoiceRecord> records, DatasetMeta meta = {});

std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(const std::string& text);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// "%.17g" formatting shared by every text writer.
std::string format_double(double v);

} // namespace reclab
