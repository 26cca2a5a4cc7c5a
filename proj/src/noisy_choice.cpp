#include "reclab/noisy_choice.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reclab/errors.hpp"
#include "reclab/parallel.hpp"

namespace reclab {

namespace {

void check_theta(double t, const char* name) {
    if (!(t > 0.5 && t < 1.0)) {
        throw ConfigError(std::string(name) + " must lie in (1/2, 1)");
    }
}

void append_vector(std::string& out, const Bundle& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_double(v[i]);
    }
    out += ']';
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

NoiseModel::NoiseModel(ConstantFlip m) : model_(m) { check_theta(m.theta, "theta"); }

NoiseModel::NoiseModel(BoundedResponse m) : model_(m) {
    check_theta(m.theta_min, "theta_min");
    check_theta(m.theta_max, "theta_max");
    if (!(m.theta_min <= m.theta_max)) {
        throw ConfigError("theta_min must not exceed theta_max");
    }
    if (!(m.tau > 0.0) || !std::isfinite(m.tau)) {
        throw ConfigError("tau must be positive");
    }
}

double NoiseModel::floor() const {
    if (const auto* c = std::get_if<ConstantFlip>(&model_)) {
        return c->theta;
    }
    return std::get<BoundedResponse>(model_).theta_min;
}

nlohmann::json NoiseModel::to_json() const {
    if (const auto* c = std::get_if<ConstantFlip>(&model_)) {
        return {{"constant_flip", {{"theta", c->theta}}}};
    }
    const auto& b = std::get<BoundedResponse>(model_);
    return {{"bounded_response",
             {{"theta_min", b.theta_min}, {"theta_max", b.theta_max}, {"tau", b.tau}}}};
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != 1) {
        throw ConfigError("noise must name exactly one of \"constant_flip\" or \"bounded_response\"");
    }
    if (j.contains("constant_flip")) {
        const auto& c = j.at("constant_flip");
        for (const auto& [k, v] : c.items()) {
            if (k != "theta") {
                throw ConfigError("unknown field \"" + k + "\" in constant_flip");
            }
        }
        return NoiseModel(ConstantFlip{c.at("theta").get<double>()});
    }
    if (j.contains("bounded_response")) {
        const auto& b = j.at("bounded_response");
        for (const auto& [k, v] : b.items()) {
            if (k != "theta_min" && k != "theta_max" && k != "tau") {
                throw ConfigError("unknown field \"" + k + "\" in bounded_response");
            }
        }
        return NoiseModel(BoundedResponse{b.at("theta_min").get<double>(),
                                          b.at("theta_max").get<double>(),
                                          b.at("tau").get<double>()});
    }
    throw ConfigError("unknown noise model \"" + j.items().begin().key() + "\"");
}

double q_eval(const NoiseModel& noise, double ux, double uy) {
    if (ux == uy) {
        return 0.5;
    }
    if (ux < uy) {
        // 1 - p is exact for p in [1/2, 1], so the two orders sum to 1.
        return 1.0 - q_eval(noise, uy, ux);
    }
    if (const auto* c = std::get_if<ConstantFlip>(&noise.model())) {
        return c->theta;
    }
    const auto& b = std::get<BoundedResponse>(noise.model());
    return b.theta_min + (b.theta_max - b.theta_min) * std::tanh((ux - uy) / b.tau);
}

std::size_t Dataset::dim() const {
    if (!records.empty()) {
        return records.front().chosen.size();
    }
    if (meta.domain.is_object()) {
        return Domain::from_json(meta.domain).dim();
    }
    return 0;
}

Dataset generate_dataset(const Domain& domain, const WaldUtility& truth, const NoiseModel& noise,
                         std::size_t n, std::uint64_t seed) {
    if (truth.dim() != domain.dim()) {
        throw ShapeError("true utility and domain differ in dimension");
    }
    Dataset ds;
    ds.meta = DatasetMeta{domain.to_json(), noise.to_json(), truth.to_json(), seed, n};
    ds.records = parallel_map<ChoiceRecord>(n, [&](std::size_t i) {
        Stream rng(seed, i);
        auto [x, y] = sample_problem(domain, rng);
        const double q = q_eval(noise, u_value(truth, domain, x), u_value(truth, domain, y));
        if (rng.uniform() < q) {
            return ChoiceRecord{std::move(x), std::move(y)};
        }
        return ChoiceRecord{std::move(y), std::move(x)};
    });
    return ds;
}

Dataset make_dataset(std::vector<ChoiceRecord> records, DatasetMeta meta) {
    Dataset ds{std::move(meta), std::move(records)};
    ds.meta.n = ds.records.size();
    return ds;
}

std::string serialize_dataset(const Dataset& ds) {
    nlohmann::json meta{{"domain", ds.meta.domain}, {"noise", ds.meta.noise},
                        {"truth", ds.meta.truth},   {"seed", ds.meta.seed},
                        {"n", ds.meta.n}};
    std::string out = meta.dump();
    out += '\n';
    for (const auto& r : ds.records) {
        out += "{\"chosen\":";
        append_vector(out, r.chosen);
        out += ",\"rejected\":";
        append_vector(out, r.rejected);
        out += "}\n";
    }
    return out;
}

Dataset parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    Dataset ds;
    std::size_t expected_dim = 0;
    bool have_meta = false;
    auto fail = [&](const std::string& why) -> ConfigError {
        return ConfigError("dataset line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) {
            break;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw fail("malformed JSON");
        }
        if (!have_meta) {
            if (!j.is_object()) {
                throw fail("meta line must be an object");
            }
            for (const auto& [k, v] : j.items()) {
                if (k != "domain" && k != "noise" && k != "truth" && k != "seed" && k != "n") {
                    throw fail("unknown meta field \"" + k + "\"");
                }
            }
            try {
                ds.meta.domain = j.value("domain", nlohmann::json());
                ds.meta.noise = j.value("noise", nlohmann::json());
                ds.meta.truth = j.value("truth", nlohmann::json());
                ds.meta.seed = j.value("seed", std::uint64_t{0});
                ds.meta.n = j.at("n").get<std::size_t>();
                if (ds.meta.domain.is_object()) {
                    expected_dim = Domain::from_json(ds.meta.domain).dim();
                }
            } catch (const nlohmann::json::exception& e) {
                throw fail(std::string("bad meta: ") + e.what());
            } catch (const ConfigError& e) {
                throw fail(std::string("bad meta: ") + e.what());
            }
            have_meta = true;
            continue;
        }
        if (!j.is_object() || j.size() != 2 || !j.contains("chosen") || !j.contains("rejected")) {
            throw fail("record must be {\"chosen\": [...], \"rejected\": [...]}");
        }
        ChoiceRecord r;
        try {
            r.chosen = j.at("chosen").get<Bundle>();
            r.rejected = j.at("rejected").get<Bundle>();
        } catch (const nlohmann::json::exception&) {
            throw fail("record vectors must be numeric arrays");
        }
        if (r.chosen.size() != r.rejected.size() || r.chosen.empty()) {
            throw fail("chosen and rejected differ in dimension");
        }
        if (expected_dim == 0) {
            expected_dim = r.chosen.size();
        } else if (r.chosen.size() != expected_dim) {
            throw fail("record dimension " + std::to_string(r.chosen.size()) +
                       " does not match " + std::to_string(expected_dim));
        }
        if (r.chosen == r.rejected) {
            throw fail("chosen and rejected are identical");
        }
        ds.records.push_back(std::move(r));
    }
    if (!have_meta) {
        throw ConfigError("dataset is empty: missing meta line");
    }
    if (ds.records.size() != ds.meta.n) {
        throw ConfigError("dataset meta announces " + std::to_string(ds.meta.n) +
                          " records but " + std::to_string(ds.records.size()) + " were read");
    }
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write dataset " + path.string());
    }
    out << serialize_dataset(ds);
    if (!out) {
        throw ConfigError("failed writing dataset " + path.string());
    }
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read dataset " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

} // namespace reclab
