// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvcluster/threshold.h"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

using namespace cvc;

SqueezingLevel SqueezingLevel::from_decibels(double signed_db) {
    if (!std::isfinite(signed_db)) {
        throw std::invalid_argument("squeezing level must be finite");
    }
    return {signed_db};
}

SqueezingLevel SqueezingLevel::from_squeezing_magnitude(double squeezing_db) {
    return from_decibels(-squeezing_db);
}

double cvc::db_to_variance(SqueezingLevel level) {
    return 0.5 * std::pow(10.0, level.decibels / 10.0);
}

SqueezingLevel cvc::variance_to_db(double variance) {
    if (!(variance > 0) || !std::isfinite(variance)) {
        throw std::invalid_argument("variance must be positive and finite");
    }
    return {10.0 * std::log10(2.0 * variance)};
}

double cvc::squeezing_factor(SqueezingLevel level) {
    return std::sqrt(0.5 / db_to_variance(level));
}

SqueezingLevel cvc::level_from_squeezing_factor(double s) {
    if (!(s > 0)) {
        throw std::invalid_argument("squeezing factor must be positive");
    }
    return variance_to_db(0.5 / (s * s));
}

NoiseBudget &NoiseBudget::operator+=(const NoiseBudget &other) {
    q += other.q;
    p += other.p;
    return *this;
}

double cvc::gkp_bin_half_width() {
    return 0.5 * std::sqrt(std::numbers::pi);
}

namespace {

double misbin_argument(double variance) {
    if (!(variance > 0) || !std::isfinite(variance)) {
        throw std::invalid_argument("noise variance must be positive and finite");
    }
    return gkp_bin_half_width() / std::sqrt(2.0 * variance);
}

// log erfc(z); switches to the asymptotic series once erfc underflows.
double log_erfc(double z) {
    double direct = std::erfc(z);
    if (direct > 1e-300) {
        return std::log(direct);
    }
    double inv2 = 1.0 / (2.0 * z * z);
    double series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2 + 105.0 * inv2 * inv2 * inv2 * inv2;
    return -z * z - std::log(z * std::sqrt(std::numbers::pi)) + std::log(series);
}

}  // namespace

double cvc::misbin_probability(double variance) {
    return std::erfc(misbin_argument(variance));
}

double cvc::log_misbin_probability(double variance) {
    return log_erfc(misbin_argument(variance));
}

ErrorModel::ErrorModel(double multiplier, SqueezingLevel anchor_level, double anchor_probability)
    : multiplier_(multiplier), anchor_level_(anchor_level), anchor_probability_(anchor_probability) {
    if (!(multiplier > 0) || !std::isfinite(multiplier)) {
        throw std::invalid_argument("noise multiplier must be positive");
    }
}

double ErrorModel::total_variance(SqueezingLevel level) const {
    return multiplier_ * db_to_variance(level);
}

double ErrorModel::error_probability(SqueezingLevel level) const {
    return misbin_probability(total_variance(level));
}

double ErrorModel::log_error_probability(SqueezingLevel level) const {
    return log_misbin_probability(total_variance(level));
}

nlohmann::json ErrorModel::to_json() const {
    return {
        {"multiplier", multiplier_},
        {"anchor_db", anchor_level_.squeezing_magnitude()},
        {"anchor_p", anchor_probability_},
    };
}

ErrorModel cvc::calibrate_multiplier(SqueezingLevel anchor_level, double anchor_probability) {
    if (!(anchor_probability > 0 && anchor_probability < 0.5)) {
        throw std::invalid_argument("anchor probability must lie in (0, 1/2)");
    }
    double epsilon = db_to_variance(anchor_level);
    double target = std::log(anchor_probability);
    auto excess = [&](double k) {
        return log_misbin_probability(k * epsilon) - target;
    };

    double lo = 1.0;
    double hi = 1e4;
    double f_lo = excess(lo);
    if (std::abs(f_lo) <= 1e-14 * std::max(1.0, std::abs(target))) {
        return ErrorModel(1.0, anchor_level, anchor_probability);
    }
    if (f_lo > 0 || excess(hi) < 0) {
        throw std::invalid_argument("no noise multiplier in [1, 1e4] reproduces the calibration anchor");
    }
    while (hi - lo > 1e-13 * hi) {
        double mid = 0.5 * (lo + hi);
        if (excess(mid) < 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return ErrorModel(0.5 * (lo + hi), anchor_level, anchor_probability);
}

std::vector<ThresholdRow> cvc::threshold_table(const ErrorModel &model, const std::vector<double> &squeezing_db) {
    std::vector<ThresholdRow> rows;
    rows.reserve(squeezing_db.size());
    for (double db : squeezing_db) {
        auto level = SqueezingLevel::from_squeezing_magnitude(db);
        rows.push_back({db, db_to_variance(level), model.total_variance(level), model.error_probability(level)});
    }
    return rows;
}

double cvc::required_squeezing(const ErrorModel &model, double p_target) {
    if (!(p_target > 0 && p_target < 0.5)) {
        throw std::invalid_argument("target error probability must lie in (0, 1/2)");
    }
    double target = std::log(p_target);
    auto excess = [&](double db) {
        return model.log_error_probability(SqueezingLevel::from_squeezing_magnitude(db)) - target;
    };
    // Error probability falls as squeezing grows.
    double lo = -30.0;
    double hi = 80.0;
    if (excess(lo) < 0 || excess(hi) > 0) {
        throw std::invalid_argument("target error probability is outside the model's range");
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::string cvc::format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buf, end);
}

std::string cvc::threshold_table_csv(const std::vector<ThresholdRow> &rows, const std::vector<std::string> &preamble) {
    std::ostringstream out;
    for (const auto &line : preamble) {
        out << "# " << line << "\n";
    }
    out << "db,epsilon,sigma2_total,p_err\n";
    for (const auto &row : rows) {
        out << format_double(row.squeezing_db) << "," << format_double(row.epsilon) << ","
            << format_double(row.sigma2_total) << "," << format_double(row.p_err) << "\n";
    }
    return out.str();
}

nlohmann::json cvc::threshold_table_json(const ErrorModel &model, const std::vector<ThresholdRow> &rows) {
    nlohmann::json j;
    j["calibration"] = model.to_json();
    j["rows"] = nlohmann::json::array();
    for (const auto &row : rows) {
        j["rows"].push_back({
            {"db", row.squeezing_db},
            {"epsilon", row.epsilon},
            {"sigma2_total", row.sigma2_total},
            {"p_err", row.p_err},
        });
    }
    return j;
}
