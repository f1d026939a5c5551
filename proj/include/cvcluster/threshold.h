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

#ifndef CVCLUSTER_THRESHOLD_H
#define CVCLUSTER_THRESHOLD_H

#include <string>
#include <vector>

#include "json.hpp"

namespace cvc {

/// A measured quadrature variance expressed in decibels relative to vacuum.
///
/// Negative values are squeezed, positive anti-squeezed. "dB of squeezing"
/// as usually quoted (e.g. 20.5) is the magnitude of a negative level.
struct SqueezingLevel {
    double decibels = 0.0;

    static SqueezingLevel from_decibels(double signed_db);
    /// Positive squeezing magnitude, e.g. 20.5 for 20.5 dB of squeezing.
    static SqueezingLevel from_squeezing_magnitude(double squeezing_db);

    double squeezing_magnitude() const {
        return -decibels;
    }
};

/// sigma^2 = 10^(dB/10) / 2.
double db_to_variance(SqueezingLevel level);
SqueezingLevel variance_to_db(double variance);

/// Squeezing factor s with 1/(2 s^2) equal to the level's variance.
double squeezing_factor(SqueezingLevel level);
SqueezingLevel level_from_squeezing_factor(double s);

/// Per-quadrature noise variance of one mode. Adds under concatenation.
struct NoiseBudget {
    double q = 0.0;
    double p = 0.0;

    NoiseBudget &operator+=(const NoiseBudget &other);
    friend NoiseBudget operator+(NoiseBudget a, const NoiseBudget &b) {
        return a += b;
    }
};

/// Half-width of a GKP decoding bin, sqrt(pi)/2.
double gkp_bin_half_width();

/// Probability that zero-mean Gaussian noise of the given variance lands
/// outside the nearest GKP bin: erfc(sqrt(pi) / (2 sqrt(2 variance))).
double misbin_probability(double variance);
/// Natural log of misbin_probability, accurate where the probability
/// underflows a double.
double log_misbin_probability(double variance);

/// Maps the squeezed-quadrature variance epsilon of the cluster to a
/// qubit-level error rate through total noise multiplier * epsilon.
///
/// The model only ever sees epsilon (through a SqueezingLevel); there is no
/// anti-squeezing input.
class ErrorModel {
   public:
    ErrorModel(double multiplier, SqueezingLevel anchor_level, double anchor_probability);

    double multiplier() const {
        return multiplier_;
    }
    SqueezingLevel anchor_level() const {
        return anchor_level_;
    }
    double anchor_probability() const {
        return anchor_probability_;
    }

    double total_variance(SqueezingLevel level) const;
    double error_probability(SqueezingLevel level) const;
    double log_error_probability(SqueezingLevel level) const;

    nlohmann::json to_json() const;

   private:
    double multiplier_;
    SqueezingLevel anchor_level_;
    double anchor_probability_;
};

/// Solves misbin_probability(k * epsilon(anchor)) = anchor_probability for k in
/// [1, 1e4] by bisection (1e-13 relative). Throws std::invalid_argument when the
/// anchor is infeasible.
ErrorModel calibrate_multiplier(SqueezingLevel anchor_level, double anchor_probability);

struct ThresholdRow {
    double squeezing_db;
    double epsilon;
    double sigma2_total;
    double p_err;
};

/// Rows in the order given; `squeezing_db` are positive magnitudes.
std::vector<ThresholdRow> threshold_table(const ErrorModel &model, const std::vector<double> &squeezing_db);

/// Squeezing magnitude (dB) at which the model reaches `p_target`.
double required_squeezing(const ErrorModel &model, double p_target);

/// CSV with header `db,epsilon,sigma2_total,p_err` and shortest round-trip
/// number formatting. `preamble` lines are written first as `# ` comments.
std::string threshold_table_csv(const std::vector<ThresholdRow> &rows, const std::vector<std::string> &preamble = {});
nlohmann::json threshold_table_json(const ErrorModel &model, const std::vector<ThresholdRow> &rows);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cvc

#endif
