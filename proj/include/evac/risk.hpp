#pragma once

#include "evac/codes.hpp"
#include "evac/population.hpp"

namespace evac {

/// Exogenous hazard drivers of a run.
struct Scenario {
    StormSignal storm = StormSignal::Psws1;
    Rainfall rainfall = Rainfall::Yellow;
    TimeOfDay time_of_day = TimeOfDay::Daytime;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Weights {
    double cdm = 0.1;
    double hrf = 0.1;
    double crf = 0.1;
    friend bool operator==(const Weights&, const Weights&) = default;
};

/// Each weight in (0, 1]. Throws InputError otherwise.
void validate_weights(const Weights& w);

/// True when the three weights total 1.0 (within 1e-9).
bool sums_to_one(const Weights& w);

inline constexpr double kMaxEpsilon = 0.05;

/// Per-household hazard context that is not part of the scenario.
struct RiskContext {
    WarningSource source_of_warning = WarningSource::Authorities;
    Proximity proximity = Proximity::Far;
    /// Bounded-rationality perturbation, in [0, kMaxEpsilon].
    double epsilon = 0.0;
};

struct RiskBreakdown {
    double cdm = 0.0;
    double hrf = 0.0;
    double crf = 0.0;
    double perceived_risk = 0.0;
    double highest_possible = 0.0;
    friend bool operator==(const RiskBreakdown&, const RiskBreakdown&) = default;
};

enum class Decision { Stay, Evacuate };

double cdm_score(const HouseholdProfile& p);
double hrf_score(const Scenario& s, const RiskContext& ctx);
double crf_score(const HouseholdProfile& p);

/// 8 w_cdm + 5 w_hrf + 3 w_crf: every coded factor at its maximum.
double highest_possible_score(const Weights& w);

/// Weighted sum of precomputed factor scores plus epsilon.
RiskBreakdown combine_scores(double cdm, double hrf, double crf, const Weights& w, double epsilon);

RiskBreakdown perceived_risk(const HouseholdProfile& p, const Scenario& s, const RiskContext& ctx, const Weights& w);

/// Evacuate iff perceived risk strictly exceeds threshold * highest possible score.
Decision decide(const RiskBreakdown& b, double threshold);

} // namespace evac
