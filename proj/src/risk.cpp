#include "evac/risk.hpp"

#include "evac/common.hpp"

#include <cmath>

namespace evac {

void validate_weights(const Weights& w)
{
    for (double v : {w.cdm, w.hrf, w.crf}) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw InputError("weights must each lie in (0, 1]; got " + format_double(w.cdm) + "," +
                             format_double(w.hrf) + "," + format_double(w.crf));
        }
    }
}

bool sums_to_one(const Weights& w)
{
    return std::abs(w.cdm + w.hrf + w.crf - 1.0) <= 1e-9;
}

double cdm_score(const HouseholdProfile& p)
{
    return code_of(p.head_gender) + code_of(p.income_level) + code_of(p.educ_level) + code_of(p.has_children) +
           code_of(p.has_elderly) + code_of(p.with_disability) + code_of(p.house_ownership) +
           code_of(p.years_of_residency);
}

double hrf_score(const Scenario& s, const RiskContext& ctx)
{
    return code_of(s.storm) + code_of(s.rainfall) + code_of(ctx.proximity) + code_of(ctx.source_of_warning) +
           code_of(s.time_of_day);
}

double crf_score(const HouseholdProfile& p)
{
    return code_of(p.house_quality) + code_of(p.floor_levels) + code_of(p.typhoon_experience);
}

double highest_possible_score(const Weights& w)
{
    // Same term order as combine_scores, so all-maximum factors reproduce it bit for bit.
    return 8.0 * w.cdm + 5.0 * w.hrf + 3.0 * w.crf;
}

RiskBreakdown combine_scores(double cdm, double hrf, double crf, const Weights& w, double epsilon)
{
    RiskBreakdown b;
    b.cdm = cdm;
    b.hrf = hrf;
    b.crf = crf;
    b.perceived_risk = cdm * w.cdm + hrf * w.hrf + crf * w.crf + epsilon;
    b.highest_possible = highest_possible_score(w);
    return b;
}

RiskBreakdown perceived_risk(const HouseholdProfile& p, const Scenario& s, const RiskContext& ctx, const Weights& w)
{
    return combine_scores(cdm_score(p), hrf_score(s, ctx), crf_score(p), w, ctx.epsilon);
}

Decision decide(const RiskBreakdown& b, double threshold)
{
    return b.perceived_risk > threshold * b.highest_possible ? Decision::Evacuate : Decision::Stay;
}

} // namespace evac
