#include "evac/common.hpp"
#include "evac/risk.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace evac;

namespace {

// Straight-line recomputation from raw code tables.
struct RawCase {
    double gender, educ, income, owns, children, elderly, disability, residency;
    double quality, floors, experience;
    double storm, rain, time, source, proximity;
    double epsilon;
    Weights w;
};

double oracle(const RawCase& c)
{
    const double cdm =
        c.gender + c.educ + c.income + c.owns + c.children + c.elderly + c.disability + c.residency;
    const double hrf = c.storm + c.rain + c.time + c.source + c.proximity;
    const double crf = c.quality + c.floors + c.experience;
    return cdm * c.w.cdm + hrf * c.w.hrf + crf * c.w.crf + c.epsilon;
}

template <class E>
E random_level(Rng& rng)
{
    return Coding<E>::levels[rng.below(level_count<E>())].value;
}

} // namespace

TEST_CASE("factor sums")
{
    HouseholdProfile p;
    p.head_gender = HeadGender::Female;
    p.income_level = Income::Low;
    p.educ_level = Education::GradeSchool;
    p.has_children = Presence::Yes;
    p.house_ownership = Ownership::Renting;
    p.years_of_residency = Residency::AtMost10Years;
    CHECK(cdm_score(p) == 6.0);
    CHECK(cdm_score(HouseholdProfile{}) == 2.0);
    CHECK(cdm_score(test::max_profile(0, 0)) == 8.0);

    CHECK(hrf_score({StormSignal::Psws1, Rainfall::Yellow, TimeOfDay::Daytime},
                    {WarningSource::Friends, Proximity::Far, 0.0}) == 1.5);
    CHECK(hrf_score({StormSignal::Psws3, Rainfall::Red, TimeOfDay::Nighttime},
                    {WarningSource::Authorities, Proximity::Within, 0.0}) == 5.0);
    CHECK(hrf_score({StormSignal::Psws2, Rainfall::Orange, TimeOfDay::Nighttime},
                    {WarningSource::Authorities, Proximity::Within, 0.0}) == 4.0);

    HouseholdProfile c;
    CHECK(crf_score(c) == 1.25);
    c.house_quality = HouseQuality::LightMaterials;
    c.floor_levels = FloorLevels::One;
    c.typhoon_experience = TyphoonExperience::No;
    CHECK(crf_score(c) == 3.0);
    c.house_quality = HouseQuality::Wood;
    c.typhoon_experience = TyphoonExperience::Yes;
    CHECK(crf_score(c) == 2.0);
}

TEST_CASE("highest possible score")
{
    CHECK(highest_possible_score({0.2, 0.5, 0.3}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(highest_possible_score({1, 1, 1}) == 16.0);
    CHECK(highest_possible_score({0.1, 0.8, 0.1}) == doctest::Approx(5.1).epsilon(1e-12));
}

TEST_CASE("combination and decision")
{
    const auto b = combine_scores(6.0, 3.0, 2.0, {0.3, 0.4, 0.3}, 0.0);
    CHECK(b.perceived_risk == doctest::Approx(3.6).epsilon(1e-12));

    RiskBreakdown fixed;
    fixed.perceived_risk = 3.6;
    fixed.highest_possible = 5.3;
    CHECK(decide(fixed, 0.7) == Decision::Stay);

    // exact boundary: 0.5 * 4 == 2 with no rounding
    fixed.perceived_risk = 2.0;
    fixed.highest_possible = 4.0;
    CHECK(decide(fixed, 0.5) == Decision::Stay);
    fixed.perceived_risk = std::nextafter(2.0, 3.0);
    CHECK(decide(fixed, 0.5) == Decision::Evacuate);

    const Weights w{0.4, 0.35, 0.25};
    const Scenario top{StormSignal::Psws3, Rainfall::Red, TimeOfDay::Nighttime};
    const auto all_max = perceived_risk(test::max_profile(0, 0), top, {WarningSource::Authorities, Proximity::Within, 0.0}, w);
    CHECK(all_max.perceived_risk == all_max.highest_possible);
    CHECK(decide(all_max, 1.0) == Decision::Stay);
    const auto nudged =
        perceived_risk(test::max_profile(0, 0), top, {WarningSource::Authorities, Proximity::Within, 0.05}, w);
    for (double t : {0.0, 0.3, 0.7, 1.0}) CHECK(decide(nudged, t) == Decision::Evacuate);
}

TEST_CASE("weights validation")
{
    CHECK_NOTHROW(validate_weights({0.1, 1.0, 0.5}));
    CHECK_THROWS_AS(validate_weights({0.0, 0.5, 0.5}), InputError);
    CHECK_THROWS_AS(validate_weights({0.5, 1.1, 0.5}), InputError);
    CHECK_THROWS_AS(validate_weights({0.5, NAN, 0.5}), InputError);
    CHECK(sums_to_one({0.1, 0.1, 0.8}));
    CHECK(sums_to_one({0.7, 0.2, 0.1}));
    CHECK_FALSE(sums_to_one({0.1, 0.1, 0.1}));
}

TEST_CASE("perceived risk matches a straight-line oracle")
{
    Rng rng(31337);
    for (int i = 0; i < 1000; ++i) {
        HouseholdProfile p;
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) {
            set_field_level(p, coded_field(f), rng.below(field_codes(coded_field(f)).size()));
        }
        const Scenario s{random_level<StormSignal>(rng), random_level<Rainfall>(rng), random_level<TimeOfDay>(rng)};
        const RiskContext ctx{random_level<WarningSource>(rng), random_level<Proximity>(rng),
                              rng.uniform_closed(0.0, kMaxEpsilon)};
        const Weights w{rng.uniform_closed(0.01, 1.0), rng.uniform_closed(0.01, 1.0), rng.uniform_closed(0.01, 1.0)};

        const RawCase raw{field_code(p, CodedField::HeadGender),     field_code(p, CodedField::EducLevel),
                          field_code(p, CodedField::IncomeLevel),    field_code(p, CodedField::HouseOwnership),
                          field_code(p, CodedField::HasChildren),    field_code(p, CodedField::HasElderly),
                          field_code(p, CodedField::WithDisability), field_code(p, CodedField::YearsOfResidency),
                          field_code(p, CodedField::HouseQuality),   field_code(p, CodedField::FloorLevels),
                          field_code(p, CodedField::TyphoonExperience), code_of(s.storm),
                          code_of(s.rainfall),                       code_of(s.time_of_day),
                          code_of(ctx.source_of_warning),            code_of(ctx.proximity),
                          ctx.epsilon,                               w};
        const auto b = perceived_risk(p, s, ctx, w);
        CHECK(std::abs(b.perceived_risk - oracle(raw)) <= 1e-12);
        CHECK(b.highest_possible == doctest::Approx(8 * w.cdm + 5 * w.hrf + 3 * w.crf).epsilon(1e-12));

        // scale covariance
        const double k = rng.uniform_closed(0.1, 1.0);
        const auto scaled =
            combine_scores(b.cdm, b.hrf, b.crf, {w.cdm * k, w.hrf * k, w.crf * k}, ctx.epsilon * k);
        const double t = rng.uniform01();
        const double margin = b.perceived_risk - t * b.highest_possible;
        if (std::abs(margin) > 1e-9) CHECK(decide(scaled, t) == decide(b, t));
    }
}

TEST_CASE("exhaustive bounds at epsilon 0")
{
    const Weights w{0.3, 0.5, 0.2};
    const double lo = 2 * w.cdm + 1.5 * w.hrf + 1.25 * w.crf;
    const double hi = highest_possible_score(w);
    std::size_t checked = 0;
    std::vector<std::size_t> levels(kCodedFieldCount, 0);
    HouseholdProfile p;
    while (true) {
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) set_field_level(p, coded_field(f), levels[f]);
        const double cdm = cdm_score(p);
        const double crf = crf_score(p);
        CHECK((cdm >= 2.0 && cdm <= 8.0));
        CHECK((crf >= 1.25 && crf <= 3.0));
        for (const auto& st : Coding<StormSignal>::levels)
            for (const auto& rf : Coding<Rainfall>::levels)
                for (const auto& td : Coding<TimeOfDay>::levels)
                    for (const auto& src : Coding<WarningSource>::levels)
                        for (const auto& px : Coding<Proximity>::levels) {
                            const Scenario s{st.value, rf.value, td.value};
                            const RiskContext ctx{src.value, px.value, 0.0};
                            const double hrf = hrf_score(s, ctx);
                            const double pr = combine_scores(cdm, hrf, crf, w, 0.0).perceived_risk;
                            if (hrf < 1.5 || hrf > 5.0 || pr < lo - 1e-12 || pr > hi + 1e-12) {
                                FAIL("bound violated");
                            }
                            ++checked;
                        }
        std::size_t f = 0;
        while (f < kCodedFieldCount && ++levels[f] == field_codes(coded_field(f)).size()) levels[f++] = 0;
        if (f == kCodedFieldCount) break;
    }
    CHECK(checked == 3 * 3 * 2 * 2 * 2 * 2 * 2 * 2 * 3 * 2 * 2 * 3 * 3 * 2 * 3 * 3);
}

TEST_CASE("perceived risk is monotone in each hazard factor")
{
    const HouseholdProfile p = test::profile(0, 0);
    const Weights w{0.2, 0.6, 0.2};
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        Scenario s{random_level<StormSignal>(rng), random_level<Rainfall>(rng), random_level<TimeOfDay>(rng)};
        RiskContext ctx{random_level<WarningSource>(rng), random_level<Proximity>(rng), 0.01};
        const double base = perceived_risk(p, s, ctx, w).perceived_risk;
        auto bump = [&](auto& field) {
            using E = std::decay_t<decltype(field)>;
            const auto saved = field;
            if (index_of(field) + 1 < level_count<E>()) {
                field = static_cast<E>(index_of(field) + 1);
                CHECK(perceived_risk(p, s, ctx, w).perceived_risk >= base);
            }
            field = saved;
        };
        bump(s.storm);
        bump(s.rainfall);
        bump(s.time_of_day);
        bump(ctx.source_of_warning);
        bump(ctx.proximity);
    }
}
