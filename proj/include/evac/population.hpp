#pragma once

#include "evac/codes.hpp"
#include "evac/geo.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

struct HouseholdProfile {
    std::int64_t id = 0;
    HeadGender head_gender = HeadGender::Male;
    Education educ_level = Education::College;
    Income income_level = Income::High;
    Ownership house_ownership = Ownership::Owns;
    Presence has_children = Presence::No;
    Presence has_elderly = Presence::No;
    Presence with_disability = Presence::No;
    Residency years_of_residency = Residency::MoreThan10Years;
    HouseQuality house_quality = HouseQuality::Concrete;
    FloorLevels floor_levels = FloorLevels::MoreThanOne;
    TyphoonExperience typhoon_experience = TyphoonExperience::Yes;
    std::int64_t members = 1;
    std::int64_t building_id = 0;

    friend bool operator==(const HouseholdProfile&, const HouseholdProfile&) = default;
};

/// The eleven coded profile columns, in CSV order.
enum class CodedField {
    HeadGender,
    EducLevel,
    IncomeLevel,
    HouseOwnership,
    HasChildren,
    HasElderly,
    WithDisability,
    YearsOfResidency,
    HouseQuality,
    FloorLevels,
    TyphoonExperience,
};
inline constexpr std::size_t kCodedFieldCount = 11;

std::string_view field_name(CodedField f);
/// Allowed codes for the field, ascending; category index == position.
std::span<const double> field_codes(CodedField f);
std::span<const std::string_view> field_level_names(CodedField f);
std::size_t field_level(const HouseholdProfile& p, CodedField f);
double field_code(const HouseholdProfile& p, CodedField f);
void set_field_level(HouseholdProfile& p, CodedField f, std::size_t level);
CodedField coded_field(std::size_t index);

/// Marginal distributions for synthetic households. Fields are independent.
struct PopulationSpec {
    std::int64_t count = 570;
    /// Per field, one probability per level (same order as field_codes).
    std::array<std::vector<double>, kCodedFieldCount> probabilities;
    std::int64_t members_min = 1;
    std::int64_t members_max = 10;
    double members_mean = 4.4;

    /// Throws InputError if any distribution is malformed.
    void validate() const;
};

/// Illustrative marginals for a rural coastal village; not census figures.
PopulationSpec default_population_spec();

PopulationSpec parse_population_spec(std::string_view text, const std::string& source_name = "<population spec>");
PopulationSpec load_population_spec(const std::string& path);
std::string serialize_population_spec(const PopulationSpec& spec);

/// Samples `spec.count` households and assigns them to distinct buildings.
/// Pure function of its arguments.
std::vector<HouseholdProfile> synthesize(const PopulationSpec& spec, const World& world, std::uint64_t seed);

/// Checks codes, member counts, building existence and one household per building.
void validate_population(std::span<const HouseholdProfile> profiles, const World& world);

inline constexpr std::string_view kPopulationCsvHeader =
    "id,head_gender,educ_level,income_level,house_ownership,has_children,has_elderly,with_disability,"
    "years_of_residency,house_quality,floor_levels,typhoon_experience,members,building_id";

std::string population_to_csv(std::span<const HouseholdProfile> profiles);
std::vector<HouseholdProfile> population_from_csv(std::string_view text, const World& world,
                                                  const std::string& source_name = "<population>");

std::vector<HouseholdProfile> load_population(const std::string& path, const World& world);
void save_population(std::span<const HouseholdProfile> profiles, const std::string& path);

} // namespace evac
