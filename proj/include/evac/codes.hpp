#pragma once

// Coded decision-factor levels. Every enum is declared in ascending code
// order, so the enumerator index is also the rank of its risk contribution.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace evac {

template <class E>
struct Level {
    E value;
    double code;
    std::string_view name;
};

template <class E>
struct Coding; // specialized below: `field` and `levels`

// Characteristics of the decision maker
enum class HeadGender { Male, Female };
enum class Education { College, HighSchool, GradeSchool };
enum class Income { High, Middle, Low };
enum class Ownership { Owns, Renting };
enum class Presence { No, Yes };
enum class Residency { MoreThan10Years, AtMost10Years };

// Capacity-related factors
enum class HouseQuality { Concrete, Wood, LightMaterials };
enum class FloorLevels { MoreThanOne, One };
enum class TyphoonExperience { Yes, No };

// Hazard-related factors
enum class StormSignal { Psws1, Psws2, Psws3 };
enum class Rainfall { Yellow, Orange, Red };
enum class TimeOfDay { Daytime, Nighttime };
enum class WarningSource { Friends, Media, Authorities };
enum class Proximity { Far, Near, Within };

#define EVAC_CODING(E, FIELD, N, ...)                                  \
    template <>                                                        \
    struct Coding<E> {                                                 \
        static constexpr std::string_view field = FIELD;               \
        static constexpr std::array<Level<E>, N> levels{{__VA_ARGS__}}; \
    }

EVAC_CODING(HeadGender, "head_gender", 2, {HeadGender::Male, 0.5, "male"}, {HeadGender::Female, 1.0, "female"});
EVAC_CODING(Education, "educ_level", 3, {Education::College, 0.25, "college"},
            {Education::HighSchool, 0.5, "high_school"}, {Education::GradeSchool, 1.0, "grade_school"});
EVAC_CODING(Income, "income_level", 3, {Income::High, 0.25, "high"}, {Income::Middle, 0.5, "middle"},
            {Income::Low, 1.0, "low"});
EVAC_CODING(Ownership, "house_ownership", 2, {Ownership::Owns, 0.5, "owns"}, {Ownership::Renting, 1.0, "renting"});
EVAC_CODING(Presence, "presence", 2, {Presence::No, 0.0, "no"}, {Presence::Yes, 1.0, "yes"});
EVAC_CODING(Residency, "years_of_residency", 2, {Residency::MoreThan10Years, 0.5, "more_than_10"},
            {Residency::AtMost10Years, 1.0, "at_most_10"});
EVAC_CODING(HouseQuality, "house_quality", 3, {HouseQuality::Concrete, 0.25, "concrete"},
            {HouseQuality::Wood, 0.5, "wood"}, {HouseQuality::LightMaterials, 1.0, "light"});
EVAC_CODING(FloorLevels, "floor_levels", 2, {FloorLevels::MoreThanOne, 0.5, "more_than_one"},
            {FloorLevels::One, 1.0, "one"});
EVAC_CODING(TyphoonExperience, "typhoon_experience", 2, {TyphoonExperience::Yes, 0.5, "yes"},
            {TyphoonExperience::No, 1.0, "no"});
EVAC_CODING(StormSignal, "storm", 3, {StormSignal::Psws1, 0.25, "psws1"}, {StormSignal::Psws2, 0.5, "psws2"},
            {StormSignal::Psws3, 1.0, "psws3"});
EVAC_CODING(Rainfall, "rainfall", 3, {Rainfall::Yellow, 0.25, "yellow"}, {Rainfall::Orange, 0.5, "orange"},
            {Rainfall::Red, 1.0, "red"});
EVAC_CODING(TimeOfDay, "time_of_day", 2, {TimeOfDay::Daytime, 0.5, "day"}, {TimeOfDay::Nighttime, 1.0, "night"});
EVAC_CODING(WarningSource, "source_of_warning", 3, {WarningSource::Friends, 0.25, "friends"},
            {WarningSource::Media, 0.5, "media"}, {WarningSource::Authorities, 1.0, "authorities"});
EVAC_CODING(Proximity, "proximity", 3, {Proximity::Far, 0.25, "far"}, {Proximity::Near, 0.5, "near"},
            {Proximity::Within, 1.0, "within"});

#undef EVAC_CODING

template <class E>
constexpr std::size_t level_count()
{
    return Coding<E>::levels.size();
}

template <class E>
constexpr std::size_t index_of(E e)
{
    return static_cast<std::size_t>(e);
}

template <class E>
constexpr double code_of(E e)
{
    return Coding<E>::levels[index_of(e)].code;
}

template <class E>
constexpr std::string_view name_of(E e)
{
    return Coding<E>::levels[index_of(e)].name;
}

/// Exact match against the table; codes are dyadic so equality is safe.
template <class E>
constexpr std::optional<E> from_code(double code)
{
    for (const auto& level : Coding<E>::levels) {
        if (level.code == code) {
            return level.value;
        }
    }
    return std::nullopt;
}

template <class E>
constexpr std::optional<E> from_name(std::string_view name)
{
    for (const auto& level : Coding<E>::levels) {
        if (level.name == name) {
            return level.value;
        }
    }
    return std::nullopt;
}

/// PSWS signal number (1..3) as used for sweep axes and regression predictors.
constexpr int signal_number(StormSignal s)
{
    return static_cast<int>(s) + 1;
}

constexpr std::optional<StormSignal> storm_from_signal(int signal)
{
    if (signal < 1 || signal > 3) {
        return std::nullopt;
    }
    return static_cast<StormSignal>(signal - 1);
}

} // namespace evac
