#include "evac/population.hpp"

#include "evac/common.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace evac {

namespace {

template <class E>
struct FieldTable {
    std::array<double, level_count<E>()> codes{};
    std::array<std::string_view, level_count<E>()> names{};
    constexpr FieldTable()
    {
        for (std::size_t i = 0; i < level_count<E>(); ++i) {
            codes[i] = Coding<E>::levels[i].code;
            names[i] = Coding<E>::levels[i].name;
        }
    }
};

constexpr FieldTable<HeadGender> kGender;
constexpr FieldTable<Education> kEducation;
constexpr FieldTable<Income> kIncome;
constexpr FieldTable<Ownership> kOwnership;
constexpr FieldTable<Presence> kPresence;
constexpr FieldTable<Residency> kResidency;
constexpr FieldTable<HouseQuality> kQuality;
constexpr FieldTable<FloorLevels> kFloors;
constexpr FieldTable<TyphoonExperience> kExperience;

template <class F>
decltype(auto) visit_field(CodedField f, F&& fn)
{
    switch (f) {
    case CodedField::HeadGender: return fn(kGender);
    case CodedField::EducLevel: return fn(kEducation);
    case CodedField::IncomeLevel: return fn(kIncome);
    case CodedField::HouseOwnership: return fn(kOwnership);
    case CodedField::HasChildren:
    case CodedField::HasElderly:
    case CodedField::WithDisability: return fn(kPresence);
    case CodedField::YearsOfResidency: return fn(kResidency);
    case CodedField::HouseQuality: return fn(kQuality);
    case CodedField::FloorLevels: return fn(kFloors);
    case CodedField::TyphoonExperience: return fn(kExperience);
    }
    throw std::invalid_argument("unknown coded field");
}

constexpr std::array<std::string_view, kCodedFieldCount> kFieldNames{
    "head_gender",  "educ_level",         "income_level",  "house_ownership", "has_children",      "has_elderly",
    "with_disability", "years_of_residency", "house_quality", "floor_levels",    "typhoon_experience",
};

} // namespace

std::string_view field_name(CodedField f)
{
    return kFieldNames[static_cast<std::size_t>(f)];
}

CodedField coded_field(std::size_t index)
{
    if (index >= kCodedFieldCount) {
        throw std::out_of_range("coded_field index");
    }
    return static_cast<CodedField>(index);
}

std::span<const double> field_codes(CodedField f)
{
    return visit_field(f, [](const auto& t) { return std::span<const double>(t.codes); });
}

std::span<const std::string_view> field_level_names(CodedField f)
{
    return visit_field(f, [](const auto& t) { return std::span<const std::string_view>(t.names); });
}

std::size_t field_level(const HouseholdProfile& p, CodedField f)
{
    switch (f) {
    case CodedField::HeadGender: return index_of(p.head_gender);
    case CodedField::EducLevel: return index_of(p.educ_level);
    case CodedField::IncomeLevel: return index_of(p.income_level);
    case CodedField::HouseOwnership: return index_of(p.house_ownership);
    case CodedField::HasChildren: return index_of(p.has_children);
    case CodedField::HasElderly: return index_of(p.has_elderly);
    case CodedField::WithDisability: return index_of(p.with_disability);
    case CodedField::YearsOfResidency: return index_of(p.years_of_residency);
    case CodedField::HouseQuality: return index_of(p.house_quality);
    case CodedField::FloorLevels: return index_of(p.floor_levels);
    case CodedField::TyphoonExperience: return index_of(p.typhoon_experience);
    }
    throw std::invalid_argument("unknown coded field");
}

double field_code(const HouseholdProfile& p, CodedField f)
{
    return field_codes(f)[field_level(p, f)];
}

void set_field_level(HouseholdProfile& p, CodedField f, std::size_t level)
{
    if (level >= field_codes(f).size()) {
        throw std::out_of_range("set_field_level: level out of range");
    }
    switch (f) {
    case CodedField::HeadGender: p.head_gender = static_cast<HeadGender>(level); return;
    case CodedField::EducLevel: p.educ_level = static_cast<Education>(level); return;
    case CodedField::IncomeLevel: p.income_level = static_cast<Income>(level); return;
    case CodedField::HouseOwnership: p.house_ownership = static_cast<Ownership>(level); return;
    case CodedField::HasChildren: p.has_children = static_cast<Presence>(level); return;
    case CodedField::HasElderly: p.has_elderly = static_cast<Presence>(level); return;
    case CodedField::WithDisability: p.with_disability = static_cast<Presence>(level); return;
    case CodedField::YearsOfResidency: p.years_of_residency = static_cast<Residency>(level); return;
    case CodedField::HouseQuality: p.house_quality = static_cast<HouseQuality>(level); return;
    case CodedField::FloorLevels: p.floor_levels = static_cast<FloorLevels>(level); return;
    case CodedField::TyphoonExperience: p.typhoon_experience = static_cast<TyphoonExperience>(level); return;
    }
}

// ---------------------------------------------------------------------------
// PopulationSpec

void PopulationSpec::validate() const
{
    if (count < 0) {
        throw InputError("population spec: count must be >= 0");
    }
    for (std::size_t i = 0; i < kCodedFieldCount; ++i) {
        const auto f = coded_field(i);
        const auto& probs = probabilities[i];
        const std::string name(field_name(f));
        if (probs.size() != field_codes(f).size()) {
            throw InputError("population spec: " + name + " needs " + std::to_string(field_codes(f).size()) +
                             " probabilities");
        }
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw InputError("population spec: " + name + " probability outside [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InputError("population spec: " + name + " probabilities sum to " + format_double(sum));
        }
    }
    if (members_min < 1 || members_max < members_min) {
        throw InputError("population spec: need 1 <= members.min <= members.max");
    }
    if (!(members_mean >= static_cast<double>(members_min) && members_mean <= static_cast<double>(members_max))) {
        throw InputError("population spec: members.mean outside [members.min, members.max]");
    }
}

PopulationSpec default_population_spec()
{
    PopulationSpec s;
    auto set = [&](CodedField f, std::vector<double> p) { s.probabilities[static_cast<std::size_t>(f)] = std::move(p); };
    set(CodedField::HeadGender, {0.75, 0.25});
    set(CodedField::EducLevel, {0.10, 0.40, 0.50});
    set(CodedField::IncomeLevel, {0.05, 0.25, 0.70});
    set(CodedField::HouseOwnership, {0.80, 0.20});
    set(CodedField::HasChildren, {0.35, 0.65});
    set(CodedField::HasElderly, {0.65, 0.35});
    set(CodedField::WithDisability, {0.97, 0.03});
    set(CodedField::YearsOfResidency, {0.70, 0.30});
    set(CodedField::HouseQuality, {0.15, 0.25, 0.60});
    set(CodedField::FloorLevels, {0.08, 0.92});
    set(CodedField::TyphoonExperience, {0.55, 0.45});
    return s;
}

PopulationSpec parse_population_spec(std::string_view text, const std::string& source_name)
{
    auto kv = KeyValueFile::parse(text, source_name);
    PopulationSpec spec = default_population_spec();
    spec.count = kv.take_int("count", spec.count);
    for (std::size_t i = 0; i < kCodedFieldCount; ++i) {
        const auto f = coded_field(i);
        const auto names = field_level_names(f);
        std::size_t given = 0;
        std::vector<double> probs(names.size(), 0.0);
        for (std::size_t l = 0; l < names.size(); ++l) {
            const std::string key = std::string(field_name(f)) + "." + std::string(names[l]);
            if (kv.has(key)) {
                probs[l] = kv.take_double(key, 0.0);
                ++given;
            }
        }
        if (given == names.size()) {
            spec.probabilities[i] = std::move(probs);
        } else if (given != 0) {
            throw InputError(source_name + ": " + std::string(field_name(f)) +
                             " must list a probability for every level");
        }
    }
    spec.members_min = kv.take_int("members.min", spec.members_min);
    spec.members_max = kv.take_int("members.max", spec.members_max);
    spec.members_mean = kv.take_double("members.mean", spec.members_mean);
    kv.finish();
    spec.validate();
    return spec;
}

PopulationSpec load_population_spec(const std::string& path)
{
    return parse_population_spec(read_text_file(path), path);
}

std::string serialize_population_spec(const PopulationSpec& spec)
{
    std::ostringstream out;
    out << "# Synthetic household marginals. Illustrative values, not census data.\n";
    out << "count = " << spec.count << "\n";
    for (std::size_t i = 0; i < kCodedFieldCount; ++i) {
        const auto f = coded_field(i);
        const auto names = field_level_names(f);
        for (std::size_t l = 0; l < names.size(); ++l) {
            out << field_name(f) << "." << names[l] << " = " << format_double(spec.probabilities[i][l]) << "\n";
        }
    }
    out << "members.min = " << spec.members_min << "\n";
    out << "members.max = " << spec.members_max << "\n";
    out << "members.mean = " << format_double(spec.members_mean) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

std::size_t sample_level(Rng& rng, std::span<const double> probs)
{
    const double u = rng.uniform01();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            last_positive = i;
        }
        cum += probs[i];
        if (u < cum) {
            return i;
        }
    }
    return last_positive; // u landed in the rounding gap above the total
}

} // namespace

std::vector<HouseholdProfile> synthesize(const PopulationSpec& spec, const World& world, std::uint64_t seed)
{
    spec.validate();
    const auto buildings = world.buildings();
    if (static_cast<std::size_t>(spec.count) > buildings.size()) {
        throw InputError("synthesize: " + std::to_string(spec.count) + " households exceed " +
                         std::to_string(buildings.size()) + " buildings");
    }

    Rng attributes(stable_hash({seed, 1}));
    Rng placement(stable_hash({seed, 2}));

    std::vector<std::size_t> order(buildings.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[placement.below(i)]);
    }

    const auto span = static_cast<std::uint64_t>(spec.members_max - spec.members_min);
    const double p_member = span == 0 ? 0.0 : (spec.members_mean - static_cast<double>(spec.members_min)) /
                                                  static_cast<double>(span);

    std::vector<HouseholdProfile> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (std::int64_t i = 0; i < spec.count; ++i) {
        HouseholdProfile p;
        p.id = i;
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) {
            set_field_level(p, coded_field(f), sample_level(attributes, spec.probabilities[f]));
        }
        // Shifted binomial: exact mean, bounded support.
        p.members = spec.members_min;
        for (std::uint64_t k = 0; k < span; ++k) {
            if (attributes.uniform01() < p_member) {
                ++p.members;
            }
        }
        p.building_id = buildings[order[static_cast<std::size_t>(i)]].id;
        out.push_back(p);
    }
    return out;
}

void validate_population(std::span<const HouseholdProfile> profiles, const World& world)
{
    std::set<std::int64_t> ids;
    std::set<std::int64_t> used;
    for (const auto& p : profiles) {
        const std::string name = "household " + std::to_string(p.id);
        if (!ids.insert(p.id).second) {
            throw InputError("duplicate household id " + std::to_string(p.id));
        }
        if (p.members < 1) {
            throw InputError(name + ": members must be >= 1");
        }
        if (!world.find_building(p.building_id)) {
            throw InputError(name + ": building " + std::to_string(p.building_id) + " not in world");
        }
        if (!used.insert(p.building_id).second) {
            throw InputError(name + ": building " + std::to_string(p.building_id) + " already assigned");
        }
    }
}

// ---------------------------------------------------------------------------
// CSV

std::string population_to_csv(std::span<const HouseholdProfile> profiles)
{
    std::ostringstream out;
    out << kPopulationCsvHeader << "\n";
    for (const auto& p : profiles) {
        out << p.id;
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) {
            out << ',' << format_double(field_code(p, coded_field(f)));
        }
        out << ',' << p.members << ',' << p.building_id << "\n";
    }
    return out.str();
}

std::vector<HouseholdProfile> population_from_csv(std::string_view text, const World& world,
                                                  const std::string& source_name)
{
    auto lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty() || trim(lines.front()) != kPopulationCsvHeader) {
        throw InputError(source_name + ": header must be '" + std::string(kPopulationCsvHeader) + "'");
    }
    const auto columns = split(kPopulationCsvHeader, ',');

    std::vector<HouseholdProfile> out;
    std::set<std::int64_t> used_buildings;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const std::string at = source_name + ": row " + std::to_string(row + 1);
        const auto cells = split(trim(lines[row]), ',');
        if (cells.size() != columns.size()) {
            throw InputError(at + ": expected " + std::to_string(columns.size()) + " columns");
        }
        auto where = [&](std::size_t col) { return at + ": " + std::string(columns[col]); };
        HouseholdProfile p;
        p.id = parse_int(cells[0], where(0));
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) {
            const auto field = coded_field(f);
            const double code = parse_double(cells[f + 1], where(f + 1));
            const auto codes = field_codes(field);
            std::size_t level = codes.size();
            for (std::size_t l = 0; l < codes.size(); ++l) {
                if (codes[l] == code) {
                    level = l;
                }
            }
            if (level == codes.size()) {
                throw InputError(where(f + 1) + ": invalid code " + std::string(trim(cells[f + 1])));
            }
            set_field_level(p, field, level);
        }
        p.members = parse_int(cells[12], where(12));
        if (p.members < 1) {
            throw InputError(where(12) + ": must be >= 1");
        }
        p.building_id = parse_int(cells[13], where(13));
        if (!world.find_building(p.building_id)) {
            throw InputError(where(13) + ": unknown building " + std::to_string(p.building_id));
        }
        if (!used_buildings.insert(p.building_id).second) {
            throw InputError(where(13) + ": building " + std::to_string(p.building_id) + " assigned twice");
        }
        out.push_back(p);
    }
    validate_population(out, world);
    return out;
}

std::vector<HouseholdProfile> load_population(const std::string& path, const World& world)
{
    return population_from_csv(read_text_file(path), world, path);
}

void save_population(std::span<const HouseholdProfile> profiles, const std::string& path)
{
    write_text_file(path, population_to_csv(profiles));
}

} // namespace evac
