#pragma once

#include "evac/common.hpp"
#include "evac/geo.hpp"
#include "evac/population.hpp"
#include "evac/risk.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace evac {

/// Full parameterization of one simulation run. Defaults follow the
/// reference village setup; movement and timing values are model choices.
struct RunConfig {
    Scenario scenario;
    Weights weights;
    double threshold = 0.7;
    std::uint64_t seed = 0;

    double household_radius = 50.0; // m; accepted for completeness, no behavior reads it
    double rescuer_radius = 50.0;   // m; rescuers inform households within this circle
    double shelter_radius = 50.0;   // m; shelter managers process arrivals within this circle

    std::int64_t nb_households = 570;
    std::int64_t nb_rescuers = 15;
    std::int64_t nb_shelter_managers = 4;

    double household_speed = 1.4; // m/s
    double rescuer_speed = 3.0;   // m/s
    double tick_seconds = 10.0;
    std::int64_t max_ticks = 5000;

    /// Households no rescuer reaches are informed by friends or media at a
    /// tick drawn uniformly from [fallback_min_tick, fallback_max_tick].
    std::int64_t fallback_min_tick = 1000;
    std::int64_t fallback_max_tick = 3000;
    /// Probability that the fallback source is media rather than friends.
    double fallback_media_share = 0.5;

    /// Upper end of the uniform epsilon draw; 0 disables the perturbation.
    double epsilon_max = kMaxEpsilon;

    bool record_events = true;
    bool record_time_series = true;

    void validate() const;
};

enum class HouseholdStatus { Unaware, Informed, Evacuating, Sheltered, Staying };

std::string_view status_name(HouseholdStatus s);

struct HouseholdState {
    std::size_t profile = 0; // index into the run's profile list
    HouseholdStatus status = HouseholdStatus::Unaware;
    Point position;
    NodeId home_node = 0;
    std::vector<NodeId> route;
    std::size_t next_waypoint = 0; // index into route of the node being walked to
    std::optional<WarningSource> source_of_warning;
    WarningSource fallback_source = WarningSource::Friends;
    std::int64_t fallback_tick = 0;
    double epsilon = 0.0;
    std::optional<RiskBreakdown> breakdown;
    std::optional<std::size_t> target_shelter; // index into world shelters
    std::int64_t informed_tick = -1;

    friend bool operator==(const HouseholdState&, const HouseholdState&) = default;
};

struct RescuerState {
    Point position;
    NodeId at = 0;   // last node reached
    NodeId to = 0;   // node being walked to, when on_edge
    std::optional<NodeId> previous;
    bool on_edge = false;
    double along = 0.0;

    friend bool operator==(const RescuerState&, const RescuerState&) = default;
};

struct ShelterState {
    std::size_t shelter = 0; // index into world shelters
    std::int64_t occupancy = 0; // persons
    std::int64_t households = 0;

    friend bool operator==(const ShelterState&, const ShelterState&) = default;
};

struct Event {
    std::int64_t tick = 0;
    std::string agent_kind;
    std::int64_t agent_id = 0;
    std::string event;
    std::string detail;

    friend bool operator==(const Event&, const Event&) = default;
};

struct ShelterTally {
    std::int64_t shelter_id = 0;
    bool external = false;
    std::int64_t households = 0;
    std::int64_t persons = 0;

    friend bool operator==(const ShelterTally&, const ShelterTally&) = default;
};

struct RunResult {
    std::int64_t evacuated = 0; // Evacuate decisions (households)
    std::int64_t staying = 0;
    std::int64_t households = 0;
    std::vector<ShelterTally> sheltered_by_shelter;
    std::int64_t ticks_elapsed = 0;
    bool truncated = false;
    std::int64_t unaware_at_end = 0;
    std::int64_t evacuating_at_end = 0;
    std::array<std::int64_t, 3> informed_by_source{}; // indexed by WarningSource
    std::vector<std::int64_t> time_series;             // evacuated after each tick
    std::vector<Event> event_log;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Per-world lookups shared by every run on that world: shelter distance
/// fields, building-to-road snapping and building hazard proximity.
/// Immutable once built; share freely across threads.
class WorldIndex {
public:
    /// Throws InputError if the world has no waterways or no shelters.
    explicit WorldIndex(const World& world);

    const World& world() const { return *world_; }
    std::span<const double> shelter_field(std::size_t shelter) const { return fields_[shelter]; }
    std::optional<std::size_t> building_index(std::int64_t building_id) const;
    NodeId building_node(std::size_t building) const { return building_nodes_[building]; }
    double building_hazard_distance(std::size_t building) const { return hazard_[building]; }
    Proximity building_proximity(std::size_t building) const { return proximity_[building]; }

private:
    const World* world_;
    std::vector<std::vector<double>> fields_;
    std::unordered_map<std::int64_t, std::size_t> building_by_id_;
    std::vector<NodeId> building_nodes_;
    std::vector<double> hazard_;
    std::vector<Proximity> proximity_;
};

/// One discrete-time run. Construction places every agent (initial state);
/// step() advances one tick. Single-threaded; deterministic given its inputs.
class Simulation {
public:
    Simulation(const WorldIndex& index, std::span<const HouseholdProfile> profiles, RunConfig cfg);

    void step();
    /// Every household terminal, or the tick budget is spent.
    bool done() const;
    bool all_terminal() const;

    std::int64_t tick() const { return tick_; }
    std::int64_t evacuated() const { return evacuated_; }
    const RunConfig& config() const { return cfg_; }
    std::span<const HouseholdState> households() const { return households_; }
    std::span<const RescuerState> rescuers() const { return rescuers_; }
    std::span<const ShelterState> shelters() const { return shelters_; }

    RunResult result() const;

    friend bool operator==(const Simulation& a, const Simulation& b)
    {
        return a.tick_ == b.tick_ && a.evacuated_ == b.evacuated_ && a.households_ == b.households_ &&
               a.rescuers_ == b.rescuers_ && a.shelters_ == b.shelters_ && a.events_ == b.events_;
    }

private:
    void move_rescuers();
    void inform_by_rescuers(std::vector<std::size_t>& newly);
    void inform_by_fallback(std::vector<std::size_t>& newly);
    void decide(std::size_t h);
    void advance(HouseholdState& hh) const;
    void arrive(std::size_t h);
    std::optional<std::size_t> choose_shelter(const HouseholdState& hh, std::span<const NodeId> starts,
                                              NodeId& start_out) const;
    bool has_room(std::size_t shelter, std::int64_t members) const;
    void log(std::string_view kind, std::int64_t id, std::string_view event, std::string detail);

    const WorldIndex* index_;
    std::span<const HouseholdProfile> profiles_;
    RunConfig cfg_;

    std::vector<HouseholdState> households_;
    std::vector<double> cdm_;
    std::vector<double> crf_;
    std::vector<Point> homes_;
    std::vector<Proximity> proximity_;
    std::vector<RescuerState> rescuers_;
    std::vector<ShelterState> shelters_;
    Rng walk_rng_;

    // household grid for rescuer perception queries
    Point grid_origin_;
    double cell_size_ = 1.0;
    std::int64_t grid_cols_ = 1;
    std::int64_t grid_rows_ = 1;
    std::vector<std::vector<std::uint32_t>> grid_;

    std::vector<std::pair<std::int64_t, std::size_t>> fallback_schedule_;
    std::size_t fallback_cursor_ = 0;
    std::vector<std::size_t> evacuating_;

    std::int64_t tick_ = 0;
    std::int64_t evacuated_ = 0;
    std::int64_t unaware_ = 0;
    std::int64_t terminal_ = 0;
    std::vector<std::int64_t> time_series_;
    std::vector<Event> events_;
};

/// Initial state of a run (households unaware at home, rescuers placed).
Simulation init_run(const WorldIndex& index, std::span<const HouseholdProfile> profiles, const RunConfig& cfg);

RunResult run(const WorldIndex& index, std::span<const HouseholdProfile> profiles, const RunConfig& cfg);
RunResult run(const World& world, std::span<const HouseholdProfile> profiles, const RunConfig& cfg);

inline constexpr std::string_view kEventCsvHeader = "tick,agent_kind,agent_id,event,detail";
std::string events_to_csv(std::span<const Event> events);
std::string time_series_to_csv(std::span<const std::int64_t> series);

/// Human-readable `key=value` lines.
std::string summarize(const RunResult& r);

} // namespace evac
