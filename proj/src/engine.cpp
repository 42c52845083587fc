#include "evac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace evac {

void RunConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InputError(std::string("run config: ") + name + " must be > 0");
        }
    };
    validate_weights(weights);
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InputError("run config: threshold must lie in [0, 1]");
    }
    positive(household_radius, "household_radius");
    positive(rescuer_radius, "rescuer_radius");
    positive(shelter_radius, "shelter_radius");
    positive(household_speed, "household_speed");
    positive(rescuer_speed, "rescuer_speed");
    positive(tick_seconds, "tick_seconds");
    if (nb_households < 0 || nb_rescuers < 0 || nb_shelter_managers < 0) {
        throw InputError("run config: agent counts must be >= 0");
    }
    if (max_ticks < 1) {
        throw InputError("run config: max_ticks must be >= 1");
    }
    if (fallback_min_tick < 1 || fallback_max_tick < fallback_min_tick) {
        throw InputError("run config: need 1 <= fallback_min_tick <= fallback_max_tick");
    }
    if (!(fallback_media_share >= 0.0 && fallback_media_share <= 1.0)) {
        throw InputError("run config: fallback_media_share must lie in [0, 1]");
    }
    if (!(epsilon_max >= 0.0 && epsilon_max <= kMaxEpsilon)) {
        throw InputError("run config: epsilon_max must lie in [0, 0.05]");
    }
}

std::string_view status_name(HouseholdStatus s)
{
    switch (s) {
    case HouseholdStatus::Unaware: return "unaware";
    case HouseholdStatus::Informed: return "informed";
    case HouseholdStatus::Evacuating: return "evacuating";
    case HouseholdStatus::Sheltered: return "sheltered";
    case HouseholdStatus::Staying: return "staying";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// WorldIndex

WorldIndex::WorldIndex(const World& world) : world_(&world)
{
    if (world.shelters().empty()) {
        throw InputError("world has no shelters");
    }
    if (world.waterways().empty()) {
        throw InputError("world has no waterways; hazard proximity is undefined");
    }
    for (const auto& s : world.shelters()) {
        fields_.push_back(distance_field(world, s.node));
    }
    const auto buildings = world.buildings();
    for (std::size_t i = 0; i < buildings.size(); ++i) {
        building_by_id_.emplace(buildings[i].id, i);
        building_nodes_.push_back(world.nearest_node(buildings[i].location));
        hazard_.push_back(hazard_distance(world, buildings[i].location));
        proximity_.push_back(classify_proximity(hazard_.back()));
    }
}

std::optional<std::size_t> WorldIndex::building_index(std::int64_t building_id) const
{
    auto it = building_by_id_.find(building_id);
    if (it == building_by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

Point lerp(Point a, Point b, double t)
{
    return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

} // namespace

Simulation::Simulation(const WorldIndex& index, std::span<const HouseholdProfile> profiles, RunConfig cfg)
    : index_(&index)
    , profiles_(profiles)
    , cfg_(std::move(cfg))
    , walk_rng_(stable_hash({cfg_.seed, 0x2}))
{
    cfg_.validate();
    const World& world = index.world();
    if (static_cast<std::size_t>(cfg_.nb_households) != profiles.size()) {
        throw InputError("run config: nb_households=" + std::to_string(cfg_.nb_households) + " but population has " +
                         std::to_string(profiles.size()) + " households");
    }
    if (static_cast<std::size_t>(cfg_.nb_shelter_managers) != world.internal_shelter_count()) {
        throw InputError("run config: nb_shelter_managers=" + std::to_string(cfg_.nb_shelter_managers) +
                         " but world has " + std::to_string(world.internal_shelter_count()) + " internal shelters");
    }
    if (cfg_.nb_rescuers > 0 && world.rescuer_starts().empty()) {
        throw InputError("run config: rescuers requested but world has no rescuer_start nodes");
    }
    const auto shelters = world.shelters();
    if (std::none_of(shelters.begin(), shelters.end(), [](const Shelter& s) { return s.external; })) {
        throw InputError("world needs an external shelter to absorb overflow");
    }
    validate_population(profiles, world);

    Rng init(stable_hash({cfg_.seed, 0x1}));
    households_.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto b = *index.building_index(profiles[i].building_id);
        HouseholdState hh;
        hh.profile = i;
        hh.home_node = index.building_node(b);
        hh.position = world.node(hh.home_node);
        // Draw unconditionally so every configuration consumes the same stream.
        hh.epsilon = init.uniform_closed(0.0, cfg_.epsilon_max);
        hh.fallback_source = init.uniform01() < cfg_.fallback_media_share ? WarningSource::Media : WarningSource::Friends;
        hh.fallback_tick = init.between(cfg_.fallback_min_tick, cfg_.fallback_max_tick);
        if (!std::isfinite(index.shelter_field(0)[hh.home_node])) {
            throw InputError("household " + std::to_string(profiles[i].id) + " cannot reach any shelter by road");
        }
        households_.push_back(std::move(hh));
        homes_.push_back(world.buildings()[b].location);
        proximity_.push_back(index.building_proximity(b));
        cdm_.push_back(cdm_score(profiles[i]));
        crf_.push_back(crf_score(profiles[i]));
    }
    unaware_ = static_cast<std::int64_t>(households_.size());

    const auto starts = world.rescuer_starts();
    std::vector<NodeId> order(starts.begin(), starts.end());
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[init.below(i)]);
    }
    for (std::int64_t r = 0; r < cfg_.nb_rescuers; ++r) {
        RescuerState rs;
        rs.at = order[static_cast<std::size_t>(r) % order.size()];
        rs.position = world.node(rs.at);
        rescuers_.push_back(rs);
    }

    for (std::size_t s = 0; s < shelters.size(); ++s) {
        shelters_.push_back({s, 0, 0});
    }

    for (std::size_t i = 0; i < households_.size(); ++i) {
        fallback_schedule_.emplace_back(households_[i].fallback_tick, i);
    }
    std::sort(fallback_schedule_.begin(), fallback_schedule_.end());

    // Uniform grid over house locations, one rescuer radius per cell.
    cell_size_ = cfg_.rescuer_radius;
    if (!households_.empty()) {
        double min_x = kUnreachable, min_y = kUnreachable, max_x = -kUnreachable, max_y = -kUnreachable;
        for (const Point loc : homes_) {
            min_x = std::min(min_x, loc.x);
            min_y = std::min(min_y, loc.y);
            max_x = std::max(max_x, loc.x);
            max_y = std::max(max_y, loc.y);
        }
        grid_origin_ = {min_x, min_y};
        grid_cols_ = static_cast<std::int64_t>((max_x - min_x) / cell_size_) + 1;
        grid_rows_ = static_cast<std::int64_t>((max_y - min_y) / cell_size_) + 1;
    }
    grid_.assign(static_cast<std::size_t>(grid_cols_ * grid_rows_), {});
    for (std::size_t i = 0; i < homes_.size(); ++i) {
        const Point loc = homes_[i];
        const auto cx = static_cast<std::int64_t>((loc.x - grid_origin_.x) / cell_size_);
        const auto cy = static_cast<std::int64_t>((loc.y - grid_origin_.y) / cell_size_);
        grid_[static_cast<std::size_t>(cy * grid_cols_ + cx)].push_back(static_cast<std::uint32_t>(i));
    }
}

bool Simulation::all_terminal() const
{
    return terminal_ == static_cast<std::int64_t>(households_.size());
}

bool Simulation::done() const
{
    return all_terminal() || tick_ >= cfg_.max_ticks;
}

void Simulation::log(std::string_view kind, std::int64_t id, std::string_view event, std::string detail)
{
    events_.push_back({tick_, std::string(kind), id, std::string(event), std::move(detail)});
}

void Simulation::step()
{
    if (tick_ >= cfg_.max_ticks) {
        throw InvariantViolation("step called past max_ticks");
    }
    ++tick_;

    move_rescuers();

    std::vector<std::size_t> newly;
    if (unaware_ > 0) {
        inform_by_rescuers(newly);
        inform_by_fallback(newly);
    }
    std::sort(newly.begin(), newly.end());
    for (std::size_t h : newly) {
        decide(h);
    }
    if (!newly.empty()) {
        std::sort(evacuating_.begin(), evacuating_.end());
    }

    for (std::size_t h : evacuating_) {
        advance(households_[h]);
    }
    for (std::size_t h : evacuating_) {
        arrive(h);
    }
    std::erase_if(evacuating_,
                  [this](std::size_t h) { return households_[h].status != HouseholdStatus::Evacuating; });

    if (cfg_.record_time_series) {
        time_series_.push_back(evacuated_);
    }
}

void Simulation::move_rescuers()
{
    const World& world = index_->world();
    const double stride = cfg_.rescuer_speed * cfg_.tick_seconds;
    for (auto& r : rescuers_) {
        double remaining = stride;
        while (remaining > 0.0) {
            if (!r.on_edge) {
                // Uniform over incident edges, never straight back unless at a dead end.
                const auto nbs = world.neighbors(r.at);
                if (nbs.empty()) {
                    break;
                }
                std::size_t options = nbs.size();
                const bool skip_back = r.previous && nbs.size() > 1;
                if (skip_back) {
                    --options;
                }
                auto pick = static_cast<std::size_t>(walk_rng_.below(options));
                if (skip_back) {
                    for (std::size_t i = 0; i < nbs.size(); ++i) {
                        if (nbs[i].node == *r.previous) {
                            if (pick >= i) {
                                ++pick;
                            }
                            break;
                        }
                    }
                }
                r.to = nbs[pick].node;
                r.along = 0.0;
                r.on_edge = true;
            }
            const Point from = world.node(r.at);
            const Point to = world.node(r.to);
            const double length = distance(from, to);
            const double left = length - r.along;
            if (remaining >= left) {
                remaining -= left;
                r.previous = r.at;
                r.at = r.to;
                r.on_edge = false;
                r.along = 0.0;
                r.position = to;
            } else {
                r.along += remaining;
                remaining = 0.0;
                r.position = lerp(from, to, r.along / length);
            }
        }
    }
}

void Simulation::inform_by_rescuers(std::vector<std::size_t>& newly)
{
    const double radius = cfg_.rescuer_radius;
    for (std::size_t r = 0; r < rescuers_.size(); ++r) {
        const Point pos = rescuers_[r].position;
        const auto cx0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((pos.x - radius - grid_origin_.x) / cell_size_)));
        const auto cy0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((pos.y - radius - grid_origin_.y) / cell_size_)));
        const auto cx1 = std::min<std::int64_t>(grid_cols_ - 1, static_cast<std::int64_t>(std::floor((pos.x + radius - grid_origin_.x) / cell_size_)));
        const auto cy1 = std::min<std::int64_t>(grid_rows_ - 1, static_cast<std::int64_t>(std::floor((pos.y + radius - grid_origin_.y) / cell_size_)));
        for (auto cy = cy0; cy <= cy1; ++cy) {
            for (auto cx = cx0; cx <= cx1; ++cx) {
                for (std::uint32_t h : grid_[static_cast<std::size_t>(cy * grid_cols_ + cx)]) {
                    auto& hh = households_[h];
                    if (hh.status != HouseholdStatus::Unaware) {
                        continue;
                    }
                    const auto& profile = profiles_[hh.profile];
                    if (distance(homes_[h], pos) <= radius) {
                        hh.status = HouseholdStatus::Informed;
                        hh.source_of_warning = WarningSource::Authorities;
                        hh.informed_tick = tick_;
                        --unaware_;
                        newly.push_back(h);
                        if (cfg_.record_events) {
                            log("household", profile.id, "informed", "source=authorities rescuer=" + std::to_string(r));
                        }
                    }
                }
            }
        }
    }
}

void Simulation::inform_by_fallback(std::vector<std::size_t>& newly)
{
    while (fallback_cursor_ < fallback_schedule_.size() && fallback_schedule_[fallback_cursor_].first <= tick_) {
        const std::size_t h = fallback_schedule_[fallback_cursor_++].second;
        auto& hh = households_[h];
        if (hh.status != HouseholdStatus::Unaware) {
            continue;
        }
        hh.status = HouseholdStatus::Informed;
        hh.source_of_warning = hh.fallback_source;
        hh.informed_tick = tick_;
        --unaware_;
        newly.push_back(h);
        if (cfg_.record_events) {
            log("household", profiles_[hh.profile].id, "informed",
                "source=" + std::string(name_of(hh.fallback_source)));
        }
    }
}

bool Simulation::has_room(std::size_t shelter, std::int64_t members) const
{
    const auto& s = index_->world().shelters()[shelter];
    return s.external || shelters_[shelter].occupancy + members <= s.capacity;
}

std::optional<std::size_t> Simulation::choose_shelter(const HouseholdState& hh, std::span<const NodeId> starts,
                                                      NodeId& start_out) const
{
    const World& world = index_->world();
    const auto shelters = world.shelters();
    const std::int64_t members = profiles_[hh.profile].members;
    // Internal shelters with room first; external ones only absorb overflow.
    for (bool external : {false, true}) {
        std::optional<std::size_t> best;
        double best_d = kUnreachable;
        NodeId best_start = 0;
        for (std::size_t s = 0; s < shelters.size(); ++s) {
            if (shelters[s].external != external || !has_room(s, members)) {
                continue;
            }
            const auto field = index_->shelter_field(s);
            for (NodeId start : starts) {
                const double d = distance(hh.position, world.node(start)) + field[start];
                if (!std::isfinite(d)) {
                    continue;
                }
                if (!best || d < best_d || (d == best_d && shelters[s].id < shelters[*best].id)) {
                    best = s;
                    best_d = d;
                    best_start = start;
                }
            }
        }
        if (best) {
            start_out = best_start;
            return best;
        }
    }
    return std::nullopt;
}

void Simulation::decide(std::size_t h)
{
    auto& hh = households_[h];
    const auto& profile = profiles_[hh.profile];
    const RiskContext ctx{*hh.source_of_warning, proximity_[h], hh.epsilon};
    const RiskBreakdown breakdown =
        combine_scores(cdm_[h], hrf_score(cfg_.scenario, ctx), crf_[h], cfg_.weights, hh.epsilon);
    hh.breakdown = breakdown;
    const Decision d = evac::decide(breakdown, cfg_.threshold);

    if (cfg_.record_events) {
        std::string detail = d == Decision::Evacuate ? "evacuate" : "stay";
        detail += " risk=" + format_double(breakdown.perceived_risk) +
                  " highest=" + format_double(breakdown.highest_possible) + " cdm=" + format_double(breakdown.cdm) +
                  " hrf=" + format_double(breakdown.hrf) + " crf=" + format_double(breakdown.crf) +
                  " epsilon=" + format_double(hh.epsilon);
        log("household", profile.id, "decided", std::move(detail));
    }

    if (d == Decision::Stay) {
        hh.status = HouseholdStatus::Staying;
        ++terminal_;
        return;
    }

    ++evacuated_;
    NodeId start = hh.home_node;
    const NodeId starts[] = {hh.home_node};
    const auto target = choose_shelter(hh, starts, start);
    if (!target) {
        throw InvariantViolation("no shelter can take household " + std::to_string(profile.id));
    }
    hh.status = HouseholdStatus::Evacuating;
    hh.target_shelter = target;
    hh.route = descend(index_->world(), index_->shelter_field(*target), start);
    hh.next_waypoint = 1;
    evacuating_.push_back(h);
    if (cfg_.record_events) {
        log("household", profile.id, "routed",
            "shelter=" + std::to_string(index_->world().shelters()[*target].id) +
                " distance=" + format_double(index_->shelter_field(*target)[start]));
    }
}

void Simulation::advance(HouseholdState& hh) const
{
    const World& world = index_->world();
    double remaining = cfg_.household_speed * cfg_.tick_seconds;
    while (remaining > 0.0 && hh.next_waypoint < hh.route.size()) {
        const Point target = world.node(hh.route[hh.next_waypoint]);
        const double d = distance(hh.position, target);
        if (d <= remaining) {
            hh.position = target;
            remaining -= d;
            ++hh.next_waypoint;
        } else {
            hh.position = lerp(hh.position, target, remaining / d);
            remaining = 0.0;
        }
    }
}

void Simulation::arrive(std::size_t h)
{
    auto& hh = households_[h];
    const World& world = index_->world();
    const auto shelters = world.shelters();
    const auto& profile = profiles_[hh.profile];

    // A redirect can land the household inside another shelter's circle at
    // once; each rejection strictly shrinks the candidate set.
    for (std::size_t attempt = 0; attempt <= shelters.size(); ++attempt) {
        const std::size_t s = *hh.target_shelter;
        if (distance(hh.position, world.node(shelters[s].node)) > cfg_.shelter_radius) {
            return;
        }
        auto& state = shelters_[s];
        const std::string shelter_detail = cfg_.record_events
                                               ? "household=" + std::to_string(profile.id) +
                                                     " members=" + std::to_string(profile.members)
                                               : std::string();
        if (has_room(s, profile.members)) {
            state.occupancy += profile.members;
            state.households += 1;
            if (!shelters[s].external && state.occupancy > shelters[s].capacity) {
                throw InvariantViolation("shelter " + std::to_string(shelters[s].id) + " over capacity");
            }
            hh.status = HouseholdStatus::Sheltered;
            ++terminal_;
            if (cfg_.record_events) {
                log("shelter", shelters[s].id, "admitted",
                    shelter_detail + " occupancy=" + std::to_string(state.occupancy));
                log("household", profile.id, "sheltered", "shelter=" + std::to_string(shelters[s].id));
            }
            return;
        }

        std::vector<NodeId> starts;
        if (hh.next_waypoint > 0) {
            starts.push_back(hh.route[hh.next_waypoint - 1]);
        }
        if (hh.next_waypoint < hh.route.size()) {
            starts.push_back(hh.route[hh.next_waypoint]);
        }
        NodeId start = starts.front();
        const auto next = choose_shelter(hh, starts, start);
        if (!next) {
            throw InvariantViolation("no shelter can take household " + std::to_string(profile.id));
        }
        hh.target_shelter = next;
        hh.route = descend(world, index_->shelter_field(*next), start);
        hh.next_waypoint = 0;
        if (cfg_.record_events) {
            log("shelter", shelters[s].id, "redirected",
                shelter_detail + " occupancy=" + std::to_string(state.occupancy));
            log("household", profile.id, "redirected", "shelter=" + std::to_string(shelters[*next].id));
        }
    }
    throw InvariantViolation("arrival loop did not settle for household " + std::to_string(profile.id));
}

RunResult Simulation::result() const
{
    RunResult r;
    r.evacuated = evacuated_;
    r.households = static_cast<std::int64_t>(households_.size());
    r.ticks_elapsed = tick_;
    r.truncated = !all_terminal();
    for (const auto& hh : households_) {
        switch (hh.status) {
        case HouseholdStatus::Staying: ++r.staying; break;
        case HouseholdStatus::Unaware: ++r.unaware_at_end; break;
        case HouseholdStatus::Evacuating: ++r.evacuating_at_end; break;
        default: break;
        }
        if (hh.source_of_warning) {
            ++r.informed_by_source[index_of(*hh.source_of_warning)];
        }
    }
    const auto shelters = index_->world().shelters();
    for (const auto& s : shelters_) {
        r.sheltered_by_shelter.push_back(
            {shelters[s.shelter].id, shelters[s.shelter].external, s.households, s.occupancy});
    }
    r.time_series = time_series_;
    r.event_log = events_;
    return r;
}

Simulation init_run(const WorldIndex& index, std::span<const HouseholdProfile> profiles, const RunConfig& cfg)
{
    return Simulation(index, profiles, cfg);
}

RunResult run(const WorldIndex& index, std::span<const HouseholdProfile> profiles, const RunConfig& cfg)
{
    Simulation sim(index, profiles, cfg);
    while (!sim.done()) {
        sim.step();
    }
    return sim.result();
}

RunResult run(const World& world, std::span<const HouseholdProfile> profiles, const RunConfig& cfg)
{
    const WorldIndex index(world);
    return run(index, profiles, cfg);
}

std::string events_to_csv(std::span<const Event> events)
{
    std::ostringstream out;
    out << kEventCsvHeader << "\n";
    for (const auto& e : events) {
        out << e.tick << ',' << e.agent_kind << ',' << e.agent_id << ',' << e.event << ',' << e.detail << "\n";
    }
    return out.str();
}

std::string time_series_to_csv(std::span<const std::int64_t> series)
{
    std::ostringstream out;
    out << "tick,evacuated\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << (i + 1) << ',' << series[i] << "\n";
    }
    return out.str();
}

std::string summarize(const RunResult& r)
{
    std::ostringstream out;
    out << "evacuated=" << r.evacuated << "\n";
    out << "staying=" << r.staying << "\n";
    out << "households=" << r.households << "\n";
    out << "ticks=" << r.ticks_elapsed << "\n";
    out << "truncated=" << (r.truncated ? "true" : "false") << "\n";
    for (std::size_t i = 0; i < r.informed_by_source.size(); ++i) {
        out << "informed_by_" << name_of(static_cast<WarningSource>(i)) << "=" << r.informed_by_source[i] << "\n";
    }
    for (const auto& s : r.sheltered_by_shelter) {
        out << "shelter_" << s.shelter_id << (s.external ? "_external" : "") << "=" << s.households
            << " households/" << s.persons << " persons\n";
    }
    return out.str();
}

} // namespace evac
