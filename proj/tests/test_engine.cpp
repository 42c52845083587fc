#include "evac/demo.hpp"
#include "evac/engine.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace evac;

namespace {

struct Demo {
    World world = make_demo_world();
    WorldIndex index{world};
    std::vector<HouseholdProfile> pop = synthesize(default_population_spec(), world, kDemoPopulationSeed);
};

const Demo& demo()
{
    static const Demo d;
    return d;
}

RunConfig demo_config(std::uint64_t seed)
{
    RunConfig cfg;
    cfg.seed = seed;
    cfg.scenario = {StormSignal::Psws2, Rainfall::Orange, TimeOfDay::Nighttime};
    cfg.weights = {0.3, 0.4, 0.3};
    return cfg;
}

// Observed once per tick, so a household may chain several legal steps
// (a house next to a shelter can go from unaware to sheltered in one tick).
bool allowed(HouseholdStatus from, HouseholdStatus to)
{
    using S = HouseholdStatus;
    if (from == to) return true;
    switch (from) {
    case S::Unaware: return to != S::Unaware;
    case S::Informed: return to != S::Unaware;
    case S::Evacuating: return to == S::Sheltered;
    default: return false;
    }
}

std::int64_t count_events(const RunResult& r, std::string_view event, std::string_view detail_prefix)
{
    return std::count_if(r.event_log.begin(), r.event_log.end(), [&](const Event& e) {
        return e.event == event && e.detail.rfind(detail_prefix, 0) == 0;
    });
}

} // namespace

TEST_CASE("initial state")
{
    const auto& d = demo();
    const auto cfg = demo_config(5);
    const Simulation a = init_run(d.index, d.pop, cfg);
    const Simulation b = init_run(d.index, d.pop, cfg);
    CHECK(a == b);
    CHECK(a.rescuers().size() == 15);
    CHECK(a.tick() == 0);
    CHECK(a.households().size() == 570);
    for (const auto& hh : a.households()) {
        CHECK(hh.status == HouseholdStatus::Unaware);
        CHECK(hh.epsilon >= 0.0);
        CHECK(hh.epsilon <= 0.05);
        CHECK(hh.fallback_tick >= cfg.fallback_min_tick);
        CHECK(hh.fallback_tick <= cfg.fallback_max_tick);
    }
    for (const auto& s : a.shelters()) CHECK(s.occupancy == 0);
    std::set<NodeId> starts;
    for (const auto& r : a.rescuers()) starts.insert(r.at);
    CHECK(starts.size() == 15);
}

TEST_CASE("config mismatches are rejected")
{
    const auto& d = demo();
    auto cfg = demo_config(1);
    cfg.nb_households = 10;
    CHECK_THROWS_AS(init_run(d.index, d.pop, cfg), InputError);
    cfg = demo_config(1);
    cfg.nb_shelter_managers = 3;
    CHECK_THROWS_AS(init_run(d.index, d.pop, cfg), InputError);
    cfg = demo_config(1);
    cfg.threshold = 1.5;
    CHECK_THROWS_AS(init_run(d.index, d.pop, cfg), InputError);
    cfg = demo_config(1);
    cfg.rescuer_speed = 0;
    CHECK_THROWS_AS(init_run(d.index, d.pop, cfg), InputError);
    cfg = demo_config(1);
    cfg.epsilon_max = 0.1;
    CHECK_THROWS_AS(init_run(d.index, d.pop, cfg), InputError);

    WorldData no_external = test::line_world(3, 100, 10);
    no_external.shelters.pop_back();
    no_external.buildings.push_back({1, {0, 10}});
    const World w(no_external);
    const WorldIndex idx(w);
    RunConfig c;
    c.nb_households = 1;
    c.nb_rescuers = 1;
    c.nb_shelter_managers = 1;
    const std::vector<HouseholdProfile> one{test::profile(0, 1)};
    CHECK_THROWS_AS(init_run(idx, one, c), InputError);
}

TEST_CASE("rescuer perception radius")
{
    WorldData wd = test::line_world(3, 1000, 100);
    wd.buildings.push_back({1, {0, 40}});
    wd.buildings.push_back({2, {0, -60}});
    const World w(wd);
    const WorldIndex idx(w);
    RunConfig cfg;
    cfg.nb_households = 2;
    cfg.nb_rescuers = 1;
    cfg.nb_shelter_managers = 1;
    cfg.rescuer_speed = 0.001; // effectively parked at node 0
    cfg.fallback_min_tick = 4000;
    cfg.fallback_max_tick = 4000;
    const std::vector<HouseholdProfile> pop{test::profile(0, 1), test::profile(1, 2)};
    Simulation sim = init_run(idx, pop, cfg);
    sim.step();
    CHECK(sim.households()[0].status != HouseholdStatus::Unaware);
    CHECK(sim.households()[0].source_of_warning == WarningSource::Authorities);
    CHECK(sim.households()[0].informed_tick == 1);
    CHECK(sim.households()[1].status == HouseholdStatus::Unaware);
    for (int i = 0; i < 100; ++i) sim.step();
    CHECK(sim.households()[1].status == HouseholdStatus::Unaware);
}

TEST_CASE("full shelter redirects arrivals")
{
    WorldData wd = test::line_world(6, 100, 10);
    wd.buildings.push_back({1, {400, 10}});
    wd.buildings.push_back({2, {300, 10}});
    const World w(wd);
    const WorldIndex idx(w);
    RunConfig cfg;
    cfg.nb_households = 2;
    cfg.nb_rescuers = 0;
    cfg.nb_shelter_managers = 1;
    cfg.threshold = 0.0;
    cfg.fallback_min_tick = 1;
    cfg.fallback_max_tick = 1;
    const std::vector<HouseholdProfile> pop{test::profile(0, 1, 10), test::profile(1, 2, 4)};

    Simulation sim = init_run(idx, pop, cfg);
    while (!sim.done()) {
        sim.step();
        CHECK(sim.shelters()[0].occupancy <= 10);
    }
    CHECK(sim.shelters()[0].occupancy == 10);
    CHECK(sim.shelters()[0].households == 1);
    CHECK(sim.shelters()[1].households == 1);
    CHECK(sim.shelters()[1].occupancy == 4);

    const RunResult r = sim.result();
    CHECK(r.evacuated == 2);
    CHECK_FALSE(r.truncated);
    const bool redirected = std::any_of(r.event_log.begin(), r.event_log.end(), [](const Event& e) {
        return e.agent_kind == "shelter" && e.agent_id == 1 && e.event == "redirected" &&
               e.detail.find("household=1") != std::string::npos && e.detail.find("occupancy=10") != std::string::npos;
    });
    CHECK(redirected);
}

TEST_CASE("threshold extremes")
{
    const auto& d = demo();
    auto cfg = demo_config(3);
    cfg.threshold = 0.0;
    const auto all = run(d.index, d.pop, cfg);
    CHECK(all.evacuated == 570);
    CHECK(all.staying == 0);
    CHECK_FALSE(all.truncated);

    cfg.threshold = 1.0;
    cfg.epsilon_max = 0.0;
    const auto none = run(d.index, d.pop, cfg);
    CHECK(none.evacuated == 0);
    CHECK(none.staying == 570);
}

TEST_CASE("run invariants on the demo village")
{
    const auto& d = demo();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto cfg = demo_config(seed);
        cfg.threshold = 0.6;
        Simulation sim = init_run(d.index, d.pop, cfg);
        std::vector<HouseholdStatus> prev;
        for (const auto& hh : sim.households()) prev.push_back(hh.status);
        const auto shelters = d.world.shelters();
        while (!sim.done()) {
            sim.step();
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const auto now = sim.households()[i].status;
                if (!allowed(prev[i], now)) {
                    FAIL("household " << i << ": " << status_name(prev[i]) << " -> " << status_name(now));
                }
                prev[i] = now;
            }
            for (const auto& s : sim.shelters()) {
                if (!shelters[s.shelter].external && s.occupancy > shelters[s.shelter].capacity) FAIL("over capacity");
            }
        }
        const RunResult r = sim.result();
        CHECK_FALSE(r.truncated);
        CHECK(r.unaware_at_end == 0);
        CHECK(r.evacuating_at_end == 0);
        CHECK(r.evacuated + r.staying == 570);
        CHECK(std::is_sorted(r.time_series.begin(), r.time_series.end()));
        CHECK(r.time_series.size() == static_cast<std::size_t>(r.ticks_elapsed));
        CHECK(r.time_series.back() == r.evacuated);

        std::int64_t sheltered = 0;
        for (const auto& t : r.sheltered_by_shelter) sheltered += t.households;
        CHECK(sheltered == r.evacuated);
        CHECK(count_events(r, "decided", "evacuate") == r.evacuated);
        CHECK(count_events(r, "decided", "stay") == r.staying);
        CHECK(r.informed_by_source[0] + r.informed_by_source[1] + r.informed_by_source[2] == 570);
        CHECK(r.informed_by_source[index_of(WarningSource::Authorities)] > 0);
    }
}

TEST_CASE("replays are identical")
{
    const auto& d = demo();
    const auto cfg = demo_config(99);
    const auto a = run(d.index, d.pop, cfg);
    const auto b = run(d.world, d.pop, cfg);
    CHECK(a == b);
    CHECK(events_to_csv(a.event_log) == events_to_csv(b.event_log));
    CHECK(run(d.index, d.pop, demo_config(100)) != a);
}

TEST_CASE("recording switches do not change outcomes")
{
    const auto& d = demo();
    auto cfg = demo_config(4);
    const auto full = run(d.index, d.pop, cfg);
    cfg.record_events = false;
    cfg.record_time_series = false;
    const auto bare = run(d.index, d.pop, cfg);
    CHECK(bare.event_log.empty());
    CHECK(bare.time_series.empty());
    CHECK(bare.evacuated == full.evacuated);
    CHECK(bare.sheltered_by_shelter == full.sheltered_by_shelter);
    CHECK(bare.ticks_elapsed == full.ticks_elapsed);
}

TEST_CASE("paired monotonicity in scenario and threshold")
{
    const auto& d = demo();
    const Weights w{0.2, 0.6, 0.2};
    for (std::uint64_t seed : {7u, 8u}) {
        std::int64_t prev = -1;
        // each step raises one coded driver
        const Scenario ladder[] = {
            {StormSignal::Psws1, Rainfall::Yellow, TimeOfDay::Daytime},
            {StormSignal::Psws2, Rainfall::Yellow, TimeOfDay::Daytime},
            {StormSignal::Psws2, Rainfall::Orange, TimeOfDay::Daytime},
            {StormSignal::Psws2, Rainfall::Orange, TimeOfDay::Nighttime},
            {StormSignal::Psws3, Rainfall::Orange, TimeOfDay::Nighttime},
            {StormSignal::Psws3, Rainfall::Red, TimeOfDay::Nighttime},
        };
        for (const auto& s : ladder) {
            RunConfig cfg;
            cfg.seed = seed;
            cfg.scenario = s;
            cfg.weights = w;
            cfg.threshold = 0.7;
            cfg.record_events = false;
            const auto n = run(d.index, d.pop, cfg).evacuated;
            CHECK(n >= prev);
            prev = n;
        }

        prev = 571;
        for (double t = 0.0; t <= 1.0; t += 0.1) {
            RunConfig cfg;
            cfg.seed = seed;
            cfg.scenario = ladder[3];
            cfg.weights = w;
            cfg.threshold = t;
            cfg.record_events = false;
            const auto n = run(d.index, d.pop, cfg).evacuated;
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("truncation is reported, not thrown")
{
    const auto& d = demo();
    auto cfg = demo_config(1);
    cfg.max_ticks = 50;
    const auto r = run(d.index, d.pop, cfg);
    CHECK(r.truncated);
    CHECK(r.ticks_elapsed == 50);
    CHECK(r.unaware_at_end > 0);

    Simulation sim = init_run(d.index, d.pop, cfg);
    while (!sim.done()) sim.step();
    CHECK_THROWS_AS(sim.step(), InvariantViolation);
}

TEST_CASE("CSV helpers")
{
    const std::vector<Event> ev{{3, "household", 7, "informed", "source=media"}};
    CHECK(events_to_csv(ev) == std::string(kEventCsvHeader) + "\n3,household,7,informed,source=media\n");
    const std::vector<std::int64_t> ts{0, 2, 5};
    const auto csv = time_series_to_csv(ts);
    CHECK(csv.find("1,0") != std::string::npos);
    CHECK(csv.find("3,5") != std::string::npos);
    const auto& d = demo();
    const auto s = summarize(run(d.index, d.pop, demo_config(2)));
    CHECK(s.find("evacuated=") != std::string::npos);
}
