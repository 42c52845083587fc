#include "evac/cli.hpp"

#include "evac/demo.hpp"
#include "evac/engine.hpp"
#include "evac/population.hpp"
#include "evac/stats.hpp"
#include "evac/sweep.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

namespace evac {

namespace {

namespace fs = std::filesystem;

std::string asset_dir()
{
    const char* dir = std::getenv("EVAC_ASSET_DIR");
    return dir && *dir ? dir : ".";
}

std::string asset(const char* name)
{
    return (fs::path(asset_dir()) / name).string();
}

StormSignal parse_storm(const std::string& text, bool raw)
{
    std::optional<StormSignal> s;
    if (raw) {
        s = from_code<StormSignal>(parse_double(text, "--storm"));
    } else {
        s = from_name<StormSignal>(text);
        if (!s && text.size() == 1) s = storm_from_signal(text[0] - '0');
    }
    if (!s) throw InputError("--storm: '" + text + "' is not a storm signal (1, 2, 3" + (raw ? " as codes" : "") + ")");
    return *s;
}

Rainfall parse_rain(const std::string& text, bool raw)
{
    const auto r = raw ? from_code<Rainfall>(parse_double(text, "--rain")) : from_name<Rainfall>(text);
    if (!r) throw InputError("--rain: '" + text + "' is not a rainfall advisory (yellow, orange, red)");
    return *r;
}

TimeOfDay parse_time(const std::string& text, bool raw)
{
    std::optional<TimeOfDay> t;
    if (raw) {
        t = from_code<TimeOfDay>(parse_double(text, "--time"));
    } else if (text == "daytime") {
        t = TimeOfDay::Daytime;
    } else if (text == "nighttime") {
        t = TimeOfDay::Nighttime;
    } else {
        t = from_name<TimeOfDay>(text);
    }
    if (!t) throw InputError("--time: '" + text + "' is not a time of day (day, night)");
    return *t;
}

Weights parse_weights(const std::string& text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 3) {
        throw InputError("--weights: expected three comma-separated values cdm,hrf,crf");
    }
    Weights w{parse_double(trim(parts[0]), "--weights cdm"), parse_double(trim(parts[1]), "--weights hrf"),
              parse_double(trim(parts[2]), "--weights crf")};
    validate_weights(w);
    return w;
}

struct PopulationSource {
    std::string csv;
    std::string spec;
    std::uint64_t seed = kDemoPopulationSeed;
};

std::vector<HouseholdProfile> load_profiles(const PopulationSource& src, const World& world)
{
    if (!src.csv.empty()) {
        return load_population(src.csv, world);
    }
    const auto spec = src.spec.empty() ? default_population_spec() : load_population_spec(src.spec);
    return synthesize(spec, world, src.seed);
}

void add_population_flags(CLI::App* cmd, PopulationSource& src)
{
    cmd->add_option("--population", src.csv, "Household CSV (overrides --population-spec)");
    cmd->add_option("--population-spec", src.spec, "Population spec to synthesize from (built-in default when empty)");
    cmd->add_option("--population-seed", src.seed, "Seed for synthesizing the population");
}

void add_run_flags(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--threshold", cfg.threshold, "Fraction of the highest possible score to exceed");
    cmd->add_option("--seed", cfg.seed, "Run seed");
    cmd->add_option("--households", cfg.nb_households, "Number of household agents");
    cmd->add_option("--rescuers", cfg.nb_rescuers, "Number of rescuer agents");
    cmd->add_option("--shelter-managers", cfg.nb_shelter_managers, "Number of shelter managers (one per internal shelter)");
    cmd->add_option("--household-radius", cfg.household_radius, "Household perception radius (m)");
    cmd->add_option("--rescuer-radius", cfg.rescuer_radius, "Rescuer perception radius (m)");
    cmd->add_option("--shelter-radius", cfg.shelter_radius, "Shelter manager perception radius (m)");
    cmd->add_option("--household-speed", cfg.household_speed, "Walking speed of evacuees (m/s)");
    cmd->add_option("--rescuer-speed", cfg.rescuer_speed, "Rescuer speed (m/s)");
    cmd->add_option("--tick-seconds", cfg.tick_seconds, "Simulated seconds per tick");
    cmd->add_option("--max-ticks", cfg.max_ticks, "Tick budget before a run is marked truncated");
    cmd->add_option("--fallback-min-tick", cfg.fallback_min_tick, "Earliest tick of friends/media warnings");
    cmd->add_option("--fallback-max-tick", cfg.fallback_max_tick, "Latest tick of friends/media warnings");
    cmd->add_option("--fallback-media-share", cfg.fallback_media_share, "Share of fallback warnings coming from media");
    cmd->add_option("--epsilon-max", cfg.epsilon_max, "Upper end of the bounded-rationality perturbation");
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Agent-based simulator of preemptive household evacuation during typhoons", "evacsim"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    std::vector<std::pair<CLI::App*, std::function<void()>>> actions;

    // validate
    std::string validate_world = asset(kDemoWorldFile);
    PopulationSource validate_pop;
    auto* validate = app.add_subcommand("validate", "Check a world file (and optionally a household CSV)");
    validate->add_option("--world", validate_world, "World file");
    validate->add_option("--population", validate_pop.csv, "Household CSV to check against the world");
    actions.emplace_back(validate, [&] {
        const World world = load_world(validate_world);
        out << "world ok: " << world.node_count() << " nodes, " << world.edges().size() << " roads, "
            << world.buildings().size() << " buildings, " << world.waterways().size() << " waterways, "
            << world.shelters().size() << " shelters (" << world.internal_shelter_count() << " internal), "
            << world.rescuer_starts().size() << " rescuer starts\n";
        if (!validate_pop.csv.empty()) {
            const auto profiles = load_population(validate_pop.csv, world);
            out << "population ok: " << profiles.size() << " households\n";
        }
    });

    // gen-population
    std::string gen_world = asset(kDemoWorldFile);
    std::string gen_spec;
    std::uint64_t gen_seed = kDemoPopulationSeed;
    std::string gen_out = "population.csv";
    auto* gen = app.add_subcommand("gen-population", "Synthesize a household CSV from a population spec");
    gen->add_option("--world", gen_world, "World file");
    gen->add_option("--spec", gen_spec, "Population spec (built-in default when empty)");
    gen->add_option("--seed", gen_seed, "Synthesis seed");
    gen->add_option("--out", gen_out, "Output CSV ('-' for stdout)");
    actions.emplace_back(gen, [&] {
        const World world = load_world(gen_world);
        const auto spec = gen_spec.empty() ? default_population_spec() : load_population_spec(gen_spec);
        write_or_print(gen_out, population_to_csv(synthesize(spec, world, gen_seed)), out);
    });

    // simulate
    std::string sim_world = asset(kDemoWorldFile);
    PopulationSource sim_pop;
    RunConfig sim_cfg;
    std::string sim_storm = "1";
    std::string sim_rain = "yellow";
    std::string sim_time = "day";
    std::string sim_weights = "0.1,0.1,0.1";
    bool sim_raw = false;
    std::string sim_events;
    std::string sim_series;
    auto* simulate = app.add_subcommand("simulate", "Run one simulation and print its summary");
    simulate->add_option("--world", sim_world, "World file");
    add_population_flags(simulate, sim_pop);
    simulate->add_option("--storm", sim_storm, "Storm signal: 1, 2, 3 (codes 0.25, 0.5, 1 with --raw)");
    simulate->add_option("--rain", sim_rain, "Rainfall advisory: yellow, orange, red");
    simulate->add_option("--time", sim_time, "Time of day: day, night");
    simulate->add_flag("--raw", sim_raw, "Read --storm, --rain and --time as numeric codes");
    simulate->add_option("--weights", sim_weights, "Decision factor weights cdm,hrf,crf");
    add_run_flags(simulate, sim_cfg);
    simulate->add_option("--events", sim_events, "Write the event log CSV here");
    simulate->add_option("--series", sim_series, "Write the per-tick evacuated series CSV here");
    actions.emplace_back(simulate, [&] {
        sim_cfg.scenario = {parse_storm(sim_storm, sim_raw), parse_rain(sim_rain, sim_raw), parse_time(sim_time, sim_raw)};
        sim_cfg.weights = parse_weights(sim_weights);
        sim_cfg.record_events = !sim_events.empty();
        sim_cfg.record_time_series = !sim_series.empty();
        const World world = load_world(sim_world);
        const auto profiles = load_profiles(sim_pop, world);
        const RunResult result = run(world, profiles, sim_cfg);
        out << summarize(result);
        if (!sim_events.empty()) write_text_file(sim_events, events_to_csv(result.event_log));
        if (!sim_series.empty()) write_text_file(sim_series, time_series_to_csv(result.time_series));
    });

    // sweep
    std::string sweep_spec_path = asset(kDemoSweepSpecFile);
    std::string sweep_out = "rows.csv";
    unsigned sweep_workers = std::max(1u, std::thread::hardware_concurrency());
    std::int64_t sweep_reps = 0;
    auto* sweep = app.add_subcommand("sweep", "Run every valid parameter combination and write one row per run");
    sweep->add_option("--spec", sweep_spec_path, "Sweep spec");
    sweep->add_option("--out", sweep_out, "Output rows CSV");
    sweep->add_option("--workers", sweep_workers, "Worker threads (output is identical for any count)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--replications", sweep_reps, "Override the spec's replication count (0 keeps it)");
    actions.emplace_back(sweep, [&] {
        SweepSpec spec = load_sweep_spec(sweep_spec_path);
        if (sweep_reps < 0) throw InputError("--replications must not be negative");
        if (sweep_reps > 0) spec.replications = sweep_reps;
        if (spec.world.empty()) throw InputError(sweep_spec_path + ": missing required key 'world'");
        const World world = load_world(spec.world);
        const auto profiles = load_profiles({spec.population, spec.population_spec, spec.population_seed}, world);
        const WorldIndex index(world);
        const auto all = enumerate(spec);
        const auto valid = filter_valid(all, spec.filter);
        const auto rows = execute(spec, index, profiles, sweep_workers);
        write_text_file(sweep_out, rows_to_csv(rows));
        std::int64_t truncated = 0;
        for (const auto& r : rows) truncated += r.truncated ? 1 : 0;
        out << "combinations=" << all.size() << '\n'
            << "valid=" << valid.size() << " (" << weight_filter_name(spec.filter) << ")\n"
            << "replications=" << spec.replications << '\n'
            << "rows=" << rows.size() << '\n'
            << "truncated=" << truncated << '\n';
    });

    // analyze
    std::string analyze_in = "rows.csv";
    std::string analyze_mode = std::string(intercept_mode_name(InterceptMode::DropOneWeight));
    bool analyze_drop = false;
    std::string analyze_csv;
    auto* analyze = app.add_subcommand("analyze", "Regress evacuated counts on the sweep parameters");
    analyze->add_option("--in", analyze_in, "Rows CSV from sweep");
    analyze->add_option("--mode", analyze_mode, "no-intercept, drop-one-weight or intercept-full");
    analyze->add_flag("--drop-aliased", analyze_drop, "Fit without aliased columns instead of failing");
    analyze->add_option("--csv", analyze_csv, "Also write the coefficient table as CSV here");
    actions.emplace_back(analyze, [&] {
        const auto rows = load_rows(analyze_in);
        const auto report = sensitivity(rows, parse_intercept_mode(analyze_mode),
                                        analyze_drop ? AliasPolicy::Drop : AliasPolicy::Reject);
        out << report_to_text(report);
        if (!analyze_csv.empty()) write_text_file(analyze_csv, report_to_csv(report));
    });

    // series
    std::string series_in = "rows.csv";
    std::string series_storm = "2";
    std::string series_rain = "orange";
    std::string series_time = "night";
    double series_threshold = 0.9;
    bool series_raw = false;
    std::string series_out = "-";
    auto* series_cmd = app.add_subcommand("series", "Mean evacuated against each weight for one scenario slice");
    series_cmd->add_option("--in", series_in, "Rows CSV from sweep");
    series_cmd->add_option("--storm", series_storm, "Storm signal: 1, 2, 3");
    series_cmd->add_option("--rain", series_rain, "Rainfall advisory: yellow, orange, red");
    series_cmd->add_option("--time", series_time, "Time of day: day, night");
    series_cmd->add_flag("--raw", series_raw, "Read --storm, --rain and --time as numeric codes");
    series_cmd->add_option("--threshold", series_threshold, "Threshold of the slice");
    series_cmd->add_option("--out", series_out, "Output CSV ('-' for stdout)");
    actions.emplace_back(series_cmd, [&] {
        const auto rows = load_rows(series_in);
        SeriesSlice slice;
        slice.storm = signal_number(parse_storm(series_storm, series_raw));
        slice.rainfall = code_of(parse_rain(series_rain, series_raw));
        slice.time_of_day = code_of(parse_time(series_time, series_raw));
        slice.threshold = series_threshold;
        write_or_print(series_out, series_to_csv(series(rows, slice)), out);
    });

    // demo
    std::string demo_dir = asset_dir();
    auto* demo = app.add_subcommand("demo", "Write the demo village, population spec and sweep spec");
    demo->add_option("--out", demo_dir, "Directory to write into");
    actions.emplace_back(demo, [&] {
        for (const auto& path : emit_demo_assets(demo_dir)) out << path << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        for (auto& [cmd, action] : actions) {
            if (cmd->parsed()) action();
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const InvariantViolation& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace evac
