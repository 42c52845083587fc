#include "evac/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace evac {

namespace {

constexpr double kWeightTolerance = 1e-9;

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

// "a:b:step" expands to a, a+step, ... b; values are snapped to 12
// significant digits so 0.1:0.8:0.1 yields the literal decimals.
std::vector<double> parse_axis(KeyValueFile& kv, const std::string& key, std::vector<double> fallback)
{
    if (!kv.has(key)) {
        return fallback;
    }
    const std::string raw = kv.take(key);
    const auto parts = split(raw, ':');
    if (parts.size() == 1) {
        std::vector<double> out;
        for (auto tok : split_whitespace(raw)) {
            out.push_back(parse_double(tok, kv.source() + ": " + key));
        }
        if (out.empty()) {
            throw InputError(kv.source() + ": " + key + ": expected at least one value");
        }
        return out;
    }
    if (parts.size() != 3) {
        throw InputError(kv.source() + ": " + key + ": range must be 'first:last:step'");
    }
    const double first = parse_double(trim(parts[0]), key);
    const double last = parse_double(trim(parts[1]), key);
    const double step = parse_double(trim(parts[2]), key);
    if (!(step > 0) || last < first) {
        throw InputError(kv.source() + ": " + key + ": bad range");
    }
    std::vector<double> out;
    for (std::int64_t k = 0;; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", first + static_cast<double>(k) * step);
        const double v = std::strtod(buf, nullptr);
        if (v > last + step * 1e-9) break;
        out.push_back(v);
        if (out.size() > 100000) {
            throw InputError(kv.source() + ": " + key + ": range too long");
        }
    }
    return out;
}

void check_unique(const std::vector<double>& values, const std::string& axis)
{
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InputError("sweep axis " + axis + " has duplicate values");
    }
}

template <class E>
void check_coded(const std::vector<double>& values, const std::string& axis)
{
    if (values.empty()) {
        throw InputError("sweep axis " + axis + " is empty");
    }
    for (double v : values) {
        if (!from_code<E>(v)) {
            throw InputError("sweep axis " + axis + ": " + format_double(v) + " is not a valid code");
        }
    }
    check_unique(values, axis);
}

void check_weights(const std::vector<double>& values, const std::string& axis)
{
    if (values.empty()) {
        throw InputError("sweep axis " + axis + " is empty");
    }
    for (double v : values) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw InputError("sweep axis " + axis + ": weight " + format_double(v) + " outside (0, 1]");
        }
    }
    check_unique(values, axis);
}

std::string resolve(const std::string& base_dir, const std::string& path)
{
    if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

} // namespace

std::string_view weight_filter_name(WeightFilter f)
{
    return f == WeightFilter::ExactOne ? "exact_one" : "at_least_one";
}

std::string_view seed_pairing_name(SeedPairing p)
{
    return p == SeedPairing::Common ? "common" : "per_combo";
}

void SweepSpec::validate() const
{
    if (storm.empty()) {
        throw InputError("sweep axis storm is empty");
    }
    std::vector<double> storm_values;
    for (auto s : storm) {
        if (!storm_from_signal(static_cast<int>(s)) || s < 1 || s > 3) {
            throw InputError("sweep axis storm: signal " + std::to_string(s) + " must be 1, 2 or 3");
        }
        storm_values.push_back(static_cast<double>(s));
    }
    check_unique(storm_values, "storm");
    check_coded<Rainfall>(rainfall, "rainfall");
    check_coded<TimeOfDay>(time_of_day, "time_of_day");
    if (threshold.empty()) {
        throw InputError("sweep axis threshold is empty");
    }
    for (double t : threshold) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw InputError("sweep axis threshold: " + format_double(t) + " outside (0, 1]");
        }
    }
    check_unique(threshold, "threshold");
    check_weights(w_cdm, "w_cdm");
    check_weights(w_hrf, "w_hrf");
    check_weights(w_crf, "w_crf");
    if (replications < 1) {
        throw InputError("replications must be at least 1");
    }
    run.validate();
}

void take_run_keys(KeyValueFile& kv, RunConfig& cfg)
{
    cfg.household_radius = kv.take_double("household_radius", cfg.household_radius);
    cfg.rescuer_radius = kv.take_double("rescuer_radius", cfg.rescuer_radius);
    cfg.shelter_radius = kv.take_double("shelter_radius", cfg.shelter_radius);
    cfg.nb_households = kv.take_int("households", cfg.nb_households);
    cfg.nb_rescuers = kv.take_int("rescuers", cfg.nb_rescuers);
    cfg.nb_shelter_managers = kv.take_int("shelter_managers", cfg.nb_shelter_managers);
    cfg.household_speed = kv.take_double("household_speed", cfg.household_speed);
    cfg.rescuer_speed = kv.take_double("rescuer_speed", cfg.rescuer_speed);
    cfg.tick_seconds = kv.take_double("tick_seconds", cfg.tick_seconds);
    cfg.max_ticks = kv.take_int("max_ticks", cfg.max_ticks);
    cfg.fallback_min_tick = kv.take_int("fallback_min_tick", cfg.fallback_min_tick);
    cfg.fallback_max_tick = kv.take_int("fallback_max_tick", cfg.fallback_max_tick);
    cfg.fallback_media_share = kv.take_double("fallback_media_share", cfg.fallback_media_share);
    cfg.epsilon_max = kv.take_double("epsilon_max", cfg.epsilon_max);
}

SweepSpec parse_sweep_spec(std::string_view text, const std::string& source_name, const std::string& base_dir)
{
    auto kv = KeyValueFile::parse(text, source_name);
    SweepSpec spec;
    if (kv.has("storm")) {
        spec.storm.clear();
        for (double v : parse_axis(kv, "storm", {})) {
            if (v != std::floor(v)) {
                throw InputError(source_name + ": storm: signal numbers are integers");
            }
            spec.storm.push_back(static_cast<std::int64_t>(v));
        }
    }
    spec.rainfall = parse_axis(kv, "rainfall", spec.rainfall);
    spec.time_of_day = parse_axis(kv, "time_of_day", spec.time_of_day);
    spec.threshold = parse_axis(kv, "threshold", spec.threshold);
    spec.w_cdm = parse_axis(kv, "w_cdm", spec.w_cdm);
    spec.w_hrf = parse_axis(kv, "w_hrf", spec.w_hrf);
    spec.w_crf = parse_axis(kv, "w_crf", spec.w_crf);
    spec.replications = kv.take_int("replications", spec.replications);
    if (kv.has("base_seed")) {
        spec.base_seed = parse_uint(kv.take("base_seed"), source_name + ": base_seed");
    }
    const std::string filter = kv.take_or("weight_filter", std::string(weight_filter_name(spec.filter)));
    if (filter == "exact_one") {
        spec.filter = WeightFilter::ExactOne;
    } else if (filter == "at_least_one") {
        spec.filter = WeightFilter::AtLeastOne;
    } else {
        throw InputError(source_name + ": weight_filter must be exact_one or at_least_one");
    }
    const std::string pairing = kv.take_or("seed_pairing", std::string(seed_pairing_name(spec.pairing)));
    if (pairing == "common") {
        spec.pairing = SeedPairing::Common;
    } else if (pairing == "per_combo") {
        spec.pairing = SeedPairing::PerCombo;
    } else {
        throw InputError(source_name + ": seed_pairing must be common or per_combo");
    }
    spec.world = resolve(base_dir, kv.take_or("world", ""));
    spec.population = resolve(base_dir, kv.take_or("population", ""));
    spec.population_spec = resolve(base_dir, kv.take_or("population_spec", ""));
    if (kv.has("population_seed")) {
        spec.population_seed = parse_uint(kv.take("population_seed"), source_name + ": population_seed");
    }
    take_run_keys(kv, spec.run);
    kv.finish();
    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path)
{
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_sweep_spec(read_text_file(path), path, dir.empty() ? "." : dir);
}

std::string serialize_sweep_spec(const SweepSpec& spec)
{
    std::ostringstream out;
    if (!spec.world.empty()) out << "world = " << spec.world << '\n';
    if (!spec.population.empty()) out << "population = " << spec.population << '\n';
    if (!spec.population_spec.empty()) {
        out << "population_spec = " << spec.population_spec << '\n';
        out << "population_seed = " << spec.population_seed << '\n';
    }
    std::vector<double> storm(spec.storm.begin(), spec.storm.end());
    out << "storm = " << join(storm) << '\n';
    out << "rainfall = " << join(spec.rainfall) << '\n';
    out << "time_of_day = " << join(spec.time_of_day) << '\n';
    out << "threshold = " << join(spec.threshold) << '\n';
    out << "w_cdm = " << join(spec.w_cdm) << '\n';
    out << "w_hrf = " << join(spec.w_hrf) << '\n';
    out << "w_crf = " << join(spec.w_crf) << '\n';
    out << "replications = " << spec.replications << '\n';
    out << "base_seed = " << spec.base_seed << '\n';
    out << "weight_filter = " << weight_filter_name(spec.filter) << '\n';
    out << "seed_pairing = " << seed_pairing_name(spec.pairing) << '\n';
    const RunConfig& r = spec.run;
    out << "households = " << r.nb_households << '\n';
    out << "rescuers = " << r.nb_rescuers << '\n';
    out << "shelter_managers = " << r.nb_shelter_managers << '\n';
    out << "household_radius = " << format_double(r.household_radius) << '\n';
    out << "rescuer_radius = " << format_double(r.rescuer_radius) << '\n';
    out << "shelter_radius = " << format_double(r.shelter_radius) << '\n';
    out << "household_speed = " << format_double(r.household_speed) << '\n';
    out << "rescuer_speed = " << format_double(r.rescuer_speed) << '\n';
    out << "tick_seconds = " << format_double(r.tick_seconds) << '\n';
    out << "max_ticks = " << r.max_ticks << '\n';
    out << "fallback_min_tick = " << r.fallback_min_tick << '\n';
    out << "fallback_max_tick = " << r.fallback_max_tick << '\n';
    out << "fallback_media_share = " << format_double(r.fallback_media_share) << '\n';
    out << "epsilon_max = " << format_double(r.epsilon_max) << '\n';
    return out.str();
}

Scenario Combo::scenario() const
{
    const auto storm_level = storm_from_signal(static_cast<int>(storm));
    const auto rain_level = from_code<Rainfall>(rainfall);
    const auto tod_level = from_code<TimeOfDay>(time_of_day);
    if (!storm_level || !rain_level || !tod_level) {
        throw InputError("combination " + std::to_string(index) + " has an invalid scenario code");
    }
    return {*storm_level, *rain_level, *tod_level};
}

std::vector<Combo> enumerate(const SweepSpec& spec)
{
    std::vector<Combo> out;
    out.reserve(spec.storm.size() * spec.rainfall.size() * spec.time_of_day.size() * spec.threshold.size() *
                spec.w_cdm.size() * spec.w_hrf.size() * spec.w_crf.size());
    for (auto s : spec.storm)
        for (double rain : spec.rainfall)
            for (double tod : spec.time_of_day)
                for (double t : spec.threshold)
                    for (double wc : spec.w_cdm)
                        for (double wh : spec.w_hrf)
                            for (double wr : spec.w_crf) {
                                out.push_back({out.size(), s, rain, tod, t, wc, wh, wr});
                            }
    return out;
}

bool passes_weight_filter(const Weights& w, WeightFilter mode)
{
    const double sum = w.cdm + w.hrf + w.crf;
    if (mode == WeightFilter::ExactOne) {
        return std::abs(sum - 1.0) <= kWeightTolerance;
    }
    return sum >= 1.0 - kWeightTolerance;
}

std::vector<Combo> filter_valid(std::span<const Combo> combos, WeightFilter mode)
{
    std::vector<Combo> out;
    for (const auto& c : combos) {
        if (passes_weight_filter(c.weights(), mode)) {
            out.push_back(c);
        }
    }
    return out;
}

std::uint64_t replicate_seed(const SweepSpec& spec, const Combo& combo, std::int64_t replicate)
{
    const auto r = static_cast<std::uint64_t>(replicate);
    if (spec.pairing == SeedPairing::Common) {
        return stable_hash({spec.base_seed, r});
    }
    return stable_hash({spec.base_seed, static_cast<std::uint64_t>(combo.index), r});
}

SweepRow make_row(const Combo& combo, std::int64_t replicate, std::uint64_t seed, const RunResult& result)
{
    SweepRow row;
    row.combo_index = combo.index;
    row.replicate = replicate;
    row.seed = seed;
    row.storm = combo.storm;
    row.rainfall = combo.rainfall;
    row.time_of_day = combo.time_of_day;
    row.threshold = combo.threshold;
    row.w_cdm = combo.w_cdm;
    row.w_hrf = combo.w_hrf;
    row.w_crf = combo.w_crf;
    row.evacuated = result.evacuated;
    row.ticks = result.ticks_elapsed;
    row.truncated = result.truncated;
    return row;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<SweepRow> execute(const SweepSpec& spec, const WorldIndex& index,
                              std::span<const HouseholdProfile> profiles, unsigned workers)
{
    spec.validate();
    const auto combos = filter_valid(enumerate(spec), spec.filter);
    const auto reps = static_cast<std::size_t>(spec.replications);
    std::vector<SweepRow> rows(combos.size() * reps);
    parallel_for(rows.size(), workers, [&](std::size_t job) {
        const Combo& combo = combos[job / reps];
        const auto r = static_cast<std::int64_t>(job % reps);
        RunConfig cfg = spec.run;
        cfg.scenario = combo.scenario();
        cfg.weights = combo.weights();
        cfg.threshold = combo.threshold;
        cfg.seed = replicate_seed(spec, combo, r);
        cfg.record_events = false;
        cfg.record_time_series = false;
        rows[job] = make_row(combo, r, cfg.seed, run(index, profiles, cfg));
    });
    return rows;
}

std::string rows_to_csv(std::span<const SweepRow> rows)
{
    std::string out(kSweepCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.combo_index) + ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) +
               ',' + std::to_string(r.storm) + ',' + format_double(r.rainfall) + ',' +
               format_double(r.time_of_day) + ',' + format_double(r.threshold) + ',' + format_double(r.w_cdm) +
               ',' + format_double(r.w_hrf) + ',' + format_double(r.w_crf) + ',' + std::to_string(r.evacuated) +
               ',' + std::to_string(r.ticks) + ',' + (r.truncated ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<SweepRow> rows_from_csv(std::string_view text, const std::string& source_name)
{
    auto lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty() || trim(lines[0]) != kSweepCsvHeader) {
        throw InputError(source_name + ": row 1: expected header '" + std::string(kSweepCsvHeader) + "'");
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = source_name + ": row " + std::to_string(i + 1);
        const auto f = split(trim(lines[i]), ',');
        if (f.size() != 13) {
            throw InputError(where + ": expected 13 columns, got " + std::to_string(f.size()));
        }
        SweepRow r;
        r.combo_index = static_cast<std::size_t>(parse_uint(f[0], where + ": combo_index"));
        r.replicate = parse_int(f[1], where + ": replicate");
        r.seed = parse_uint(f[2], where + ": seed");
        r.storm = parse_int(f[3], where + ": storm");
        r.rainfall = parse_double(f[4], where + ": rainfall");
        r.time_of_day = parse_double(f[5], where + ": time_of_day");
        r.threshold = parse_double(f[6], where + ": threshold");
        r.w_cdm = parse_double(f[7], where + ": w_cdm");
        r.w_hrf = parse_double(f[8], where + ": w_hrf");
        r.w_crf = parse_double(f[9], where + ": w_crf");
        r.evacuated = parse_int(f[10], where + ": evacuated");
        r.ticks = parse_int(f[11], where + ": ticks");
        if (f[12] != "0" && f[12] != "1") {
            throw InputError(where + ": truncated: expected 0 or 1");
        }
        r.truncated = f[12] == "1";
        rows.push_back(r);
    }
    return rows;
}

std::vector<SweepRow> load_rows(const std::string& path)
{
    return rows_from_csv(read_text_file(path), path);
}

} // namespace evac
