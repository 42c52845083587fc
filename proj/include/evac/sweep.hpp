#pragma once

#include "evac/engine.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

/// Which weight triples a sweep runs.
enum class WeightFilter {
    ExactOne,   // w_cdm + w_hrf + w_crf == 1 (within 1e-9)
    AtLeastOne, // sum >= 1 - 1e-9
};

/// How replicate seeds are derived.
enum class SeedPairing {
    /// Replicate r uses the same seed in every combination, so combinations
    /// are compared under common random numbers.
    Common,
    /// Every (combination, replicate) pair gets its own seed.
    PerCombo,
};

std::string_view weight_filter_name(WeightFilter f);
std::string_view seed_pairing_name(SeedPairing p);

struct SweepSpec {
    std::vector<std::int64_t> storm{1, 2};
    std::vector<double> rainfall{0.25, 0.5, 1.0};
    std::vector<double> time_of_day{0.5, 1.0};
    std::vector<double> threshold{0.7, 0.8, 0.9};
    std::vector<double> w_cdm{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> w_hrf{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> w_crf{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::int64_t replications = 10;
    std::uint64_t base_seed = 2019;
    WeightFilter filter = WeightFilter::ExactOne;
    SeedPairing pairing = SeedPairing::Common;

    /// Inputs; relative paths are resolved against the spec file's directory.
    std::string world;
    std::string population;      // CSV, takes precedence over population_spec
    std::string population_spec; // synthesized with population_seed
    std::uint64_t population_seed = 1;

    /// Engine parameters shared by every run (scenario, weights, threshold
    /// and seed are overwritten per run).
    RunConfig run;

    /// Checks every axis value against the coded tables.
    void validate() const;
};

SweepSpec parse_sweep_spec(std::string_view text, const std::string& source_name = "<sweep spec>",
                           const std::string& base_dir = "");
SweepSpec load_sweep_spec(const std::string& path);
std::string serialize_sweep_spec(const SweepSpec& spec);

/// Reads the engine-parameter keys shared by sweep specs and CLI overrides.
void take_run_keys(KeyValueFile& kv, RunConfig& cfg);

/// One point of the parameter grid. `index` is its position in the full
/// (unfiltered) enumeration.
struct Combo {
    std::size_t index = 0;
    std::int64_t storm = 1;
    double rainfall = 0.25;
    double time_of_day = 0.5;
    double threshold = 0.7;
    double w_cdm = 0.1;
    double w_hrf = 0.1;
    double w_crf = 0.1;

    Scenario scenario() const;
    Weights weights() const { return {w_cdm, w_hrf, w_crf}; }
    friend bool operator==(const Combo&, const Combo&) = default;
};

/// Cartesian product in lexicographic axis order
/// (storm, rainfall, time_of_day, threshold, w_cdm, w_hrf, w_crf; last varies fastest).
std::vector<Combo> enumerate(const SweepSpec& spec);

bool passes_weight_filter(const Weights& w, WeightFilter mode);
std::vector<Combo> filter_valid(std::span<const Combo> combos, WeightFilter mode);

std::uint64_t replicate_seed(const SweepSpec& spec, const Combo& combo, std::int64_t replicate);

struct SweepRow {
    std::size_t combo_index = 0;
    std::int64_t replicate = 0;
    std::uint64_t seed = 0;
    std::int64_t storm = 1;
    double rainfall = 0.25;
    double time_of_day = 0.5;
    double threshold = 0.7;
    double w_cdm = 0.1;
    double w_hrf = 0.1;
    double w_crf = 0.1;
    std::int64_t evacuated = 0;
    std::int64_t ticks = 0;
    bool truncated = false;
    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

SweepRow make_row(const Combo& combo, std::int64_t replicate, std::uint64_t seed, const RunResult& result);

/// Runs every valid combination x replication on `workers` threads. Rows come
/// back in combination-then-replicate order whatever the scheduling. A
/// truncated run is recorded in its row; an internal invariant violation in
/// any run aborts the sweep.
std::vector<SweepRow> execute(const SweepSpec& spec, const WorldIndex& index,
                              std::span<const HouseholdProfile> profiles, unsigned workers = 1);

inline constexpr std::string_view kSweepCsvHeader =
    "combo_index,replicate,seed,storm,rainfall,time_of_day,threshold,w_cdm,w_hrf,w_crf,evacuated,ticks,truncated";

std::string rows_to_csv(std::span<const SweepRow> rows);
std::vector<SweepRow> rows_from_csv(std::string_view text, const std::string& source_name = "<rows>");
std::vector<SweepRow> load_rows(const std::string& path);

/// Runs `count` jobs on up to `workers` threads; job i writes only slot i.
/// The first exception (lowest job index) is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

} // namespace evac
