// End-to-end acceptance run: one line per criterion, exit status 1 if any
// hard criterion fails. Runs the full demo sweep once (15 s or so on a
// single core).

#include "evac/cli.hpp"
#include "evac/demo.hpp"
#include "evac/stats.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <unistd.h>

using namespace evac;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what)
{
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << ". " << what << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double v, int precision = 4)
{
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

struct Sweep {
    SweepSpec spec = demo_sweep_spec();
    World world = make_demo_world();
    WorldIndex index{world};
    PopulationSpec population = default_population_spec();
    std::vector<HouseholdProfile> profiles = synthesize(population, world, kDemoPopulationSeed);
    std::vector<SweepRow> rows;
    std::string error;
    double seconds = 0.0;
    unsigned workers = 1;
};

// (storm, rainfall, time_of_day, threshold, w_cdm, w_hrf, w_crf) -> mean evacuated
using ComboKey = std::tuple<std::int64_t, double, double, double, double, double, double>;

std::map<ComboKey, double> combo_means(const std::vector<SweepRow>& rows)
{
    std::map<ComboKey, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        auto& a = acc[{r.storm, r.rainfall, r.time_of_day, r.threshold, r.w_cdm, r.w_hrf, r.w_crf}];
        a.first += static_cast<double>(r.evacuated);
        a.second += 1;
    }
    std::map<ComboKey, double> out;
    for (const auto& [k, a] : acc) out[k] = a.first / a.second;
    return out;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr)
{
    args.insert(args.begin(), "evacsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

void criterion1(const Sweep& s)
{
    std::size_t triples = 0;
    for (int a = 1; a <= 8; ++a)
        for (int b = 1; b <= 8; ++b)
            for (int c = 1; c <= 8; ++c) triples += (a + b + c == 10) ? 1 : 0;
    const auto all = enumerate(s.spec);
    const auto valid = filter_valid(all, WeightFilter::ExactOne);
    const bool ok = all.size() == 18432 && valid.size() == 1296 && valid.size() == triples * 36 &&
                    s.rows.size() == 12960 && s.error.empty() && s.seconds < 1800.0;
    report(1, ok,
           "grid: " + std::to_string(all.size()) + " combinations, " + std::to_string(valid.size()) +
               " exact-one (brute force " + std::to_string(triples) + " triples x 36), " +
               std::to_string(s.rows.size()) + " rows in " + fmt(s.seconds, 3) + " s on " +
               std::to_string(s.workers) + " worker(s)");
}

void criterion2(const Sweep& s)
{
    bool ok = s.error.empty();

    // a sample of sweep rows replayed one run at a time
    std::size_t replayed = 0;
    for (std::size_t i = 0; ok && i < s.rows.size(); i += 97) {
        const auto& row = s.rows[i];
        RunConfig cfg = s.spec.run;
        cfg.scenario = {*storm_from_signal(static_cast<int>(row.storm)), *from_code<Rainfall>(row.rainfall),
                        *from_code<TimeOfDay>(row.time_of_day)};
        cfg.weights = {row.w_cdm, row.w_hrf, row.w_crf};
        cfg.threshold = row.threshold;
        cfg.seed = row.seed;
        cfg.record_events = false;
        const auto r = run(s.index, s.profiles, cfg);
        ok = ok && r.evacuated == row.evacuated && r.ticks_elapsed == row.ticks;
        ++replayed;
    }

    // file outputs through the command line
    const fs::path dir = fs::temp_directory_path() / ("evacsim_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    emit_demo_assets(dir.string());
    auto p = [&](const char* name) { return (dir / name).string(); };
    write_text_file(p("small.cfg"), "world = demo.world\npopulation_spec = population.cfg\n"
                                    "storm = 1 2\nrainfall = 0.5 1\ntime_of_day = 1\nthreshold = 0.7 0.9\n"
                                    "replications = 2\n");
    std::string out_a;
    std::string out_b;
    const std::vector<std::string> sim{"simulate", "--world", p("demo.world"), "--storm", "2", "--rain", "orange",
                                       "--time", "night", "--threshold", "0.9", "--weights", "0.2,0.5,0.3",
                                       "--seed", "42"};
    auto sim_a = sim;
    sim_a.insert(sim_a.end(), {"--events", p("events_a.csv"), "--series", p("series_a.csv")});
    auto sim_b = sim;
    sim_b.insert(sim_b.end(), {"--events", p("events_b.csv"), "--series", p("series_b.csv")});
    ok = ok && cli(sim_a, &out_a) == 0 && cli(sim_b, &out_b) == 0 && out_a == out_b &&
         read_text_file(p("events_a.csv")) == read_text_file(p("events_b.csv")) &&
         read_text_file(p("series_a.csv")) == read_text_file(p("series_b.csv"));
    const auto threads = std::to_string(std::max(2u, std::thread::hardware_concurrency()));
    ok = ok && cli({"sweep", "--spec", p("small.cfg"), "--out", p("rows_a.csv"), "--workers", "1"}) == 0 &&
         cli({"sweep", "--spec", p("small.cfg"), "--out", p("rows_b.csv"), "--workers", threads}) == 0 &&
         read_text_file(p("rows_a.csv")) == read_text_file(p("rows_b.csv"));
    fs::remove_all(dir);

    report(2, ok,
           "determinism: " + std::to_string(replayed) +
               " sweep rows replayed exactly; simulate and sweep outputs byte-identical across reruns and worker "
               "counts");
}

void criterion3(const Sweep& s, const std::map<ComboKey, double>& means, bool& trend_ok)
{
    std::size_t checked = 0;
    std::size_t violations = 0;
    for (const auto& [k, m7] : means) {
        auto [st, rain, tod, t, wc, wh, wr] = k;
        if (t != 0.7) continue;
        const auto i8 = means.find({st, rain, tod, 0.8, wc, wh, wr});
        const auto i9 = means.find({st, rain, tod, 0.9, wc, wh, wr});
        ++checked;
        if (i8 == means.end() || i9 == means.end()) {
            ++violations;
            continue;
        }
        if (!(m7 >= i8->second && i8->second >= i9->second)) ++violations;
    }
    trend_ok = s.error.empty() && checked > 0 && violations == 0;

    double best = 0.0;
    for (const auto& [k, m] : means) {
        auto [st, rain, tod, t, wc, wh, wr] = k;
        if (st == 1 && rain == 0.25 && tod == 0.5 && t == 0.7) best = std::max(best, m);
    }
    report(3, trend_ok,
           "threshold trend: mean evacuated 0.7 >= 0.8 >= 0.9 in " + std::to_string(checked - violations) + " of " +
               std::to_string(checked) + " scenario/weight cells; lowest-risk scenario max at 0.7 = " + fmt(best) +
               " of 570 (" + (best >= 570 ? "reaches 570" : "reported, population-dependent") + ")");
}

void criterion4(const Sweep& s)
{
    bool ok = s.error.empty();
    std::string detail;
    try {
        const auto rep = sensitivity(s.rows, InterceptMode::DropOneWeight);
        for (const auto& c : rep.coefficients) {
            if (c.name == "threshold") {
                ok = ok && c.estimate < 0 && c.p_value < 0.01;
                detail = "threshold coefficient " + fmt(c.estimate) + " (p " + format_p_value(c.p_value) + ")";
            }
        }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }

    std::map<double, std::map<double, std::pair<double, int>>> by_slice;
    for (const auto& r : s.rows) {
        auto& a = by_slice[r.threshold][r.w_crf];
        a.first += static_cast<double>(r.evacuated);
        a.second += 1;
    }
    std::string curve;
    for (const auto& [t, by_w] : by_slice) {
        double prev = -1.0;
        curve += " t=" + fmt(t, 2) + ":";
        for (const auto& [w, a] : by_w) {
            const double m = a.first / a.second;
            ok = ok && m >= prev;
            prev = m;
            curve += " " + fmt(m, 3);
        }
    }
    report(4, ok, "capacity weight: " + detail + "; mean evacuated by w_crf" + curve);
}

void criterion5(const Sweep& s, const std::map<ComboKey, double>& means, bool trend_ok)
{
    double nearest = -1.0;
    double gap = 1e300;
    std::string at;
    bool hit = false;
    for (const auto& [k, m] : means) {
        auto [st, rain, tod, t, wc, wh, wr] = k;
        if (st != 2 || rain != 0.5 || tod != 1.0 || t != 0.9) continue;
        const double d = m < 46 ? 46 - m : (m > 86 ? m - 86 : 0.0);
        if (d < gap) {
            gap = d;
            nearest = m;
            at = fmt(wc, 2) + "," + fmt(wh, 2) + "," + fmt(wr, 2);
        }
        hit = hit || d == 0.0;
    }
    std::string line = "calibration anchor (soft): PSWS2/orange/night at 0.9, nearest mean evacuated " +
                       fmt(nearest) + " at weights " + at;
    if (hit) {
        report(5, true, line + ", inside [46, 86]");
        return;
    }
    report(5, trend_ok && s.error.empty(),
           line + ", outside [46, 86]; soft criterion, gated on the threshold trend");
    std::cout << "    population spec used (seed " << kDemoPopulationSeed << "):\n";
    std::istringstream spec(serialize_population_spec(s.population));
    for (std::string l; std::getline(spec, l);) std::cout << "      " << l << "\n";
}

void criterion6()
{
    bool ok = true;
    std::size_t combos = 0;
    const Weights w{0.3, 0.5, 0.2};
    const double hi = highest_possible_score(w);
    std::vector<std::size_t> levels(kCodedFieldCount, 0);
    HouseholdProfile p;
    while (true) {
        for (std::size_t f = 0; f < kCodedFieldCount; ++f) set_field_level(p, coded_field(f), levels[f]);
        const double cdm = cdm_score(p);
        const double crf = crf_score(p);
        ok = ok && cdm >= 2.0 && cdm <= 8.0 && crf >= 1.25 && crf <= 3.0;
        for (const auto& st : Coding<StormSignal>::levels)
            for (const auto& rf : Coding<Rainfall>::levels)
                for (const auto& td : Coding<TimeOfDay>::levels)
                    for (const auto& src : Coding<WarningSource>::levels)
                        for (const auto& px : Coding<Proximity>::levels) {
                            const double hrf = hrf_score({st.value, rf.value, td.value}, {src.value, px.value, 0.0});
                            const double pr = combine_scores(cdm, hrf, crf, w, 0.0).perceived_risk;
                            ok = ok && hrf >= 1.5 && hrf <= 5.0 && pr <= hi + 1e-12;
                            ++combos;
                        }
        std::size_t f = 0;
        while (f < kCodedFieldCount && ++levels[f] == field_codes(coded_field(f)).size()) levels[f++] = 0;
        if (f == kCodedFieldCount) break;
    }
    ok = ok && std::abs(highest_possible_score({0.2, 0.5, 0.3}) - 5.0) <= 1e-12 &&
         std::abs(highest_possible_score({1, 1, 1}) - 16.0) <= 1e-12 &&
         std::abs(highest_possible_score({0.1, 0.8, 0.1}) - 5.1) <= 1e-12;
    report(6, ok, "risk kernels: " + std::to_string(combos) + " code combinations within bounds; highest-score examples exact");
}

void criterion7()
{
    Rng rng(7);
    double worst_ols = 0.0;
    for (int sys = 0; sys < 100; ++sys) {
        const int n = 30 + static_cast<int>(rng.below(100));
        const int k = 2 + static_cast<int>(rng.below(6));
        DesignMatrix m;
        m.x.resize(n, k);
        m.y.resize(n);
        for (int j = 0; j < k; ++j) m.columns.push_back("x" + std::to_string(j));
        for (int i = 0; i < n; ++i) {
            m.y(i) = rng.uniform_closed(-1, 1);
            for (int j = 0; j < k; ++j) {
                m.x(i, j) = rng.uniform_closed(-5, 5);
                m.y(i) += (j + 1) * m.x(i, j);
            }
        }
        // normal equations by Gauss-Jordan
        std::vector<std::vector<double>> a(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k) + 1));
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) a[r][c] = m.x.col(r).dot(m.x.col(c));
            a[r][k] = m.x.col(r).dot(m.y);
        }
        for (int c = 0; c < k; ++c) {
            int piv = c;
            for (int r = c + 1; r < k; ++r) {
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            }
            std::swap(a[c], a[piv]);
            for (int r = 0; r < k; ++r) {
                if (r == c) continue;
                const double f = a[r][c] / a[c][c];
                for (int j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
            }
        }
        const auto rep = fit_ols(m);
        for (int j = 0; j < k; ++j) {
            worst_ols = std::max(worst_ols, std::abs(rep.coefficients[j].estimate - a[j][k] / a[j][j]));
        }
    }

    std::size_t path_mismatch = 0;
    for (int g = 0; g < 100; ++g) {
        WorldData d;
        const int n = 10 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i) d.nodes.push_back({rng.uniform_closed(0, 1000), rng.uniform_closed(0, 1000)});
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                if (rng.uniform01() < 0.1) d.edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
            }
        const World w(d);
        const auto from = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        const auto oracle = test::bellman_ford(d, from);
        for (NodeId to = 0; to < static_cast<NodeId>(n); ++to) {
            const auto p = shortest_path(w, from, to);
            const bool same = std::isinf(oracle[to]) ? !p : (p && std::abs(p->length - oracle[to]) <= 1e-9);
            path_mismatch += same ? 0 : 1;
        }
    }
    const double t0 = std::abs(t_sf(0.0, 7.0) - 0.5);
    const double t1 = std::abs(t_sf(1.0, 1.0) - 0.25);
    const bool ok = worst_ols <= 1e-8 && t0 <= 1e-12 && t1 <= 1e-12 && path_mismatch == 0;
    report(7, ok,
           "numerical kernels: OLS vs normal equations max diff " + fmt(worst_ols, 3) + " over 100 systems; t_sf errors " +
               fmt(t0, 3) + ", " + fmt(t1, 3) + "; shortest paths mismatched " + std::to_string(path_mismatch) +
               " over 100 graphs");
}

void criterion8(const Sweep& s)
{
    std::int64_t truncated = 0;
    for (const auto& r : s.rows) truncated += r.truncated ? 1 : 0;

    // step a sample of runs and watch every shelter at every tick
    std::size_t over = 0;
    std::size_t stepped = 0;
    const auto shelters = s.world.shelters();
    for (std::size_t i = 0; s.error.empty() && i < s.rows.size(); i += 331) {
        const auto& row = s.rows[i];
        RunConfig cfg = s.spec.run;
        cfg.scenario = {*storm_from_signal(static_cast<int>(row.storm)), *from_code<Rainfall>(row.rainfall),
                        *from_code<TimeOfDay>(row.time_of_day)};
        cfg.weights = {row.w_cdm, row.w_hrf, row.w_crf};
        cfg.threshold = 0.0; // everyone evacuates: the hardest case for capacity
        cfg.seed = row.seed;
        cfg.record_events = false;
        Simulation sim = init_run(s.index, s.profiles, cfg);
        while (!sim.done()) {
            sim.step();
            for (const auto& st : sim.shelters()) {
                if (!shelters[st.shelter].external && st.occupancy > shelters[st.shelter].capacity) ++over;
            }
        }
        truncated += sim.result().truncated ? 1 : 0;
        ++stepped;
    }
    const bool ok = s.error.empty() && truncated == 0 && over == 0;
    report(8, ok,
           "safety: " + (s.error.empty() ? std::string("no invariant violation in ") + std::to_string(s.rows.size()) + " runs"
                                         : "sweep aborted: " + s.error) +
               ", " + std::to_string(truncated) + " non-terminal runs, " + std::to_string(over) +
               " over-capacity ticks in " + std::to_string(stepped) + " fully stepped all-evacuate runs");
}

} // namespace

int main()
{
    Sweep s;
    s.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto start = std::chrono::steady_clock::now();
    try {
        s.rows = execute(s.spec, s.index, s.profiles, s.workers);
    } catch (const std::exception& e) {
        s.error = e.what();
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto means = combo_means(s.rows);

    bool trend_ok = false;
    criterion1(s);
    criterion2(s);
    criterion3(s, means, trend_ok);
    criterion4(s);
    criterion5(s, means, trend_ok);
    criterion6();
    criterion7();
    criterion8(s);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
