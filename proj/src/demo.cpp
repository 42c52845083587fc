#include "evac/demo.hpp"

#include "evac/population.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace evac {

namespace {

constexpr int kCols = 14;
constexpr int kRows = 11;
constexpr double kSpacing = 80.0;
constexpr int kBuildings = 570;
constexpr std::uint64_t kDemoSeed = 0x5eed'b01a;

double round_cm(double v)
{
    return std::round(v * 100.0) / 100.0;
}

NodeId grid_node(int col, int row)
{
    return static_cast<NodeId>(row * kCols + col);
}

double river_y(double x)
{
    return 430.0 + 110.0 * std::sin(x / 190.0);
}

} // namespace

WorldData make_demo_world_data()
{
    Rng rng(kDemoSeed);
    WorldData w;

    for (int row = 0; row < kRows; ++row) {
        for (int col = 0; col < kCols; ++col) {
            const double jx = rng.uniform_closed(-12.0, 12.0);
            const double jy = rng.uniform_closed(-12.0, 12.0);
            w.nodes.push_back({round_cm(col * kSpacing + jx), round_cm(row * kSpacing + jy)});
        }
    }
    for (int row = 0; row < kRows; ++row) {
        for (int col = 0; col < kCols; ++col) {
            if (col + 1 < kCols) w.edges.push_back({grid_node(col, row), grid_node(col + 1, row)});
            if (row + 1 < kRows) w.edges.push_back({grid_node(col, row), grid_node(col, row + 1)});
        }
    }

    // Overflow shelter in the next town west, reached by the highway from the
    // middle of the village's west edge.
    const auto town = static_cast<NodeId>(w.nodes.size());
    w.nodes.push_back({-450.0, 400.0});
    w.edges.push_back({grid_node(0, 5), town});

    Waterway river{1, {}};
    for (double x = -120.0; x <= kCols * kSpacing + 40.0; x += 20.0) {
        river.points.push_back({round_cm(x), round_cm(river_y(x))});
    }
    w.waterways.push_back(river);

    // Houses line the streets, 10 to 20 m back from the road, never in the
    // river and never on top of each other.
    const std::size_t street_edges = w.edges.size() - 1;
    while (w.buildings.size() < static_cast<std::size_t>(kBuildings)) {
        const auto& e = w.edges[rng.below(street_edges)];
        const Point a = w.nodes[e.a];
        const Point b = w.nodes[e.b];
        const double t = rng.uniform_closed(0.12, 0.88);
        const double offset = rng.uniform_closed(10.0, 20.0) * (rng.below(2) ? 1.0 : -1.0);
        const double len = distance(a, b);
        const double nx = -(b.y - a.y) / len;
        const double ny = (b.x - a.x) / len;
        const Point p{round_cm(a.x + t * (b.x - a.x) + offset * nx), round_cm(a.y + t * (b.y - a.y) + offset * ny)};
        double to_river = kUnreachable;
        for (std::size_t i = 1; i < river.points.size(); ++i) {
            to_river = std::min(to_river, point_segment_distance(p, river.points[i - 1], river.points[i]));
        }
        if (to_river < 4.0) continue;
        bool crowded = false;
        for (const auto& other : w.buildings) {
            if (distance(other.location, p) < 7.0) {
                crowded = true;
                break;
            }
        }
        if (crowded) continue;
        w.buildings.push_back({static_cast<std::int64_t>(w.buildings.size() + 1), p});
    }

    // Four barangay shelters (schools, chapel, hall), capacities in persons.
    w.shelters.push_back({1, grid_node(3, 2), 320, false});
    w.shelters.push_back({2, grid_node(10, 3), 260, false});
    w.shelters.push_back({3, grid_node(4, 8), 280, false});
    w.shelters.push_back({4, grid_node(11, 8), 240, false});
    w.shelters.push_back({5, town, 0, true});

    // Rescuers set out from 15 distinct street corners.
    std::vector<NodeId> corners;
    for (NodeId n = 0; n < static_cast<NodeId>(kCols * kRows); ++n) corners.push_back(n);
    for (std::size_t i = corners.size() - 1; i > 0; --i) {
        std::swap(corners[i], corners[rng.below(i + 1)]);
    }
    w.rescuer_starts.assign(corners.begin(), corners.begin() + 15);
    return w;
}

World make_demo_world()
{
    return World(make_demo_world_data());
}

SweepSpec demo_sweep_spec()
{
    SweepSpec spec;
    spec.world = kDemoWorldFile;
    spec.population_spec = kDemoPopulationSpecFile;
    spec.population_seed = kDemoPopulationSeed;
    return spec;
}

std::vector<std::string> emit_demo_assets(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create directory '" + dir + "': " + ec.message());
    }
    const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
    std::vector<std::string> written{path(kDemoWorldFile), path(kDemoPopulationSpecFile), path(kDemoSweepSpecFile)};
    write_text_file(written[0], serialize_world(make_demo_world()));
    write_text_file(written[1], serialize_population_spec(default_population_spec()));
    write_text_file(written[2], serialize_sweep_spec(demo_sweep_spec()));
    return written;
}

} // namespace evac
