#pragma once

#include "evac/geo.hpp"
#include "evac/population.hpp"

#include <limits>
#include <string>
#include <vector>

namespace evac::test {

/// Straight road of `n` nodes spaced `step` m apart along y = 0, a river
/// along y = river_y, one internal shelter at the east end and the external
/// shelter at the west end.
inline WorldData line_world(int n, double step, std::int64_t capacity, double river_y = 500.0)
{
    WorldData w;
    for (int i = 0; i < n; ++i) w.nodes.push_back({i * step, 0.0});
    for (int i = 0; i + 1 < n; ++i) w.edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1)});
    w.waterways.push_back({1, {{-1000.0, river_y}, {1000.0 + n * step, river_y}}});
    w.shelters.push_back({1, static_cast<NodeId>(n - 1), capacity, false});
    w.shelters.push_back({2, 0, 0, true});
    w.rescuer_starts.push_back(0);
    return w;
}

inline HouseholdProfile profile(std::int64_t id, std::int64_t building, std::int64_t members = 1)
{
    HouseholdProfile p;
    p.id = id;
    p.building_id = building;
    p.members = members;
    return p;
}

/// Every coded field at its highest code.
inline HouseholdProfile max_profile(std::int64_t id, std::int64_t building, std::int64_t members = 1)
{
    HouseholdProfile p = profile(id, building, members);
    for (std::size_t f = 0; f < kCodedFieldCount; ++f) {
        set_field_level(p, coded_field(f), field_codes(coded_field(f)).size() - 1);
    }
    return p;
}

/// Independent relaxation oracle for road distances.
inline std::vector<double> bellman_ford(const WorldData& w, NodeId source)
{
    std::vector<double> d(w.nodes.size(), std::numeric_limits<double>::infinity());
    d[source] = 0.0;
    for (std::size_t round = 0; round < w.nodes.size(); ++round) {
        bool changed = false;
        for (const auto& e : w.edges) {
            const double len = distance(w.nodes[e.a], w.nodes[e.b]);
            if (d[e.a] + len < d[e.b]) {
                d[e.b] = d[e.a] + len;
                changed = true;
            }
            if (d[e.b] + len < d[e.a]) {
                d[e.a] = d[e.b] + len;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return d;
}

} // namespace evac::test
