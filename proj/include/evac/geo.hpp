#pragma once

#include "evac/codes.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

/// Planar projected coordinates in meters.
struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Point p, Point a, Point b);

using NodeId = std::uint32_t;

struct RoadEdge {
    NodeId a = 0;
    NodeId b = 0;
    /// NaN means "derive from the endpoints"; any stated value is checked.
    double length = std::numeric_limits<double>::quiet_NaN();
    friend bool operator==(const RoadEdge&, const RoadEdge&) = default;
};

struct Building {
    std::int64_t id = 0;
    Point location;
    friend bool operator==(const Building&, const Building&) = default;
};

struct Waterway {
    std::int64_t id = 0;
    std::vector<Point> points;
    friend bool operator==(const Waterway&, const Waterway&) = default;
};

struct Shelter {
    std::int64_t id = 0;
    NodeId node = 0;
    /// Persons. Ignored when external; external shelters never fill up.
    std::int64_t capacity = 0;
    bool external = false;
    friend bool operator==(const Shelter&, const Shelter&) = default;
};

/// Raw scene contents, as parsed. Node ids are positions in `nodes`.
struct WorldData {
    std::vector<Point> nodes;
    std::vector<RoadEdge> edges;
    std::vector<Building> buildings;
    std::vector<Waterway> waterways;
    std::vector<Shelter> shelters;
    std::vector<NodeId> rescuer_starts;
    friend bool operator==(const WorldData&, const WorldData&) = default;
};

/// Validated, immutable spatial scene. Safe for concurrent reads.
class World {
public:
    struct Neighbor {
        NodeId node;
        double length;
    };

    /// Validates every invariant; throws InputError naming the first violation.
    explicit World(WorldData data);

    const WorldData& data() const { return data_; }
    std::span<const Point> nodes() const { return data_.nodes; }
    std::span<const RoadEdge> edges() const { return data_.edges; }
    std::span<const Building> buildings() const { return data_.buildings; }
    std::span<const Waterway> waterways() const { return data_.waterways; }
    std::span<const Shelter> shelters() const { return data_.shelters; }
    std::span<const NodeId> rescuer_starts() const { return data_.rescuer_starts; }

    std::size_t node_count() const { return data_.nodes.size(); }
    Point node(NodeId id) const { return data_.nodes[id]; }

    /// Neighbors sorted by node id.
    std::span<const Neighbor> neighbors(NodeId id) const { return adjacency_[id]; }

    /// Index into buildings() of the building with this id, if any.
    std::optional<std::size_t> find_building(std::int64_t id) const;

    std::size_t internal_shelter_count() const;

    /// Nearest node by Euclidean distance; ties go to the lowest id.
    NodeId nearest_node(Point p) const;

    friend bool operator==(const World& a, const World& b) { return a.data_ == b.data_; }

private:
    WorldData data_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<NodeId> by_x_; // node ids sorted by (x, id)
};

/// Parses the line-oriented world format; `source_name` prefixes errors.
World parse_world(std::string_view text, const std::string& source_name = "<world>");
World load_world(const std::string& path);
std::string serialize_world(const World& world);

NodeId nearest_road_node(const World& world, Point p);

struct Path {
    double length = 0.0;
    std::vector<NodeId> nodes;
};

/// Shortest road path. Among equal-length paths, the lexicographically
/// smallest node-id sequence wins. nullopt when `to` is unreachable.
std::optional<Path> shortest_path(const World& world, NodeId from, NodeId to);

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Road distance from every node to `target` (kUnreachable if disconnected).
std::vector<double> distance_field(const World& world, NodeId target);

/// Walks from `from` down a distance field, choosing the smallest-id
/// neighbor that stays on a shortest path. Empty if unreachable.
std::vector<NodeId> descend(const World& world, std::span<const double> field, NodeId from);

/// Minimum distance from p to any waterway polyline.
double hazard_distance(const World& world, Point p);

/// Within <= 10 m < Near <= 50 m < Far.
Proximity classify_proximity(double meters);

inline constexpr double kWithinHazardMeters = 10.0;
inline constexpr double kNearHazardMeters = 50.0;

} // namespace evac
