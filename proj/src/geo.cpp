#include "evac/geo.hpp"

#include "evac/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace evac {

double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double point_segment_distance(Point p, Point a, Point b)
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    return distance(p, Point{a.x + t * dx, a.y + t * dy});
}

namespace {

constexpr double kEdgeLengthTolerance = 1e-6;

[[noreturn]] void invalid(const std::string& what)
{
    throw InputError("invalid world: " + what);
}

} // namespace

World::World(WorldData data) : data_(std::move(data))
{
    const std::size_t n = data_.nodes.size();
    if (n == 0) {
        invalid("road graph has no nodes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data_.nodes[i].x) || !std::isfinite(data_.nodes[i].y)) {
            invalid("node " + std::to_string(i) + " has non-finite coordinates");
        }
    }

    adjacency_.assign(n, {});
    std::set<std::pair<NodeId, NodeId>> seen_edges;
    for (auto& e : data_.edges) {
        const std::string name = "edge " + std::to_string(e.a) + "-" + std::to_string(e.b);
        if (e.a >= n || e.b >= n) {
            invalid(name + " references a missing node");
        }
        if (e.a == e.b) {
            invalid(name + " is a self-loop");
        }
        if (!seen_edges.insert(std::minmax(e.a, e.b)).second) {
            invalid(name + " is duplicated");
        }
        const double euclid = distance(data_.nodes[e.a], data_.nodes[e.b]);
        if (!std::isnan(e.length) && !(std::abs(e.length - euclid) <= kEdgeLengthTolerance)) {
            invalid(name + " length " + format_double(e.length) + " differs from endpoint distance " +
                    format_double(euclid));
        }
        if (euclid <= 0.0) {
            invalid(name + " joins coincident nodes");
        }
        e.length = euclid; // a stated length is only a cross-check
        adjacency_[e.a].push_back({e.b, e.length});
        adjacency_[e.b].push_back({e.a, e.length});
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end(), [](const Neighbor& l, const Neighbor& r) { return l.node < r.node; });
    }

    std::set<std::int64_t> ids;
    for (const auto& b : data_.buildings) {
        if (!ids.insert(b.id).second) {
            invalid("duplicate building id " + std::to_string(b.id));
        }
        if (!std::isfinite(b.location.x) || !std::isfinite(b.location.y)) {
            invalid("building " + std::to_string(b.id) + " has non-finite coordinates");
        }
    }
    ids.clear();
    for (const auto& w : data_.waterways) {
        if (!ids.insert(w.id).second) {
            invalid("duplicate waterway id " + std::to_string(w.id));
        }
        if (w.points.size() < 2) {
            invalid("waterway " + std::to_string(w.id) + " needs at least two points");
        }
    }
    ids.clear();
    for (const auto& s : data_.shelters) {
        const std::string name = "shelter " + std::to_string(s.id);
        if (!ids.insert(s.id).second) {
            invalid("duplicate shelter id " + std::to_string(s.id));
        }
        if (s.node >= n) {
            invalid(name + " references missing node " + std::to_string(s.node));
        }
        if (!s.external && s.capacity <= 0) {
            invalid(name + " capacity must be > 0");
        }
    }
    for (NodeId r : data_.rescuer_starts) {
        if (r >= n) {
            invalid("rescuer_start references missing node " + std::to_string(r));
        }
    }

    // Shelters and rescuer starts must share one connected component.
    std::vector<NodeId> anchors;
    for (const auto& s : data_.shelters) {
        anchors.push_back(s.node);
    }
    anchors.insert(anchors.end(), data_.rescuer_starts.begin(), data_.rescuer_starts.end());
    if (!anchors.empty()) {
        std::vector<char> reached(n, 0);
        std::vector<NodeId> stack{anchors.front()};
        reached[anchors.front()] = 1;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (const auto& nb : adjacency_[u]) {
                if (!reached[nb.node]) {
                    reached[nb.node] = 1;
                    stack.push_back(nb.node);
                }
            }
        }
        for (const auto& s : data_.shelters) {
            if (!reached[s.node]) {
                invalid("disconnected shelter " + std::to_string(s.id) + " at node " + std::to_string(s.node));
            }
        }
        for (NodeId r : data_.rescuer_starts) {
            if (!reached[r]) {
                invalid("disconnected rescuer_start at node " + std::to_string(r));
            }
        }
    }

    by_x_.resize(n);
    for (NodeId i = 0; i < n; ++i) {
        by_x_[i] = i;
    }
    std::sort(by_x_.begin(), by_x_.end(), [this](NodeId l, NodeId r) {
        const double xl = data_.nodes[l].x;
        const double xr = data_.nodes[r].x;
        return xl != xr ? xl < xr : l < r;
    });
}

std::optional<std::size_t> World::find_building(std::int64_t id) const
{
    for (std::size_t i = 0; i < data_.buildings.size(); ++i) {
        if (data_.buildings[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t World::internal_shelter_count() const
{
    return static_cast<std::size_t>(
        std::count_if(data_.shelters.begin(), data_.shelters.end(), [](const Shelter& s) { return !s.external; }));
}

NodeId World::nearest_node(Point p) const
{
    // Sweep outward from p.x through the x-sorted index; stop once the
    // horizontal gap alone exceeds the best distance found.
    const auto start = std::lower_bound(by_x_.begin(), by_x_.end(), p.x,
                                        [this](NodeId id, double x) { return data_.nodes[id].x < x; });
    NodeId best = by_x_.front();
    double best_d = kUnreachable;
    auto consider = [&](NodeId id) {
        const double d = distance(p, data_.nodes[id]);
        if (d < best_d || (d == best_d && id < best)) {
            best = id;
            best_d = d;
        }
    };
    for (auto it = start; it != by_x_.end(); ++it) {
        if (data_.nodes[*it].x - p.x > best_d) {
            break;
        }
        consider(*it);
    }
    for (auto it = start; it != by_x_.begin();) {
        --it;
        if (p.x - data_.nodes[*it].x > best_d) {
            break;
        }
        consider(*it);
    }
    return best;
}

NodeId nearest_road_node(const World& world, Point p)
{
    return world.nearest_node(p);
}

std::vector<double> distance_field(const World& world, NodeId target)
{
    std::vector<double> dist(world.node_count(), kUnreachable);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[target] = 0.0;
    heap.push({0.0, target});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) {
            continue;
        }
        for (const auto& nb : world.neighbors(u)) {
            const double nd = d + nb.length;
            if (nd < dist[nb.node]) {
                dist[nb.node] = nd;
                heap.push({nd, nb.node});
            }
        }
    }
    return dist;
}

std::vector<NodeId> descend(const World& world, std::span<const double> field, NodeId from)
{
    if (!std::isfinite(field[from])) {
        return {};
    }
    std::vector<NodeId> path{from};
    NodeId cur = from;
    while (field[cur] > 0.0) {
        const double tol = 1e-9 * std::max(1.0, field[cur]);
        std::optional<NodeId> next;
        for (const auto& nb : world.neighbors(cur)) {
            if (nb.length + field[nb.node] <= field[cur] + tol) {
                next = nb.node;
                break;
            }
        }
        if (!next || path.size() > world.node_count()) {
            throw InvariantViolation("descend: distance field is inconsistent with the road graph");
        }
        cur = *next;
        path.push_back(cur);
    }
    return path;
}

std::optional<Path> shortest_path(const World& world, NodeId from, NodeId to)
{
    if (from >= world.node_count() || to >= world.node_count()) {
        throw InputError("shortest_path: node id out of range");
    }
    const auto field = distance_field(world, to);
    auto nodes = descend(world, field, from);
    if (nodes.empty()) {
        return std::nullopt;
    }
    Path path;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        for (const auto& nb : world.neighbors(nodes[i - 1])) {
            if (nb.node == nodes[i]) {
                path.length += nb.length;
                break;
            }
        }
    }
    path.nodes = std::move(nodes);
    return path;
}

double hazard_distance(const World& world, Point p)
{
    if (world.waterways().empty()) {
        throw InputError("hazard_distance: world has no waterways");
    }
    double best = kUnreachable;
    for (const auto& w : world.waterways()) {
        for (std::size_t i = 1; i < w.points.size(); ++i) {
            best = std::min(best, point_segment_distance(p, w.points[i - 1], w.points[i]));
        }
    }
    return best;
}

Proximity classify_proximity(double meters)
{
    if (!(meters >= 0.0)) {
        throw InputError("classify_proximity: distance must be >= 0, got " + format_double(meters));
    }
    if (meters <= kWithinHazardMeters) {
        return Proximity::Within;
    }
    if (meters <= kNearHazardMeters) {
        return Proximity::Near;
    }
    return Proximity::Far;
}

// ---------------------------------------------------------------------------
// World text format

World parse_world(std::string_view text, const std::string& source_name)
{
    WorldData data;
    std::map<std::uint64_t, Point> nodes;
    int line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto tok = split_whitespace(line);
        if (tok.empty()) {
            continue;
        }
        const std::string at = source_name + ":" + std::to_string(line_no);
        auto expect = [&](bool ok, std::string_view usage) {
            if (!ok) {
                throw InputError(at + ": expected '" + std::string(usage) + "'");
            }
        };
        auto num = [&](std::string_view t) { return parse_double(t, at); };
        auto node_ref = [&](std::string_view t) -> NodeId {
            const auto v = parse_uint(t, at);
            if (v > std::numeric_limits<NodeId>::max()) {
                throw InputError(at + ": node id too large");
            }
            return static_cast<NodeId>(v);
        };

        const std::string_view kind = tok[0];
        if (kind == "node") {
            expect(tok.size() == 4, "node <id> <x> <y>");
            const auto id = parse_uint(tok[1], at);
            if (!nodes.emplace(id, Point{num(tok[2]), num(tok[3])}).second) {
                throw InputError(at + ": duplicate node id " + std::to_string(id));
            }
        } else if (kind == "edge") {
            expect(tok.size() == 3 || tok.size() == 4, "edge <a> <b> [length]");
            RoadEdge e{node_ref(tok[1]), node_ref(tok[2]), std::numeric_limits<double>::quiet_NaN()};
            if (tok.size() == 4) {
                e.length = num(tok[3]);
            }
            data.edges.push_back(e);
        } else if (kind == "building") {
            expect(tok.size() == 4, "building <id> <x> <y>");
            data.buildings.push_back({parse_int(tok[1], at), Point{num(tok[2]), num(tok[3])}});
        } else if (kind == "waterway") {
            expect(tok.size() >= 6 && tok.size() % 2 == 0, "waterway <id> <x1> <y1> <x2> <y2> ...");
            Waterway w{parse_int(tok[1], at), {}};
            for (std::size_t i = 2; i < tok.size(); i += 2) {
                w.points.push_back({num(tok[i]), num(tok[i + 1])});
            }
            data.waterways.push_back(std::move(w));
        } else if (kind == "shelter") {
            expect(tok.size() == 5, "shelter <id> <node> <capacity|inf> <internal|external>");
            Shelter s;
            s.id = parse_int(tok[1], at);
            s.node = node_ref(tok[2]);
            if (tok[4] == "external") {
                s.external = true;
                if (tok[3] != "inf") {
                    throw InputError(at + ": external shelter capacity must be 'inf'");
                }
            } else if (tok[4] == "internal") {
                if (tok[3] == "inf") {
                    throw InputError(at + ": only external shelters have unbounded capacity");
                }
                s.capacity = parse_int(tok[3], at);
            } else {
                expect(false, "shelter <id> <node> <capacity|inf> <internal|external>");
            }
            data.shelters.push_back(s);
        } else if (kind == "rescuer_start") {
            expect(tok.size() == 2, "rescuer_start <node>");
            data.rescuer_starts.push_back(node_ref(tok[1]));
        } else {
            throw InputError(at + ": unknown record kind '" + std::string(kind) + "'");
        }
    }

    NodeId expected = 0;
    for (const auto& [id, p] : nodes) {
        if (id != expected) {
            throw InputError(source_name + ": node ids must be 0..N-1; missing node " + std::to_string(expected));
        }
        data.nodes.push_back(p);
        ++expected;
    }
    try {
        return World(std::move(data));
    } catch (const InputError& err) {
        throw InputError(source_name + ": " + err.what());
    }
}

World load_world(const std::string& path)
{
    return parse_world(read_text_file(path), path);
}

std::string serialize_world(const World& world)
{
    std::ostringstream out;
    out << "# evacuation world: planar meters\n";
    const auto nodes = world.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out << "node " << i << ' ' << format_double(nodes[i].x) << ' ' << format_double(nodes[i].y) << '\n';
    }
    for (const auto& e : world.edges()) {
        out << "edge " << e.a << ' ' << e.b << '\n';
    }
    for (const auto& b : world.buildings()) {
        out << "building " << b.id << ' ' << format_double(b.location.x) << ' ' << format_double(b.location.y)
            << '\n';
    }
    for (const auto& w : world.waterways()) {
        out << "waterway " << w.id;
        for (const auto& p : w.points) {
            out << ' ' << format_double(p.x) << ' ' << format_double(p.y);
        }
        out << '\n';
    }
    for (const auto& s : world.shelters()) {
        out << "shelter " << s.id << ' ' << s.node << ' ';
        if (s.external) {
            out << "inf external\n";
        } else {
            out << s.capacity << " internal\n";
        }
    }
    for (NodeId r : world.rescuer_starts()) {
        out << "rescuer_start " << r << '\n';
    }
    return out.str();
}

} // namespace evac
