#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsrl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

// One piece of road centerline. Arcs turn by `sweep` radians; direction is
// +1 for left, -1 for right.
struct Segment {
    enum class Kind { kStraight, kArc };
    Kind kind = Kind::kStraight;
    double length = 0.0;  // straights
    double radius = 0.0;  // arcs
    double sweep = 0.0;   // arcs, in (0, 2*pi]
    int direction = 0;    // arcs: +1 left, -1 right
    bool barrier_left = false;
    bool barrier_right = false;

    double arclength() const {
        return kind == Kind::kStraight ? length : radius * sweep;
    }
};

struct TrackSpec {
    std::vector<Segment> segments;
    double lane_width = 4.5;  // each of the two lanes
    Pose spawn;
    double goal_arclength = 0.0;
    std::string name;

    double total_length() const {
        double s = 0.0;
        for (const Segment& seg : segments) s += seg.arclength();
        return s;
    }

    void validate() const {
        if (segments.empty()) throw std::invalid_argument("TrackSpec: no segments");
        if (lane_width <= 0.0) throw std::invalid_argument("TrackSpec: lane_width <= 0");
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        for (const Segment& s : segments) {
            if (s.kind == Segment::Kind::kStraight) {
                if (s.length <= 0.0) throw std::invalid_argument("TrackSpec: length <= 0");
            } else {
                if (s.radius <= 0.0) throw std::invalid_argument("TrackSpec: radius <= 0");
                if (s.sweep <= 0.0 || s.sweep > kTwoPi)
                    throw std::invalid_argument("TrackSpec: sweep outside (0, 2*pi]");
                if (s.direction != 1 && s.direction != -1)
                    throw std::invalid_argument("TrackSpec: bad arc direction");
            }
        }
    }
};

// Result of projecting a point onto the track centerline.
struct Projection {
    double arclength = 0.0;  // global, clamped to [0, total_length]
    double distance = 0.0;   // unsigned distance to the closest centerline point
    double lateral = 0.0;    // signed perpendicular component, + to the left of travel
    bool beyond = false;     // clamped at the global start or end
    std::size_t segment = 0;
};

// Precomputed centerline frames and barrier polylines for one TrackSpec.
class TrackGeometry {
public:
    explicit TrackGeometry(TrackSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        Pose p = {0.0, 0.0, 0.0};
        double s0 = 0.0;
        for (const Segment& seg : spec_.segments) {
            starts_.push_back(p);
            start_arclengths_.push_back(s0);
            s0 += seg.arclength();
            p = end_pose(seg, p);
        }
        total_length_ = s0;
        build_barriers();
    }

    const TrackSpec& spec() const { return spec_; }
    double total_length() const { return total_length_; }
    double lane_width() const { return spec_.lane_width; }

    Pose centerline_pose(double s) const {
        s = std::clamp(s, 0.0, total_length_);
        std::size_t i = segment_index_at(s);
        return pose_at(spec_.segments[i], starts_[i], s - start_arclengths_[i]);
    }

    Projection project(double x, double y) const {
        const Vec2 p{x, y};
        Projection best;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
            auto [local_s, clamped] = project_local(spec_.segments[i], starts_[i], p);
            Pose cp = pose_at(spec_.segments[i], starts_[i], local_s);
            const Vec2 closest{cp.x, cp.y};
            const double d = norm(p - closest);
            if (d < best_dist) {
                best_dist = d;
                const Vec2 left_normal{-std::sin(cp.heading), std::cos(cp.heading)};
                best.arclength = start_arclengths_[i] + local_s;
                best.distance = d;
                const double perp = dot(p - closest, left_normal);
                best.lateral = (perp >= 0.0 ? 1.0 : -1.0) * d;
                best.segment = i;
                best.beyond = clamped && (best.arclength <= 0.0 ||
                                          best.arclength >= total_length_);
            }
        }
        return best;
    }

    // Barrier polylines (world coordinates) built from per-segment flags.
    const std::vector<std::vector<Vec2>>& barriers() const { return barriers_; }

private:
    static Pose pose_at(const Segment& seg, const Pose& start, double s) {
        if (seg.kind == Segment::Kind::kStraight) {
            return {start.x + s * std::cos(start.heading),
                    start.y + s * std::sin(start.heading), start.heading};
        }
        const double dir = static_cast<double>(seg.direction);
        const Vec2 center{start.x - dir * seg.radius * std::sin(start.heading),
                          start.y + dir * seg.radius * std::cos(start.heading)};
        const double a0 = std::atan2(start.y - center.y, start.x - center.x);
        const double a = a0 + dir * s / seg.radius;
        return {center.x + seg.radius * std::cos(a), center.y + seg.radius * std::sin(a),
                start.heading + dir * s / seg.radius};
    }

    static Pose end_pose(const Segment& seg, const Pose& start) {
        return pose_at(seg, start, seg.arclength());
    }

    // Local arclength of the closest centerline point, and whether it clamped.
    static std::pair<double, bool> project_local(const Segment& seg, const Pose& start,
                                                 Vec2 p) {
        if (seg.kind == Segment::Kind::kStraight) {
            const Vec2 a{start.x, start.y};
            const Vec2 dir{std::cos(start.heading), std::sin(start.heading)};
            double t = dot(p - a, dir);
            bool clamped = t < 0.0 || t > seg.length;
            return {std::clamp(t, 0.0, seg.length), clamped};
        }
        const double dir = static_cast<double>(seg.direction);
        const Vec2 center{start.x - dir * seg.radius * std::sin(start.heading),
                          start.y + dir * seg.radius * std::cos(start.heading)};
        const double a0 = std::atan2(start.y - center.y, start.x - center.x);
        const double ap = std::atan2(p.y - center.y, p.x - center.x);
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        double delta = dir * (ap - a0);
        delta = std::fmod(delta, kTwoPi);
        if (delta < 0.0) delta += kTwoPi;
        if (delta <= seg.sweep) return {delta * seg.radius, false};
        // in the gap sector: clamp to the angularly closer endpoint
        const bool to_end = (delta - seg.sweep) < (kTwoPi - delta);
        return {to_end ? seg.sweep * seg.radius : 0.0, true};
    }

    std::size_t segment_index_at(double s) const {
        for (std::size_t i = spec_.segments.size(); i-- > 0;)
            if (s >= start_arclengths_[i]) return i;
        return 0;
    }

    void build_barriers() {
        constexpr double kSpacing = 0.5;
        for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
            const Segment& seg = spec_.segments[i];
            for (int side = 0; side < 2; ++side) {
                const bool enabled = side == 0 ? seg.barrier_left : seg.barrier_right;
                if (!enabled) continue;
                const double offset = side == 0 ? spec_.lane_width : -spec_.lane_width;
                const double len = seg.arclength();
                const int n = std::max(1, static_cast<int>(std::ceil(len / kSpacing)));
                std::vector<Vec2> line;
                line.reserve(n + 1);
                for (int j = 0; j <= n; ++j) {
                    const double s = len * j / n;
                    Pose cp = pose_at(seg, starts_[i], s);
                    line.push_back({cp.x - offset * std::sin(cp.heading),
                                    cp.y + offset * std::cos(cp.heading)});
                }
                barriers_.push_back(std::move(line));
            }
        }
    }

    TrackSpec spec_;
    std::vector<Pose> starts_;
    std::vector<double> start_arclengths_;
    double total_length_ = 0.0;
    std::vector<std::vector<Vec2>> barriers_;
};

namespace detail {

inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
    const double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return true;
    // collinear overlaps are treated as hits
    auto on_seg = [](Vec2 a, Vec2 b, Vec2 c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
    };
    if (o1 == 0 && on_seg(p1, p2, q1)) return true;
    if (o2 == 0 && on_seg(p1, p2, q2)) return true;
    if (o3 == 0 && on_seg(q1, q2, p1)) return true;
    if (o4 == 0 && on_seg(q1, q2, p2)) return true;
    return false;
}

}  // namespace detail

// Oriented-rectangle vs barrier-polyline intersection.
inline bool footprint_intersects_barriers(const Pose& pose, double footprint_length,
                                          double footprint_width,
                                          const std::vector<std::vector<Vec2>>& barriers) {
    const Vec2 c{pose.x, pose.y};
    const Vec2 f{std::cos(pose.heading), std::sin(pose.heading)};
    const Vec2 n{-std::sin(pose.heading), std::cos(pose.heading)};
    const double hl = 0.5 * footprint_length, hw = 0.5 * footprint_width;
    const Vec2 corners[4] = {c + hl * f + hw * n, c + hl * f - hw * n,
                             c - hl * f - hw * n, c - hl * f + hw * n};
    auto inside = [&](Vec2 p) {
        const Vec2 d = p - c;
        return std::abs(dot(d, f)) <= hl && std::abs(dot(d, n)) <= hw;
    };
    for (const auto& line : barriers) {
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            if (inside(line[i]) || inside(line[i + 1])) return true;
            for (int e = 0; e < 4; ++e)
                if (detail::segments_intersect(corners[e], corners[(e + 1) % 4], line[i],
                                               line[i + 1]))
                    return true;
        }
    }
    return false;
}

// --- bundled tracks -------------------------------------------------------

inline TrackSpec right_turn_barrier_track() {
    TrackSpec t;
    t.name = "right-turn-barrier";
    t.lane_width = 4.5;
    t.spawn = {2.0, -2.25, 0.0};
    t.goal_arclength = 75.0;
    Segment approach;
    approach.kind = Segment::Kind::kStraight;
    approach.length = 30.0;
    Segment turn;
    turn.kind = Segment::Kind::kArc;
    turn.radius = 25.0;
    turn.sweep = 1.5707963267948966;
    turn.direction = -1;
    turn.barrier_left = true;  // outer edge of a right turn
    Segment exit;
    exit.kind = Segment::Kind::kStraight;
    exit.length = 60.0;
    t.segments = {approach, turn, exit};
    return t;
}

inline TrackSpec left_turn_barrier_track() {
    TrackSpec t = right_turn_barrier_track();
    t.name = "left-turn-barrier";
    t.segments[1].direction = 1;
    t.segments[1].barrier_left = false;
    t.segments[1].barrier_right = true;  // outer edge of a left turn
    return t;
}

// --- track file format ----------------------------------------------------
//
//   name right-turn-barrier
//   lane_width 4.5
//   spawn 2.0 -2.25 0.0
//   goal 75.0
//   straight 30.0
//   arc right 25.0 1.5707963267948966 barrier=outer
//   straight 60.0
//
// One segment per line; `#` starts a comment. Barrier flags take
// none|left|right|both|inner|outer (inner/outer only on arcs).

namespace detail {

inline void apply_barrier_token(Segment& seg, const std::string& token) {
    if (token == "none") return;
    if (token == "left") {
        seg.barrier_left = true;
    } else if (token == "right") {
        seg.barrier_right = true;
    } else if (token == "both") {
        seg.barrier_left = seg.barrier_right = true;
    } else if (token == "inner" || token == "outer") {
        if (seg.kind != Segment::Kind::kArc)
            throw std::invalid_argument("track file: inner/outer barrier on a straight");
        const bool outer_is_left = seg.direction < 0;
        const bool left = (token == "outer") == outer_is_left;
        (left ? seg.barrier_left : seg.barrier_right) = true;
    } else {
        throw std::invalid_argument("track file: unknown barrier flag '" + token + "'");
    }
}

}  // namespace detail

inline TrackSpec parse_track(std::istream& in) {
    TrackSpec t;
    t.lane_width = 0.0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string word;
        if (!(ss >> word)) continue;
        auto fail = [&](const std::string& msg) {
            throw std::invalid_argument("track file line " + std::to_string(lineno) +
                                        ": " + msg);
        };
        if (word == "name") {
            ss >> t.name;
        } else if (word == "lane_width") {
            if (!(ss >> t.lane_width)) fail("expected lane_width value");
        } else if (word == "spawn") {
            if (!(ss >> t.spawn.x >> t.spawn.y >> t.spawn.heading))
                fail("expected spawn x y heading");
        } else if (word == "goal") {
            if (!(ss >> t.goal_arclength)) fail("expected goal arclength");
        } else if (word == "straight") {
            Segment seg;
            seg.kind = Segment::Kind::kStraight;
            if (!(ss >> seg.length)) fail("expected straight length");
            std::string opt;
            while (ss >> opt) {
                if (opt.rfind("barrier=", 0) == 0)
                    detail::apply_barrier_token(seg, opt.substr(8));
                else
                    fail("unknown option '" + opt + "'");
            }
            t.segments.push_back(seg);
        } else if (word == "arc") {
            Segment seg;
            seg.kind = Segment::Kind::kArc;
            std::string dir;
            if (!(ss >> dir >> seg.radius >> seg.sweep))
                fail("expected arc left|right radius sweep");
            if (dir == "left")
                seg.direction = 1;
            else if (dir == "right")
                seg.direction = -1;
            else
                fail("arc direction must be left or right");
            std::string opt;
            while (ss >> opt) {
                if (opt.rfind("barrier=", 0) == 0)
                    detail::apply_barrier_token(seg, opt.substr(8));
                else
                    fail("unknown option '" + opt + "'");
            }
            t.segments.push_back(seg);
        } else {
            fail("unknown directive '" + word + "'");
        }
    }
    t.validate();
    if (t.lane_width <= 0.0)
        throw std::invalid_argument("track file: missing lane_width");
    return t;
}

inline TrackSpec load_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open track file: " + path);
    TrackSpec t = parse_track(in);
    if (t.name.empty()) t.name = path;
    return t;
}

}  // namespace lsrl
