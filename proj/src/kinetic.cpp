#include "lod2rec/kinetic.hpp"

#include "lod2rec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace lod2rec {

namespace {

struct Tip {
    bool frozen = false;
    double offset = 0.0;  // current/final extent along the segment line
    std::size_t crossings = 0;
};

struct SimSeg {
    Point2 base;  // original first endpoint; offsets measured from here
    Vec2 dir;     // unit direction
    double lo0 = 0.0, hi0 = 0.0;
    bool barrier = false;
    Tip tip[2];  // tip[0] extends toward -dir, tip[1] toward +dir

    double lo(double t) const { return tip[0].frozen ? tip[0].offset : lo0 - t; }
    double hi(double t) const { return tip[1].frozen ? tip[1].offset : hi0 + t; }
    double tip_offset(int s, double t) const {
        return s == 0 ? lo(t) : hi(t);
    }
};

struct Event {
    double t;
    std::size_t seg;
    int side;
    std::size_t other;
    double self_offset;   // where on `seg` the hit happens
    double other_offset;  // where on `other`
    bool collinear;

    bool operator>(const Event& e) const {
        if (t != e.t) return t > e.t;
        if (seg != e.seg) return seg > e.seg;
        if (side != e.side) return side > e.side;
        return other > e.other;
    }
};

} // namespace

std::vector<Segment2> simulate_extents(const SegmentSoup2& soup, Rect bbox,
                                       const KineticParams& params) {
    if (soup.segments.empty()) throw EmptySoup("build_partition: empty segment soup");

    std::vector<SimSeg> segs;
    segs.reserve(soup.segments.size() + 4);
    auto add = [&](const Segment2& s, bool barrier) {
        SimSeg sim;
        sim.base = s.a;
        double len = s.length();
        sim.dir = (s.b - s.a) / len;
        sim.lo0 = 0.0;
        sim.hi0 = len;
        sim.barrier = barrier;
        if (barrier) {
            sim.tip[0] = {true, 0.0, 0};
            sim.tip[1] = {true, len, 0};
        }
        segs.push_back(sim);
    };
    for (const auto& s : soup.segments)
        add(s.seg, s.seg.kind == SegmentKind::footprint);
    Point2 c00 = bbox.lo, c10{bbox.hi.x, bbox.lo.y}, c11 = bbox.hi, c01{bbox.lo.x, bbox.hi.y};
    for (auto [a, b] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}})
        add({a, b, SegmentKind::footprint}, true);

    const std::size_t n = segs.size();
    const double tiny = 1e-12;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;

    auto schedule_pair = [&](std::size_t i, int side, std::size_t j) {
        const SimSeg& a = segs[i];
        const SimSeg& b = segs[j];
        double cross = a.dir.cross(b.dir);
        Vec2 delta = b.base - a.base;
        if (std::abs(cross) > 1e-12) {
            // Transversal: the hit location is fixed; only its time matters.
            double oa = delta.cross(b.dir) / cross;                          // offset on a
            double ob = (a.base - b.base).cross(a.dir) / b.dir.cross(a.dir); // offset on b
            double t = side == 0 ? a.lo0 - oa : oa - a.hi0;
            if (t < -tiny) return;
            queue.push({std::max(t, 0.0), i, side, j, oa, ob, false});
        } else {
            // Collinear within tolerance: schedule a merge meeting.
            double lateral = std::abs(a.dir.cross(delta));
            if (lateral > eps_geom) return;
            // Map b's extent into a's offsets.
            double b_lo_on_a = delta.dot(a.dir) + (a.dir.dot(b.dir) > 0 ? b.lo0 : -b.hi0);
            double b_hi_on_a = delta.dot(a.dir) + (a.dir.dot(b.dir) > 0 ? b.hi0 : -b.lo0);
            if (b_lo_on_a > b_hi_on_a) std::swap(b_lo_on_a, b_hi_on_a);
            double tip_pos = side == 0 ? a.lo0 : a.hi0;
            double toward = side == 0 ? -1.0 : 1.0;
            // Gap to the facing end of b.
            double target = toward > 0 ? b_lo_on_a : b_hi_on_a;
            double gap = (target - tip_pos) * toward;
            if (gap < -eps_geom) {
                // Tip starts beyond b's near end: if inside b, freeze at once.
                if (tip_pos >= b_lo_on_a - eps_geom && tip_pos <= b_hi_on_a + eps_geom)
                    queue.push({0.0, i, side, j, tip_pos, 0.0, true});
                return;
            }
            // First guess assumes b's facing tip also grows (speed 2 closing);
            // the pop handler recomputes when that is wrong.
            double t = segs[j].barrier ? gap : gap / 2.0;
            queue.push({std::max(t, 0.0), i, side, j, 0.0, 0.0, true});
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (segs[i].barrier) continue;
        for (int side = 0; side < 2; ++side)
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) schedule_pair(i, side, j);
    }

    while (!queue.empty()) {
        Event ev = queue.top();
        queue.pop();
        SimSeg& a = segs[ev.seg];
        Tip& tip = a.tip[ev.side];
        if (tip.frozen) continue;
        SimSeg& b = segs[ev.other];

        if (!ev.collinear) {
            // Valid only if b covers the crossing point right now.
            if (ev.other_offset < b.lo(ev.t) - eps_geom ||
                ev.other_offset > b.hi(ev.t) + eps_geom)
                continue;
            bool freeze;
            if (b.barrier) freeze = true;
            else if (params.unbounded) freeze = false;
            else freeze = tip.crossings >= params.max_extensions;
            if (freeze) {
                tip.frozen = true;
                tip.offset = ev.self_offset;
            } else {
                tip.crossings++;
            }
        } else {
            // Collinear merge: freeze at b's facing extent when reached.
            double toward = ev.side == 0 ? -1.0 : 1.0;
            Vec2 delta = b.base - a.base;
            double flip = a.dir.dot(b.dir) > 0 ? 1.0 : -1.0;
            double b_lo_on_a = delta.dot(a.dir) + (flip > 0 ? b.lo(ev.t) : -b.hi(ev.t));
            double b_hi_on_a = delta.dot(a.dir) + (flip > 0 ? b.hi(ev.t) : -b.lo(ev.t));
            if (b_lo_on_a > b_hi_on_a) std::swap(b_lo_on_a, b_hi_on_a);
            double tip_pos = a.tip_offset(ev.side, ev.t);
            double target = toward > 0 ? b_lo_on_a : b_hi_on_a;
            double gap = (target - tip_pos) * toward;
            if (tip_pos >= b_lo_on_a - eps_geom && tip_pos <= b_hi_on_a + eps_geom) {
                tip.frozen = true;
                // Snap to the covered end facing the tip.
                tip.offset = std::clamp(tip_pos, b_lo_on_a, b_hi_on_a);
            } else if (gap > eps_geom) {
                // Not reached yet; requeue against the current state. If b's
                // facing tip still grows toward us the closing speed is 2.
                bool facing_growing;
                if (flip > 0) facing_growing = !b.tip[toward > 0 ? 0 : 1].frozen;
                else facing_growing = !b.tip[toward > 0 ? 1 : 0].frozen;
                double dt = facing_growing && !b.barrier ? gap / 2.0 : gap;
                queue.push({ev.t + dt, ev.seg, ev.side, ev.other, 0.0, 0.0, true});
            }
            // gap < -eps: b's extent receded relative to estimate (cannot
            // happen, extents only grow); drop.
        }
    }

    std::vector<Segment2> out;
    out.reserve(soup.segments.size());
    for (std::size_t i = 0; i < soup.segments.size(); ++i) {
        const SimSeg& s = segs[i];
        double lo = s.tip[0].frozen ? s.tip[0].offset : s.lo0;
        double hi = s.tip[1].frozen ? s.tip[1].offset : s.hi0;
        Segment2 seg{s.base + s.dir * lo, s.base + s.dir * hi, soup.segments[i].seg.kind};
        out.push_back(seg);
    }
    return out;
}

Partition2D build_partition(const SegmentSoup2& soup, Rect bbox, const KineticParams& params) {
    std::vector<Segment2> finals;
    if (params.unbounded) {
        // Full line arrangement: every supporting line clipped to the bbox.
        for (const auto& s : soup.segments) {
            Point2 a = s.seg.a;
            Vec2 d = s.seg.direction();
            double t0 = -std::numeric_limits<double>::infinity();
            double t1 = std::numeric_limits<double>::infinity();
            auto clip1 = [&](double p, double q) {
                if (std::abs(p) < 1e-15) return q >= 0.0;
                double r = q / p;
                if (p < 0.0) t0 = std::max(t0, r);
                else t1 = std::min(t1, r);
                return true;
            };
            bool keep = clip1(-d.x, a.x - bbox.lo.x) && clip1(d.x, bbox.hi.x - a.x) &&
                        clip1(-d.y, a.y - bbox.lo.y) && clip1(d.y, bbox.hi.y - a.y) && t0 < t1;
            if (!keep) continue;
            finals.push_back({a + d * t0, a + d * t1, s.seg.kind});
        }
        if (finals.empty()) throw EmptySoup("build_partition: empty segment soup");
    } else {
        finals = simulate_extents(soup, bbox, params);
    }

    std::vector<SoupSegment> entries;
    entries.reserve(finals.size());
    for (std::size_t i = 0; i < finals.size(); ++i) {
        if (finals[i].length() < eps_geom) continue;
        entries.push_back({finals[i], soup.segments[i].source_a, soup.segments[i].source_b});
    }
    return assemble_partition(entries, bbox);
}

} // namespace lod2rec
