#include "lod2rec/fixtures.hpp"

#include "lod2rec/errors.hpp"
#include "lod2rec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace lod2rec {

Archetype archetype_from_name(const std::string& name) {
    static const std::map<std::string, Archetype> table{
        {"flat", Archetype::flat},
        {"gable", Archetype::gable},
        {"hip", Archetype::hip},
        {"pyramid", Archetype::pyramid},
        {"step", Archetype::step},
        {"l-gable", Archetype::l_gable},
        {"l_gable", Archetype::l_gable},
        {"cross-gable", Archetype::cross_gable},
        {"cross_gable", Archetype::cross_gable},
        {"flat-with-superstructure", Archetype::flat_with_superstructure},
        {"flat_with_superstructure", Archetype::flat_with_superstructure},
    };
    auto it = table.find(name);
    if (it == table.end()) throw UnsupportedFormat("unknown archetype: " + name);
    return it->second;
}

std::string archetype_name(Archetype a) {
    switch (a) {
        case Archetype::flat: return "flat";
        case Archetype::gable: return "gable";
        case Archetype::hip: return "hip";
        case Archetype::pyramid: return "pyramid";
        case Archetype::step: return "step";
        case Archetype::l_gable: return "l-gable";
        case Archetype::cross_gable: return "cross-gable";
        case Archetype::flat_with_superstructure: return "flat-with-superstructure";
    }
    return "?";
}

TruthCounts truth_counts(Archetype a) {
    switch (a) {
        case Archetype::flat: return {8, 6};
        case Archetype::gable: return {10, 7};
        case Archetype::hip: return {10, 9};
        case Archetype::pyramid: return {9, 9};
        case Archetype::step: return {14, 10};
        case Archetype::l_gable: return {17, 11};
        case Archetype::cross_gable: return {20, 13};
        case Archetype::flat_with_superstructure: return {16, 11};
    }
    return {0, 0};
}

namespace {

struct ModelBuilder {
    std::vector<Point2> vertices;
    std::vector<PartitionCell> cells;

    std::size_t vid(Point2 p) {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if ((vertices[i] - p).norm() < 1e-12) return i;
        vertices.push_back(p);
        return vertices.size() - 1;
    }

    void cell(std::initializer_list<Point2> ring, double a, double b, double c, int label,
              std::initializer_list<Point2> hole = {}) {
        PartitionCell cl;
        for (auto p : ring) cl.outer.push_back(vid(p));
        if (hole.size() > 0) {
            std::vector<std::size_t> h;
            for (auto p : hole) h.push_back(vid(p));
            cl.holes.push_back(std::move(h));
        }
        cl.plane = Plane3::from_height_form(a, b, c);
        cl.label = label;
        cells.push_back(std::move(cl));
    }
};

struct Model {
    Partition2D partition;
    Polygon2 footprint;
};

Model build_model(const FixtureSpec& spec) {
    const double W = spec.width;
    const double D = spec.depth;
    const double h = spec.eave_height;
    const double s = std::tan(spec.pitch_deg * 3.141592653589793 / 180.0);

    ModelBuilder mb;
    Polygon2 fp;
    auto rect_fp = [&](double w, double d) {
        fp.outer = {{0, 0}, {w, 0}, {w, d}, {0, d}};
    };

    switch (spec.archetype) {
        case Archetype::flat: {
            rect_fp(W, D);
            mb.cell({{0, 0}, {W, 0}, {W, D}, {0, D}}, 0, 0, h + 3.0, 1);
            break;
        }
        case Archetype::gable: {
            rect_fp(W, D);
            double m = D / 2;
            mb.cell({{0, 0}, {W, 0}, {W, m}, {0, m}}, 0, s, h, 1);
            mb.cell({{0, m}, {W, m}, {W, D}, {0, D}}, 0, -s, h + s * D, 2);
            break;
        }
        case Archetype::hip: {
            double w = std::max(W, D + 2.0);  // long axis along x
            double d = std::min(D, w - 2.0);
            rect_fp(w, d);
            double m = d / 2;
            mb.cell({{0, 0}, {w, 0}, {w - m, m}, {m, m}}, 0, s, h, 1);
            mb.cell({{m, m}, {w - m, m}, {w, d}, {0, d}}, 0, -s, h + s * d, 2);
            mb.cell({{0, 0}, {m, m}, {0, d}}, s, 0, h, 3);
            mb.cell({{w, 0}, {w, d}, {w - m, m}}, -s, 0, h + s * w, 4);
            break;
        }
        case Archetype::pyramid: {
            rect_fp(W, D);
            Point2 apex{W / 2, D / 2};
            double zapex = h + s * std::min(W, D) / 2;
            double sx = (zapex - h) / (W / 2);
            double sy = (zapex - h) / (D / 2);
            mb.cell({{0, 0}, {W, 0}, apex}, 0, sy, h, 1);
            mb.cell({{W, 0}, {W, D}, apex}, -sx, 0, h + sx * W, 2);
            mb.cell({{W, D}, {0, D}, apex}, 0, -sy, h + sy * D, 3);
            mb.cell({{0, D}, {0, 0}, apex}, sx, 0, h, 4);
            break;
        }
        case Archetype::step: {
            rect_fp(W, D);
            double m = W / 2;
            double h2 = h + 3.0;
            mb.cell({{0, 0}, {m, 0}, {m, D}, {0, D}}, 0, 0, h, 1);
            mb.cell({{m, 0}, {W, 0}, {W, D}, {m, D}}, 0, 0, h2, 2);
            break;
        }
        case Archetype::l_gable: {
            // Main wing along x, bay projecting in +y at the west end.
            double Lx = W, Ly = D;
            double dm = D / 2;       // main wing depth
            double dw = dm / 2;      // bay width
            double ridge_m = dm / 2; // main ridge y
            fp.outer = {{0, 0}, {Lx, 0}, {Lx, dm}, {dw, dm}, {dw, Ly}, {0, Ly}};
            Point2 junction{dw / 2, dm - dw / 2};
            mb.cell({{0, 0}, {Lx, 0}, {Lx, ridge_m}, {0, ridge_m}}, 0, s, h, 1);
            mb.cell({{0, ridge_m},
                     {Lx, ridge_m},
                     {Lx, dm},
                     {dw, dm},
                     junction,
                     {0, dm}},
                    0, -s, h + s * dm, 2);
            mb.cell({{0, dm}, junction, {dw / 2, Ly}, {0, Ly}}, s, 0, h, 3);
            mb.cell({{dw, dm}, {dw, Ly}, {dw / 2, Ly}, junction}, -s, 0, h + s * dw, 4);
            break;
        }
        case Archetype::cross_gable: {
            double Lx = W;
            double dm = 2.0 * D / 3.0;  // main depth
            double e = D - dm;          // bay extension
            double bw = dm / 2;         // bay width
            double bx0 = Lx / 2 - bw / 2, bx1 = Lx / 2 + bw / 2, cx = Lx / 2;
            double jy = dm - bw / 2;
            fp.outer = {{0, 0},   {Lx, 0},     {Lx, dm},    {bx1, dm},
                        {bx1, D}, {bx0, D},    {bx0, dm},   {0, dm}};
            mb.cell({{0, 0}, {Lx, 0}, {Lx, dm / 2}, {0, dm / 2}}, 0, s, h, 1);
            mb.cell({{0, dm / 2},
                     {Lx, dm / 2},
                     {Lx, dm},
                     {bx1, dm},
                     {cx, jy},
                     {bx0, dm},
                     {0, dm}},
                    0, -s, h + s * dm, 2);
            mb.cell({{bx0, dm}, {cx, jy}, {cx, D}, {bx0, D}}, s, 0, h - s * bx0, 3);
            mb.cell({{bx1, dm}, {bx1, D}, {cx, D}, {cx, jy}}, -s, 0, h + s * bx1, 4);
            break;
        }
        case Archetype::flat_with_superstructure: {
            rect_fp(W, D);
            double m = std::min(W, D) / 4;
            double h2 = h + 2.0;
            // Lower ring roof with a hole, upper box on top. Hole ring CW.
            mb.cell({{0, 0}, {W, 0}, {W, D}, {0, D}}, 0, 0, h, 1,
                    {{m, m}, {m, D - m}, {W - m, D - m}, {W - m, m}});
            mb.cell({{m, m}, {W - m, m}, {W - m, D - m}, {m, D - m}}, 0, 0, h2, 2);
            break;
        }
    }

    // Rotate about the footprint centroid.
    if (spec.rotation_deg != 0.0) {
        double ang = spec.rotation_deg * 3.141592653589793 / 180.0;
        double ca = std::cos(ang), sa = std::sin(ang);
        Point2 ctr{0, 0};
        for (const auto& p : fp.outer) ctr += p;
        ctr = ctr / static_cast<double>(fp.outer.size());
        auto rot = [&](Point2 p) {
            Vec2 d = p - ctr;
            return Point2{ctr.x + ca * d.x - sa * d.y, ctr.y + sa * d.x + ca * d.y};
        };
        for (auto& p : fp.outer) p = rot(p);
        for (auto& v : mb.vertices) v = rot(v);
        for (auto& c : mb.cells) {
            double a = c.plane->height_a(), b = c.plane->height_b();
            double cc = c.plane->height_c() + a * ctr.x + b * ctr.y;  // about centroid
            double a2 = ca * a - sa * b;
            double b2 = sa * a + ca * b;
            c.plane = Plane3::from_height_form(a2, b2, cc - a2 * ctr.x - b2 * ctr.y);
        }
    }

    Model model;
    model.footprint = fp;
    model.partition = partition_from_cells(mb.vertices, mb.cells, &fp);
    return model;
}

double footprint_distance(const Polygon2& fp, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fp.outer.size(); ++i)
        best = std::min(best, point_segment_distance(p, fp.outer[i],
                                                     fp.outer[(i + 1) % fp.outer.size()]));
    return best;
}

} // namespace

Fixture generate_fixture(const FixtureSpec& spec) {
    Model model = build_model(spec);

    Fixture fix;
    fix.footprint = model.footprint;
    fix.ground_z = 0.0;

    RoofGraph graph = extrude_cells(model.partition);
    merge_vertical(graph, model.partition, 1e-6);
    fix.truth = assemble_mesh(graph, model.partition, model.footprint, 0.0);
    fix.truth_partition = model.partition;

    // Sample upward-facing surfaces area-uniformly at the requested density.
    Rng rng(spec.seed);
    auto tris = triangulate_facets(fix.truth);
    struct UpTri {
        std::array<Point3, 3> p;
        double area;
    };
    std::vector<UpTri> up;
    double total = 0.0;
    for (const auto& t : tris) {
        std::array<Point3, 3> p{fix.truth.vertices[t[0]], fix.truth.vertices[t[1]],
                                fix.truth.vertices[t[2]]};
        Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
        double a2 = n.norm();
        if (a2 <= 0.0) continue;
        // Near-nadir acquisition: vertical and downward faces return nothing.
        if (n.z / a2 <= 0.2) continue;
        up.push_back({p, 0.5 * a2});
        total += 0.5 * a2;
    }
    std::size_t n_roof = static_cast<std::size_t>(std::llround(total * spec.density));
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& t : up) {
        acc += t.area;
        cum.push_back(acc);
    }
    for (std::size_t i = 0; i < n_roof; ++i) {
        double pick = rng.uniform() * total;
        std::size_t t = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
        if (t >= up.size()) t = up.size() - 1;
        double u = rng.uniform(), v = rng.uniform();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        Point3 p = up[t].p[0] + (up[t].p[1] - up[t].p[0]) * u + (up[t].p[2] - up[t].p[0]) * v;
        if (spec.sigma > 0.0) {
            p.x += rng.gaussian(spec.sigma);
            p.y += rng.gaussian(spec.sigma);
            p.z += rng.gaussian(spec.sigma);
        }
        fix.cloud.points.push_back(p);
        fix.cloud.classes.push_back(kClassBuilding);
    }

    // Ground ring: band up to 1 m outside the footprint at z = 0.
    auto box = fix.footprint.bbox();
    Point2 lo = box.lo - Vec2{1.0, 1.0};
    Point2 hi = box.hi + Vec2{1.0, 1.0};
    double band_area = (hi.x - lo.x) * (hi.y - lo.y) - fix.footprint.area();
    std::size_t target = static_cast<std::size_t>(std::llround(band_area * spec.density * 0.5));
    std::size_t made = 0, guard = 0;
    while (made < target && guard < target * 50 + 1000) {
        ++guard;
        Point2 q{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (fix.footprint.contains(q)) continue;
        if (footprint_distance(fix.footprint, q) > 1.0) continue;
        Point3 p{q.x, q.y, 0.0};
        if (spec.sigma > 0.0) {
            p.x += rng.gaussian(spec.sigma);
            p.y += rng.gaussian(spec.sigma);
            p.z += rng.gaussian(spec.sigma);
        }
        fix.cloud.points.push_back(p);
        fix.cloud.classes.push_back(kClassGround);
        ++made;
    }

    return fix;
}

} // namespace lod2rec
