#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lod2rec/errors.hpp"
#include "lod2rec/geom.hpp"
#include "lod2rec/rng.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace lod2rec;

namespace {

// Independent oracle: 3x3 covariance eigenproblem solved through the
// characteristic polynomial, no shared code with fit_plane.
Plane3 eigen_plane_oracle(const std::vector<Point3>& pts) {
    double n = static_cast<double>(pts.size());
    Point3 c{0, 0, 0};
    for (const auto& p : pts) c += p;
    c = c / n;
    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
    for (const auto& p : pts) {
        Vec3 d = p - c;
        xx += d.x * d.x; xy += d.x * d.y; xz += d.x * d.z;
        yy += d.y * d.y; yz += d.y * d.z; zz += d.z * d.z;
    }
    // Smallest eigenvalue by trigonometric solution of the cubic.
    double q = (xx + yy + zz) / 3.0;
    double p1 = xy * xy + xz * xz + yz * yz;
    double p2 = (xx - q) * (xx - q) + (yy - q) * (yy - q) + (zz - q) * (zz - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    Eigen::Matrix3d A;
    A << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    Eigen::Matrix3d B = (A - q * Eigen::Matrix3d::Identity()) / p;
    double r = B.determinant() / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double eig_small = q + 2.0 * p * std::cos(phi + 2.0 * 3.141592653589793 / 3.0);
    // Null vector of A - eig_small I by cross products of its rows.
    Eigen::Matrix3d M = A - eig_small * Eigen::Matrix3d::Identity();
    Eigen::Vector3d r0 = M.row(0), r1 = M.row(1), r2 = M.row(2);
    Eigen::Vector3d cand = r0.cross(r1);
    if (r0.cross(r2).norm() > cand.norm()) cand = r0.cross(r2);
    if (r1.cross(r2).norm() > cand.norm()) cand = r1.cross(r2);
    cand.normalize();
    Vec3 nv{cand[0], cand[1], cand[2]};
    if (nv.z < 0) nv = -nv;
    return Plane3{nv, -nv.dot(c)};
}

double plane_residual(const Plane3& plane, const std::vector<Point3>& pts) {
    double acc = 0.0;
    for (const auto& p : pts) {
        double d = plane.signed_distance(p);
        acc += d * d;
    }
    return acc;
}

} // namespace

TEST_CASE("fit_plane: coplanar points on z=0") {
    std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    Plane3 p = fit_plane(pts);
    CHECK(p.n.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.n.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.n.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.d == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_plane: exact ramp z=x") {
    std::vector<Point3> pts{{0, 0, 0}, {1, 0, 1}, {0, 1, 0}, {1, 1, 1}};
    Plane3 p = fit_plane(pts);
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(p.n.x == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
    CHECK(p.n.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.n.z == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(std::abs(p.d) < 1e-12);
}

TEST_CASE("fit_plane: noisy samples recover height form within 0.01") {
    Rng rng(42);
    std::vector<Point3> pts;
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform(-5.0, 5.0);
        double y = rng.uniform(-5.0, 5.0);
        double z = 0.3 * x + 0.1 * y + 2.0 + rng.gaussian(0.01);
        pts.push_back({x, y, z});
    }
    Plane3 p = fit_plane(pts);
    REQUIRE(p.non_vertical());
    CHECK(p.height_a() == doctest::Approx(0.3).epsilon(0.04));
    CHECK(std::abs(p.height_a() - 0.3) < 0.01);
    CHECK(std::abs(p.height_b() - 0.1) < 0.01);
    CHECK(std::abs(p.height_c() - 2.0) < 0.01);

    Plane3 oracle = eigen_plane_oracle(pts);
    CHECK(std::abs(p.n.dot(oracle.n)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.d == doctest::Approx(oracle.d).epsilon(1e-7));
}

TEST_CASE("fit_plane: errors on degenerate input") {
    CHECK_THROWS_AS(fit_plane(std::vector<Point3>{{0, 0, 0}, {1, 1, 1}}), DegenerateInput);
    std::vector<Point3> collinear;
    for (int i = 0; i < 10; ++i)
        collinear.push_back({0.5 * i, 1.0 * i, 2.0 * i});
    CHECK_THROWS_AS(fit_plane(collinear), DegenerateInput);
}

TEST_CASE("fit_plane: translation equivariance") {
    Rng rng(7);
    std::vector<Point3> pts;
    for (int i = 0; i < 50; ++i)
        pts.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3),
                       0.4 * rng.uniform(-3, 3) + rng.gaussian(0.05)});
    Plane3 base = fit_plane(pts);
    Vec3 t{123.4, -56.7, 8.9};
    std::vector<Point3> moved;
    for (const auto& p : pts) moved.push_back(p + t);
    Plane3 shifted = fit_plane(moved);
    CHECK(std::abs(base.n.dot(shifted.n)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(shifted.d == doctest::Approx(base.d - shifted.n.dot(t)).epsilon(1e-9));
}

TEST_CASE("fit_plane: residual never above axis-aligned regression planes") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point3> pts;
        for (int i = 0; i < 40; ++i)
            pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2),
                           rng.uniform(-1, 1) * 0.5 + 0.7 * rng.uniform(-2, 2)});
        Plane3 tls = fit_plane(pts);
        double tls_res = plane_residual(tls, pts);

        // Least-squares z = a x + b y + c as an axis-aligned competitor.
        Eigen::MatrixXd A(pts.size(), 3);
        Eigen::VectorXd z(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            A(static_cast<Eigen::Index>(i), 0) = pts[i].x;
            A(static_cast<Eigen::Index>(i), 1) = pts[i].y;
            A(static_cast<Eigen::Index>(i), 2) = 1.0;
            z[static_cast<Eigen::Index>(i)] = pts[i].z;
        }
        Eigen::Vector3d abc = (A.transpose() * A).ldlt().solve(A.transpose() * z);
        Plane3 reg = Plane3::from_height_form(abc[0], abc[1], abc[2]);
        CHECK(tls_res <= plane_residual(reg, pts) + 1e-9);
    }
}

TEST_CASE("segment_intersection_2d: crossing and disjoint") {
    Segment2 s1{{0, 0}, {2, 0}};
    Segment2 s2{{1, -1}, {1, 1}};
    auto hit = segment_intersection_2d(s1, s2, eps_geom);
    REQUIRE(hit.has_value());
    CHECK(hit->x == doctest::Approx(1.0));
    CHECK(hit->y == doctest::Approx(0.0));

    Segment2 s3{{0, 0}, {1, 0}};
    Segment2 s4{{2, 0}, {3, 0}};
    CHECK_FALSE(segment_intersection_2d(s3, s4, eps_geom).has_value());
}

TEST_CASE("segment_intersection_2d: agrees with parametric oracle on random pairs") {
    Rng rng(3);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        Segment2 a{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                   {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
        Segment2 b{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                   {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
        // Oracle: solve a.a + t(a.b-a.a) = b.a + u(b.b-b.a) directly.
        double rx = a.b.x - a.a.x, ry = a.b.y - a.a.y;
        double sx = b.b.x - b.a.x, sy = b.b.y - b.a.y;
        double denom = rx * sy - ry * sx;
        if (std::abs(denom) < 1e-9) continue;  // leave collinear cases to the merge logic
        double t = ((b.a.x - a.a.x) * sy - (b.a.y - a.a.y) * sx) / denom;
        double u = ((b.a.x - a.a.x) * ry - (b.a.y - a.a.y) * rx) / denom;
        bool oracle_hit = t > 1e-6 && t < 1.0 - 1e-6 && u > 1e-6 && u < 1.0 - 1e-6;
        bool oracle_miss = t < -1e-6 || t > 1.0 + 1e-6 || u < -1e-6 || u > 1.0 + 1e-6;
        auto got = segment_intersection_2d(a, b, 0.0);
        if (oracle_hit) {
            REQUIRE(got.has_value());
            CHECK(got->x == doctest::Approx(a.a.x + t * rx).epsilon(1e-9));
            CHECK(got->y == doctest::Approx(a.a.y + t * ry).epsilon(1e-9));
            ++checked;
        } else if (oracle_miss) {
            CHECK_FALSE(got.has_value());
            ++checked;
        }
        // Symmetry in the arguments.
        auto swapped = segment_intersection_2d(b, a, 0.0);
        CHECK(got.has_value() == swapped.has_value());
        if (got && swapped) {
            CHECK(got->x == doctest::Approx(swapped->x).epsilon(1e-9));
            CHECK(got->y == doctest::Approx(swapped->y).epsilon(1e-9));
        }
    }
    CHECK(checked > 5000);
}

TEST_CASE("polygon basics") {
    Polygon2 square;
    square.outer = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    CHECK(square.area() == doctest::Approx(4.0));
    CHECK(square.contains({1, 1}));
    CHECK_FALSE(square.contains({3, 1}));

    Polygon2 with_hole = square;
    with_hole.holes.push_back({{0.5, 0.5}, {0.5, 1.5}, {1.5, 1.5}, {1.5, 0.5}});
    CHECK(with_hole.area() == doctest::Approx(3.0));
    CHECK_FALSE(with_hole.contains({1, 1}));
    CHECK(with_hole.contains({0.25, 0.25}));
}
