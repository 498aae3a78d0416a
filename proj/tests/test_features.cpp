#include <doctest.h>

#include <annulus/error.hpp>
#include <annulus/features.hpp>

#include "support.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace annulus;

namespace {

// Complete elliptic integral route: 4a E(e), with E by composite Simpson on a fine grid.
double perimeter_quadrature(double a, double b) {
    const double e2 = 1.0 - (b * b) / (a * a);
    const int n = 20000;
    const double h = (std::numbers::pi / 2) / n;
    double s = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = i * h;
        const double f = std::sqrt(1.0 - e2 * std::sin(t) * std::sin(t));
        s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
    return 4.0 * a * s * h / 3.0;
}

// Step by half turns until the difference lands in [-90, 90).
double wrap_oracle(double d) {
    while (d >= 90.0) d -= 180.0;
    while (d < -90.0) d += 180.0;
    return d;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("the canonical list has 187 unique names") {
    const auto& names = feature_names();
    CHECK(names.size() == 187);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 187);
    CHECK(names.front() == "area_CP0");
    CHECK(feature_index("nx_CP0") == -1);
    CHECK(feature_index("nz_CP25") >= 0);
    CHECK(feature_index("bogus") == -1);
}

TEST_CASE("feature block sizes") {
    int shape = 0, normal = 0, angle = 0, disp = 0;
    for (const auto& n : feature_names()) {
        if (n.rfind("u_", 0) == 0) ++disp;
        else if (n.rfind("delta_", 0) == 0) ++angle;
        else if (n[0] == 'n' && n[2] == '_') ++normal;
        else ++shape;
    }
    CHECK(shape == 42);
    CHECK(normal == 15);
    CHECK(angle == 10);
    CHECK(disp == 120);
}

TEST_CASE("reported feature names resolve") {
    for (const char* n : {"u_mag.P3.CP20-15", "u_mag.P2.CP20-15", "perimeter_CP10", "area_CP10", "height_CP5",
                          "perimeter_CP5", "u_mag.P0.CP20-15", "u_x.P5.CP15-10", "u_mag.P1.CP20-15", "a_CP10",
                          "b_CP5", "b_CP10", "delta_tilt.CP5-0", "delta_theta.CP25-20", "eccentricity_CP15",
                          "ba_ratio_CP20", "ny_CP10"})
        CHECK_MESSAGE(feature_index(n) >= 0, n);
}

TEST_CASE("Ramanujan perimeter against quadrature") {
    CHECK(ellipse_perimeter(2, 1) == doctest::Approx(9.688448220547675).epsilon(1e-9));
    CHECK(perimeter_quadrature(2, 1) == doctest::Approx(9.688448220547675).epsilon(1e-12));
    for (double r = 1.0; r <= 3.0; r += 0.05) {
        const double a = 10 * r, b = 10;
        CHECK(std::abs(ellipse_perimeter(a, b) / perimeter_quadrature(a, b) - 1) < 1e-5);
    }
    CHECK(ellipse_perimeter(5, 5) == doctest::Approx(10 * std::numbers::pi).epsilon(1e-14));
    CHECK_THROWS_AS(ellipse_perimeter(1, 2), Error);
    CHECK_THROWS_AS(ellipse_perimeter(1, 0), Error);
}

TEST_CASE("perimeter of the healthy cohort's mean axes is near the reported cohort mean") {
    CHECK(std::abs(ellipse_perimeter(21.6, 19.5) / 129.4 - 1) < 0.02);
}

TEST_CASE("delta_theta wraps like the brute-force oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-90, 90);
    for (int i = 0; i < 5000; ++i) {
        const double a = u(rng), b = u(rng);
        CHECK(delta_theta(a, b) == doctest::Approx(wrap_oracle(a - b)).epsilon(1e-12));
    }
    CHECK(delta_theta(89, -89) == doctest::Approx(-2));
    CHECK(delta_theta(-89, 89) == doctest::Approx(2));
    CHECK(delta_theta(45, -45) == doctest::Approx(-90)); // +90 wraps to the closed end
}

TEST_CASE("height and tilt helpers") {
    Eigen::VectorXd d(6);
    d << 1.5, -0.5, 0.2, -2.0, 0.0, 0.3;
    CHECK(annular_height(d) == doctest::Approx(3.5));
    PlaneFit<double> p;
    p.normal = Eigen::Vector3d(std::sin(0.2), 0, std::cos(0.2));
    CHECK(tilt(p) == doctest::Approx(0.2 * 180 / std::numbers::pi));
    p.normal = Eigen::Vector3d::UnitZ();
    CHECK(tilt(p) == 0.0);
}

TEST_CASE("internal identities hold on 1000 random patients") {
    const auto cohort = testing::cohort(500, 1.0, 99);
    const int area = feature_index("area_CP0");
    for (const auto& set : cohort.landmarks) {
        const auto v = extract_features(set).values;
        REQUIRE(v.size() == kNumFeatures);
        for (std::size_t p = 0; p < kNumPhases; ++p) {
            const std::size_t o = area + 7 * p;
            const double A = v[o], a = v[o + 2], b = v[o + 3], e = v[o + 4], r = v[o + 5];
            CHECK(std::abs(A - std::numbers::pi * a * b) <= 1e-9 * A);
            CHECK(std::abs(e * e + r * r - 1) <= 1e-9);
            CHECK(b <= a);
        }
        for (std::size_t k = 0; k < kNumPoints; ++k)
            for (std::size_t t = 0; t < kNumTransitions; ++t) {
                const std::string tag = ".P" + std::to_string(k) + ".CP" + std::to_string(kPhases[t + 1]) + "-" +
                                        std::to_string(kPhases[t]);
                const double ux = v[feature_index("u_x" + tag)], uy = v[feature_index("u_y" + tag)],
                             uz = v[feature_index("u_z" + tag)], um = v[feature_index("u_mag" + tag)];
                CHECK(std::abs(um * um - (ux * ux + uy * uy + uz * uz)) <= 1e-9 * std::max(1.0, um * um));
            }
    }
}

TEST_CASE("noiseless synthetic patients reproduce their ground truth") {
    const auto cohort = testing::cohort(20, 0.0, 5);
    for (std::size_t k = 0; k < cohort.landmarks.size(); ++k) {
        const auto got = extract_features(cohort.landmarks[k]).values;
        const auto& want = cohort.ground_truth[k].values;
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            CHECK_MESSAGE(std::abs(got[j] - want[j]) <= 1e-6 * std::max(1.0, std::abs(want[j])), feature_names()[j]);
    }
}

TEST_CASE("displacements are CP-to-CP point differences in the registered frame") {
    const auto set = testing::cohort(1, 1.0, 8).landmarks[0];
    const auto reg = register_patient(set);
    const auto table = displacements(reg);
    for (std::size_t k = 0; k < kNumPoints; ++k)
        for (std::size_t t = 0; t < kNumTransitions; ++t) {
            const Eigen::Vector3d d = (reg[t + 1].points3d.row(k) - reg[t].points3d.row(k)).transpose();
            CHECK(table[k][t].ux == doctest::Approx(d.x()));
            CHECK(table[k][t].uy == doctest::Approx(d.y()));
            CHECK(table[k][t].uz == doctest::Approx(d.z()));
            CHECK(table[k][t].umag == doctest::Approx(d.norm()));
        }
}

TEST_CASE("degenerate phases name the phase") {
    auto set = testing::cohort(1, 0.0, 8).landmarks[0];
    for (std::size_t i = 0; i < kNumPoints; ++i) set.points[3][i] = Eigen::Vector3d(i, 2.0 * i, 0);
    try {
        extract_features(set);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
        CHECK(std::string(e.what()).find("CP15") != std::string::npos);
    }
}

}
