#include <annulus/synth.hpp>

#include <annulus/error.hpp>
#include <annulus/parallel.hpp>

#include <json.hpp>

#include <Eigen/Geometry>
#include <algorithm>
#include <cstdio>
#include <numbers>
#include <cmath>
#include <numeric>
#include <random>

namespace annulus {

namespace {

constexpr double kMaxAxisRatio = 0.97;  // keeps the major axis well defined
constexpr double kMinAxisRatio = 0.4;
constexpr double kMaxHeightFraction = 0.9; // saddle height relative to b

double sample_normal(std::mt19937_64& rng, const Distribution& d) {
    if (d.std == 0.0) return d.mean;
    return std::normal_distribution<double>(d.mean, d.std)(rng);
}

// Gamma with the requested mean and std; positive support for magnitudes.
double sample_gamma(std::mt19937_64& rng, const Distribution& d) {
    if (d.std == 0.0 || d.mean <= 0.0) return std::max(0.0, d.mean);
    const double shape = d.mean * d.mean / (d.std * d.std);
    const double scale = d.std * d.std / d.mean;
    return std::gamma_distribution<double>(shape, scale)(rng);
}

Eigen::Vector3d unit_sphere(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = Eigen::Vector3d(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-9);
    return v.normalized();
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q;
    do {
        q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng));
    } while (q.norm() < 1e-9);
    return q.normalized().toRotationMatrix();
}

// Ring order of the points by angle, counter-clockwise.
std::vector<std::size_t> angular_order(const std::array<double, kNumPoints>& angles) {
    std::vector<std::size_t> order(kNumPoints);
    std::iota(order.begin(), order.end(), 0);
    auto norm360 = [](double a) { return a - 360.0 * std::floor(a / 360.0); };
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return norm360(angles[i]) < norm360(angles[j]);
    });
    return order;
}

struct PhaseShape {
    double a = 0, b = 0, h = 0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d centre = Eigen::Vector3d::Zero();
};

struct Patient {
    LandmarkSet landmarks;
    FeatureVector truth;
};

Patient sample_patient(const CohortSpec& spec, const std::array<double, kNumPoints>& saddle,
                       std::mt19937_64& rng, const std::string& id) {
    std::array<double, kNumPoints> cos_phi, sin_phi;
    for (std::size_t i = 0; i < kNumPoints; ++i) {
        cos_phi[i] = std::cos(deg_to_rad(spec.point_angles_deg[i]));
        sin_phi[i] = std::sin(deg_to_rad(spec.point_angles_deg[i]));
    }

    const double a_ref = std::max(5.0, sample_normal(rng, spec.a_cp10));
    const double ratio = std::clamp(sample_normal(rng, spec.axis_ratio), kMinAxisRatio, kMaxAxisRatio);
    const double b_ref = ratio * a_ref;
    const double h_ref = sample_gamma(rng, spec.height_cp5);
    std::normal_distribution<double> jitter(0.0, 1.0);

    std::array<PhaseShape, kNumPhases> shape;
    const int ref = phase_index(10);
    for (std::size_t p = 0; p < kNumPhases; ++p) {
        auto& s = shape[p];
        const double ja = static_cast<int>(p) == ref ? 0.0 : spec.profile_jitter * jitter(rng);
        const double jb = static_cast<int>(p) == ref ? 0.0 : spec.profile_jitter * jitter(rng);
        s.a = a_ref * std::max(0.2, 1.0 + spec.a_profile[p] + ja);
        s.b = std::min(b_ref * std::max(0.2, 1.0 + spec.b_profile[p] + jb), kMaxAxisRatio * s.a);
        s.h = std::clamp(h_ref * (1.0 + spec.height_profile[p]), 0.0, kMaxHeightFraction * s.b);
        if (p > 0) {
            const double spin = sample_normal(rng, {0.0, spec.inplane_rotation_std_deg});
            const double tilt_deg = sample_normal(rng, {0.0, spec.tilt_std_deg});
            const double tilt_dir = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
            const Eigen::Vector3d tilt_axis(std::cos(tilt_dir), std::sin(tilt_dir), 0.0);
            s.rotation = (Eigen::AngleAxisd(deg_to_rad(tilt_deg), tilt_axis) *
                          Eigen::AngleAxisd(deg_to_rad(spin), Eigen::Vector3d::UnitZ()))
                             .toRotationMatrix();
        }
    }

    auto local = [&](std::size_t p, std::size_t i) {
        return Eigen::Vector3d(shape[p].a * cos_phi[i], shape[p].b * sin_phi[i], 0.5 * saddle[i] * shape[p].h);
    };

    // Translate each phase so the anchor point moves by the sampled displacement.
    for (std::size_t t = 0; t < kNumTransitions; ++t) {
        const double magnitude = sample_gamma(rng, spec.anchor_displacement[t]);
        const Eigen::Vector3d u = magnitude * unit_sphere(rng);
        const std::size_t k = spec.anchor_point;
        shape[t + 1].centre = shape[t].centre + u -
                              (shape[t + 1].rotation * local(t + 1, k) - shape[t].rotation * local(t, k));
    }

    // Canonical frame: CP0 ellipse in the xy plane with its major axis on x.
    std::array<PhasePoints, kNumPhases> canon;
    for (std::size_t p = 0; p < kNumPhases; ++p)
        for (std::size_t i = 0; i < kNumPoints; ++i)
            canon[p].row(i) = (shape[p].centre + shape[p].rotation * local(p, i)).transpose();
    const Eigen::Vector3d centroid0 = canon[0].colwise().mean().transpose();

    RegisteredPatient truth;
    for (std::size_t p = 0; p < kNumPhases; ++p) {
        auto& rp = truth[p];
        rp.phase = kPhases[p];
        rp.points3d = canon[p].rowwise() - centroid0.transpose();
        rp.plane.centroid = rp.points3d.colwise().mean().transpose();
        rp.plane.normal = orient_normal<double>(shape[p].rotation.col(2));
        rp.plane.rms_residual = 0.0;
        for (std::size_t i = 0; i < kNumPoints; ++i) rp.signed_distances(i) = 0.5 * saddle[i] * shape[p].h;
        if (rp.plane.normal.dot(shape[p].rotation.col(2)) < 0) rp.signed_distances = -rp.signed_distances;

        // Major-axis direction seen after levelling the plane with the minimal rotation.
        const Eigen::Quaterniond level = Eigen::Quaterniond::FromTwoVectors(rp.plane.normal, Eigen::Vector3d::UnitZ());
        const Eigen::Vector3d major = level * shape[p].rotation.col(0);
        rp.ellipse.a = shape[p].a;
        rp.ellipse.b = shape[p].b;
        rp.ellipse.theta = wrap_half_turn(rad_to_deg(std::atan2(major.y(), major.x())));
    }

    Patient out;
    out.truth = extract_features(truth);
    out.truth.patient_id = id;
    out.truth.label = spec.label;

    Eigen::Matrix3d pose = Eigen::Matrix3d::Identity();
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    if (spec.random_pose) {
        pose = random_rotation(rng);
        std::uniform_real_distribution<double> shift(-spec.pose_translation_mm, spec.pose_translation_mm);
        offset = Eigen::Vector3d(shift(rng), shift(rng), shift(rng));
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    out.landmarks.patient_id = id;
    out.landmarks.label = spec.label;
    for (std::size_t p = 0; p < kNumPhases; ++p)
        for (std::size_t i = 0; i < kNumPoints; ++i) {
            Eigen::Vector3d x = pose * canon[p].row(i).transpose() + offset;
            if (spec.noise_mm > 0)
                for (int c = 0; c < 3; ++c) x[c] += spec.noise_mm * noise(rng);
            out.landmarks.points[p][i] = x;
        }
    return out;
}

std::mt19937_64 patient_stream(std::uint64_t seed, int cohort, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(cohort), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

} // namespace

std::array<double, kNumPoints> saddle_weights(const std::array<double, kNumPoints>& angles_deg) {
    const auto order = angular_order(angles_deg);
    Eigen::Matrix<double, kNumPoints, 1> v;
    for (std::size_t k = 0; k < kNumPoints; ++k) v(order[k]) = k % 2 == 0 ? 1.0 : -1.0;

    Eigen::Matrix<double, 3, kNumPoints> basis;
    for (std::size_t i = 0; i < kNumPoints; ++i)
        basis.col(i) << 1.0, std::cos(deg_to_rad(angles_deg[i])), std::sin(deg_to_rad(angles_deg[i]));
    const Eigen::Matrix3d gram = basis * basis.transpose();
    const Eigen::Matrix<double, kNumPoints, 1> s = v - basis.transpose() * gram.ldlt().solve(basis * v);
    const double range = s.maxCoeff() - s.minCoeff();
    if (!(range > 1e-6)) throw Error(ErrorKind::Input, "point angles admit no saddle offsets");

    std::array<double, kNumPoints> out;
    for (std::size_t i = 0; i < kNumPoints; ++i) out[i] = 2.0 * s(i) / range;
    return out;
}

void CohortSpec::validate() const {
    if (n < 1) throw Error(ErrorKind::Input, "cohort size must be positive");
    for (const auto* d : {&a_cp10, &axis_ratio, &height_cp5})
        if (d->std < 0) throw Error(ErrorKind::Input, "distribution std must be >= 0");
    for (const auto& d : anchor_displacement)
        if (d.std < 0 || d.mean < 0) throw Error(ErrorKind::Input, "displacement mean/std must be >= 0");
    if (!(a_cp10.mean > 0)) throw Error(ErrorKind::Input, "a_cp10 mean must be positive");
    if (!(axis_ratio.mean > 0 && axis_ratio.mean <= 1)) throw Error(ErrorKind::Input, "axis ratio mean must be in (0, 1]");
    if (profile_jitter < 0 || noise_mm < 0 || tilt_std_deg < 0 || inplane_rotation_std_deg < 0 ||
        pose_translation_mm < 0)
        throw Error(ErrorKind::Input, "spreads must be >= 0");
    if (anchor_point >= kNumPoints) throw Error(ErrorKind::Input, "anchor point out of range");
    if (a_profile[phase_index(10)] != 0.0 || b_profile[phase_index(10)] != 0.0)
        throw Error(ErrorKind::Input, "axis profiles are relative to CP10 and must be 0 there");
    if (height_profile[phase_index(5)] != 0.0)
        throw Error(ErrorKind::Input, "height profile is relative to CP5 and must be 0 there");

    // The registration reads orientation from the labels; the assigned angles must agree with it.
    const auto order = angular_order(point_angles_deg);
    const auto start = std::find(order.begin(), order.end(), kRingOrder[0]) - order.begin();
    for (std::size_t k = 0; k < kNumPoints; ++k)
        if (order[(start + k) % kNumPoints] != kRingOrder[k])
            throw Error(ErrorKind::Input, "point angles must follow the annulus ring order P0,P4,P2,P1,P5,P3");
    auto c = [&](std::size_t i) { return std::cos(deg_to_rad(point_angles_deg[i])); };
    if (!(c(3) - c(2) + c(5) - c(4) > 1e-6))
        throw Error(ErrorKind::Input, "septal-to-free-wall direction must point along +major axis");
    saddle_weights(point_angles_deg);
}

CohortSpec default_no_mr_spec() {
    CohortSpec s;
    s.label = ClassLabel::NoMR;
    s.a_cp10 = {21.6, 2.95};
    s.axis_ratio = {19.5 / 21.6, 0.04};
    // Healthy annulus: marked systolic contraction of a and deepening saddle.
    s.a_profile = {0.05, 0.04, 0.0, -0.07, -0.03, 0.03};
    s.b_profile = {0.03, -0.01, 0.0, 0.01, 0.0, 0.02};
    s.height_cp5 = {5.99, 3.59};
    s.height_profile = {-0.15, 0.0, 0.20, 0.35, 0.10, -0.10};
    s.anchor_displacement = {Distribution{4.5, 2.4}, {3.5, 1.9}, {3.0, 1.7}, {3.92, 2.18}, {4.0, 2.2}};
    return s;
}

CohortSpec default_mr_spec() {
    CohortSpec s;
    s.label = ClassLabel::MR;
    s.a_cp10 = {24.1, 5.91};
    s.axis_ratio = {21.9 / 24.1, 0.04};
    // Regurgitant annulus: dilated and less dynamic.
    s.a_profile = {0.02, 0.015, 0.0, -0.01, 0.0, 0.015};
    s.b_profile = {0.02, 0.015, 0.0, -0.005, 0.005, 0.015};
    s.height_cp5 = {9.00, 6.64};
    s.height_profile = {-0.05, 0.0, 0.03, 0.05, 0.0, -0.05};
    s.anchor_displacement = {Distribution{3.1, 1.9}, {2.4, 1.5}, {2.1, 1.3}, {2.70, 1.67}, {2.8, 1.7}};
    s.inplane_rotation_std_deg = 1.5;
    s.tilt_std_deg = 1.5;
    return s;
}

SynthCohort generate_cohorts(const CohortSpec& no_mr, const CohortSpec& mr, std::uint64_t seed) {
    no_mr.validate();
    mr.validate();
    const std::array<const CohortSpec*, 2> specs = {&no_mr, &mr};
    std::vector<std::pair<int, int>> jobs;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < specs[c]->n; ++i) jobs.push_back({c, i});

    std::vector<Patient> patients(jobs.size());
    const std::array<std::array<double, kNumPoints>, 2> saddle = {saddle_weights(no_mr.point_angles_deg),
                                                                  saddle_weights(mr.point_angles_deg)};
    parallel_for(jobs.size(), 1, [&](std::size_t j) {
        const auto [c, i] = jobs[j];
        char id[16];
        std::snprintf(id, sizeof(id), "%c%04d", c == 0 ? 'N' : 'M', i);
        auto rng = patient_stream(seed, c, i);
        patients[j] = sample_patient(*specs[c], saddle[c], rng, id);
    });

    SynthCohort out;
    for (auto& p : patients) {
        out.landmarks.push_back(std::move(p.landmarks));
        out.ground_truth.push_back(std::move(p.truth));
    }
    return out;
}

std::string describe_spec(const CohortSpec& s) {
    using nlohmann::json;
    auto dist = [](const Distribution& d) { return json{{"mean", d.mean}, {"std", d.std}}; };
    json disp = json::array();
    for (const auto& d : s.anchor_displacement) disp.push_back(dist(d));
    json j = {{"label", static_cast<int>(s.label)},
              {"n", s.n},
              {"a_cp10", dist(s.a_cp10)},
              {"axis_ratio", dist(s.axis_ratio)},
              {"a_profile", s.a_profile},
              {"b_profile", s.b_profile},
              {"profile_jitter", s.profile_jitter},
              {"height_cp5", dist(s.height_cp5)},
              {"height_profile", s.height_profile},
              {"anchor_displacement", disp},
              {"anchor_point", point_name(s.anchor_point)},
              {"inplane_rotation_std_deg", s.inplane_rotation_std_deg},
              {"tilt_std_deg", s.tilt_std_deg},
              {"point_angles_deg", s.point_angles_deg},
              {"random_pose", s.random_pose},
              {"pose_translation_mm", s.pose_translation_mm},
              {"noise_mm", s.noise_mm}};
    return j.dump(1);
}

} // namespace annulus
