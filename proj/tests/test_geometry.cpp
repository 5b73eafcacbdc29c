#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "egostereo/errors.hpp"
#include "egostereo/geometry/camera_json.hpp"
#include "egostereo/geometry/fisheye.hpp"
#include "egostereo/geometry/procrustes.hpp"
#include "egostereo/geometry/rigid.hpp"
#include "egostereo/rng.hpp"
#include "oracles.hpp"

using namespace egostereo;

namespace {

// focal_scale 100 px/rad with a 2 rad fov needs a 200 px short side for the
// inscribed circle to close exactly.
FisheyeCamera test_camera() {
  FisheyeCamera cam;
  cam.focal_scale = 100.0;
  cam.principal_point = Eigen::Vector2d(128.0, 128.0);
  cam.width = 256;
  cam.height = 200;
  cam.fov_rad = 2.0;
  cam.validate();
  return cam;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

}  // namespace

TEST_CASE("fisheye: principal ray lands on the principal point") {
  const auto cam = test_camera();
  const auto px = fisheye_project(cam, Eigen::Vector3d(0.0, 0.0, 5.0));
  REQUIRE(px.has_value());
  CHECK(px->x() == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(px->y() == doctest::Approx(128.0).epsilon(1e-12));
}

TEST_CASE("fisheye: 45 degree ray at focal_scale 100") {
  const auto cam = test_camera();
  const auto px = fisheye_project(cam, Eigen::Vector3d(1.0, 0.0, 1.0));
  REQUIRE(px.has_value());
  // radius = 100 * pi/4
  CHECK(px->x() == doctest::Approx(128.0 + 25.0 * M_PI).epsilon(1e-12));
  CHECK(px->y() == doctest::Approx(128.0).epsilon(1e-12));
}

TEST_CASE("fisheye: point behind the camera is out of view") {
  const auto cam = test_camera();
  CHECK_FALSE(fisheye_project(cam, Eigen::Vector3d(0.0, 0.0, -1.0)).has_value());
  CHECK_FALSE(fisheye_project(cam, Eigen::Vector3d(0.1, 0.0, -1.0)).has_value());
}

TEST_CASE("fisheye: zero point is degenerate") {
  const auto cam = test_camera();
  CHECK_THROWS_AS(fisheye_project(cam, Eigen::Vector3d::Zero()),
                  DegenerateInputError);
}

TEST_CASE("fisheye: pixel outside the rectangle is out of view") {
  // fov/2 = 1 rad allows radius up to 100 px, but the rectangle is only
  // 200 px tall with the principal point at y = 128.
  const auto cam = test_camera();
  const double theta = 0.9;
  const Eigen::Vector3d p(0.0, std::sin(theta), std::cos(theta));
  // radius 90 px straight down -> y = 218 >= 200.
  CHECK_FALSE(fisheye_project(cam, p).has_value());
  // Same angle to the right stays inside (x = 218 < 256).
  const Eigen::Vector3d q(std::sin(theta), 0.0, std::cos(theta));
  CHECK(fisheye_project(cam, q).has_value());
}

TEST_CASE("fisheye: unproject recovers the 45 degree ray") {
  const auto cam = test_camera();
  const Eigen::Vector3d ray =
      fisheye_unproject(cam, Eigen::Vector2d(128.0 + 25.0 * M_PI, 128.0));
  CHECK(ray.x() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(ray.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ray.z() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(ray.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fisheye: unproject at the principal point looks down +z") {
  const auto cam = test_camera();
  const Eigen::Vector3d ray = fisheye_unproject(cam, cam.principal_point);
  CHECK((ray - Eigen::Vector3d(0, 0, 1)).norm() == doctest::Approx(0.0));
}

TEST_CASE("fisheye: unproject beyond the image circle throws") {
  const auto cam = test_camera();
  // theta = 1.2 rad > fov/2 = 1 rad, yet still inside the rectangle.
  CHECK_THROWS_AS(fisheye_unproject(cam, Eigen::Vector2d(248.0, 128.0)),
                  OutOfViewError);
}

TEST_CASE("fisheye: project/unproject round trip within 1e-6 px") {
  const auto cam = test_camera();
  Rng rng(7);
  int tested = 0;
  for (int i = 0; i < 2000; ++i) {
    const double theta = rng.uniform(0.0, 0.5 * cam.fov_rad * 0.999);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double len = rng.uniform(0.1, 5.0);
    const Eigen::Vector3d p(len * std::sin(theta) * std::cos(phi),
                            len * std::sin(theta) * std::sin(phi),
                            len * std::cos(theta));
    const auto px = fisheye_project(cam, p);
    if (!px.has_value()) continue;  // clipped by the rectangle
    ++tested;
    const Eigen::Vector3d ray = fisheye_unproject(cam, *px);
    const auto px2 = fisheye_project(cam, ray);
    REQUIRE(px2.has_value());
    CHECK((*px2 - *px).norm() < 1e-6);
    // Direction must agree as well, not just the pixel.
    CHECK(ray.dot(p.normalized()) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(tested > 1000);
}

TEST_CASE("fisheye: inscribed factory puts fov/2 on the circle") {
  const auto cam = FisheyeCamera::inscribed(256, 256, 170.0 * M_PI / 180.0);
  CHECK(cam.focal_scale ==
        doctest::Approx(128.0 / (85.0 * M_PI / 180.0)).epsilon(1e-12));
  // A ray at exactly fov/2, aimed diagonally so the rectangle keeps it.
  const double half = 0.5 * cam.fov_rad;
  const Eigen::Vector3d p(std::sin(half) * std::sqrt(0.5),
                          std::sin(half) * std::sqrt(0.5), std::cos(half));
  const auto px = fisheye_project(cam, p);
  REQUIRE(px.has_value());
  CHECK((*px - cam.principal_point).norm() ==
        doctest::Approx(cam.circle_radius()).epsilon(1e-12));
}

TEST_CASE("fisheye: inconsistent intrinsics fail validation") {
  auto cam = test_camera();
  cam.focal_scale = 120.0;  // breaks the inscribed-circle tie
  CHECK_THROWS_AS(cam.validate(), ConfigError);
  cam = test_camera();
  cam.fov_rad = 3.2;
  CHECK_THROWS_AS(cam.validate(), ConfigError);
  cam = test_camera();
  cam.principal_point = Eigen::Vector2d(300.0, 100.0);
  CHECK_THROWS_AS(cam.validate(), ConfigError);
}

TEST_CASE("rigid: compose, inverse, validate") {
  Rng rng(11);
  RigidTransform a;
  a.rotation = random_rotation(rng);
  a.translation = Eigen::Vector3d(0.1, -0.2, 0.3);
  RigidTransform b;
  b.rotation = random_rotation(rng);
  b.translation = Eigen::Vector3d(-1.0, 2.0, 0.5);
  a.validate();
  b.validate();

  const Eigen::Vector3d p(0.3, 0.7, -0.4);
  CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
  CHECK(((a * a.inverse()).apply(p) - p).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-12);

  RigidTransform bad;
  bad.rotation << 1, 0, 0, 0, 1, 0, 0, 0, -1;  // reflection
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stereo rig: cameras sit 0.12 m apart on the x axis") {
  StereoRig rig;
  const auto left = rig.cam_to_device(0);
  const auto right = rig.cam_to_device(1);
  CHECK(left.translation.x() == doctest::Approx(-0.06));
  CHECK(right.translation.x() == doctest::Approx(0.06));
  CHECK((right.translation - left.translation).norm() ==
        doctest::Approx(0.12));
  // Optical axes are parallel: same rotation.
  CHECK((left.rotation - right.rotation).norm() == doctest::Approx(0.0));
  CHECK_THROWS_AS(rig.cam_to_device(2), ConfigError);
}

TEST_CASE("procrustes: recovers an exact similarity") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(16, 3);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    SimilarityTransform gt;
    gt.scale = rng.uniform(0.5, 2.0);
    gt.rotation = random_rotation(rng);
    gt.translation =
        Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    const auto y = gt.apply_rows(x);

    const auto fit = procrustes_align(x, y);
    CHECK(std::abs(fit.scale - gt.scale) < 1e-9);
    CHECK((fit.rotation - gt.rotation).norm() < 1e-9);
    CHECK((fit.translation - gt.translation).norm() < 1e-9);
    CHECK((fit.apply_rows(x) - y).norm() < 1e-9);
  }
}

TEST_CASE("procrustes: agrees with the quaternion oracle") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(12, 3), y(12, 3);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    // Noisy target: a real fit, not an exact one.
    SimilarityTransform gt;
    gt.scale = 1.3;
    gt.rotation = random_rotation(rng);
    gt.translation = Eigen::Vector3d(0.2, -0.1, 0.4);
    y = gt.apply_rows(x);
    for (int i = 0; i < y.size(); ++i) y.data()[i] += 0.05 * rng.normal();

    const auto ours = procrustes_align(x, y);
    const auto ref = oracles::horn_align(x, y);
    CHECK((ours.rotation - ref.rotation).norm() < 1e-9);
    CHECK(std::abs(ours.scale - ref.scale) < 1e-9);
    CHECK((ours.translation - ref.translation).norm() < 1e-9);
  }
}

TEST_CASE("procrustes: rotation stays proper under mirrored targets") {
  Rng rng(31);
  Eigen::Matrix<double, Eigen::Dynamic, 3> x(10, 3);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Eigen::Matrix<double, Eigen::Dynamic, 3> y = x;
  y.col(0) *= -1.0;  // reflection cannot be represented
  const auto fit = procrustes_align(x, y);
  CHECK(fit.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((fit.rotation.transpose() * fit.rotation - Eigen::Matrix3d::Identity())
            .norm() < 1e-9);
}

TEST_CASE("procrustes: alignment never hurts") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> x(16, 3), y(16, 3);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (int i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    const auto fit = procrustes_align(x, y);
    CHECK((fit.apply_rows(x) - y).squaredNorm() <=
          (x - y).squaredNorm() + 1e-12);
  }
}

TEST_CASE("procrustes: collinear sources raise a degenerate error") {
  Eigen::Matrix<double, Eigen::Dynamic, 3> x(5, 3), y(5, 3);
  for (int i = 0; i < 5; ++i) {
    x.row(i) = Eigen::RowVector3d(i, 2.0 * i, -i);
    y.row(i) = Eigen::RowVector3d(i + 1.0, 0.5 * i, 0.0);
  }
  bool threw = false;
  try {
    procrustes_align(x, y);
  } catch (const AlignmentDegenerateError& e) {
    threw = true;
    // The partial result is still a sane similarity.
    CHECK(e.partial.rotation.determinant() ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(threw);

  CHECK_THROWS_AS(procrustes_align(x.topRows(2), y.topRows(2)),
                  DegenerateInputError);
  CHECK_THROWS_AS(
      procrustes_align(Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(4, 3),
                       y.topRows(4)),
      AlignmentDegenerateError);
}

TEST_CASE("rig json: save/load round trip") {
  RigDescription rig;
  rig.camera = FisheyeCamera::inscribed(256, 256, 170.0 * M_PI / 180.0);
  rig.rig.baseline = 0.12;

  const auto path = std::filesystem::temp_directory_path() / "rig_rt.json";
  save_rig_json(path.string(), rig);
  const auto back = load_rig_json(path.string());
  CHECK(back.camera.focal_scale ==
        doctest::Approx(rig.camera.focal_scale).epsilon(1e-12));
  CHECK(back.camera.width == 256);
  CHECK(back.camera.fov_rad ==
        doctest::Approx(rig.camera.fov_rad).epsilon(1e-12));
  CHECK(back.rig.baseline == doctest::Approx(0.12));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_rig_json("/nonexistent/rig.json"), DataError);
  CHECK_THROWS_AS(rig_from_json("{ not json"), DataError);
  CHECK_THROWS_AS(rig_from_json("{\"focal_scale\": 1.0}"), DataError);
}

TEST_CASE("fisheye: quarter-resolution camera keeps ray directions") {
  const auto cam = FisheyeCamera::inscribed(256, 256, 170.0 * M_PI / 180.0);
  const auto q = cam.quarter();
  CHECK(q.width == 64);
  CHECK(q.focal_scale == doctest::Approx(cam.focal_scale / 4.0));
  // The same ray hits pixel/4.
  const Eigen::Vector3d p(0.4, -0.2, 1.0);
  const auto full = fisheye_project(cam, p);
  const auto quarter = fisheye_project(q, p);
  REQUIRE(full.has_value());
  REQUIRE(quarter.has_value());
  CHECK((*quarter * 4.0 - *full).norm() < 1e-9);
}
