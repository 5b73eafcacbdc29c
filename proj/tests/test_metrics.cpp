#include <doctest.h>

#include <cmath>

#include "egostereo/errors.hpp"
#include "egostereo/metrics/metrics.hpp"
#include "egostereo/rng.hpp"

using namespace egostereo;
namespace mt = egostereo::metrics;

namespace {

JointMatrix random_pose(Rng& rng, int joints, double scale = 0.4) {
  JointMatrix m(joints, 3);
  for (int j = 0; j < joints; ++j)
    for (int c = 0; c < 3; ++c) m(j, c) = rng.normal() * scale;
  return m;
}

}  // namespace

TEST_CASE("mpjpe closed forms") {
  JointMatrix gt(2, 3);
  gt << 0.1, 0.2, 0.3, -0.4, 0.0, 0.2;
  JointMatrix pred = gt;
  pred(0, 0) += 0.03;  // 3-4-0 cm triangle: 50 mm error on joint 0
  pred(0, 1) += 0.04;
  CHECK(mt::mpjpe_mm(pred, gt) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(mt::mpjpe_mm(gt, gt) == 0.0);

  JointMatrix wrong(3, 3);
  CHECK_THROWS_AS(mt::mpjpe_mm(wrong, gt), ShapeError);
}

TEST_CASE("procrustes-aligned error removes a known similarity transform") {
  Rng rng(17);
  const JointMatrix gt = random_pose(rng, 16);

  SimilarityTransform s;
  s.scale = 1.3;
  s.rotation =
      Eigen::AngleAxisd(0.45, Eigen::Vector3d(1, 2, -1).normalized())
          .toRotationMatrix();
  s.translation = Eigen::Vector3d(0.3, -0.8, 1.1);
  // Prediction differs from the truth by a pure similarity transform.
  const JointMatrix pred = s.apply_rows(gt);

  CHECK(mt::mpjpe_mm(pred, gt) > 100.0);
  const auto pa = mt::pa_mpjpe_mm(pred, gt);
  REQUIRE(pa.has_value());
  CHECK(*pa == doctest::Approx(0.0).epsilon(1e-8));

  // Alignment never hurts.
  const JointMatrix noisy = pred + 0.01 * random_pose(rng, 16, 1.0);
  const auto pa_noisy = mt::pa_mpjpe_mm(noisy, gt);
  REQUIRE(pa_noisy.has_value());
  CHECK(*pa_noisy <= mt::mpjpe_mm(noisy, gt) + 1e-9);
  CHECK(*pa_noisy > 0.0);
}

TEST_CASE("procrustes alignment refuses reflections") {
  Rng rng(23);
  const JointMatrix gt = random_pose(rng, 16);
  JointMatrix mirrored = gt;
  mirrored.col(0) *= -1.0;
  const auto pa = mt::pa_mpjpe_mm(mirrored, gt);
  REQUIRE(pa.has_value());
  CHECK(*pa > 10.0);  // a generic cloud cannot be rotated onto its mirror
}

TEST_CASE("degenerate frames are skipped by aligned error") {
  JointMatrix collapsed = JointMatrix::Zero(16, 3);
  JointMatrix gt = collapsed;
  gt.col(1).setLinSpaced(16, 0.0, 1.5);
  CHECK(!mt::pa_mpjpe_mm(collapsed, gt).has_value());

  JointMatrix line(16, 3);  // collinear points pin no rotation
  line.setZero();
  line.col(0).setLinSpaced(16, -1.0, 1.0);
  CHECK(!mt::pa_mpjpe_mm(line, gt).has_value());
}

TEST_CASE("pck uses a strict threshold") {
  JointMatrix gt = JointMatrix::Zero(4, 3);
  JointMatrix pred = gt;
  pred(0, 0) = 0.100;            // exactly 100 mm: not a hit
  pred(1, 0) = 0.099999;         // hit
  pred(2, 0) = 0.5;              // miss
  CHECK(mt::pck(pred, gt) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mt::pck(pred, gt, 501.0) == doctest::Approx(1.0));
  CHECK(mt::pck(gt, gt) == doctest::Approx(1.0));
}

TEST_CASE("auc is the exact mean over millimeter thresholds") {
  JointMatrix gt = JointMatrix::Zero(1, 3);
  auto auc_for = [&](double err_m) {
    JointMatrix pred = gt;
    pred(0, 0) = err_m;
    return mt::auc_1_150(pred, gt);
  };
  // error e: threshold tau counts when e < tau, tau = 1..150
  CHECK(auc_for(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(auc_for(0.0755) == doctest::Approx(75.0 / 150.0).epsilon(1e-12));
  CHECK(auc_for(0.001) == doctest::Approx(149.0 / 150.0).epsilon(1e-12));
  CHECK(auc_for(0.2) == doctest::Approx(0.0));

  // two joints: mean of the per-joint step functions
  JointMatrix gt2 = JointMatrix::Zero(2, 3);
  JointMatrix pred2 = gt2;
  pred2(0, 0) = 0.0505;  // 100 thresholds pass
  pred2(1, 0) = 0.2;     // none pass
  CHECK(mt::auc_1_150(pred2, gt2) ==
        doctest::Approx(0.5 * 100.0 / 150.0).epsilon(1e-12));
}

TEST_CASE("floor penetration uses the lowest contact joint") {
  const auto& skel = SkeletonDefinition::canonical();
  const auto feet = mt::ground_contact_joints(skel);
  REQUIRE(feet.size() == 4);
  CHECK(skel.joint_names[feet[0]] == "left_foot");
  CHECK(skel.joint_names[feet[1]] == "left_ball");
  CHECK(skel.joint_names[feet[2]] == "right_foot");
  CHECK(skel.joint_names[feet[3]] == "right_ball");

  JointMatrix pose = JointMatrix::Constant(16, 3, 0.5);
  CHECK(mt::floor_penetration_mm(pose, feet, 0.0) == 0.0);
  pose(feet[1], 1) = -0.012;
  pose(feet[2], 1) = -0.004;
  CHECK(mt::floor_penetration_mm(pose, feet, 0.0) ==
        doctest::Approx(12.0).epsilon(1e-12));
  // floor height is honored
  CHECK(mt::floor_penetration_mm(pose, feet, -0.1) == 0.0);
  CHECK_THROWS_AS(mt::floor_penetration_mm(pose, {}, 0.0), ConfigError);
  CHECK_THROWS_AS(mt::floor_penetration_mm(pose, {99}, 0.0), ShapeError);
}

TEST_CASE("metric aggregation averages frames and splits categories") {
  Rng rng(5);
  const JointMatrix gt = random_pose(rng, 16);
  JointMatrix off5 = gt;
  off5.col(0).array() += 0.005;  // 5 mm everywhere
  JointMatrix off15 = gt;
  off15.col(0).array() += 0.015;  // 15 mm everywhere

  mt::MetricAccumulator acc;
  acc.add("walk", off5, gt);
  acc.add("walk", off15, gt);
  acc.add("wave", gt, gt);
  acc.add_floor("walk", 12.0);
  acc.add_floor("wave", 0.0);

  const mt::MetricReport r = acc.report();
  CHECK(r.all.frames == 3);
  CHECK(r.all.mpjpe == doctest::Approx((5.0 + 15.0 + 0.0) / 3.0));
  CHECK(r.all.pck == doctest::Approx(1.0));
  CHECK(r.all.mpe == doctest::Approx(6.0));
  CHECK(r.all.mpe_frames == 2);
  REQUIRE(r.by_category.size() == 2);
  CHECK(r.by_category.at("walk").frames == 2);
  CHECK(r.by_category.at("walk").mpjpe == doctest::Approx(10.0));
  CHECK(r.by_category.at("wave").mpjpe == doctest::Approx(0.0));

  // degenerate frames only reduce the aligned-error denominator
  mt::MetricTotals t;
  t.add(off5, gt);
  JointMatrix collapsed = JointMatrix::Zero(16, 3);
  t.add(collapsed, gt);
  const auto s = mt::summarize(t);
  CHECK(s.frames == 2);
  CHECK(s.pa_skipped == 1);
  const auto pa5 = mt::pa_mpjpe_mm(off5, gt);
  REQUIRE(pa5.has_value());
  CHECK(s.pa_mpjpe == doctest::Approx(*pa5));

  mt::MetricTotals merged = t;
  merged.merge(t);
  CHECK(mt::summarize(merged).frames == 4);
  CHECK(mt::summarize(merged).mpjpe == doctest::Approx(s.mpjpe));
}

TEST_CASE("metric report JSON round trip and table formatting") {
  Rng rng(8);
  const JointMatrix gt = random_pose(rng, 16);
  JointMatrix pred = gt;
  pred.col(2).array() += 0.02;

  mt::MetricAccumulator acc;
  acc.add("squat", pred, gt);
  acc.add_floor("squat", 3.5);
  const mt::MetricReport r = acc.report();

  const auto j = mt::report_to_json(r);
  const mt::MetricReport back = mt::report_from_json(j);
  CHECK(back.all.mpjpe == r.all.mpjpe);
  CHECK(back.all.pa_mpjpe == r.all.pa_mpjpe);
  CHECK(back.all.pck == r.all.pck);
  CHECK(back.all.auc == r.all.auc);
  CHECK(back.all.mpe == r.all.mpe);
  CHECK(back.all.frames == r.all.frames);
  CHECK(back.by_category.at("squat").mpjpe == r.by_category.at("squat").mpjpe);

  nlohmann::json bad = j;
  bad["all"].erase("mpjpe_mm");
  CHECK_THROWS_AS(mt::report_from_json(bad), DataError);

  const std::string table = mt::format_report(r);
  CHECK(table.find("category") != std::string::npos);
  CHECK(table.find("squat") != std::string::npos);
  CHECK(table.find("all") != std::string::npos);
}
