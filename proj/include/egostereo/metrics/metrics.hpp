#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egostereo/skeleton/skeleton.hpp"

namespace egostereo::metrics {

// Per-frame pose accuracy. All joint matrices are (J, 3) in meters; every
// reported number is in millimeters. Predictions and ground truth must be
// expressed in the same frame (the caller chooses device-relative or
// pelvis-relative before calling).

// Mean per-joint position error.
double mpjpe_mm(const JointMatrix& pred, const JointMatrix& gt);

// MPJPE after least-squares similarity alignment of the prediction onto
// the ground truth. Returns nullopt when the alignment is degenerate
// (collinear or collapsed joints); such frames are skipped and counted.
std::optional<double> pa_mpjpe_mm(const JointMatrix& pred,
                                  const JointMatrix& gt);

// Fraction of joints with error strictly below tau_mm.
double pck(const JointMatrix& pred, const JointMatrix& gt,
           double tau_mm = 100.0);

// Mean of pck over the integer thresholds 1 mm .. 150 mm.
double auc_1_150(const JointMatrix& pred, const JointMatrix& gt);

// Millimeters by which the lowest ground-contact joint of a world-frame
// prediction sinks below the floor plane (0 when it stays above).
double floor_penetration_mm(const JointMatrix& world_pred,
                            const std::vector<int>& contact_joints,
                            double floor_y);

// Joints whose names end in "foot" or "ball"; these define ground contact.
std::vector<int> ground_contact_joints(const SkeletonDefinition& skel);

// Streaming aggregation over frames.
struct MetricTotals {
  std::int64_t frames = 0;
  std::int64_t pa_skipped = 0;   // degenerate alignments
  std::int64_t mpe_frames = 0;   // frames with a world-frame prediction
  double mpjpe_sum = 0.0;
  double pa_sum = 0.0;
  double pck_sum = 0.0;
  double auc_sum = 0.0;
  double mpe_sum = 0.0;

  void add(const JointMatrix& pred, const JointMatrix& gt);
  void add_floor(double penetration_mm);
  void merge(const MetricTotals& other);
};

struct MetricSummary {
  std::int64_t frames = 0;
  std::int64_t pa_skipped = 0;
  std::int64_t mpe_frames = 0;
  double mpjpe = 0.0;
  double pa_mpjpe = 0.0;
  double pck = 0.0;   // fraction in [0, 1]
  double auc = 0.0;   // fraction in [0, 1]
  double mpe = 0.0;   // millimeters, only over mpe_frames
};

MetricSummary summarize(const MetricTotals& totals);

// Overall numbers plus one row per motion category.
struct MetricReport {
  MetricSummary all;
  std::map<std::string, MetricSummary> by_category;
};

class MetricAccumulator {
 public:
  void add(const std::string& category, const JointMatrix& pred,
           const JointMatrix& gt);
  void add_floor(const std::string& category, double penetration_mm);
  MetricReport report() const;

 private:
  MetricTotals all_;
  std::map<std::string, MetricTotals> by_category_;
};

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

// Fixed-width table for terminal output.
std::string format_report(const MetricReport& report);

}  // namespace egostereo::metrics
