#include "egostereo/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "egostereo/errors.hpp"
#include "egostereo/geometry/procrustes.hpp"

namespace egostereo::metrics {

namespace {

void check_pair(const JointMatrix& pred, const JointMatrix& gt,
                const char* who) {
  if (pred.rows() != gt.rows() || pred.rows() < 1)
    throw ShapeError(std::string(who) + ": prediction/truth joint counts differ");
}

Eigen::VectorXd joint_errors_mm(const JointMatrix& pred,
                                const JointMatrix& gt) {
  return (pred - gt).rowwise().norm() * 1000.0;
}

}  // namespace

double mpjpe_mm(const JointMatrix& pred, const JointMatrix& gt) {
  check_pair(pred, gt, "mpjpe");
  return joint_errors_mm(pred, gt).mean();
}

std::optional<double> pa_mpjpe_mm(const JointMatrix& pred,
                                  const JointMatrix& gt) {
  check_pair(pred, gt, "pa_mpjpe");
  try {
    const SimilarityTransform s = procrustes_align(pred, gt);
    return mpjpe_mm(s.apply_rows(pred), gt);
  } catch (const AlignmentDegenerateError&) {
    return std::nullopt;
  }
}

double pck(const JointMatrix& pred, const JointMatrix& gt, double tau_mm) {
  check_pair(pred, gt, "pck");
  const Eigen::VectorXd e = joint_errors_mm(pred, gt);
  std::int64_t hits = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e[i] < tau_mm) ++hits;
  return static_cast<double>(hits) / static_cast<double>(e.size());
}

double auc_1_150(const JointMatrix& pred, const JointMatrix& gt) {
  check_pair(pred, gt, "auc");
  const Eigen::VectorXd e = joint_errors_mm(pred, gt);
  double acc = 0.0;
  for (int tau = 1; tau <= 150; ++tau) {
    std::int64_t hits = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i)
      if (e[i] < static_cast<double>(tau)) ++hits;
    acc += static_cast<double>(hits) / static_cast<double>(e.size());
  }
  return acc / 150.0;
}

double floor_penetration_mm(const JointMatrix& world_pred,
                            const std::vector<int>& contact_joints,
                            double floor_y) {
  if (contact_joints.empty())
    throw ConfigError("floor_penetration: no ground-contact joints");
  double lowest = std::numeric_limits<double>::infinity();
  for (int j : contact_joints) {
    if (j < 0 || j >= world_pred.rows())
      throw ShapeError("floor_penetration: contact joint out of range");
    lowest = std::min(lowest, world_pred(j, 1));
  }
  return std::max(0.0, floor_y - lowest) * 1000.0;
}

std::vector<int> ground_contact_joints(const SkeletonDefinition& skel) {
  auto ends_with = [](const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() &&
           s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
  };
  std::vector<int> out;
  for (int j = 0; j < skel.joint_count(); ++j) {
    const std::string& n = skel.joint_names[j];
    if (ends_with(n, "foot") || ends_with(n, "ball")) out.push_back(j);
  }
  if (out.empty())
    throw ConfigError("skeleton has no foot/ball joints for floor metrics");
  return out;
}

void MetricTotals::add(const JointMatrix& pred, const JointMatrix& gt) {
  ++frames;
  mpjpe_sum += mpjpe_mm(pred, gt);
  if (const auto pa = pa_mpjpe_mm(pred, gt))
    pa_sum += *pa;
  else
    ++pa_skipped;
  pck_sum += pck(pred, gt);
  auc_sum += auc_1_150(pred, gt);
}

void MetricTotals::add_floor(double penetration_mm) {
  ++mpe_frames;
  mpe_sum += penetration_mm;
}

void MetricTotals::merge(const MetricTotals& other) {
  frames += other.frames;
  pa_skipped += other.pa_skipped;
  mpe_frames += other.mpe_frames;
  mpjpe_sum += other.mpjpe_sum;
  pa_sum += other.pa_sum;
  pck_sum += other.pck_sum;
  auc_sum += other.auc_sum;
  mpe_sum += other.mpe_sum;
}

MetricSummary summarize(const MetricTotals& t) {
  MetricSummary s;
  s.frames = t.frames;
  s.pa_skipped = t.pa_skipped;
  s.mpe_frames = t.mpe_frames;
  if (t.frames > 0) {
    const double n = static_cast<double>(t.frames);
    s.mpjpe = t.mpjpe_sum / n;
    s.pck = t.pck_sum / n;
    s.auc = t.auc_sum / n;
    const std::int64_t pa_n = t.frames - t.pa_skipped;
    s.pa_mpjpe = pa_n > 0 ? t.pa_sum / static_cast<double>(pa_n) : 0.0;
  }
  if (t.mpe_frames > 0)
    s.mpe = t.mpe_sum / static_cast<double>(t.mpe_frames);
  return s;
}

void MetricAccumulator::add(const std::string& category,
                            const JointMatrix& pred, const JointMatrix& gt) {
  all_.add(pred, gt);
  by_category_[category].add(pred, gt);
}

void MetricAccumulator::add_floor(const std::string& category,
                                  double penetration_mm) {
  all_.add_floor(penetration_mm);
  by_category_[category].add_floor(penetration_mm);
}

MetricReport MetricAccumulator::report() const {
  MetricReport r;
  r.all = summarize(all_);
  for (const auto& [cat, totals] : by_category_)
    r.by_category[cat] = summarize(totals);
  return r;
}

namespace {

nlohmann::json summary_to_json(const MetricSummary& s) {
  return {{"frames", s.frames},       {"pa_skipped", s.pa_skipped},
          {"mpe_frames", s.mpe_frames}, {"mpjpe_mm", s.mpjpe},
          {"pa_mpjpe_mm", s.pa_mpjpe},  {"pck_100mm", s.pck},
          {"auc_150mm", s.auc},         {"mpe_mm", s.mpe}};
}

MetricSummary summary_from_json(const nlohmann::json& j) {
  MetricSummary s;
  try {
    s.frames = j.at("frames").get<std::int64_t>();
    s.pa_skipped = j.at("pa_skipped").get<std::int64_t>();
    s.mpe_frames = j.at("mpe_frames").get<std::int64_t>();
    s.mpjpe = j.at("mpjpe_mm").get<double>();
    s.pa_mpjpe = j.at("pa_mpjpe_mm").get<double>();
    s.pck = j.at("pck_100mm").get<double>();
    s.auc = j.at("auc_150mm").get<double>();
    s.mpe = j.at("mpe_mm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metric report: ") + e.what());
  }
  return s;
}

}  // namespace

nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [cat, s] : report.by_category)
    cats[cat] = summary_to_json(s);
  return {{"all", summary_to_json(report.all)}, {"by_category", cats}};
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.all = summary_from_json(j.at("all"));
    for (const auto& [cat, v] : j.at("by_category").items())
      r.by_category[cat] = summary_from_json(v);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metric report: ") + e.what());
  }
  return r;
}

std::string format_report(const MetricReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %8s %12s %9s %9s %9s %7s\n",
                "category", "mpjpe", "pa-mpjpe", "pck@100", "auc", "mpe",
                "frames");
  out += line;
  auto row = [&](const std::string& name, const MetricSummary& s) {
    std::snprintf(line, sizeof(line),
                  "%-14s %8.2f %12.2f %8.1f%% %8.3f %9.2f %7lld\n",
                  name.c_str(), s.mpjpe, s.pa_mpjpe, 100.0 * s.pck, s.auc,
                  s.mpe, static_cast<long long>(s.frames));
    out += line;
  };
  row("all", report.all);
  for (const auto& [cat, s] : report.by_category) row(cat, s);
  if (report.all.pa_skipped > 0) {
    std::snprintf(line, sizeof(line),
                  "(pa-mpjpe skipped %lld degenerate frames)\n",
                  static_cast<long long>(report.all.pa_skipped));
    out += line;
  }
  return out;
}

}  // namespace egostereo::metrics
