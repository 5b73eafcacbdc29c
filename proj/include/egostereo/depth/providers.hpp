#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "egostereo/data/manifest.hpp"
#include "egostereo/depth/observation.hpp"

namespace egostereo::depth {

// Source of person-silhouette masks at full image resolution. The prompt
// points (predicted 2-d joints) exist for predictor-style backends; the
// bundled implementations do not need them.
class BodyMaskProvider {
 public:
  virtual ~BodyMaskProvider() = default;
  virtual MaskMatrix mask_for(
      const data::DatasetIndex& index, const data::SequenceRecord& seq,
      const data::FrameRecord& frame, int view,
      const std::vector<std::optional<Eigen::Vector2d>>& prompts) = 0;
};

// All-background. Depth built on top of it keeps body pixels.
class NullMaskProvider : public BodyMaskProvider {
 public:
  MaskMatrix mask_for(const data::DatasetIndex&, const data::SequenceRecord&,
                      const data::FrameRecord&, int,
                      const std::vector<std::optional<Eigen::Vector2d>>&) override;
};

// Re-renders the silhouette from the ground-truth pose and room geometry.
// Only valid on synthetic data (needs index.room).
class OracleMaskProvider : public BodyMaskProvider {
 public:
  MaskMatrix mask_for(const data::DatasetIndex&, const data::SequenceRecord&,
                      const data::FrameRecord&, int,
                      const std::vector<std::optional<Eigen::Vector2d>>&) override;
};

// Reads <dir>/<seq>_<frame>_<l|r>.png (any PNG; nonzero = person).
// A missing file is a DataError.
class DiskMaskProvider : public BodyMaskProvider {
 public:
  explicit DiskMaskProvider(std::string dir) : dir_(std::move(dir)) {}
  MaskMatrix mask_for(const data::DatasetIndex&, const data::SequenceRecord&,
                      const data::FrameRecord&, int,
                      const std::vector<std::optional<Eigen::Vector2d>>&) override;
  static std::string mask_filename(const std::string& seq_id, int frame_idx,
                                   int view);

 private:
  std::string dir_;
};

// kind: "null" | "oracle" | "disk" (disk needs dir).
std::unique_ptr<BodyMaskProvider> make_mask_provider(const std::string& kind,
                                                     const std::string& dir);

// Source of quarter-resolution depth observations.
class DepthObservationProvider {
 public:
  virtual ~DepthObservationProvider() = default;
  virtual DepthObservation depth_for(const data::DatasetIndex& index,
                                     const data::SequenceRecord& seq,
                                     const data::FrameRecord& frame,
                                     int view) = 0;
};

// Reads the PNGs referenced by the manifest, honoring depth_available.
class DiskDepthProvider : public DepthObservationProvider {
 public:
  DepthObservation depth_for(const data::DatasetIndex&,
                             const data::SequenceRecord&,
                             const data::FrameRecord&, int) override;
};

// Ray-casts depth fresh from the stored geometry; always available.
class OracleDepthProvider : public DepthObservationProvider {
 public:
  DepthObservation depth_for(const data::DatasetIndex&,
                             const data::SequenceRecord&,
                             const data::FrameRecord&, int) override;
};

// Pretends no sensor exists: every observation is unavailable.
class NoneDepthProvider : public DepthObservationProvider {
 public:
  DepthObservation depth_for(const data::DatasetIndex&,
                             const data::SequenceRecord&,
                             const data::FrameRecord&, int) override;
};

// kind: "disk" | "oracle" | "none".
std::unique_ptr<DepthObservationProvider> make_depth_provider(
    const std::string& kind);

}  // namespace egostereo::depth
