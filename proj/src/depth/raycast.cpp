#include "egostereo/depth/raycast.hpp"

#include <cmath>
#include <limits>

#include "egostereo/errors.hpp"

namespace egostereo::depth {

namespace {

constexpr double kTiny = 1e-12;

// Smallest root of t^2*qa + 2*qb*t + qc = 0 above tmin, if real.
std::optional<double> smallest_root(double qa, double qb, double qc,
                                    double tmin) {
  if (std::abs(qa) < kTiny) return std::nullopt;
  const double disc = qb * qb - qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-qb - sq) / qa;
  const double t1 = (-qb + sq) / qa;
  if (t0 > tmin) return t0;
  if (t1 > tmin) return t1;
  return std::nullopt;
}

struct FacePaint {
  Eigen::Vector3d base;
  int axis_u, axis_v;
};

FacePaint face_paint(int axis, int sign) {
  // Distinct tones per wall; the floor stays warm gray.
  static const Eigen::Vector3d tones[6] = {
      {0.85, 0.50, 0.45},  // +x
      {0.45, 0.75, 0.85},  // -x
      {0.80, 0.80, 0.85},  // +y ceiling
      {0.70, 0.65, 0.55},  // -y floor
      {0.55, 0.80, 0.50},  // +z
      {0.80, 0.70, 0.40},  // -z
  };
  FacePaint p;
  p.base = tones[axis * 2 + (sign > 0 ? 0 : 1)];
  p.axis_u = (axis + 1) % 3;
  p.axis_v = (axis + 2) % 3;
  return p;
}

Eigen::Vector3d capsule_color(std::size_t index) {
  static const Eigen::Vector3d palette[8] = {
      {0.95, 0.25, 0.25}, {0.25, 0.95, 0.25}, {0.25, 0.45, 0.95},
      {0.95, 0.85, 0.20}, {0.90, 0.30, 0.90}, {0.20, 0.90, 0.90},
      {0.95, 0.60, 0.20}, {0.70, 0.95, 0.40},
  };
  return palette[index % 8];
}

std::uint8_t to8(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<std::uint8_t>(std::lround(255.0 * c));
}

}  // namespace

void RoomBox::validate() const {
  if (!(min_corner.array() < max_corner.array()).all()) {
    throw ConfigError("RoomBox: min_corner must be strictly below max_corner");
  }
}

bool RoomBox::contains(const Eigen::Vector3d& p) const {
  return (p.array() > min_corner.array()).all() &&
         (p.array() < max_corner.array()).all();
}

double room_exit_distance(const RoomBox& room, const Eigen::Vector3d& origin,
                          const Eigen::Vector3d& dir, int* face_axis,
                          int* face_sign) {
  if (!room.contains(origin)) {
    throw DegenerateInputError("room_exit_distance: origin outside the room");
  }
  double best = std::numeric_limits<double>::infinity();
  int axis = -1, sign = 0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < kTiny) continue;
    const double wall =
        dir[a] > 0.0 ? room.max_corner[a] : room.min_corner[a];
    const double t = (wall - origin[a]) / dir[a];
    if (t > 0.0 && t < best) {
      best = t;
      axis = a;
      sign = dir[a] > 0.0 ? 1 : -1;
    }
  }
  if (axis < 0) {
    throw DegenerateInputError("room_exit_distance: zero direction");
  }
  if (face_axis) *face_axis = axis;
  if (face_sign) *face_sign = sign;
  return best;
}

std::optional<double> ray_capsule(const Eigen::Vector3d& origin,
                                  const Eigen::Vector3d& dir,
                                  const Capsule& c) {
  const double r2 = c.radius * c.radius;
  const Eigen::Vector3d u = c.b - c.a;
  const double len = u.norm();
  std::optional<double> best;
  auto consider = [&](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };

  if (len > kTiny) {
    const Eigen::Vector3d uh = u / len;
    const Eigen::Vector3d m = origin - c.a;
    const Eigen::Vector3d dd = dir - dir.dot(uh) * uh;
    const Eigen::Vector3d mm = m - m.dot(uh) * uh;
    const auto t = smallest_root(dd.squaredNorm(), mm.dot(dd),
                                 mm.squaredNorm() - r2, kTiny);
    if (t) {
      const double s = (m + *t * dir).dot(uh);
      if (s >= 0.0 && s <= len) consider(t);
    }
  }
  // End caps (the whole sphere when the segment degenerates).
  for (const Eigen::Vector3d* end : {&c.a, &c.b}) {
    const Eigen::Vector3d m = origin - *end;
    consider(smallest_root(dir.squaredNorm(), m.dot(dir),
                           m.squaredNorm() - r2, kTiny));
    if (len <= kTiny) break;
  }
  return best;
}

std::vector<Capsule> body_capsules(const SkeletonDefinition& skel,
                                   const JointMatrix& joints_world) {
  if (joints_world.rows() != skel.joint_count()) {
    throw ConfigError("body_capsules: joint count mismatch");
  }
  const bool canonical =
      skel.joint_names == SkeletonDefinition::canonical().joint_names;
  // Radii follow the canonical bone order: neck-head, arms, torso+legs.
  static const double kCanonicalRadii[15] = {
      0.055,                          // neck - head
      0.050, 0.042, 0.035,            // left arm
      0.050, 0.042, 0.035,            // right arm
      0.085, 0.060, 0.045, 0.035,     // left torso/leg chain
      0.085, 0.060, 0.045, 0.035,     // right torso/leg chain
  };
  std::vector<Capsule> out;
  out.reserve(skel.bone_count() + 1);
  for (int m = 0; m < skel.bone_count(); ++m) {
    const auto [p, c] = skel.bone_edges[m];
    Capsule cap;
    cap.a = joints_world.row(p).transpose();
    cap.b = joints_world.row(c).transpose();
    cap.radius = canonical ? kCanonicalRadii[m] : 0.04;
    out.push_back(cap);
  }
  if (canonical) {
    Capsule head;
    head.a = head.b = joints_world.row(0).transpose();
    head.radius = 0.09;
    out.push_back(head);
  }
  return out;
}

MaskMatrix render_body_mask(const FisheyeCamera& cam,
                            const RigidTransform& cam_to_world,
                            const std::vector<Capsule>& body,
                            const RoomBox& room) {
  MaskMatrix mask = MaskMatrix::Zero(cam.height, cam.width);
  const Eigen::Vector3d origin = cam_to_world.translation;
  const double circle2 = cam.circle_radius() * cam.circle_radius();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Eigen::Vector2d px(x + 0.5, y + 0.5);
      if ((px - cam.principal_point).squaredNorm() > circle2) continue;
      const Eigen::Vector3d ray =
          cam_to_world.rotation * fisheye_unproject(cam, px);
      const double troom = room_exit_distance(room, origin, ray);
      for (const auto& cap : body) {
        const auto t = ray_capsule(origin, ray, cap);
        if (t && *t < troom) {
          mask(y, x) = 1;
          break;
        }
      }
    }
  }
  return mask;
}

io::Image render_scene_image(const FisheyeCamera& cam,
                             const RigidTransform& cam_to_world,
                             const std::vector<Capsule>& body,
                             const RoomBox& room) {
  io::Image img = io::Image::filled(cam.width, cam.height, 0, 0, 0);
  const Eigen::Vector3d origin = cam_to_world.translation;
  const double circle2 = cam.circle_radius() * cam.circle_radius();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Eigen::Vector2d px(x + 0.5, y + 0.5);
      if ((px - cam.principal_point).squaredNorm() > circle2) continue;
      const Eigen::Vector3d ray =
          cam_to_world.rotation * fisheye_unproject(cam, px);
      int axis = 0, sign = 0;
      const double troom = room_exit_distance(room, origin, ray, &axis, &sign);

      double tbody = std::numeric_limits<double>::infinity();
      std::size_t hit = 0;
      for (std::size_t i = 0; i < body.size(); ++i) {
        const auto t = ray_capsule(origin, ray, body[i]);
        if (t && *t < tbody) {
          tbody = *t;
          hit = i;
        }
      }

      Eigen::Vector3d color;
      if (tbody < troom) {
        const double shade = 0.45 + 0.8 / (1.0 + 2.0 * tbody);
        color = capsule_color(hit) * std::min(1.0, shade);
      } else {
        const auto paint = face_paint(axis, sign);
        const Eigen::Vector3d p = origin + troom * ray;
        const long cell = static_cast<long>(std::floor(p[paint.axis_u] / 0.4)) +
                          static_cast<long>(std::floor(p[paint.axis_v] / 0.4));
        const double checker = (cell & 1) ? 0.62 : 1.0;
        const double shade = 0.35 + 0.65 * std::exp(-0.22 * troom);
        color = paint.base * (checker * shade);
      }
      std::uint8_t* out = img.px(x, y);
      out[0] = to8(color.x());
      out[1] = to8(color.y());
      out[2] = to8(color.z());
    }
  }
  return img;
}

}  // namespace egostereo::depth
