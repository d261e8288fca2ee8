#include "landsim/geometry.hpp"

#include "landsim/errors.hpp"
#include "landsim/semantic_map.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstring>

namespace landsim {

namespace {

constexpr double kMinHeight = 0.1;
constexpr double kMinIncidence = 1e-6;
constexpr double kNadirDominantCos = 0.70710678118654752; // cos(45 deg)

void check_projectable(const RigidPose& pose) {
    if (std::abs(pose.optical_axis_world().z()) < kMinIncidence) {
        throw DegeneratePose("optical axis parallel to the ground plane");
    }
    if (pose.camera_center().z() <= kMinHeight) {
        throw DegeneratePose("camera too close to the ground plane");
    }
}

// Ray through a continuous pixel coordinate, intersected with z = 0.
GroundPoint pixel_to_ground(const Pixel& px, const CameraModel& cam, const RigidPose& pose) {
    const Eigen::Vector3d dir_cam((px.u - cam.cx) / cam.fx, (px.v - cam.cy) / cam.fy, 1.0);
    const Eigen::Vector3d dir_world = pose.rotation().transpose() * dir_cam;
    const Eigen::Vector3d center = pose.camera_center();
    if (std::abs(dir_world.z()) < kMinIncidence) {
        throw DegeneratePose("view ray parallel to the ground plane");
    }
    const double s = -center.z() / dir_world.z();
    if (s <= 0.0) {
        throw DegeneratePose("view ray does not reach the ground plane");
    }
    const Eigen::Vector3d hit = center + s * dir_world;
    return {hit.x(), hit.y()};
}

} // namespace

void CameraModel::validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw InvalidParams("focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InvalidParams("image resolution must be positive");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
        throw InvalidParams("principal point outside the image");
    }
}

RigidPose::RigidPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
    const Eigen::Matrix3d rtr = rotation_.transpose() * rotation_;
    if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(rotation_.determinant() - 1.0) > 1e-9) {
        throw InvalidParams("rotation is not a proper orthonormal matrix");
    }
}

RigidPose RigidPose::nadir(const Eigen::Vector3d& position, double yaw) {
    // Base: image x = world x, image y = -world y, optical axis = -world z.
    Eigen::Matrix3d base;
    base << 1, 0, 0,
            0, -1, 0,
            0, 0, -1;
    Eigen::Matrix3d rz_neg;
    rz_neg << std::cos(yaw), std::sin(yaw), 0,
             -std::sin(yaw), std::cos(yaw), 0,
              0, 0, 1;
    const Eigen::Matrix3d rot = base * rz_neg;
    return RigidPose(rot, -rot * position);
}

RigidPose RigidPose::inverse() const {
    return RigidPose(rotation_.transpose(), -(rotation_.transpose() * translation_));
}

GroundPoint Homography::apply(const GroundPoint& p) const {
    const Eigen::Vector3d out = matrix * Eigen::Vector3d(p.x, p.y, 1.0);
    if (std::abs(out.z()) < 1e-15) {
        throw SingularConfiguration("homography maps point to infinity");
    }
    return {out.x() / out.z(), out.y() / out.z()};
}

Homography Homography::inverse() const {
    if (std::abs(matrix.determinant()) <= 1e-12) {
        throw SingularConfiguration("homography is not invertible");
    }
    return Homography{matrix.inverse()};
}

MapFrame MapFrame::from_pose(const RigidPose& pose) {
    const Eigen::Vector3d center = pose.camera_center();
    // Image x axis projected onto the plane gives the frame heading.
    const Eigen::Vector3d x_axis = pose.rotation().row(0).transpose();
    const double nx = std::hypot(x_axis.x(), x_axis.y());
    if (nx < 1e-9) {
        throw DegeneratePose("image x axis has no ground-plane component");
    }
    return MapFrame{center.x(), center.y(), std::atan2(x_axis.y(), x_axis.x())};
}

GroundPoint MapFrame::world_to_map(const GroundPoint& w) const {
    const double dx = w.x - origin_x;
    const double dy = w.y - origin_y;
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {c * dx + s * dy, -s * dx + c * dy};
}

GroundPoint MapFrame::map_to_world(const GroundPoint& m) const {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {origin_x + c * m.x - s * m.y, origin_y + s * m.x + c * m.y};
}

std::optional<Pixel> project_ground_to_pixel(const GroundPoint& p,
                                             const CameraModel& cam,
                                             const RigidPose& pose) {
    check_projectable(pose);
    const Eigen::Vector3d in_cam = pose.to_camera(Eigen::Vector3d(p.x, p.y, 0.0));
    if (in_cam.z() < 1e-9) return std::nullopt; // behind the camera
    const double u = cam.fx * in_cam.x() / in_cam.z() + cam.cx;
    const double v = cam.fy * in_cam.y() / in_cam.z() + cam.cy;
    if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) return std::nullopt;
    return Pixel{u, v};
}

std::array<GroundPoint, 4> ground_footprint(const CameraModel& cam, const RigidPose& pose) {
    check_projectable(pose);
    if (-pose.optical_axis_world().z() < kNadirDominantCos) {
        throw DegeneratePose("pose is not nadir-dominant");
    }
    const double w = cam.width;
    const double h = cam.height;
    return {pixel_to_ground({0.0, 0.0}, cam, pose), pixel_to_ground({w, 0.0}, cam, pose),
            pixel_to_ground({w, h}, cam, pose), pixel_to_ground({0.0, h}, cam, pose)};
}

Homography registration_homography(const RigidPose& pose_prev,
                                   const RigidPose& pose_curr,
                                   const CameraModel& cam) {
    const MapFrame frame_prev = MapFrame::from_pose(pose_prev);
    const MapFrame frame_curr = MapFrame::from_pose(pose_curr);

    // Correspondences: the previous footprint corners expressed in both
    // ground frames, plus the image center as a held-out residual check.
    const std::array<GroundPoint, 4> corners = ground_footprint(cam, pose_prev);
    std::array<GroundPoint, 4> src;
    std::array<GroundPoint, 4> dst;
    for (int i = 0; i < 4; ++i) {
        src[i] = frame_prev.world_to_map(corners[i]);
        dst[i] = frame_curr.world_to_map(corners[i]);
    }

    // Isotropic normalization keeps the DLT well conditioned.
    auto normalizer = [](const std::array<GroundPoint, 4>& pts) {
        double mx = 0.0, my = 0.0;
        for (const auto& p : pts) { mx += p.x; my += p.y; }
        mx /= 4.0; my /= 4.0;
        double scale = 0.0;
        for (const auto& p : pts) scale += std::hypot(p.x - mx, p.y - my);
        scale = (scale > 1e-12) ? 4.0 * std::sqrt(2.0) / scale : 1.0;
        Eigen::Matrix3d t;
        t << scale, 0, -scale * mx,
             0, scale, -scale * my,
             0, 0, 1;
        return t;
    };
    const Eigen::Matrix3d t_src = normalizer(src);
    const Eigen::Matrix3d t_dst = normalizer(dst);

    Eigen::Matrix<double, 8, 9> a = Eigen::Matrix<double, 8, 9>::Zero();
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d s = t_src * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d d = t_dst * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        const double x = s.x() / s.z(), y = s.y() / s.z();
        const double xp = d.x() / d.z(), yp = d.y() / d.z();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, x * xp, y * xp, xp;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, x * yp, y * yp, yp;
    }

    const Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
    if (svd.singularValues()(6) < 1e-10) {
        throw SingularConfiguration("degenerate correspondences for the DLT");
    }
    const Eigen::Matrix<double, 9, 1> hvec = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << hvec(0), hvec(1), hvec(2),
          hvec(3), hvec(4), hvec(5),
          hvec(6), hvec(7), hvec(8);
    Eigen::Matrix3d h = t_dst.inverse() * hn * t_src;
    if (std::abs(h(2, 2)) < 1e-12) {
        throw SingularConfiguration("homography cannot be normalized");
    }
    h /= h(2, 2);

    const Homography result{h};

    // Held-out check on the back-projected image center.
    const GroundPoint center_world =
        pixel_to_ground({cam.width / 2.0, cam.height / 2.0}, cam, pose_prev);
    const GroundPoint mapped = result.apply(frame_prev.world_to_map(center_world));
    const GroundPoint expected = frame_curr.world_to_map(center_world);
    if (std::hypot(mapped.x - expected.x, mapped.y - expected.y) >= 1e-6) {
        throw SingularConfiguration("held-out correspondence residual too large");
    }
    return result;
}

SemanticGroundMap warp_map(const SemanticGroundMap& map, const Homography& h) {
    const Homography h_inv = h.inverse();
    SemanticGroundMap out(map.x_cells(), map.y_cells(), map.cell_size(), map.frame());

    const double half_x = (map.x_cells() - 1) / 2.0;
    const double half_y = (map.y_cells() - 1) / 2.0;
    const double cell = map.cell_size();

    for (int iy = 0; iy < map.y_cells(); ++iy) {
        for (int ix = 0; ix < map.x_cells(); ++ix) {
            const GroundPoint dst{(ix - half_x) * cell, (iy - half_y) * cell};
            const GroundPoint src = h_inv.apply(dst);
            const int sx = static_cast<int>(std::lround(src.x / cell + half_x));
            const int sy = static_cast<int>(std::lround(src.y / cell + half_y));
            if (map.in_bounds(sx, sy)) {
                std::memcpy(out.cell(ix, iy), map.cell(sx, sy), kNumClasses * sizeof(double));
                out.set_last_observed(ix, iy, map.last_observed(sx, sy));
            }
            // else: stays uninformed (constructor state)
        }
    }
    return out;
}

} // namespace landsim
