#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace landsim {

class SemanticGroundMap;

struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;  // image columns
    int height = 0; // image rows

    void validate() const; // throws InvalidParams
};

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

// Point on the flat-ground plane z = 0, world frame, meters.
struct GroundPoint {
    double x = 0.0;
    double y = 0.0;
};

// Rigid world -> camera transform. Camera convention: +x along image
// columns, +y along image rows, +z along the optical axis.
class RigidPose {
public:
    RigidPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

    // Camera at `position` looking straight down, image x axis aligned with
    // the heading yaw (radians, world x toward world y positive).
    static RigidPose nadir(const Eigen::Vector3d& position, double yaw);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Eigen::Vector3d camera_center() const { return -rotation_.transpose() * translation_; }
    Eigen::Vector3d optical_axis_world() const { return rotation_.row(2).transpose(); }
    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
        return rotation_ * world + translation_;
    }

    RigidPose inverse() const;

private:
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
};

// Planar homography between two ground-frame coordinate systems,
// normalized so that (2,2) = 1.
struct Homography {
    Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();

    GroundPoint apply(const GroundPoint& p) const;
    Homography inverse() const; // throws SingularConfiguration if |det| <= 1e-12
};

// 2D ground coordinate frame anchored under a camera pose: origin at the
// ground projection of the camera center, x axis along the projected image
// x axis. The semantic ground map lives in this frame.
struct MapFrame {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double heading = 0.0; // radians

    static MapFrame from_pose(const RigidPose& pose); // throws DegeneratePose

    GroundPoint world_to_map(const GroundPoint& w) const;
    GroundPoint map_to_world(const GroundPoint& m) const;
};

// Projects a ground point through the camera; nullopt when the point falls
// behind the camera or outside [0,width) x [0,height).
// Throws DegeneratePose when the optical axis is parallel to the ground
// plane (|cos incidence| < 1e-6) or the camera sits within 0.1 m of it.
std::optional<Pixel> project_ground_to_pixel(const GroundPoint& p,
                                             const CameraModel& cam,
                                             const RigidPose& pose);

// Back-projects the four image corners (0,0), (w,0), (w,h), (0,h) onto the
// ground plane. Requires a nadir-dominant pose (optical axis within 45 deg
// of straight down); throws DegeneratePose otherwise.
std::array<GroundPoint, 4> ground_footprint(const CameraModel& cam, const RigidPose& pose);

// Homography taking the previous pose's map-frame coordinates (meters) to
// the current pose's map-frame coordinates. Estimated by direct linear
// transform from the four footprint-corner correspondences and checked
// against a held-out fifth correspondence (residual < 1e-6 m).
// Throws SingularConfiguration when the DLT system is rank-deficient.
Homography registration_homography(const RigidPose& pose_prev,
                                   const RigidPose& pose_curr,
                                   const CameraModel& cam);

// Resamples `map` into the frame implied by H (previous-map meters ->
// current-map meters) with nearest-neighbor lookup. Cells that map outside
// the source grid are reset to the uninformed state.
SemanticGroundMap warp_map(const SemanticGroundMap& map, const Homography& h);

} // namespace landsim
