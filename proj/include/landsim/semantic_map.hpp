#pragma once

#include "landsim/classes.hpp"
#include "landsim/geometry.hpp"
#include "landsim/segmentation.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace landsim {

struct FilterConfig {
    double alpha = 0.1;                  // temporal decay factor
    double person_latch_threshold = 0.2; // person probability above which a cell counts occupied

    void validate() const; // throws InvalidParams
};

// Metric ground-plane belief grid. Each cell carries a probability vector
// over the 20 classes. The 19 ground classes form a categorical
// distribution (they sum to 1 once the cell has been observed); the Person
// entry is a parallel occupancy channel that is raised on person
// observations, decayed only against contrary evidence, and never lost to
// mere absence of updates.
class SemanticGroundMap {
public:
    static constexpr std::int32_t kNeverObserved = -1;

    SemanticGroundMap(int x_cells, int y_cells, double cell_size, const MapFrame& frame);

    int x_cells() const { return x_cells_; }
    int y_cells() const { return y_cells_; }
    double cell_size() const { return cell_size_; }
    double extent_x() const { return x_cells_ * cell_size_; }
    double extent_y() const { return y_cells_ * cell_size_; }

    const MapFrame& frame() const { return frame_; }
    void set_frame(const MapFrame& f) { frame_ = f; }

    // World coordinates of the center of cell (0, 0).
    GroundPoint anchor() const { return cell_center_world(0, 0); }

    bool in_bounds(int ix, int iy) const {
        return ix >= 0 && ix < x_cells_ && iy >= 0 && iy < y_cells_;
    }

    double* cell(int ix, int iy) { return data_.data() + (iy * x_cells_ + ix) * kNumClasses; }
    const double* cell(int ix, int iy) const {
        return data_.data() + (iy * x_cells_ + ix) * kNumClasses;
    }

    std::int32_t last_observed(int ix, int iy) const {
        return last_observed_[iy * x_cells_ + ix];
    }
    void set_last_observed(int ix, int iy, std::int32_t tick) {
        last_observed_[iy * x_cells_ + ix] = tick;
    }

    // Map-frame meters of a cell center; the grid is centered on the frame
    // origin (the point under the camera).
    GroundPoint cell_center_map(int ix, int iy) const;
    GroundPoint cell_center_world(int ix, int iy) const;

    // Nearest cell to a map-frame point; nullopt when outside the grid.
    std::optional<std::pair<int, int>> map_to_cell(const GroundPoint& m) const;
    std::optional<std::pair<int, int>> world_to_cell(const GroundPoint& w) const;

    void reset_cell_uninformed(int ix, int iy);

    // Ground classes uniform (1/19 each), Person 0.
    static const std::array<double, kNumClasses>& uninformed_vector();

private:
    int x_cells_;
    int y_cells_;
    double cell_size_;
    MapFrame frame_;
    std::vector<double> data_;
    std::vector<std::int32_t> last_observed_;
};

struct LabelGrid {
    int x_cells = 0;
    int y_cells = 0;
    std::vector<ClassId> labels;

    ClassId at(int ix, int iy) const { return labels[iy * x_cells + ix]; }
};

// Posterior ~ likelihood * prior, renormalized to sum 1. If the
// observation's argmax class is Person, the Person likelihood is forced to
// 1 before the product. A zero elementwise product (disjoint support) falls
// back to the normalized likelihood: a collapsed prior is forgotten.
std::array<double, kNumClasses> bayes_update(const std::array<double, kNumClasses>& prior,
                                             const std::array<double, kNumClasses>& likelihood);

// One cell's processed observation, ready for the decay step.
struct CellObservation {
    std::array<double, kNumClasses> posterior{};
    ClassId predicted = ClassId::Background; // argmax of the raw likelihood
};

// Bayes step for one map cell: the ground-class block of the cell vector is
// the prior, the Person channel stays out of the product (it is driven by
// `predicted` in the decay step).
CellObservation make_cell_observation(const double* cell_prior,
                                      const double* likelihood);

// Convex-combination temporal update for one cell.
// Observed:    M_t(c) = alpha * M_{t-1}(c) + (1 - alpha) * posterior(c)
//              Person: target 1 when the prediction is Person, posterior
//              otherwise.
// Unobserved:  ground classes shrink by alpha; Person holds.
void decay_cell(double* cell, const CellObservation* obs, double alpha);

// `observations` is row-major X*Y; empty means every cell unobserved.
void apply_decay(SemanticGroundMap& map,
                 const std::vector<std::optional<CellObservation>>& observations,
                 const FilterConfig& config);

// One filtering tick: warp the map into the current pose's ground frame
// (when pose_prev is given), then Bayes-update every cell whose center
// projects into the frame, then decay all cells. Person predictions latch
// the Person channel. Updates per-cell last-observed ticks.
void integrate_observation(SemanticGroundMap& map,
                           const SegmentationFrame& frame,
                           const CameraModel& cam,
                           const std::optional<RigidPose>& pose_prev,
                           const RigidPose& pose_curr,
                           const FilterConfig& config,
                           std::int32_t tick);

// Per-cell argmax labels; ties break to the lowest class index; cells never
// observed label Background.
LabelGrid filtered_argmax(const SemanticGroundMap& map);

} // namespace landsim
