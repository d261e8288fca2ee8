#include "landsim/semantic_map.hpp"

#include "landsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace landsim {

void FilterConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParams("alpha must be in (0,1)");
    if (!(person_latch_threshold > 0.0 && person_latch_threshold < 1.0)) {
        throw InvalidParams("person_latch_threshold must be in (0,1)");
    }
}

SemanticGroundMap::SemanticGroundMap(int x_cells, int y_cells, double cell_size,
                                     const MapFrame& frame)
    : x_cells_(x_cells), y_cells_(y_cells), cell_size_(cell_size), frame_(frame) {
    if (x_cells <= 0 || y_cells <= 0 || cell_size <= 0.0) {
        throw InvalidParams("map dimensions and cell size must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(x_cells) * y_cells;
    data_.resize(n * kNumClasses);
    last_observed_.assign(n, kNeverObserved);
    const auto& u = uninformed_vector();
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(u.begin(), u.end(), data_.begin() + i * kNumClasses);
    }
}

GroundPoint SemanticGroundMap::cell_center_map(int ix, int iy) const {
    return {(ix - (x_cells_ - 1) / 2.0) * cell_size_, (iy - (y_cells_ - 1) / 2.0) * cell_size_};
}

GroundPoint SemanticGroundMap::cell_center_world(int ix, int iy) const {
    return frame_.map_to_world(cell_center_map(ix, iy));
}

std::optional<std::pair<int, int>> SemanticGroundMap::map_to_cell(const GroundPoint& m) const {
    const int ix = static_cast<int>(std::lround(m.x / cell_size_ + (x_cells_ - 1) / 2.0));
    const int iy = static_cast<int>(std::lround(m.y / cell_size_ + (y_cells_ - 1) / 2.0));
    if (!in_bounds(ix, iy)) return std::nullopt;
    return std::make_pair(ix, iy);
}

std::optional<std::pair<int, int>> SemanticGroundMap::world_to_cell(const GroundPoint& w) const {
    return map_to_cell(frame_.world_to_map(w));
}

void SemanticGroundMap::reset_cell_uninformed(int ix, int iy) {
    const auto& u = uninformed_vector();
    std::copy(u.begin(), u.end(), cell(ix, iy));
    set_last_observed(ix, iy, kNeverObserved);
}

const std::array<double, kNumClasses>& SemanticGroundMap::uninformed_vector() {
    static const std::array<double, kNumClasses> u = [] {
        std::array<double, kNumClasses> v{};
        v.fill(1.0 / (kNumClasses - 1));
        v[kPersonIndex] = 0.0;
        return v;
    }();
    return u;
}

std::array<double, kNumClasses> bayes_update(const std::array<double, kNumClasses>& prior,
                                             const std::array<double, kNumClasses>& likelihood) {
    std::array<double, kNumClasses> like = likelihood;

    // Conservative person handling: a predicted person gets full weight.
    int argmax = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        if (like[c] > like[argmax]) argmax = c;
    }
    if (argmax == kPersonIndex) like[kPersonIndex] = 1.0;

    std::array<double, kNumClasses> post{};
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        post[c] = like[c] * prior[c];
        sum += post[c];
    }
    if (sum <= 0.0) {
        // Disjoint support: the prior has collapsed, keep the evidence.
        double lsum = 0.0;
        for (double v : like) lsum += v;
        if (lsum <= 0.0) throw InvalidParams("likelihood must have positive mass");
        for (int c = 0; c < kNumClasses; ++c) post[c] = like[c] / lsum;
        return post;
    }
    for (int c = 0; c < kNumClasses; ++c) post[c] /= sum;
    return post;
}

CellObservation make_cell_observation(const double* cell_prior, const double* likelihood) {
    CellObservation obs;
    int predicted = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        if (likelihood[c] > likelihood[predicted]) predicted = c;
    }
    obs.predicted = static_cast<ClassId>(predicted);

    // Ground-class block only: the Person channel never takes part in the
    // categorical product, so observed cells keep an exact unit sum there.
    std::array<double, kNumClasses> prior{};
    std::array<double, kNumClasses> like{};
    double like_mass = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        prior[c] = cell_prior[c];
        like[c] = likelihood[c];
    }
    prior[kPersonIndex] = 0.0;
    like[kPersonIndex] = 0.0;
    for (double v : like) like_mass += v;

    if (like_mass <= 0.0) {
        // All the observation mass was on Person: no ground-class evidence.
        // The block posterior is the normalized prior (or uniform if the
        // prior has fully decayed away).
        double prior_mass = 0.0;
        for (double v : prior) prior_mass += v;
        if (prior_mass > 0.0) {
            for (int c = 0; c < kNumClasses; ++c) obs.posterior[c] = prior[c] / prior_mass;
        } else {
            obs.posterior = SemanticGroundMap::uninformed_vector();
            double s = 0.0;
            for (double v : obs.posterior) s += v;
            for (double& v : obs.posterior) v /= s;
        }
        return obs;
    }
    obs.posterior = bayes_update(prior, like);
    return obs;
}

void decay_cell(double* cell, const CellObservation* obs, double alpha) {
    if (obs == nullptr) {
        for (int c = 0; c < kNumClasses; ++c) {
            if (c == kPersonIndex) continue; // held absent contrary evidence
            cell[c] *= alpha;
        }
        return;
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (c == kPersonIndex) continue;
        cell[c] = alpha * cell[c] + (1.0 - alpha) * obs->posterior[c];
    }
    const double person_target =
        (obs->predicted == ClassId::Person) ? 1.0 : obs->posterior[kPersonIndex];
    cell[kPersonIndex] = alpha * cell[kPersonIndex] + (1.0 - alpha) * person_target;
}

void apply_decay(SemanticGroundMap& map,
                 const std::vector<std::optional<CellObservation>>& observations,
                 const FilterConfig& config) {
    config.validate();
    const std::size_t n = static_cast<std::size_t>(map.x_cells()) * map.y_cells();
    if (!observations.empty() && observations.size() != n) {
        throw InvalidParams("observation grid does not match the map");
    }
    for (int iy = 0; iy < map.y_cells(); ++iy) {
        for (int ix = 0; ix < map.x_cells(); ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * map.x_cells() + ix;
            const CellObservation* obs =
                (!observations.empty() && observations[i]) ? &*observations[i] : nullptr;
            decay_cell(map.cell(ix, iy), obs, config.alpha);
        }
    }
}

void integrate_observation(SemanticGroundMap& map,
                           const SegmentationFrame& frame,
                           const CameraModel& cam,
                           const std::optional<RigidPose>& pose_prev,
                           const RigidPose& pose_curr,
                           const FilterConfig& config,
                           std::int32_t tick) {
    config.validate();
    if (pose_prev) {
        const Homography h = registration_homography(*pose_prev, pose_curr, cam);
        map = warp_map(map, h);
    }
    map.set_frame(MapFrame::from_pose(pose_curr));

    // Cells outside the camera footprint cannot project into the image;
    // restricting the projection tests to its bounding box keeps low-AGL
    // ticks cheap.
    int x_lo = 0, x_hi = map.x_cells() - 1, y_lo = 0, y_hi = map.y_cells() - 1;
    try {
        const auto corners = ground_footprint(cam, pose_curr);
        double mx_lo = 1e30, mx_hi = -1e30, my_lo = 1e30, my_hi = -1e30;
        for (const auto& c : corners) {
            const GroundPoint m = map.frame().world_to_map(c);
            mx_lo = std::min(mx_lo, m.x);
            mx_hi = std::max(mx_hi, m.x);
            my_lo = std::min(my_lo, m.y);
            my_hi = std::max(my_hi, m.y);
        }
        const double half_x = (map.x_cells() - 1) / 2.0;
        const double half_y = (map.y_cells() - 1) / 2.0;
        const double cs = map.cell_size();
        x_lo = std::max(0, static_cast<int>(std::floor(mx_lo / cs + half_x)) - 1);
        x_hi = std::min(map.x_cells() - 1, static_cast<int>(std::ceil(mx_hi / cs + half_x)) + 1);
        y_lo = std::max(0, static_cast<int>(std::floor(my_lo / cs + half_y)) - 1);
        y_hi = std::min(map.y_cells() - 1, static_cast<int>(std::ceil(my_hi / cs + half_y)) + 1);
    } catch (const DegeneratePose&) {
        // Tilted pose without a clean footprint: test every cell.
    }

    for (int iy = 0; iy < map.y_cells(); ++iy) {
        const bool row_in_box = iy >= y_lo && iy <= y_hi;
        for (int ix = 0; ix < map.x_cells(); ++ix) {
            double* cell = map.cell(ix, iy);
            std::optional<Pixel> px;
            if (row_in_box && ix >= x_lo && ix <= x_hi) {
                px = project_ground_to_pixel(map.cell_center_world(ix, iy), cam, pose_curr);
            }
            if (px) {
                const int u = static_cast<int>(px->u);
                const int v = static_cast<int>(px->v);
                const CellObservation obs = make_cell_observation(cell, frame.pixel(u, v));
                decay_cell(cell, &obs, config.alpha);
                map.set_last_observed(ix, iy, tick);
            } else {
                decay_cell(cell, nullptr, config.alpha);
            }
        }
    }
}

LabelGrid filtered_argmax(const SemanticGroundMap& map) {
    LabelGrid grid;
    grid.x_cells = map.x_cells();
    grid.y_cells = map.y_cells();
    grid.labels.resize(static_cast<std::size_t>(grid.x_cells) * grid.y_cells);
    for (int iy = 0; iy < map.y_cells(); ++iy) {
        for (int ix = 0; ix < map.x_cells(); ++ix) {
            if (map.last_observed(ix, iy) == SemanticGroundMap::kNeverObserved) {
                grid.labels[iy * grid.x_cells + ix] = ClassId::Background;
                continue;
            }
            const double* cell = map.cell(ix, iy);
            int best = 0;
            for (int c = 1; c < kNumClasses; ++c) {
                if (cell[c] > cell[best]) best = c; // strict: ties keep the lower index
            }
            grid.labels[iy * grid.x_cells + ix] = static_cast<ClassId>(best);
        }
    }
    return grid;
}

} // namespace landsim
