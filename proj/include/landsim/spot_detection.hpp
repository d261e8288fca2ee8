#pragma once

#include "landsim/classes.hpp"
#include "landsim/semantic_map.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace landsim {

struct SpotConfig {
    double r_safe = 3.0;               // required clearance radius, meters
    int history_capacity = 16;
    double history_dedup_radius = 3.0; // entries closer than this replace each other

    void validate() const; // throws InvalidParams
};

// Binary membership grids, one per safe class in rank order.
struct SafeMask {
    int x_cells = 0;
    int y_cells = 0;
    std::vector<ClassId> classes;                 // rank order
    std::vector<std::vector<std::uint8_t>> masks; // parallel to classes

    bool at(std::size_t class_pos, int ix, int iy) const {
        return masks[class_pos][static_cast<std::size_t>(iy) * x_cells + ix] != 0;
    }
};

// 8-connected component of one class mask.
struct GridSegment {
    ClassId cls = ClassId::Grass;
    std::vector<std::pair<int, int>> cells;
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
};

// Exact Euclidean distances for one segment: for each segment cell, the
// distance from its center to the nearest cell center not in the segment,
// with cells beyond the map border counting as non-members. Zero outside
// the segment. Distances are exact; squared distances in cell units are
// integers and are exposed for bit-exact comparisons.
class DistanceField {
public:
    DistanceField(const GridSegment& segment, int x_cells, int y_cells, double cell_size);

    int x_cells() const { return x_cells_; }
    int y_cells() const { return y_cells_; }
    double cell_size() const { return cell_size_; }
    ClassId segment_class() const { return cls_; }

    std::int64_t squared_cells_at(int ix, int iy) const;
    double meters_at(int ix, int iy) const {
        const std::int64_t sq = squared_cells_at(ix, iy);
        return sq == 0 ? 0.0 : cell_size_ * std::sqrt(static_cast<double>(sq));
    }

    const std::vector<std::pair<int, int>>& segment_cells() const { return cells_; }

private:
    int x_cells_, y_cells_;
    double cell_size_;
    ClassId cls_;
    int box_x0_, box_y0_, box_w_, box_h_; // segment bounding box
    std::vector<std::int64_t> sq_;        // bbox-local, 0 for non-members
    std::vector<std::pair<int, int>> cells_;
};

struct LandingSpot {
    GroundPoint world{};       // meters, world frame
    double clearance = 0.0;    // meters, distance value at the spot
    ClassId cls = ClassId::Grass;
    std::int32_t created_tick = 0;
    bool valid = true;
};

enum class SpotInvalidReason { None, UnsafeTerrain, PersonPresent, OutOfExtent };

struct SpotValidation {
    bool valid = true;
    SpotInvalidReason reason = SpotInvalidReason::None;
};

const char* to_string(SpotInvalidReason reason);

// Bounded FIFO of previously qualifying spots. Pushing a spot close to an
// existing same-class entry replaces it, so per-tick re-selections refresh
// the history instead of flushing it.
class SpotHistory {
public:
    explicit SpotHistory(const SpotConfig& config) : config_(config) {}

    void push(const LandingSpot& spot);

    // Highest-ranked stored spot that still validates, excluding anything
    // within the dedup radius of `exclude`. Entries failing validation get
    // their valid flag cleared but stay stored (they may recover).
    std::optional<LandingSpot> best_alternative(
        const std::optional<LandingSpot>& exclude,
        const ClassSet& classes,
        const std::function<SpotValidation(const LandingSpot&)>& validate);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }
    const std::deque<LandingSpot>& entries() const { return entries_; }

private:
    SpotConfig config_;
    std::deque<LandingSpot> entries_;
};

// Per safe class, the binary mask of cells labeled that class.
SafeMask safe_mask(const LabelGrid& labels, const ClassSet& classes);

// 8-connected components of every class mask.
std::vector<GridSegment> segments(const SafeMask& mask, const SpotConfig& config);

inline DistanceField distance_transform(const GridSegment& segment, int x_cells, int y_cells,
                                        double cell_size) {
    return DistanceField(segment, x_cells, y_cells, cell_size);
}

// Among all cells with D >= r_safe, picks by (class rank, then distance
// descending, then row-major position) and converts the winner to world
// coordinates. Every qualifying segment's best cell is appended to the
// history when one is given.
std::optional<LandingSpot> select_spot(const std::vector<DistanceField>& fields,
                                       const SemanticGroundMap& map,
                                       const ClassSet& classes,
                                       const SpotConfig& config,
                                       std::int32_t tick,
                                       SpotHistory* history);

// Valid iff every cell center strictly within r_safe of the spot is labeled
// safe and none carries person probability above the latch threshold. Cells
// that fall outside the map count as unsafe terrain.
SpotValidation validate_spot(const SemanticGroundMap& map,
                             const LabelGrid& labels,
                             const LandingSpot& spot,
                             const ClassSet& classes,
                             const SpotConfig& config,
                             const FilterConfig& filter);

} // namespace landsim
