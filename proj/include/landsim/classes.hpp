#pragma once

#include <array>
#include <string>
#include <vector>

namespace landsim {

// Semantic class catalogue of the segmentation head. Index order is fixed;
// grids, frames and confusion matrices all use it.
enum class ClassId : int {
    Road = 0,
    Dirt,
    Gravel,
    Rock,
    Grass,
    Vegetation,
    Tree,
    Obstacle,
    Animal,
    Person,
    Bicycle,
    Vehicle,
    Water,
    Boat,
    Wall,
    Roof,
    Sky,
    Drone,
    TrainTrack,
    Background,
};

inline constexpr int kNumClasses = 20;
inline constexpr int kPersonIndex = static_cast<int>(ClassId::Person);
inline constexpr int kBackgroundIndex = static_cast<int>(ClassId::Background);

inline int class_index(ClassId c) { return static_cast<int>(c); }

const std::string& class_name(ClassId c);
ClassId class_from_name(const std::string& name); // throws InvalidParams

// Which classes count as landable, and in what preference order.
// Person can never be flagged safe.
class ClassSet {
public:
    // Grass, Dirt, Gravel landable, preferred in that order.
    static ClassSet defaults();

    // Safe classes in rank order (rank 0 = most preferred).
    static ClassSet with_safe(const std::vector<ClassId>& ranked_safe);

    bool is_safe(ClassId c) const { return safe_rank_[class_index(c)] >= 0; }
    // Rank among safe classes; -1 for unsafe classes.
    int safe_rank(ClassId c) const { return safe_rank_[class_index(c)]; }
    const std::vector<ClassId>& safe_classes() const { return ranked_safe_; }

private:
    ClassSet() { safe_rank_.fill(-1); }

    std::array<int, kNumClasses> safe_rank_{};
    std::vector<ClassId> ranked_safe_;
};

} // namespace landsim
