#include "landsim/classes.hpp"

#include "landsim/errors.hpp"

#include <algorithm>

namespace landsim {

namespace {

const std::array<std::string, kNumClasses> kClassNames = {
    "Road",     "Dirt",    "Gravel", "Rock",  "Grass",
    "Vegetation", "Tree",  "Obstacle", "Animal", "Person",
    "Bicycle",  "Vehicle", "Water",  "Boat",  "Wall",
    "Roof",     "Sky",     "Drone",  "Train-Track", "Background",
};

} // namespace

const std::string& class_name(ClassId c) {
    return kClassNames[static_cast<int>(c)];
}

ClassId class_from_name(const std::string& name) {
    for (int i = 0; i < kNumClasses; ++i) {
        if (kClassNames[i] == name) return static_cast<ClassId>(i);
    }
    throw InvalidParams("unknown class name: " + name);
}

ClassSet ClassSet::defaults() {
    return with_safe({ClassId::Grass, ClassId::Dirt, ClassId::Gravel});
}

ClassSet ClassSet::with_safe(const std::vector<ClassId>& ranked_safe) {
    ClassSet set;
    int rank = 0;
    for (ClassId c : ranked_safe) {
        if (c == ClassId::Person) {
            throw InvalidParams("Person can never be a safe landing class");
        }
        if (set.safe_rank_[class_index(c)] >= 0) {
            throw InvalidParams("duplicate safe class: " + class_name(c));
        }
        set.safe_rank_[class_index(c)] = rank++;
        set.ranked_safe_.push_back(c);
    }
    return set;
}

} // namespace landsim
