#pragma once

#include "landsim/classes.hpp"
#include "landsim/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace landsim {

// Per-pixel class probabilities, one simplex vector per pixel. This is the
// exchange format between any segmentation provider and the map filter; an
// external model process can substitute frames as long as it fills it.
class SegmentationFrame {
public:
    SegmentationFrame(int width, int height, std::int32_t capture_tick = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::int32_t capture_tick() const { return capture_tick_; }

    double* pixel(int u, int v) { return data_.data() + (v * width_ + u) * kNumClasses; }
    const double* pixel(int u, int v) const {
        return data_.data() + (v * width_ + u) * kNumClasses;
    }

private:
    int width_;
    int height_;
    std::int32_t capture_tick_;
    std::vector<double> data_;
};

// Ground-truth class image, the synthetic provider's input.
struct ClassImage {
    int width = 0;
    int height = 0;
    std::vector<ClassId> classes;

    ClassImage() = default;
    ClassImage(int w, int h, ClassId fill)
        : width(w), height(h), classes(static_cast<std::size_t>(w) * h, fill) {}

    ClassId at(int u, int v) const { return classes[v * width + u]; }
    void set(int u, int v, ClassId c) { classes[v * width + u] = c; }
};

// Synthetic segmentation error model: a row-stochastic confusion matrix
// (row = true class, column = emitted argmax class) plus the peak mass the
// emitted probability vector carries.
struct NoiseModel {
    // row-major C x C
    std::array<double, kNumClasses * kNumClasses> confusion{};
    double concentration = 0.9; // probability mass on the emitted class
    std::uint64_t seed = 0;

    double at(ClassId truth, ClassId emitted) const {
        return confusion[class_index(truth) * kNumClasses + class_index(emitted)];
    }
    double& at(ClassId truth, ClassId emitted) {
        return confusion[class_index(truth) * kNumClasses + class_index(emitted)];
    }

    void validate() const; // throws InvalidParams on non-stochastic rows
};

// Calibrated default: diagonals from the per-class segmentation accuracy
// figures, off-diagonal mass split between Background and visually adjacent
// classes. Classes without a published figure get 0.8.
// `person_false_positive_rate`, when positive, moves that fraction of every
// other row's off-diagonal mass into the Person column (spurious person
// detections do occur in the field; the magnitude is a knob).
NoiseModel default_noise_model(double person_false_positive_rate = 0.0);

// Per pixel: draw the emitted class from the confusion row of the true
// class, then emit a vector with `concentration` mass on the emitted class
// and the remainder spread uniformly over the rest. Deterministic given the
// rng state.
SegmentationFrame segment(const ClassImage& view, const NoiseModel& model, Rng& rng,
                          std::int32_t capture_tick = 0);

// JSON schema: {"schema_version":1, "classes":[...], "rows":[[..]x20],
//               "concentration":x, "seed":n}
NoiseModel load_noise_model(const std::string& path);
void save_noise_model(const NoiseModel& model, const std::string& path);

} // namespace landsim
