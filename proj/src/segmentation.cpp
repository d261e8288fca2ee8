#include "landsim/segmentation.hpp"

#include "landsim/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace landsim {

namespace {

// Per-class accuracy of the reference segmentation model, used as the
// confusion-matrix diagonal. Classes without a published figure (Dirt,
// Gravel, Rock, Boat, Background) default to 0.8.
struct DiagonalEntry {
    ClassId cls;
    double value;
    bool quantified;
};

const DiagonalEntry kDiagonals[kNumClasses] = {
    {ClassId::Road, 0.9285, true},
    {ClassId::Dirt, 0.8, false},
    {ClassId::Gravel, 0.8, false},
    {ClassId::Rock, 0.8, false},
    {ClassId::Grass, 0.8918, true},
    {ClassId::Vegetation, 0.9641, true},
    {ClassId::Tree, 0.8152, true},
    {ClassId::Obstacle, 0.3914, true},
    {ClassId::Animal, 0.8174, true},
    {ClassId::Person, 0.7009, true},
    {ClassId::Bicycle, 0.0188, true},
    {ClassId::Vehicle, 0.6918, true},
    {ClassId::Water, 0.8330, true},
    {ClassId::Boat, 0.8, false},
    {ClassId::Wall, 0.8349, true},
    {ClassId::Roof, 0.8105, true},
    {ClassId::Sky, 0.9740, true},
    {ClassId::Drone, 0.3549, true},
    {ClassId::TrainTrack, 0.5061, true},
    {ClassId::Background, 0.8, false},
};

// Visually adjacent classes: half of a row's off-diagonal mass goes to
// Background, the other half is split among these.
const std::vector<ClassId>& adjacent_classes(ClassId c) {
    static const std::array<std::vector<ClassId>, kNumClasses> table = [] {
        std::array<std::vector<ClassId>, kNumClasses> t;
        t[class_index(ClassId::Road)] = {ClassId::Gravel, ClassId::Dirt};
        t[class_index(ClassId::Dirt)] = {ClassId::Gravel, ClassId::Grass};
        t[class_index(ClassId::Gravel)] = {ClassId::Road, ClassId::Dirt};
        t[class_index(ClassId::Rock)] = {ClassId::Gravel, ClassId::Obstacle};
        t[class_index(ClassId::Grass)] = {ClassId::Vegetation, ClassId::Dirt};
        t[class_index(ClassId::Vegetation)] = {ClassId::Grass, ClassId::Tree};
        t[class_index(ClassId::Tree)] = {ClassId::Vegetation};
        t[class_index(ClassId::Obstacle)] = {ClassId::Wall};
        t[class_index(ClassId::Animal)] = {ClassId::Person};
        t[class_index(ClassId::Person)] = {ClassId::Animal};
        t[class_index(ClassId::Bicycle)] = {ClassId::Person, ClassId::Vehicle};
        t[class_index(ClassId::Vehicle)] = {ClassId::Obstacle};
        t[class_index(ClassId::Water)] = {ClassId::Sky};
        t[class_index(ClassId::Boat)] = {ClassId::Water};
        t[class_index(ClassId::Wall)] = {ClassId::Roof, ClassId::Obstacle};
        t[class_index(ClassId::Roof)] = {ClassId::Wall};
        t[class_index(ClassId::Sky)] = {ClassId::Water};
        t[class_index(ClassId::Drone)] = {ClassId::Sky};
        t[class_index(ClassId::TrainTrack)] = {ClassId::Road, ClassId::Gravel};
        t[class_index(ClassId::Background)] = {ClassId::Obstacle, ClassId::Grass};
        return t;
    }();
    return table[class_index(c)];
}

} // namespace

SegmentationFrame::SegmentationFrame(int width, int height, std::int32_t capture_tick)
    : width_(width), height_(height), capture_tick_(capture_tick) {
    if (width <= 0 || height <= 0) throw InvalidParams("frame resolution must be positive");
    data_.resize(static_cast<std::size_t>(width) * height * kNumClasses, 0.0);
}

void NoiseModel::validate() const {
    for (int r = 0; r < kNumClasses; ++r) {
        double sum = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            const double v = confusion[r * kNumClasses + c];
            if (v < 0.0) throw InvalidParams("confusion entries must be non-negative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InvalidParams("confusion row " + class_name(static_cast<ClassId>(r)) +
                                " does not sum to 1");
        }
    }
    if (!(concentration > 0.0 && concentration <= 1.0)) {
        throw InvalidParams("concentration must be in (0,1]");
    }
}

NoiseModel default_noise_model(double person_false_positive_rate) {
    if (person_false_positive_rate < 0.0 || person_false_positive_rate >= 1.0) {
        throw InvalidParams("person_false_positive_rate must be in [0,1)");
    }
    NoiseModel model;
    for (const auto& entry : kDiagonals) {
        const int r = class_index(entry.cls);
        const double off = 1.0 - entry.value;
        model.confusion[r * kNumClasses + r] = entry.value;

        const auto& adj = adjacent_classes(entry.cls);
        double background_share = off * 0.5;
        double adjacent_share = off * 0.5;
        if (entry.cls == ClassId::Background || adj.empty()) {
            background_share = 0.0;
            adjacent_share = off;
        }
        model.at(entry.cls, ClassId::Background) += background_share;
        for (ClassId a : adj) {
            model.at(entry.cls, a) += adjacent_share / adj.size();
        }

        if (person_false_positive_rate > 0.0 && entry.cls != ClassId::Person) {
            // Shift part of the off-diagonal mass into spurious person hits.
            const double moved = off * person_false_positive_rate;
            const double scale = (off - moved) / off;
            for (int c = 0; c < kNumClasses; ++c) {
                if (c == r) continue;
                model.confusion[r * kNumClasses + c] *= scale;
            }
            model.at(entry.cls, ClassId::Person) += moved;
        }
    }
    model.validate();
    return model;
}

SegmentationFrame segment(const ClassImage& view, const NoiseModel& model, Rng& rng,
                          std::int32_t capture_tick) {
    model.validate();
    if (view.width <= 0 || view.height <= 0) throw InvalidParams("empty view");

    SegmentationFrame frame(view.width, view.height, capture_tick);
    const double rest = (1.0 - model.concentration) / (kNumClasses - 1);
    for (int v = 0; v < view.height; ++v) {
        for (int u = 0; u < view.width; ++u) {
            const int truth = class_index(view.at(u, v));
            // Inverse-CDF draw from the confusion row.
            const double x = rng.next_double();
            double acc = 0.0;
            int emitted = kNumClasses - 1;
            for (int c = 0; c < kNumClasses; ++c) {
                acc += model.confusion[truth * kNumClasses + c];
                if (x < acc) {
                    emitted = c;
                    break;
                }
            }
            double* px = frame.pixel(u, v);
            for (int c = 0; c < kNumClasses; ++c) px[c] = rest;
            px[emitted] = model.concentration;
        }
    }
    return frame;
}

NoiseModel load_noise_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open noise model file: " + path);
    nlohmann::json j;
    in >> j;

    if (j.value("schema_version", 0) != 1) {
        throw InvalidParams("unsupported noise model schema version");
    }
    const auto names = j.at("classes").get<std::vector<std::string>>();
    if (static_cast<int>(names.size()) != kNumClasses) {
        throw InvalidParams("noise model must list all classes");
    }
    // Rows may be listed in any class order; remap into canonical order.
    std::array<int, kNumClasses> order{};
    for (int i = 0; i < kNumClasses; ++i) order[i] = class_index(class_from_name(names[i]));

    NoiseModel model;
    const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != kNumClasses) {
        throw InvalidParams("noise model must have one row per class");
    }
    for (int r = 0; r < kNumClasses; ++r) {
        if (static_cast<int>(rows[r].size()) != kNumClasses) {
            throw InvalidParams("confusion rows must have one entry per class");
        }
        for (int c = 0; c < kNumClasses; ++c) {
            model.confusion[order[r] * kNumClasses + order[c]] = rows[r][c];
        }
    }
    model.concentration = j.value("concentration", 0.9);
    model.seed = j.value("seed", std::uint64_t{0});
    model.validate();
    return model;
}

void save_noise_model(const NoiseModel& model, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    std::vector<std::string> names;
    for (int i = 0; i < kNumClasses; ++i) names.push_back(class_name(static_cast<ClassId>(i)));
    j["classes"] = names;
    std::vector<std::vector<double>> rows(kNumClasses, std::vector<double>(kNumClasses));
    for (int r = 0; r < kNumClasses; ++r) {
        for (int c = 0; c < kNumClasses; ++c) rows[r][c] = model.confusion[r * kNumClasses + c];
    }
    j["rows"] = rows;
    j["concentration"] = model.concentration;
    j["seed"] = model.seed;
    std::ofstream out(path);
    if (!out) throw InvalidParams("cannot write noise model file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace landsim
