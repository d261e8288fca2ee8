#include "landsim/spot_detection.hpp"

#include "landsim/errors.hpp"

#include <algorithm>
#include <limits>

namespace landsim {

namespace {

// 1D squared distance transform (Felzenszwalb & Huttenlocher). Inputs are
// 0 or +inf plus exact integer squares, so the output squares are exact.
void edt_1d(const std::vector<double>& f, int n, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
                (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double diff = q - v[k];
        d[q] = diff * diff + f[v[k]];
    }
}

} // namespace

void SpotConfig::validate() const {
    if (!(r_safe > 0.0)) throw InvalidParams("r_safe must be positive");
    if (history_capacity <= 0) throw InvalidParams("history capacity must be positive");
    if (!(history_dedup_radius >= 0.0)) throw InvalidParams("dedup radius must be >= 0");
}

const char* to_string(SpotInvalidReason reason) {
    switch (reason) {
        case SpotInvalidReason::None: return "None";
        case SpotInvalidReason::UnsafeTerrain: return "UnsafeTerrain";
        case SpotInvalidReason::PersonPresent: return "PersonPresent";
        case SpotInvalidReason::OutOfExtent: return "OutOfExtent";
    }
    return "?";
}

SafeMask safe_mask(const LabelGrid& labels, const ClassSet& classes) {
    SafeMask mask;
    mask.x_cells = labels.x_cells;
    mask.y_cells = labels.y_cells;
    mask.classes = classes.safe_classes();
    mask.masks.assign(mask.classes.size(),
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(labels.x_cells) * labels.y_cells, 0));
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const int rank = classes.safe_rank(labels.labels[i]);
        if (rank >= 0) mask.masks[rank][i] = 1;
    }
    return mask;
}

std::vector<GridSegment> segments(const SafeMask& mask, const SpotConfig& config) {
    config.validate();
    std::vector<GridSegment> out;
    const int w = mask.x_cells;
    const int h = mask.y_cells;
    std::vector<std::uint8_t> visited;
    std::vector<std::pair<int, int>> stack;

    for (std::size_t ci = 0; ci < mask.classes.size(); ++ci) {
        visited.assign(static_cast<std::size_t>(w) * h, 0);
        for (int sy = 0; sy < h; ++sy) {
            for (int sx = 0; sx < w; ++sx) {
                if (!mask.at(ci, sx, sy) || visited[static_cast<std::size_t>(sy) * w + sx]) {
                    continue;
                }
                GridSegment seg;
                seg.cls = mask.classes[ci];
                seg.min_x = seg.max_x = sx;
                seg.min_y = seg.max_y = sy;
                stack.clear();
                stack.emplace_back(sx, sy);
                visited[static_cast<std::size_t>(sy) * w + sx] = 1;
                while (!stack.empty()) {
                    const auto [x, y] = stack.back();
                    stack.pop_back();
                    seg.cells.emplace_back(x, y);
                    seg.min_x = std::min(seg.min_x, x);
                    seg.max_x = std::max(seg.max_x, x);
                    seg.min_y = std::min(seg.min_y, y);
                    seg.max_y = std::max(seg.max_y, y);
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0) continue;
                            const int nx = x + dx;
                            const int ny = y + dy;
                            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                            if (visited[ni] || !mask.at(ci, nx, ny)) continue;
                            visited[ni] = 1;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
                out.push_back(std::move(seg));
            }
        }
    }
    return out;
}

DistanceField::DistanceField(const GridSegment& segment, int x_cells, int y_cells,
                             double cell_size)
    : x_cells_(x_cells), y_cells_(y_cells), cell_size_(cell_size), cls_(segment.cls),
      cells_(segment.cells) {
    if (segment.cells.empty()) throw InvalidParams("distance transform needs a non-empty segment");
    if (cell_size <= 0.0) throw InvalidParams("cell size must be positive");

    // One ring of non-member cells around the bounding box (possibly virtual
    // out-of-grid cells) is enough: clamping any farther non-member into the
    // padded box can only shorten the distance, and every padded-box cell
    // outside the segment is itself a non-member.
    box_x0_ = segment.min_x - 1;
    box_y0_ = segment.min_y - 1;
    box_w_ = segment.max_x - segment.min_x + 3;
    box_h_ = segment.max_y - segment.min_y + 3;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(static_cast<std::size_t>(box_w_) * box_h_, 0.0);
    for (const auto& [x, y] : segment.cells) {
        f[static_cast<std::size_t>(y - box_y0_) * box_w_ + (x - box_x0_)] = inf;
    }

    const int n_max = std::max(box_w_, box_h_);
    std::vector<double> line(n_max), dist(n_max), z(n_max + 1);
    std::vector<int> v(n_max);

    // columns, then rows
    std::vector<double> tmp(f.size());
    for (int x = 0; x < box_w_; ++x) {
        for (int y = 0; y < box_h_; ++y) line[y] = f[static_cast<std::size_t>(y) * box_w_ + x];
        edt_1d(line, box_h_, dist, v, z);
        for (int y = 0; y < box_h_; ++y) tmp[static_cast<std::size_t>(y) * box_w_ + x] = dist[y];
    }
    sq_.assign(f.size(), 0);
    for (int y = 0; y < box_h_; ++y) {
        for (int x = 0; x < box_w_; ++x) line[x] = tmp[static_cast<std::size_t>(y) * box_w_ + x];
        edt_1d(line, box_w_, dist, v, z);
        for (int x = 0; x < box_w_; ++x) {
            const double d = dist[x];
            sq_[static_cast<std::size_t>(y) * box_w_ + x] =
                std::isinf(d) ? 0 : static_cast<std::int64_t>(std::llround(d));
        }
    }
    // Non-member cells inside the box end up with distance 0 already (they
    // are sites); member cells always have a finite value thanks to the ring.
}

std::int64_t DistanceField::squared_cells_at(int ix, int iy) const {
    const int bx = ix - box_x0_;
    const int by = iy - box_y0_;
    if (bx < 0 || bx >= box_w_ || by < 0 || by >= box_h_) return 0;
    return sq_[static_cast<std::size_t>(by) * box_w_ + bx];
}

std::optional<LandingSpot> select_spot(const std::vector<DistanceField>& fields,
                                       const SemanticGroundMap& map,
                                       const ClassSet& classes,
                                       const SpotConfig& config,
                                       std::int32_t tick,
                                       SpotHistory* history) {
    config.validate();

    struct Best {
        bool found = false;
        int rank = 0;
        double meters = 0.0;
        long row_major = 0;
        int ix = 0, iy = 0;
        ClassId cls = ClassId::Grass;
    };
    auto better = [](const Best& a, const Best& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        if (a.meters != b.meters) return a.meters > b.meters;
        return a.row_major < b.row_major;
    };

    Best overall;
    for (const DistanceField& field : fields) {
        const int rank = classes.safe_rank(field.segment_class());
        if (rank < 0) continue; // unsafe classes never qualify
        Best seg_best;
        for (const auto& [ix, iy] : field.segment_cells()) {
            const double m = field.meters_at(ix, iy);
            if (m < config.r_safe) continue;
            Best cand{true, rank, m, static_cast<long>(iy) * map.x_cells() + ix, ix, iy,
                      field.segment_class()};
            if (!seg_best.found || better(cand, seg_best)) seg_best = cand;
        }
        if (!seg_best.found) continue;
        if (history != nullptr) {
            history->push(LandingSpot{map.cell_center_world(seg_best.ix, seg_best.iy),
                                      seg_best.meters, seg_best.cls, tick, true});
        }
        if (!overall.found || better(seg_best, overall)) overall = seg_best;
    }

    if (!overall.found) return std::nullopt;
    return LandingSpot{map.cell_center_world(overall.ix, overall.iy), overall.meters,
                       overall.cls, tick, true};
}

SpotValidation validate_spot(const SemanticGroundMap& map,
                             const LabelGrid& labels,
                             const LandingSpot& spot,
                             const ClassSet& classes,
                             const SpotConfig& config,
                             const FilterConfig& filter) {
    config.validate();
    const GroundPoint m = map.frame().world_to_map(spot.world);
    if (!map.map_to_cell(m)) {
        return {false, SpotInvalidReason::OutOfExtent};
    }

    const double cs = map.cell_size();
    const double half_x = (map.x_cells() - 1) / 2.0;
    const double half_y = (map.y_cells() - 1) / 2.0;
    const int x_lo = static_cast<int>(std::floor((m.x - config.r_safe) / cs + half_x));
    const int x_hi = static_cast<int>(std::ceil((m.x + config.r_safe) / cs + half_x));
    const int y_lo = static_cast<int>(std::floor((m.y - config.r_safe) / cs + half_y));
    const int y_hi = static_cast<int>(std::ceil((m.y + config.r_safe) / cs + half_y));

    bool person = false;
    bool unsafe = false;
    const double r2 = config.r_safe * config.r_safe;
    for (int iy = y_lo; iy <= y_hi && !person; ++iy) {
        for (int ix = x_lo; ix <= x_hi; ++ix) {
            const GroundPoint c{(ix - half_x) * cs, (iy - half_y) * cs};
            const double dx = c.x - m.x;
            const double dy = c.y - m.y;
            if (dx * dx + dy * dy >= r2) continue; // strict: boundary cells excluded
            if (!map.in_bounds(ix, iy)) {
                unsafe = true; // clipped clearance disc: unknown terrain
                continue;
            }
            if (map.cell(ix, iy)[kPersonIndex] > filter.person_latch_threshold) {
                person = true;
                break;
            }
            if (!classes.is_safe(labels.at(ix, iy))) unsafe = true;
        }
    }
    if (person) return {false, SpotInvalidReason::PersonPresent};
    if (unsafe) return {false, SpotInvalidReason::UnsafeTerrain};
    return {true, SpotInvalidReason::None};
}

void SpotHistory::push(const LandingSpot& spot) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        const double dx = it->world.x - spot.world.x;
        const double dy = it->world.y - spot.world.y;
        if (it->cls == spot.cls &&
            dx * dx + dy * dy <= config_.history_dedup_radius * config_.history_dedup_radius) {
            entries_.erase(it);
            break;
        }
    }
    entries_.push_back(spot);
    while (entries_.size() > static_cast<std::size_t>(config_.history_capacity)) {
        entries_.pop_front();
    }
}

std::optional<LandingSpot> SpotHistory::best_alternative(
    const std::optional<LandingSpot>& exclude,
    const ClassSet& classes,
    const std::function<SpotValidation(const LandingSpot&)>& validate) {
    const LandingSpot* best = nullptr;
    int best_rank = 0;
    for (LandingSpot& entry : entries_) {
        if (exclude) {
            const double dx = entry.world.x - exclude->world.x;
            const double dy = entry.world.y - exclude->world.y;
            if (dx * dx + dy * dy <=
                config_.history_dedup_radius * config_.history_dedup_radius) {
                continue;
            }
        }
        const int rank = classes.safe_rank(entry.cls);
        if (rank < 0) continue;
        const SpotValidation check = validate(entry);
        entry.valid = check.valid;
        if (!check.valid) continue;
        if (best == nullptr || rank < best_rank ||
            (rank == best_rank && (entry.clearance > best->clearance ||
                                   (entry.clearance == best->clearance &&
                                    entry.created_tick > best->created_tick)))) {
            best = &entry;
            best_rank = rank;
        }
    }
    if (best == nullptr) return std::nullopt;
    return *best;
}

} // namespace landsim
