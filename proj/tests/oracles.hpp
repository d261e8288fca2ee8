// Independent brute-force reference implementations used to check the
// library. Everything here is deliberately naive and shares no code with
// the algorithms under test.
#pragma once

#include "landsim/classes.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace oracles {

// Connected components of a binary grid via union-find (the library uses a
// BFS flood fill). Returns a label per set cell, -1 elsewhere; labels are
// normalized to the smallest row-major cell index of the component.
inline std::vector<int> union_find_components(const std::vector<std::uint8_t>& mask, int w,
                                              int h, bool eight_connected = true) {
    const int n = w * h;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int> rank(n, 0);

    std::vector<int> out(n, -1);
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask[y * w + x]) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (!eight_connected && dx != 0 && dy != 0) continue;
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (mask[ny * w + nx]) unite(y * w + x, ny * w + nx);
                }
            }
        }
    }
    // normalize roots to the smallest member index
    std::vector<int> smallest(n, std::numeric_limits<int>::max());
    for (int i = 0; i < n; ++i) {
        if (mask[i]) smallest[find(i)] = std::min(smallest[find(i)], i);
    }
    for (int i = 0; i < n; ++i) {
        if (mask[i]) out[i] = smallest[find(i)];
    }
    return out;
}

// Exact squared Euclidean distance (cell units) from each member cell to
// the nearest non-member cell center, all pairs, with out-of-grid cells as
// non-members. Non-member cells get 0.
inline std::vector<std::int64_t> brute_force_edt_sq(const std::vector<std::uint8_t>& member,
                                                    int w, int h) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!member[y * w + x]) continue;
            // nearest out-of-grid cell center lies straight toward a border
            const std::int64_t border =
                std::min(std::min(x + 1, w - x), std::min(y + 1, h - y));
            std::int64_t best = border * border;
            for (int yy = 0; yy < h; ++yy) {
                for (int xx = 0; xx < w; ++xx) {
                    if (member[yy * w + xx]) continue;
                    const std::int64_t dx = xx - x;
                    const std::int64_t dy = yy - y;
                    best = std::min(best, dx * dx + dy * dy);
                }
            }
            out[y * w + x] = best;
        }
    }
    return out;
}

// Nearest-rank percentile on a copy of the samples.
inline double percentile(std::vector<double> samples, double p) {
    std::sort(samples.begin(), samples.end());
    std::size_t idx = static_cast<std::size_t>(std::ceil(p * samples.size()));
    if (idx < 1) idx = 1;
    if (idx > samples.size()) idx = samples.size();
    return samples[idx - 1];
}

} // namespace oracles
