#pragma once

#include "landsim/semantic_map.hpp"
#include "landsim/spot_detection.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace landsim {

// Textual map snapshot. Header lines: magic+version, x_cells, y_cells,
// cell_size, anchor (world x y of cell (0,0) center), origin+heading of the
// ground frame, classes; then one row-major line per cell:
// "ix iy last_observed p0 .. p19". Values round-trip exactly.
void dump_map(const SemanticGroundMap& map, std::ostream& out);
SemanticGroundMap load_map(std::istream& in);

void dump_map_file(const SemanticGroundMap& map, const std::string& path);
SemanticGroundMap load_map_file(const std::string& path);

// Same layout for scalar debug grids (safe masks, distance fields):
// header then one row-major value line per row.
void dump_scalar_grid(const std::string& name, int x_cells, int y_cells, double cell_size,
                      const std::vector<double>& values, std::ostream& out);

} // namespace landsim
