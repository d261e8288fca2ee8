#include "landsim/grid_io.hpp"

#include "landsim/errors.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace landsim {

void dump_map(const SemanticGroundMap& map, std::ostream& out) {
    out << "semantic-grid 1\n";
    out << "x_cells " << map.x_cells() << "\n";
    out << "y_cells " << map.y_cells() << "\n";
    out << std::setprecision(17);
    out << "cell_size " << map.cell_size() << "\n";
    const GroundPoint anchor = map.anchor();
    out << "anchor " << anchor.x << " " << anchor.y << "\n";
    out << "origin " << map.frame().origin_x << " " << map.frame().origin_y << " "
        << map.frame().heading << "\n";
    out << "classes " << kNumClasses;
    for (int c = 0; c < kNumClasses; ++c) out << " " << class_name(static_cast<ClassId>(c));
    out << "\n";
    for (int iy = 0; iy < map.y_cells(); ++iy) {
        for (int ix = 0; ix < map.x_cells(); ++ix) {
            out << ix << " " << iy << " " << map.last_observed(ix, iy);
            const double* cell = map.cell(ix, iy);
            for (int c = 0; c < kNumClasses; ++c) out << " " << cell[c];
            out << "\n";
        }
    }
}

SemanticGroundMap load_map(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "semantic-grid" || version != 1) {
        throw InvalidParams("not a semantic-grid v1 stream");
    }
    std::string key;
    int x_cells = 0, y_cells = 0;
    double cell_size = 0.0, anchor_x = 0.0, anchor_y = 0.0;
    MapFrame frame;
    in >> key >> x_cells;
    if (key != "x_cells") throw InvalidParams("malformed grid header");
    in >> key >> y_cells;
    if (key != "y_cells") throw InvalidParams("malformed grid header");
    in >> key >> cell_size;
    if (key != "cell_size") throw InvalidParams("malformed grid header");
    in >> key >> anchor_x >> anchor_y;
    if (key != "anchor") throw InvalidParams("malformed grid header");
    in >> key >> frame.origin_x >> frame.origin_y >> frame.heading;
    if (key != "origin") throw InvalidParams("malformed grid header");
    int n_classes = 0;
    in >> key >> n_classes;
    if (key != "classes" || n_classes != kNumClasses) {
        throw InvalidParams("grid class list does not match");
    }
    for (int c = 0; c < kNumClasses; ++c) {
        std::string name;
        in >> name;
        if (name != class_name(static_cast<ClassId>(c))) {
            throw InvalidParams("grid class order does not match");
        }
    }

    SemanticGroundMap map(x_cells, y_cells, cell_size, frame);
    for (long i = 0; i < static_cast<long>(x_cells) * y_cells; ++i) {
        int ix = 0, iy = 0;
        std::int32_t tick = 0;
        in >> ix >> iy >> tick;
        if (!in || !map.in_bounds(ix, iy)) throw InvalidParams("malformed grid cell line");
        map.set_last_observed(ix, iy, tick);
        double* cell = map.cell(ix, iy);
        for (int c = 0; c < kNumClasses; ++c) in >> cell[c];
    }
    if (!in) throw InvalidParams("truncated grid stream");
    return map;
}

void dump_map_file(const SemanticGroundMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidParams("cannot write map dump: " + path);
    dump_map(map, out);
}

SemanticGroundMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open map dump: " + path);
    return load_map(in);
}

void dump_scalar_grid(const std::string& name, int x_cells, int y_cells, double cell_size,
                      const std::vector<double>& values, std::ostream& out) {
    if (values.size() != static_cast<std::size_t>(x_cells) * y_cells) {
        throw InvalidParams("scalar grid size mismatch");
    }
    out << "scalar-grid 1\n";
    out << "name " << name << "\n";
    out << "x_cells " << x_cells << "\n";
    out << "y_cells " << y_cells << "\n";
    out << std::setprecision(17);
    out << "cell_size " << cell_size << "\n";
    for (int iy = 0; iy < y_cells; ++iy) {
        for (int ix = 0; ix < x_cells; ++ix) {
            if (ix) out << " ";
            out << values[static_cast<std::size_t>(iy) * x_cells + ix];
        }
        out << "\n";
    }
}

} // namespace landsim
