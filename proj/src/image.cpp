#include "qdf/image.hpp"

#include <cmath>
#include <fstream>

#include "qdf/errors.hpp"

namespace qdf {

void emit_map(const std::vector<double>& values, int rows, int cols, double window_lo,
              double window_hi, const std::string& base_path) {
    if (static_cast<int>(values.size()) != rows * cols)
        throw DimensionMismatch("map size does not match rows*cols");
    if (!(window_hi > window_lo)) throw InvalidParams("empty display window");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidParams("non-finite map value");

    std::ofstream pgm(base_path + ".pgm", std::ios::binary);
    if (!pgm) throw IoError("cannot open " + base_path + ".pgm");
    pgm << "P5\n" << cols << " " << rows << "\n255\n";
    for (double v : values) {
        double t = (v - window_lo) / (window_hi - window_lo);
        t = std::min(std::max(t, 0.0), 1.0);
        unsigned char pix = static_cast<unsigned char>(std::lround(255.0 * t));
        pgm.write(reinterpret_cast<const char*>(&pix), 1);
    }
    if (!pgm) throw IoError("write failed: " + base_path + ".pgm");

    std::ofstream raw(base_path + ".f32", std::ios::binary);
    if (!raw) throw IoError("cannot open " + base_path + ".f32");
    for (double v : values) {
        float x = static_cast<float>(v);
        raw.write(reinterpret_cast<const char*>(&x), 4);
    }
    if (!raw) throw IoError("write failed: " + base_path + ".f32");
}

} // namespace qdf
