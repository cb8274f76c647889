#pragma once

#include <iosfwd>
#include <vector>

namespace gmedia {

/// Grayscale raster, row-major, row 0 at the top.
struct Raster {
    int width = 0;
    int height = 0;
    int max_value = 255;
    std::vector<int> pixels;

    int at(int row, int col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }
};

/// Parses ASCII PGM ("P2"), with '#' comments. Errors carry the offending line.
Raster read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const Raster& raster);

}  // namespace gmedia
