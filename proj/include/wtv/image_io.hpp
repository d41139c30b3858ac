#pragma once

#include <string>
#include <vector>

#include "wtv/image.hpp"

namespace wtv {

// Reads 8/16-bit grayscale PGM (P2/P5) or PNG; intensities mapped to [0,1]
// by the file's max sample value. Color PNG is converted to luminance
// (0.2126 R + 0.7152 G + 0.0722 B). Throws on unsupported or corrupt input.
Image load_image(const std::string& path);

// Clamps to [0,1], quantizes to 8 bits; container chosen by extension
// (.pgm -> binary P5, .png -> grayscale PNG).
void save_image(const Image& img, const std::string& path);

// Raw little-endian float64 raster with a JSON sidecar at <path>.json
// holding {n1, n2, kind, notes}; lossless round trip.
struct FieldHeader {
    int n1 = 0;
    int n2 = 0;
    std::string kind;   // e.g. "beta-map", "lambda-map", "noisy-image"
    std::string notes;  // free-form scale/provenance notes
};

void save_field(const std::string& path, const std::vector<double>& values,
                const FieldHeader& header);

struct Field {
    FieldHeader header;
    std::vector<double> values;
};

Field load_field(const std::string& path);

// Convenience wrappers treating a field as an image raster.
void save_field(const std::string& path, const Image& img, const std::string& kind,
                const std::string& notes = "");
Image load_field_image(const std::string& path);

}  // namespace wtv
