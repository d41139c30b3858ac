#include "wtv/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace wtv {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suffix;
}

// --- PGM ---------------------------------------------------------------

int pgm_next_token(std::FILE* f, char* buf, int cap) {
    int c;
    do {
        c = std::fgetc(f);
        if (c == '#') {
            while (c != EOF && c != '\n') c = std::fgetc(f);
        }
    } while (c != EOF && std::isspace(c));
    if (c == EOF) return 0;
    int len = 0;
    while (c != EOF && !std::isspace(c) && c != '#') {
        if (len + 1 < cap) buf[len++] = static_cast<char>(c);
        c = std::fgetc(f);
    }
    if (c == '#') ungetc(c, f);
    buf[len] = '\0';
    return len;
}

long pgm_next_int(std::FILE* f) {
    char buf[64];
    if (!pgm_next_token(f, buf, sizeof buf)) throw std::runtime_error("PGM: truncated header");
    char* end = nullptr;
    const long v = std::strtol(buf, &end, 10);
    if (end == buf || *end != '\0') throw std::runtime_error("PGM: bad integer in header");
    return v;
}

Image load_pgm(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open image: " + path);
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard(f, std::fclose);

    char magic[8];
    if (!pgm_next_token(f, magic, sizeof magic)) throw std::runtime_error("PGM: empty file");
    const bool ascii = std::strcmp(magic, "P2") == 0;
    const bool binary = std::strcmp(magic, "P5") == 0;
    if (!ascii && !binary)
        throw std::runtime_error("unsupported image format (expected P2/P5): " + path);

    const long w = pgm_next_int(f);
    const long h = pgm_next_int(f);
    const long maxval = pgm_next_int(f);
    if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20)
        throw std::runtime_error("PGM: bad dimensions");
    if (maxval <= 0 || maxval > 65535) throw std::runtime_error("PGM: bad maxval");

    Image img(static_cast<int>(h), static_cast<int>(w));
    const double scale = 1.0 / static_cast<double>(maxval);
    if (ascii) {
        for (std::size_t i = 0; i < img.size(); ++i) {
            const long v = pgm_next_int(f);
            if (v < 0 || v > maxval) throw std::runtime_error("PGM: sample out of range");
            img.data[i] = v * scale;
        }
    } else {
        // One whitespace byte separates the header from the raster.
        const bool two_byte = maxval > 255;
        std::vector<unsigned char> raw(img.size() * (two_byte ? 2 : 1));
        if (std::fread(raw.data(), 1, raw.size(), f) != raw.size())
            throw std::runtime_error("PGM: truncated raster");
        for (std::size_t i = 0; i < img.size(); ++i) {
            const unsigned v = two_byte ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1]
                                        : raw[i];
            if (v > static_cast<unsigned>(maxval))
                throw std::runtime_error("PGM: sample out of range");
            img.data[i] = v * scale;
        }
    }
    return img;
}

void save_pgm(const Image& img, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write image: " + path);
    std::fprintf(f, "P5\n%d %d\n255\n", img.n2, img.n1);
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    const bool ok = std::fwrite(raw.data(), 1, raw.size(), f) == raw.size();
    std::fclose(f);
    if (!ok) throw std::runtime_error("short write: " + path);
}

// --- PNG ---------------------------------------------------------------

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* f = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (f) std::fclose(f);
    }
};

Image load_png(const std::string& path) {
    PngReadCloser ctx;
    ctx.f = std::fopen(path.c_str(), "rb");
    if (!ctx.f) throw std::runtime_error("cannot open image: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.f) != 8 || png_sig_cmp(sig, 0, 8))
        throw std::runtime_error("not a PNG file: " + path);

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw std::runtime_error("libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("corrupt PNG: " + path);

    png_init_io(ctx.png, ctx.f);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
        throw std::runtime_error("PNG: bad dimensions");
    const int color = png_get_color_type(ctx.png, ctx.info);
    int depth = png_get_bit_depth(ctx.png, ctx.info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    png_set_strip_alpha(ctx.png);
    if (depth == 16) png_set_swap(ctx.png);  // to little-endian for direct reads
    png_read_update_info(ctx.png, ctx.info);

    depth = png_get_bit_depth(ctx.png, ctx.info);
    const int channels = png_get_channels(ctx.png, ctx.info);
    if (channels != 1 && channels != 3) throw std::runtime_error("PNG: unsupported layout");

    const std::size_t row_bytes = png_get_rowbytes(ctx.png, ctx.info);
    std::vector<unsigned char> raster(row_bytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = raster.data() + r * row_bytes;
    png_read_image(ctx.png, rows.data());

    Image img(static_cast<int>(h), static_cast<int>(w));
    const double maxval = depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 r = 0; r < h; ++r) {
        const unsigned char* row = rows[r];
        for (png_uint_32 c = 0; c < w; ++c) {
            double px;
            if (channels == 1) {
                px = depth == 16
                         ? static_cast<double>(row[2 * c] | (row[2 * c + 1] << 8))
                         : static_cast<double>(row[c]);
            } else {
                double rgb[3];
                for (int ch = 0; ch < 3; ++ch) {
                    const std::size_t base = (3 * c + ch) * (depth == 16 ? 2 : 1);
                    rgb[ch] = depth == 16
                                  ? static_cast<double>(row[base] | (row[base + 1] << 8))
                                  : static_cast<double>(row[base]);
                }
                px = 0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2];
            }
            img.at(static_cast<int>(r), static_cast<int>(c)) = px / maxval;
        }
    }
    return img;
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* f = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (f) std::fclose(f);
    }
};

void save_png(const Image& img, const std::string& path) {
    PngWriteCloser ctx;
    ctx.f = std::fopen(path.c_str(), "wb");
    if (!ctx.f) throw std::runtime_error("cannot write image: " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw std::runtime_error("libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("PNG write failed: " + path);

    png_init_io(ctx.png, ctx.f);
    png_set_IHDR(ctx.png, ctx.info, img.n2, img.n1, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    std::vector<unsigned char> row(img.n2);
    for (int r = 0; r < img.n1; ++r) {
        for (int c = 0; c < img.n2; ++c) {
            const double v = std::clamp(img.at(r, c), 0.0, 1.0);
            row[c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
}

}  // namespace

Image load_image(const std::string& path) {
    if (ends_with(path, ".pgm")) return load_pgm(path);
    if (ends_with(path, ".png")) return load_png(path);
    // Sniff the magic for extensionless paths.
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open image: " + path);
    unsigned char head[2] = {0, 0};
    const std::size_t got = std::fread(head, 1, 2, f);
    std::fclose(f);
    if (got == 2 && head[0] == 'P' && (head[1] == '2' || head[1] == '5')) return load_pgm(path);
    if (got == 2 && head[0] == 0x89 && head[1] == 'P') return load_png(path);
    throw std::runtime_error("unsupported image format: " + path);
}

void save_image(const Image& img, const std::string& path) {
    if (ends_with(path, ".png"))
        save_png(img, path);
    else
        save_pgm(img, path);
}

// --- raw f64 field + JSON sidecar ---------------------------------------

namespace {

std::string sidecar_path(const std::string& path) { return path + ".json"; }

void write_le64(std::FILE* f, const double* values, std::size_t count) {
    // Serialize explicitly as little-endian IEEE-754.
    std::vector<unsigned char> buf(count * 8);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &values[i], 8);
        for (int b = 0; b < 8; ++b) buf[8 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    if (std::fwrite(buf.data(), 1, buf.size(), f) != buf.size())
        throw std::runtime_error("short write on field raster");
}

}  // namespace

void save_field(const std::string& path, const std::vector<double>& values,
                const FieldHeader& header) {
    if (values.size() != static_cast<std::size_t>(header.n1) * header.n2)
        throw std::invalid_argument("save_field: header/raster length mismatch");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write field: " + path);
    try {
        write_le64(f, values.data(), values.size());
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);

    nlohmann::json j;
    j["n1"] = header.n1;
    j["n2"] = header.n2;
    j["kind"] = header.kind;
    j["notes"] = header.notes;
    j["dtype"] = "float64-le";
    std::ofstream out(sidecar_path(path), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write field sidecar: " + sidecar_path(path));
    out << j.dump(2) << "\n";
}

Field load_field(const std::string& path) {
    std::ifstream side(sidecar_path(path), std::ios::binary);
    if (!side) throw std::runtime_error("missing field sidecar: " + sidecar_path(path));
    nlohmann::json j;
    try {
        side >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad field sidecar: " + std::string(e.what()));
    }

    Field out;
    out.header.n1 = j.at("n1").get<int>();
    out.header.n2 = j.at("n2").get<int>();
    out.header.kind = j.value("kind", "");
    out.header.notes = j.value("notes", "");
    if (out.header.n1 <= 0 || out.header.n2 <= 0)
        throw std::runtime_error("bad field dimensions in sidecar");

    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open field: " + path);
    std::fseek(f, 0, SEEK_END);
    const long bytes = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    const std::size_t n = static_cast<std::size_t>(out.header.n1) * out.header.n2;
    if (bytes < 0 || static_cast<std::size_t>(bytes) != n * 8) {
        std::fclose(f);
        throw std::runtime_error("field raster length mismatch: " + path);
    }
    std::vector<unsigned char> buf(n * 8);
    const bool ok = std::fread(buf.data(), 1, buf.size(), f) == buf.size();
    std::fclose(f);
    if (!ok) throw std::runtime_error("truncated field raster: " + path);

    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[8 * i + b]) << (8 * b);
        std::memcpy(&out.values[i], &bits, 8);
    }
    return out;
}

void save_field(const std::string& path, const Image& img, const std::string& kind,
                const std::string& notes) {
    FieldHeader h;
    h.n1 = img.n1;
    h.n2 = img.n2;
    h.kind = kind;
    h.notes = notes;
    save_field(path, img.data, h);
}

Image load_field_image(const std::string& path) {
    Field f = load_field(path);
    Image img(f.header.n1, f.header.n2);
    img.data = std::move(f.values);
    return img;
}

}  // namespace wtv
