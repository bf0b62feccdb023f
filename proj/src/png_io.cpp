#include "ls3d/dataset_io.hpp"
#include "ls3d/errors.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace ls3d {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw InputError("cannot open '" + path + "'");
    return f;
}

class PngReader {
public:
    explicit PngReader(const std::string& path) : path_(path), file_(open_file(path, "rb")) {
        png_byte sig[8];
        if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
            throw InputError("'" + path + "' is not a PNG file");
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info_ = png_ ? png_create_info_struct(png_) : nullptr;
        if (!png_ || !info_) throw InputError("libpng initialisation failed");
        png_init_io(png_, file_.get());
        png_set_sig_bytes(png_, 8);
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    png_structp png() { return png_; }
    png_infop info() { return info_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngWriter {
public:
    explicit PngWriter(const std::string& path) : file_(open_file(path, "wb")) {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info_ = png_ ? png_create_info_struct(png_) : nullptr;
        if (!png_ || !info_) throw InputError("libpng initialisation failed");
        png_init_io(png_, file_.get());
    }
    ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;

    png_structp png() { return png_; }
    png_infop info() { return info_; }

private:
    FilePtr file_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

}  // namespace

GrayImage read_png_gray(const std::string& path) {
    PngReader r(path);
    png_structp png = r.png();
    png_infop info = r.info();
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buffer;
    int width = 0, height = 0, channels = 0;
    if (setjmp(png_jmpbuf(png))) throw InputError("failed to decode PNG '" + path + "'");

    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * std::size_t(height));
    rows.resize(std::size_t(height));
    for (int y = 0; y < height; ++y) rows[std::size_t(y)] = buffer.data() + std::size_t(y) * stride;
    png_read_image(png, rows.data());

    if (channels == 1) {
        GrayImage out(width, height);
        for (int y = 0; y < height; ++y)
            std::copy_n(rows[std::size_t(y)], width, out.data.begin() + std::ptrdiff_t(y) * width);
        return out;
    }
    if (channels != 3) throw InputError("unsupported PNG channel layout in '" + path + "'");
    std::vector<std::uint8_t> rgb(std::size_t(width) * height * 3);
    for (int y = 0; y < height; ++y)
        std::copy_n(rows[std::size_t(y)], std::size_t(width) * 3, rgb.begin() + std::ptrdiff_t(y) * width * 3);
    return rgb_to_gray(width, height, rgb);
}

Depth16 read_png_depth16(const std::string& path) {
    PngReader r(path);
    png_structp png = r.png();
    png_infop info = r.info();
    Depth16 out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) throw InputError("failed to decode PNG '" + path + "'");

    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 16)
        throw InputError("depth PNG '" + path + "' is not 16-bit grayscale");
    png_set_swap(png);  // PNG stores 16-bit samples big-endian
    png_read_update_info(png, info);

    out.width = int(png_get_image_width(png, info));
    out.height = int(png_get_image_height(png, info));
    out.raw.resize(std::size_t(out.width) * out.height);
    rows.resize(std::size_t(out.height));
    for (int y = 0; y < out.height; ++y)
        rows[std::size_t(y)] = reinterpret_cast<png_bytep>(out.raw.data() + std::size_t(y) * out.width);
    png_read_image(png, rows.data());
    return out;
}

void write_png_gray(const std::string& path, const GrayImage& image) {
    PngWriter w(path);
    png_structp png = w.png();
    png_infop info = w.info();
    std::vector<png_bytep> rows(std::size_t(image.height));
    if (setjmp(png_jmpbuf(png))) throw InputError("failed to encode PNG '" + path + "'");
    png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    for (int y = 0; y < image.height; ++y)
        rows[std::size_t(y)] = const_cast<png_bytep>(image.data.data() + std::size_t(y) * image.width);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
}

void write_png_depth16(const std::string& path, const Depth16& depth) {
    PngWriter w(path);
    png_structp png = w.png();
    png_infop info = w.info();
    std::vector<std::uint16_t> swapped(depth.raw);
    std::vector<png_bytep> rows(std::size_t(depth.height));
    if (setjmp(png_jmpbuf(png))) throw InputError("failed to encode PNG '" + path + "'");
    png_set_IHDR(png, info, png_uint_32(depth.width), png_uint_32(depth.height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);
    for (int y = 0; y < depth.height; ++y)
        rows[std::size_t(y)] = reinterpret_cast<png_bytep>(swapped.data() + std::size_t(y) * depth.width);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
}

}  // namespace ls3d
