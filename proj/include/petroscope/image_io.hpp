#pragma once

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "petroscope/error.hpp"
#include "petroscope/image.hpp"

namespace petroscope {

namespace io_detail {

inline bool looks_like_png(std::span<const std::uint8_t> bytes) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

inline bool looks_like_jpeg(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

inline RgbImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size())) {
        throw CorruptStream(std::string("png: ") + pi.message);
    }
    // Request RGBA and drop the alpha bytes afterwards: alpha is discarded,
    // not composited.
    pi.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&pi);
        throw CorruptStream(std::string("png: ") + pi.message);
    }
    RgbImage out(static_cast<int>(pi.width), static_cast<int>(pi.height));
    const std::uint8_t* src = buf.data();
    for (std::size_t i = 0; i < out.data.size(); ++i, src += 4) {
        out.data[i] = Rgb{src[0], src[1], src[2]};
    }
    return out;
}

struct JpegErrorState {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX]{};
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, state->message);
    std::longjmp(state->jump, 1);
}

// Corrupt-data warnings (msg_level == -1) normally let libjpeg fabricate
// missing data; a classifier must not run on fabricated pixels, so they are
// promoted to hard failures.
inline void jpeg_emit_message(j_common_ptr cinfo, int msg_level) {
    if (msg_level < 0) {
        jpeg_error_exit(cinfo);
    }
}

inline RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorState err;
    RgbImage out;
    std::vector<std::uint8_t> row;

    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    err.mgr.emit_message = jpeg_emit_message;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw CorruptStream(std::string("jpeg: ") + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    out = RgbImage(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    row.resize(static_cast<std::size_t>(cinfo.output_width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        std::uint8_t* rowptr = row.data();
        jpeg_read_scanlines(&cinfo, &rowptr, 1);
        std::memcpy(&out.at(0, y), row.data(), row.size());
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

}  // namespace io_detail

// Sniffs the container from magic bytes; only PNG and JPEG are accepted.
inline RgbImage decode(std::span<const std::uint8_t> bytes) {
    if (io_detail::looks_like_png(bytes)) {
        return io_detail::decode_png(bytes);
    }
    if (io_detail::looks_like_jpeg(bytes)) {
        return io_detail::decode_jpeg(bytes);
    }
    throw UnsupportedFormat("decode: stream is neither PNG nor JPEG");
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed on " + path.string());
    }
    return bytes;
}

inline RgbImage decode_file(const std::filesystem::path& path) {
    return decode(read_file_bytes(path));
}

inline std::vector<std::uint8_t> encode_png(const RgbImage& img) {
    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width);
    pi.height = static_cast<png_uint_32>(img.height);
    pi.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&pi, nullptr, &size, 0, img.data.data(), 0, nullptr)) {
        throw IoError(std::string("png encode: ") + pi.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&pi, out.data(), &size, 0, img.data.data(), 0, nullptr)) {
        throw IoError(std::string("png encode: ") + pi.message);
    }
    out.resize(size);
    return out;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot create " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed on " + path.string());
    }
}

inline void write_png(const std::filesystem::path& path, const RgbImage& img) {
    write_file_bytes(path, encode_png(img));
}

// 1-bit grayscale PNG: nonzero mask entries become white. Uses the full
// libpng API because the simplified one cannot emit sub-byte depths.
inline void write_png_gray1(const std::filesystem::path& path, int width, int height,
                            std::span<const std::uint8_t> mask) {
    if (width < 1 || height < 1 ||
        mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch("write_png_gray1: mask size does not match dimensions");
    }
    const std::size_t stride = (static_cast<std::size_t>(width) + 7) / 8;
    std::vector<std::uint8_t> packed(stride * height, 0);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        std::uint8_t* dst = packed.data() + stride * y;
        for (int x = 0; x < width; ++x) {
            if (mask[static_cast<std::size_t>(y) * width + x]) {
                dst[x >> 3] |= static_cast<std::uint8_t>(0x80u >> (x & 7));
            }
        }
        rows[y] = dst;
    }

    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) {
        throw IoError("cannot create " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png encode: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png encode failed for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 1,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) {
        throw IoError("write failed on " + path.string());
    }
}

}  // namespace petroscope
