#include "discgrade/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace discgrade {

namespace {

// Skips PGM whitespace/comments and reads one ASCII token.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  return tok;
}

struct PgmHeader {
  int height = 0, width = 0, maxval = 0;
};

PgmHeader read_pgm_header(std::istream& in, const fs::path& path) {
  if (next_pgm_token(in) != "P5")
    throw IoError("not a binary PGM (P5): " + path.string());
  PgmHeader h;
  try {
    h.width = std::stoi(next_pgm_token(in));
    h.height = std::stoi(next_pgm_token(in));
    h.maxval = std::stoi(next_pgm_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header: " + path.string());
  }
  if (h.width <= 0 || h.height <= 0)
    throw IoError("non-positive PGM dimensions: " + path.string());
  if (h.maxval != 65535)
    throw IoError("expected 16-bit PGM (maxval 65535): " + path.string());
  in.get();  // single whitespace after maxval
  return h;
}

struct PngWriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png(const fs::path& path, int height, int width, int color_type,
               const std::uint8_t* rows_base, std::size_t row_stride) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  PngWriteCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "wb");
  if (!ctx.fp) throw IoError("cannot open for writing: " + path.string());
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("png write failed: " + path.string());
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, width, height, 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int r = 0; r < height; ++r) {
    png_write_row(ctx.png, const_cast<png_bytep>(rows_base + r * row_stride));
  }
  png_write_end(ctx.png, nullptr);
}

}  // namespace

void write_pgm16(const fs::path& path, const SliceImage& img) {
  if (img.empty()) throw DataError("refusing to write empty PGM: " + path.string());
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 2);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::uint16_t v = img.at(r, c);
      row[2 * c] = static_cast<std::uint8_t>(v >> 8);
      row[2 * c + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SliceImage read_pgm16(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read: " + path.string());
  PgmHeader h = read_pgm_header(in, path);
  SliceImage img(h.height, h.width);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(h.width) * 2);
  for (int r = 0; r < h.height; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (!in) throw IoError("truncated PGM payload: " + path.string());
    for (int c = 0; c < h.width; ++c) {
      img.at(r, c) = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
    }
  }
  return img;
}

std::pair<int, int> read_pgm16_dims(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read: " + path.string());
  PgmHeader h = read_pgm_header(in, path);
  return {h.height, h.width};
}

void write_png_gray8(const fs::path& path, const ImageU8& img) {
  if (img.empty()) throw DataError("refusing to write empty PNG: " + path.string());
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_GRAY, img.data.data(),
            static_cast<std::size_t>(img.width));
}

ImageU8 read_png_gray8(const fs::path& path) {
  PngReadCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "rb");
  if (!ctx.fp) throw IoError("cannot read: " + path.string());
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("png read failed: " + path.string());
  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);
  const int width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  const int height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  if (png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(ctx.png, ctx.info) != 8) {
    throw IoError("expected 8-bit grayscale PNG: " + path.string());
  }
  ImageU8 img(height, width);
  for (int r = 0; r < height; ++r) {
    png_read_row(ctx.png, img.data.data() + static_cast<std::size_t>(r) * width,
                 nullptr);
  }
  return img;
}

void write_png_rgb8(const fs::path& path, const RgbImage& img) {
  if (img.data.empty()) throw DataError("refusing to write empty PNG: " + path.string());
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_RGB, img.data.data(),
            static_cast<std::size_t>(img.width) * 3);
}

}  // namespace discgrade
