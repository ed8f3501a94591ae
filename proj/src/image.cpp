#include "nbnlkit/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace nbnlkit {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInput("cannot open image file: " + path);
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

float luma(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

// ---------------------------------------------------------------------------
// PNM (PGM/PPM)
// ---------------------------------------------------------------------------

struct PnmParser {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < size) {
      const char c = static_cast<char>(data[pos]);
      if (c == '#') {
        while (pos < size && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    if (pos >= size || !std::isdigit(data[pos])) {
      throw FormatError("PNM: expected integer", pos);
    }
    long v = 0;
    while (pos < size && std::isdigit(data[pos])) {
      v = v * 10 + (data[pos] - '0');
      if (v > 1 << 30) throw FormatError("PNM: integer overflow", pos);
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

GrayImage decode_pnm(const std::uint8_t* data, std::size_t size) {
  if (size < 2 || data[0] != 'P') {
    throw FormatError("PNM: bad magic", 0);
  }
  const char kind = static_cast<char>(data[1]);
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw FormatError("PNM: unsupported type P" + std::string(1, kind), 1);
  }
  const bool color = kind == '3' || kind == '6';
  const bool binary = kind == '5' || kind == '6';

  PnmParser p{data, size, 2};
  const int width = p.next_int();
  const int height = p.next_int();
  const int maxval = p.next_int();
  if (width <= 0 || height <= 0) {
    throw FormatError("PNM: zero-dimension image", p.pos);
  }
  if (maxval <= 0 || maxval > 255) {
    throw FormatError("PNM: only 8-bit maxval supported", p.pos);
  }
  const float scale = 1.0f / static_cast<float>(maxval);
  const std::size_t samples =
      static_cast<std::size_t>(width) * height * (color ? 3 : 1);

  std::vector<float> raw(samples);
  if (binary) {
    ++p.pos;  // single whitespace byte after maxval
    if (size - p.pos < samples) {
      throw FormatError("PNM: truncated pixel data", size);
    }
    for (std::size_t i = 0; i < samples; ++i) {
      raw[i] = static_cast<float>(data[p.pos + i]) * scale;
    }
  } else {
    for (std::size_t i = 0; i < samples; ++i) {
      raw[i] = static_cast<float>(p.next_int()) * scale;
    }
  }

  GrayImage img = GrayImage::zeros(width, height);
  if (color) {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    }
  } else {
    img.pixels = std::move(raw);
  }
  return img;
}

// ---------------------------------------------------------------------------
// PNG (minimal: 8-bit depth, gray/RGB with optional alpha, non-interlaced)
// ---------------------------------------------------------------------------

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& in,
                                       std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit(&zs) != Z_OK) {
    throw Error("PNG: zlib init failed");
  }
  zs.next_in = const_cast<std::uint8_t*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) {
    throw FormatError("PNG: corrupt compressed data", 0);
  }
  return out;
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

GrayImage decode_png(const std::uint8_t* data, std::size_t size) {
  static const std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                       '\n'};
  if (size < 8 || std::memcmp(data, kSig, 8) != 0) {
    throw FormatError("PNG: bad signature", 0);
  }

  std::uint32_t width = 0, height = 0;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool done = false;
  while (pos + 8 <= size && !done) {
    const std::uint32_t length = read_be32(data + pos);
    if (pos + 12 + length > size) {
      throw FormatError("PNG: truncated chunk", pos);
    }
    const char* type = reinterpret_cast<const char*>(data + pos + 4);
    const std::uint8_t* body = data + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (length != 13) throw FormatError("PNG: bad IHDR", pos);
      width = read_be32(body);
      height = read_be32(body + 4);
      const int bit_depth = body[8];
      color_type = body[9];
      const int interlace = body[12];
      if (bit_depth != 8) {
        throw FormatError("PNG: only 8-bit depth supported", pos);
      }
      if (color_type != 0 && color_type != 2 && color_type != 4 &&
          color_type != 6) {
        throw FormatError("PNG: unsupported color type " +
                              std::to_string(color_type),
                          pos);
      }
      if (interlace != 0) {
        throw FormatError("PNG: interlaced images not supported", pos);
      }
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), body, body + length);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      done = true;
    }
    pos += 12 + length;
  }
  if (width == 0 || height == 0 || color_type < 0 || idat.empty()) {
    throw FormatError("PNG: missing IHDR or IDAT", pos);
  }

  const int channels =
      color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 4 ? 2 : 4;
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  const std::vector<std::uint8_t> raw =
      zlib_inflate(idat, (stride + 1) * height);

  // Undo per-scanline filters in place.
  std::vector<std::uint8_t> cur(stride, 0), prev(stride, 0);
  GrayImage img = GrayImage::zeros(static_cast<int>(width),
                                   static_cast<int>(height));
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[(stride + 1) * y];
    const std::uint8_t* line = raw.data() + (stride + 1) * y + 1;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(channels)
                        ? cur[i - channels]
                        : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(channels)
                        ? prev[i - channels]
                        : 0;
      int v = line[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default:
          throw FormatError("PNG: bad filter type", (stride + 1) * y);
      }
      cur[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::uint8_t* px = cur.data() + static_cast<std::size_t>(x) * channels;
      float g;
      if (channels <= 2) {
        g = px[0] / 255.0f;
      } else {
        g = luma(px[0] / 255.0f, px[1] / 255.0f, px[2] / 255.0f);
      }
      img.at(static_cast<int>(x), static_cast<int>(y)) = g;
    }
    std::swap(cur, prev);
  }
  return img;
}

GrayImage load_image(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') {
    return decode_png(bytes.data(), bytes.size());
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    return decode_pnm(bytes.data(), bytes.size());
  }
  throw FormatError("unrecognized image format in " + path, 0);
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidInput("cannot open for writing: " + path);
  }
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (float v : image.pixels) {
    const int byte = static_cast<int>(std::lround(
        std::clamp(v, 0.0f, 1.0f) * 255.0f));
    out.put(static_cast<char>(byte));
  }
  if (!out) {
    throw Error("failed writing " + path);
  }
}

GrayImage resize_bilinear(const GrayImage& image, int out_width,
                          int out_height) {
  if (image.width <= 0 || image.height <= 0) {
    throw InvalidInput("resize_bilinear: zero-dimension image");
  }
  if (out_width == image.width && out_height == image.height) {
    return image;
  }
  GrayImage out = GrayImage::zeros(out_width, out_height);
  const double sx = static_cast<double>(image.width) / out_width;
  const double sy = static_cast<double>(image.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * image.at(x0, y0) + wx * image.at(x1, y0);
      const double bot = (1.0 - wx) * image.at(x0, y1) + wx * image.at(x1, y1);
      out.at(x, y) = static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

GrayImage resize_longest_side(const GrayImage& image, int target) {
  if (image.width <= 0 || image.height <= 0) {
    throw InvalidInput("resize_longest_side: zero-dimension image");
  }
  const int longest = std::max(image.width, image.height);
  if (longest == target) return image;
  const double scale = static_cast<double>(target) / longest;
  const int w = std::max(1, static_cast<int>(std::lround(image.width * scale)));
  const int h =
      std::max(1, static_cast<int>(std::lround(image.height * scale)));
  return resize_bilinear(image, w, h);
}

GrayImage crop(const GrayImage& image, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > image.width ||
      y0 + h > image.height) {
    throw InvalidInput("crop: rectangle outside image");
  }
  GrayImage out = GrayImage::zeros(w, h);
  for (int y = 0; y < h; ++y) {
    std::memcpy(&out.at(0, y), &image.at(x0, y0 + y),
                static_cast<std::size_t>(w) * sizeof(float));
  }
  return out;
}

}  // namespace nbnlkit
