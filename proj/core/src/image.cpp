// SPDX-License-Identifier: Apache-2.0
#include "pyric/image.hpp"

#include <cstring>
#include <fstream>

#include <zlib.h>

#include "pyric/errors.hpp"

namespace pyric {

namespace {

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
  push_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_begin = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = crc32(0L, out.data() + crc_begin,
                         static_cast<uInt>(out.size() - crc_begin));
  push_u32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

void write_png(const ImageRGB& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0)
    throw DomainError("png: empty image");

  // Raw scanlines with filter byte 0.
  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = image.pixels.data() + y * stride;
    raw.insert(raw.end(), row, row + stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("png: zlib compression failed");
  compressed.resize(bound);

  std::vector<std::uint8_t> out;
  static const std::uint8_t magic[8] = {0x89, 'P',  'N',  'G',
                                        0x0d, 0x0a, 0x1a, 0x0a};
  out.insert(out.end(), magic, magic + 8);

  std::vector<std::uint8_t> ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(image.width));
  push_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", compressed);
  push_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("png: cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("png: write failed for " + path.string());
}

} // namespace pyric
