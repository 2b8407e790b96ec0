// Copyright 2026 The minidrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "minidrive/image_io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <vector>

namespace minidrive
{

namespace
{

static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");

void put_u32(std::string & out, std::uint32_t v)
{
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(const std::string & in, size_t offset)
{
  std::uint32_t v = 0;
  std::memcpy(&v, in.data() + offset, 4);
  return v;
}

std::uint8_t quantize(float v)
{
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

}  // namespace

void write_png(const BevRaster & raster, const std::filesystem::path & path)
{
  const int w = raster.spec().width;
  const int h = raster.spec().height;
  std::vector<std::uint8_t> rgb(static_cast<size_t>(w) * static_cast<size_t>(h) * 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        rgb[(static_cast<size_t>(r) * w + c) * 3 + ch] = quantize(raster.channel(ch)(r, c));
      }
    }
  }

  std::unique_ptr<FILE, int (*)(FILE *)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) {
    throw InvalidInputError("cannot open " + path.string() + " for writing");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInputError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInputError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(
    png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
    PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < h; ++r) {
    png_write_row(png, rgb.data() + static_cast<size_t>(r) * w * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::string encode_tensor(const BevRaster & raster)
{
  const int w = raster.spec().width;
  const int h = raster.spec().height;
  std::string out;
  out.reserve(16 + static_cast<size_t>(w) * h * kRasterChannels * sizeof(float));
  out.append(kTensorMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(kRasterChannels));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < kRasterChannels; ++ch) {
        const float v = raster.channel(ch)(r, c);
        char buf[sizeof(float)];
        std::memcpy(buf, &v, sizeof(float));
        out.append(buf, sizeof(float));
      }
    }
  }
  return out;
}

BevRaster decode_tensor(const std::string & bytes, const RasterSpec & spec)
{
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw InvalidInputError("not a raster tensor (bad magic)");
  }
  const std::uint32_t w = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  const std::uint32_t ch = get_u32(bytes, 12);
  if (
    static_cast<int>(w) != spec.width || static_cast<int>(h) != spec.height ||
    static_cast<int>(ch) != kRasterChannels) {
    throw InvalidInputError("raster tensor dimensions do not match the raster spec");
  }
  const size_t expected = 16 + static_cast<size_t>(w) * h * ch * sizeof(float);
  if (bytes.size() != expected) {
    throw InvalidInputError("raster tensor has wrong payload size");
  }
  BevRaster out(spec);
  size_t offset = 16;
  for (std::uint32_t r = 0; r < h; ++r) {
    for (std::uint32_t c = 0; c < w; ++c) {
      for (std::uint32_t k = 0; k < ch; ++k) {
        float v = 0.0F;
        std::memcpy(&v, bytes.data() + offset, sizeof(float));
        offset += sizeof(float);
        if (!(v >= 0.0F && v <= 1.0F)) {
          throw InvalidInputError("raster tensor value outside [0, 1]");
        }
        out.channel(static_cast<int>(k))(r, c) = v;
      }
    }
  }
  return out;
}

void write_tensor(const BevRaster & raster, const std::filesystem::path & path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw InvalidInputError("cannot open " + path.string() + " for writing");
  }
  const std::string bytes = encode_tensor(raster);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

BevRaster read_tensor(const std::filesystem::path & path, const RasterSpec & spec)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw InvalidInputError("cannot open " + path.string());
  }
  const std::string bytes{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return decode_tensor(bytes, spec);
}

namespace
{
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::string & bytes)
{
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                            (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                            static_cast<std::uint8_t>(bytes[i + 2]);
    out += kB64[(n >> 18) & 63];
    out += kB64[(n >> 12) & 63];
    out += kB64[(n >> 6) & 63];
    out += kB64[n & 63];
  }
  const size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = static_cast<std::uint8_t>(bytes[i]) << 16;
    if (rest == 2) {
      n |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
    }
    out += kB64[(n >> 18) & 63];
    out += kB64[(n >> 12) & 63];
    out += rest == 2 ? kB64[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string & text)
{
  std::array<int, 256> table{};
  table.fill(-1);
  for (int k = 0; k < 64; ++k) {
    table[static_cast<std::uint8_t>(kB64[k])] = k;
  }
  if (text.size() % 4 != 0) {
    throw InvalidInputError("base64 length must be a multiple of 4");
  }
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      if (ch == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      v[k] = table[static_cast<std::uint8_t>(ch)];
      if (v[k] < 0 || pad > 0) {
        throw InvalidInputError("invalid base64 character");
      }
    }
    const std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out += static_cast<char>((n >> 16) & 0xFF);
    if (pad < 2) {
      out += static_cast<char>((n >> 8) & 0xFF);
    }
    if (pad < 1) {
      out += static_cast<char>(n & 0xFF);
    }
  }
  return out;
}

}  // namespace minidrive
