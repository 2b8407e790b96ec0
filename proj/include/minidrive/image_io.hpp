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

#ifndef MINIDRIVE_IMAGE_IO_HPP_
#define MINIDRIVE_IMAGE_IO_HPP_

#include "minidrive/bev_raster.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace minidrive
{

/// Magic bytes opening a raster tensor file.
inline constexpr char kTensorMagic[4] = {'B', 'E', 'V', 'T'};

/// 8-bit RGB PNG; env/dynamic/ego map to R/G/B.
void write_png(const BevRaster & raster, const std::filesystem::path & path);

/// Raster tensor bytes: 16-byte header {magic "BEVT", uint32 width, uint32
/// height, uint32 channels} (little endian) followed by float32 values in
/// row-major order with the channel index fastest (row, column, channel).
std::string encode_tensor(const BevRaster & raster);
BevRaster decode_tensor(const std::string & bytes, const RasterSpec & spec = RasterSpec{});

void write_tensor(const BevRaster & raster, const std::filesystem::path & path);
BevRaster read_tensor(const std::filesystem::path & path, const RasterSpec & spec = RasterSpec{});

std::string base64_encode(const std::string & bytes);
std::string base64_decode(const std::string & text);

}  // namespace minidrive

#endif  // MINIDRIVE_IMAGE_IO_HPP_
