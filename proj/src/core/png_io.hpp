// Copyright 2026 The ontoseg Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ontoseg::png_io {

struct Gray8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, height*width
};

struct Rgb8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, height*width*3
};

/// Strict reader: the file must be an 8-bit single-channel grayscale PNG,
/// anything else is an error (bit depth and channel count are part of the
/// label-map contract, not something to convert away).
Gray8 read_gray8(const std::string& path);

Rgb8 read_rgb8(const std::string& path);

void write_gray8(const std::string& path, const Gray8& image);
void write_rgb8(const std::string& path, const Rgb8& image);

}  // namespace ontoseg::png_io
