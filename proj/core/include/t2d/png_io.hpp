// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "t2d/image.hpp"

namespace t2d {

// Reads a PNG as 8-bit RGB or RGBA (depending on the file's alpha).
// Palette and 16-bit inputs are expanded/stripped to 8-bit.
Image read_png(const std::string& path);

// Writes a 3- or 4-channel image.
void write_png(const std::string& path, const Image& img);

}  // namespace t2d
