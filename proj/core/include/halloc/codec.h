/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef HALLOC_CODEC_H_
#define HALLOC_CODEC_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace halloc {

std::string Base64Encode(std::string_view bytes);
// Throws kProtocol on characters outside the standard alphabet.
std::string Base64Decode(std::string_view text);

std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

// Minimal 8-bit RGB PNG support: enough to carry the raster of a synthetic
// scene plus tEXt metadata, and to read the header of any PNG.
struct PngImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3, empty if not decoded
  std::map<std::string, std::string> text;
};

std::string EncodePng(const PngImage& image);

// Parses chunks and verifies CRCs. With `decode_pixels` the IDAT stream is
// inflated and unfiltered (only filter type 0 on RGB8 is supported; other
// layouts are accepted but leave `rgb` empty). Throws kProtocol on corrupt
// input.
PngImage DecodePng(std::string_view bytes, bool decode_pixels = false);

}  // namespace halloc

#endif  // HALLOC_CODEC_H_
