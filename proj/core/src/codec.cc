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

#include "halloc/codec.h"

#include <zlib.h>

#include <array>
#include <cstring>

#include "halloc/error.h"

namespace halloc {
namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                       '\r', '\n', 0x1a, '\n'};

void PutU32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t GetU32(std::string_view s, std::size_t at) {
  auto b = [&](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[at + i]));
  };
  return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

void PutChunk(std::string& out, std::string_view type, std::string_view data) {
  PutU32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type);
  body.append(data);
  out.append(body);
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                    static_cast<uInt>(body.size()));
  PutU32(out, static_cast<std::uint32_t>(crc));
}

[[noreturn]] void Corrupt(const std::string& why) {
  throw Error(ErrorCode::kProtocol, "invalid PNG: " + why);
}

}  // namespace

std::string Base64Encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                      (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                      static_cast<std::uint8_t>(bytes[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string Base64Decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
    lookup[static_cast<std::uint8_t>(kAlphabet[i])] = static_cast<int>(i);
  }
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::kProtocol, "base64 length not a multiple of 4");
  }
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=' && i + 4 == text.size() && j >= 2) {
        v[j] = 0;
        ++pad;
      } else {
        v[j] = lookup[static_cast<std::uint8_t>(c)];
        if (v[j] < 0 || pad > 0) {
          throw Error(ErrorCode::kProtocol, "invalid base64 character");
        }
      }
    }
    std::uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<char>((w >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<char>((w >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<char>(w & 0xff));
  }
  return out;
}

std::uint64_t Fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string EncodePng(const PngImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) *
                              image.height * 3) {
    throw Error(ErrorCode::kInvalidArgument, "PNG raster size mismatch");
  }
  std::string out(reinterpret_cast<const char*>(kPngSignature.data()),
                  kPngSignature.size());
  std::string ihdr;
  PutU32(ihdr, static_cast<std::uint32_t>(image.width));
  PutU32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // RGB8, no interlace
  PutChunk(out, "IHDR", ihdr);
  for (const auto& [key, value] : image.text) {
    std::string data = key;
    data.push_back('\0');
    data += value;
    PutChunk(out, "tEXt", data);
  }
  const std::size_t row = static_cast<std::size_t>(image.width) * 3;
  std::string raw;
  raw.reserve((row + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(image.rgb.data()) + y * row, row);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string z(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorCode::kInvalidArgument, "zlib compression failed");
  }
  z.resize(bound);
  PutChunk(out, "IDAT", z);
  PutChunk(out, "IEND", "");
  return out;
}

PngImage DecodePng(std::string_view bytes, bool decode_pixels) {
  if (bytes.size() < 8 ||
      std::memcmp(bytes.data(), kPngSignature.data(), 8) != 0) {
    Corrupt("bad signature");
  }
  PngImage img;
  std::string idat;
  int bit_depth = 0;
  int color_type = -1;
  bool saw_end = false;
  std::size_t at = 8;
  while (at < bytes.size()) {
    if (at + 12 > bytes.size()) Corrupt("truncated chunk header");
    const std::uint32_t len = GetU32(bytes, at);
    if (at + 12 + len > bytes.size()) Corrupt("truncated chunk body");
    std::string_view type = bytes.substr(at + 4, 4);
    std::string_view data = bytes.substr(at + 8, len);
    const std::uint32_t crc = GetU32(bytes, at + 8 + len);
    uLong want = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data() + at + 4),
                       static_cast<uInt>(len + 4));
    if (crc != static_cast<std::uint32_t>(want)) Corrupt("CRC mismatch");
    if (type == "IHDR") {
      if (len != 13) Corrupt("bad IHDR length");
      img.width = static_cast<int>(GetU32(data, 0));
      img.height = static_cast<int>(GetU32(data, 4));
      bit_depth = static_cast<std::uint8_t>(data[8]);
      color_type = static_cast<std::uint8_t>(data[9]);
    } else if (type == "tEXt") {
      auto nul = data.find('\0');
      if (nul == std::string_view::npos) Corrupt("tEXt without separator");
      img.text[std::string(data.substr(0, nul))] =
          std::string(data.substr(nul + 1));
    } else if (type == "IDAT") {
      idat.append(data);
    } else if (type == "IEND") {
      saw_end = true;
      break;
    }
    at += 12 + len;
  }
  if (img.width <= 0 || img.height <= 0) Corrupt("missing IHDR");
  if (!saw_end) Corrupt("missing IEND");
  if (idat.empty()) Corrupt("missing IDAT");
  if (decode_pixels && bit_depth == 8 && color_type == 2) {
    const std::size_t row = static_cast<std::size_t>(img.width) * 3;
    uLongf raw_len = static_cast<uLongf>((row + 1) * img.height);
    std::string raw(raw_len, '\0');
    if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_len,
                   reinterpret_cast<const Bytef*>(idat.data()),
                   static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size()) {
      Corrupt("IDAT does not inflate to the raster size");
    }
    img.rgb.resize(row * img.height);
    for (int y = 0; y < img.height; ++y) {
      if (raw[y * (row + 1)] != '\0') {
        img.rgb.clear();
        return img;
      }
      std::memcpy(img.rgb.data() + y * row, raw.data() + y * (row + 1) + 1,
                  row);
    }
  }
  return img;
}

}  // namespace halloc
