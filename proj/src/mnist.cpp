//
// Copyright 2026 The dpmean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cstdint>
#include <fstream>
#include <vector>

#include "dpmean/bench.hpp"
#include "dpmean/errors.hpp"

namespace dpmean {
namespace {

// IDX files are big-endian: magic, dimension sizes, then raw bytes.
constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError("truncated IDX file: " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<unsigned char> read_bytes(std::ifstream& in, std::size_t count,
                                      const std::string& path) {
  std::vector<unsigned char> out(count);
  if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count))) {
    throw DataError("truncated IDX file: " + path);
  }
  return out;
}

}  // namespace

Dataset load_mnist(const std::string& images_path, const std::string& labels_path,
                   int digit) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw DataError("cannot open IDX images file: " + images_path);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw DataError("cannot open IDX labels file: " + labels_path);

  if (read_u32_be(images, images_path) != kImagesMagic) {
    throw DataError("bad magic in IDX images file: " + images_path);
  }
  const std::uint32_t image_count = read_u32_be(images, images_path);
  const std::uint32_t rows = read_u32_be(images, images_path);
  const std::uint32_t cols = read_u32_be(images, images_path);

  if (read_u32_be(labels, labels_path) != kLabelsMagic) {
    throw DataError("bad magic in IDX labels file: " + labels_path);
  }
  const std::uint32_t label_count = read_u32_be(labels, labels_path);
  if (label_count != image_count) {
    throw DataError("IDX image/label count mismatch");
  }
  if (rows == 0 || cols == 0) throw DataError("IDX images have empty dimensions");

  const std::size_t d = static_cast<std::size_t>(rows) * cols;
  const std::vector<unsigned char> pixels =
      read_bytes(images, static_cast<std::size_t>(image_count) * d, images_path);
  const std::vector<unsigned char> digit_labels =
      read_bytes(labels, image_count, labels_path);

  std::vector<std::size_t> keep;
  keep.reserve(image_count);
  for (std::size_t i = 0; i < image_count; ++i) {
    if (digit < 0 || digit_labels[i] == static_cast<unsigned char>(digit)) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) throw DataError("no IDX images match the digit filter");

  IntMatrix data(keep.size(), d);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const unsigned char* src = pixels.data() + keep[r] * d;
    auto dst = data.row(r);
    // Linear rescale [0, 255] -> [0, 1020] inside the u = 2^10 universe.
    for (std::size_t j = 0; j < d; ++j) dst[j] = std::int64_t{4} * src[j];
  }
  return Dataset(std::move(data), 1024);
}

}  // namespace dpmean
