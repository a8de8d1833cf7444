#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "sven/data.hpp"
#include "sven/error.hpp"

namespace sven::data {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return std::uint32_t{b[off]} | (std::uint32_t{b[off + 1]} << 8) |
         (std::uint32_t{b[off + 2]} << 16) | (std::uint32_t{b[off + 3]} << 24);
}

void put_le32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto b = read_all(path);
  if (b.size() < 16) throw ParseError(path.string() + ": truncated IDX image header");
  if (be32(b, 0) != kIdxImageMagic)
    throw ParseError(path.string() + ": bad IDX image magic " + hex(be32(b, 0)) +
                     " (expected " + hex(kIdxImageMagic) + ")");
  IdxImages img{be32(b, 4), be32(b, 8), be32(b, 12), {}};
  const std::size_t need = img.count * img.rows * img.cols;
  if (b.size() - 16 < need)
    throw ParseError(path.string() + ": truncated IDX image data (" +
                     std::to_string(b.size() - 16) + " of " + std::to_string(need) + " bytes)");
  img.pixels.assign(b.begin() + 16, b.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto b = read_all(path);
  if (b.size() < 8) throw ParseError(path.string() + ": truncated IDX label header");
  if (be32(b, 0) != kIdxLabelMagic)
    throw ParseError(path.string() + ": bad IDX label magic " + hex(be32(b, 0)) +
                     " (expected " + hex(kIdxLabelMagic) + ")");
  const std::size_t count = be32(b, 4);
  if (b.size() - 8 < count)
    throw ParseError(path.string() + ": truncated IDX label data (" +
                     std::to_string(b.size() - 8) + " of " + std::to_string(count) + " bytes)");
  return {b.begin() + 8, b.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols)
    throw ShapeError("write_idx_images: pixel count does not match the header");
  std::vector<std::uint8_t> b;
  put_be32(b, kIdxImageMagic);
  put_be32(b, static_cast<std::uint32_t>(images.count));
  put_be32(b, static_cast<std::uint32_t>(images.rows));
  put_be32(b, static_cast<std::uint32_t>(images.cols));
  b.insert(b.end(), images.pixels.begin(), images.pixels.end());
  write_all(path, b);
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> b;
  put_be32(b, kIdxLabelMagic);
  put_be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  write_all(path, b);
}

Dataset load_mnist(const std::filesystem::path& dir, bool check_split_sizes) {
  constexpr std::size_t kClasses = 10;
  auto load_split = [&](const char* images_name, const char* labels_name,
                        std::size_t expected) {
    const auto img = read_idx_images(dir / images_name);
    const auto lab = read_idx_labels(dir / labels_name);
    if (img.count != lab.size())
      throw ParseError((dir / images_name).string() + ": " + std::to_string(img.count) +
                       " images but " + std::to_string(lab.size()) + " labels in " + labels_name);
    if (check_split_sizes && img.count != expected)
      throw ParseError((dir / images_name).string() + ": expected " + std::to_string(expected) +
                       " images, found " + std::to_string(img.count));
    const std::size_t width = img.rows * img.cols;
    Split s{Matrix(img.count, width), Matrix(img.count, kClasses), {}};
    s.labels.resize(img.count);
    for (std::size_t i = 0; i < img.count; ++i) {
      for (std::size_t p = 0; p < width; ++p)
        s.inputs(i, p) = static_cast<double>(img.pixels[i * width + p]) / 255.0;
      if (lab[i] >= kClasses)
        throw ParseError((dir / labels_name).string() + ": label " + std::to_string(lab[i]) +
                         " out of range");
      s.labels[i] = lab[i];
      s.targets(i, lab[i]) = 1.0;
    }
    return s;
  };
  Dataset ds;
  ds.train = load_split("train-images-idx3-ubyte", "train-labels-idx1-ubyte", kMnistTrainCount);
  ds.val = load_split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", kMnistValCount);
  if (ds.train.inputs.cols() != ds.val.inputs.cols())
    throw ParseError(dir.string() + ": train and test images differ in size");
  ds.num_classes = kClasses;
  ds.input_stats = fit_scalar(ds.train.inputs);
  ds.input_stats.apply(ds.train.inputs);
  ds.input_stats.apply(ds.val.inputs);
  return ds;
}

void write_matrix_bin(const std::filesystem::path& path, const Matrix& m) {
  std::vector<std::uint8_t> b;
  b.reserve(16 + 8 * m.size());
  put_le32(b, kMatrixMagic);
  put_le32(b, kMatrixVersion);
  put_le32(b, static_cast<std::uint32_t>(m.rows()));
  put_le32(b, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) b.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  write_all(path, b);
}

Matrix read_matrix_bin(const std::filesystem::path& path) {
  const auto b = read_all(path);
  if (b.size() < 16) throw ParseError(path.string() + ": truncated matrix header");
  if (le32(b, 0) != kMatrixMagic) throw ParseError(path.string() + ": bad matrix magic");
  if (le32(b, 4) != kMatrixVersion)
    throw ParseError(path.string() + ": unsupported matrix version " + std::to_string(le32(b, 4)));
  const std::size_t rows = le32(b, 8), cols = le32(b, 12);
  if (b.size() != 16 + 8 * rows * cols)
    throw ParseError(path.string() + ": payload size does not match " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  std::vector<double> vals(rows * cols);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::uint64_t bits = 0;
    for (int s = 0; s < 8; ++s) bits |= std::uint64_t{b[16 + 8 * i + static_cast<std::size_t>(s)]} << (8 * s);
    vals[i] = std::bit_cast<double>(bits);
  }
  return Matrix(rows, cols, std::move(vals));
}

}  // namespace sven::data
