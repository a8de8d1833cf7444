#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "sven/dataset.hpp"
#include "sven/matrix.hpp"
#include "sven/rng.hpp"

namespace sven::data {

enum class DatasetKind { Sine1d, Poly6, Mnist };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

/// Affine normalization x ↦ (x − mean)/std, either per feature or with a
/// single scalar pair (`mean`/`std` of length 1) applied to every feature.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;

  void apply(Matrix& m) const;
};

/// Per-column population mean and standard deviation; zero-variance columns
/// get std = 1.
Standardization fit_per_feature(const Matrix& m);
/// One mean/std over every entry of `m`.
Standardization fit_scalar(const Matrix& m);

struct Dataset {
  Split train;
  Split val;
  Standardization input_stats;
  /// Empty unless targets were standardized.
  Standardization target_stats;
  std::size_t num_classes = 0;
};

/// e^{−10x²}·sin(2x)
double sine1d_target(double x);

/// x ~ U[−1, 1], n samples per split; inputs standardized with train stats.
Dataset gen_sine1d(std::size_t n, std::uint64_t seed, bool standardize_targets = false);

using Exponents = std::array<int, 6>;

/// All exponent vectors over ℝ⁶ with total degree ≤ 4 in graded
/// lexicographic order: by total degree, then lexicographically descending
/// (x₁ before x₂ ...). 210 entries.
std::vector<Exponents> poly6_monomials();

struct Polynomial {
  std::vector<Exponents> exponents;
  std::vector<double> coeffs;

  double operator()(std::span<const double> x) const;
};

/// Coefficients i.i.d. N(0, 1) in monomial order.
Polynomial random_poly6(Rng& rng);

/// Random degree-4 polynomial target; inputs ~ N(0, I₆), n per split,
/// standardized with train stats. The polynomial is drawn first, then the
/// train inputs, then the validation inputs, all from one stream.
Dataset gen_poly6(std::size_t n, std::uint64_t seed, bool standardize_targets = false);

// IDX containers (big-endian), as used by the MNIST distribution.
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

inline constexpr std::size_t kMnistTrainCount = 60000;
inline constexpr std::size_t kMnistValCount = 10000;

/// Reads train-images-idx3-ubyte, train-labels-idx1-ubyte,
/// t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte from `dir`. Pixels are
/// scaled to [0, 1], flattened and standardized with one scalar mean/std of
/// the training images. Targets are one-hot; labels are kept for
/// cross-entropy. With `check_split_sizes` the 60000/10000 split is enforced.
Dataset load_mnist(const std::filesystem::path& dir, bool check_split_sizes = true);

std::vector<double> one_hot(int label, std::size_t classes);

/// Data loading order: a seeded Fisher-Yates permutation per epoch, cut into
/// consecutive batches with the final partial batch kept.
struct BatchPlan {
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> epoch_permutation(std::size_t n, const BatchPlan& plan, std::size_t epoch);
std::vector<std::vector<std::size_t>> batches(std::size_t n, const BatchPlan& plan,
                                              std::size_t epoch);
std::vector<std::vector<std::size_t>> batches(const Dataset& dataset, const BatchPlan& plan,
                                              std::size_t epoch);

/// Little-endian matrix container: 16-byte header (u32 magic "SVMX", u32
/// version, u32 rows, u32 cols) followed by rows·cols f64 values row-major.
inline constexpr std::uint32_t kMatrixMagic = 0x584D5653;  // bytes 'S' 'V' 'M' 'X'
inline constexpr std::uint32_t kMatrixVersion = 1;

void write_matrix_bin(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_bin(const std::filesystem::path& path);

}  // namespace sven::data
