#pragma once

#include "condtrans/common.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace condtrans {

// Grayscale image, row-major, intensities in display range [0, 255] as
// doubles (values may leave the range in intermediate processing; clamping
// happens only when a file is written).
struct ImageBuffer {
  int width{0};
  int height{0};
  std::vector<double> pixels;  // pixels[y * width + x]

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

ImageBuffer make_image(int width, int height, double fill = 0.0);

// Bookkeeping to invert patch extraction exactly: per-patch top-left origins
// in row-major grid order (outer loop over y, inner over x) and the per-patch
// means removed during extraction.
struct PatchGrid {
  int patch{0};
  int stride{0};
  int image_width{0};
  int image_height{0};
  bool mean_subtracted{false};
  std::vector<std::array<int, 2>> origins;  // {x, y}
  Vector means;

  Index patch_count() const { return static_cast<Index>(origins.size()); }
};

// Vectorizes every p x p window at the given stride into the columns of an
// n x m matrix, n = p^2. Within a patch the order is column-major: pixel
// (px, py) of the window maps to row px * p + py. With subtract_mean the
// patch mean is removed and recorded in the grid.
std::pair<DenseMatrix, PatchGrid> extract_patches(const ImageBuffer& img, int p,
                                                  int stride, bool subtract_mean);

// Re-adds recorded means and averages all patch contributions per pixel.
// extract -> assemble with unmodified patches reproduces the source exactly
// (up to roundoff) whenever stride <= p.
ImageBuffer assemble_patches(const DenseMatrix& patches, const PatchGrid& grid);

// Deterministic Gaussian stream: mt19937_64 drives uniforms via
// (x >> 11) * 2^-53 and the Marsaglia polar transform maps uniform pairs to
// normals. Both pieces are pinned so a seed reproduces the identical noise
// field on any platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // [0, 1)
  double normal();   // standard normal

 private:
  std::mt19937_64 gen_;
  bool have_spare_{false};
  double spare_{0.0};
};

inline constexpr const char* kNoisePrngName = "mt19937_64/marsaglia-polar";

// Adds i.i.d. zero-mean Gaussian noise of the given standard deviation in
// row-major pixel order. The result is intentionally not clipped.
ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma_noise,
                               std::uint64_t seed);

// 10 log10(peak^2 / MSE) in dB; +inf for identical images.
double psnr(const ImageBuffer& a, const ImageBuffer& b, double peak = 255.0);

// Mean local structural similarity over all fully-inside 8x8 windows with
// uniform weights, K1 = 0.01, K2 = 0.03, L = 255.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

// Binary PGM (P5, maxval <= 255). save_image clamps to [0, 255], rounds to
// nearest integer, and writes maxval 255; comments become '#' header lines.
ImageBuffer load_image(const std::string& path);
void save_image(const ImageBuffer& img, const std::string& path,
                const std::vector<std::string>& comments = {});

}  // namespace condtrans
