#include "condtrans/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace condtrans {

namespace {

void check_same_dims(const ImageBuffer& a, const ImageBuffer& b, const char* who) {
  require(a.width == b.width && a.height == b.height,
          std::string(who) + ": image dimensions differ");
}

}  // namespace

ImageBuffer make_image(int width, int height, double fill) {
  require(width > 0 && height > 0, "make_image: dimensions must be positive");
  ImageBuffer img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

std::pair<DenseMatrix, PatchGrid> extract_patches(const ImageBuffer& img, int p,
                                                  int stride, bool subtract_mean) {
  require(p >= 1 && p <= std::min(img.width, img.height),
          "extract_patches: patch size exceeds image");
  require(stride >= 1, "extract_patches: stride must be >= 1");

  PatchGrid grid;
  grid.patch = p;
  grid.stride = stride;
  grid.image_width = img.width;
  grid.image_height = img.height;
  grid.mean_subtracted = subtract_mean;
  for (int oy = 0; oy + p <= img.height; oy += stride)
    for (int ox = 0; ox + p <= img.width; ox += stride)
      grid.origins.push_back({ox, oy});

  const Index n = static_cast<Index>(p) * p;
  const Index m = grid.patch_count();
  DenseMatrix y(n, m);
  grid.means = Vector::Zero(m);

  for (Index j = 0; j < m; ++j) {
    const auto [ox, oy] = grid.origins[static_cast<std::size_t>(j)];
    Index row = 0;
    for (int px = 0; px < p; ++px)
      for (int py = 0; py < p; ++py) y(row++, j) = img.at(ox + px, oy + py);
    if (subtract_mean) {
      const double mean = y.col(j).mean();
      grid.means(j) = mean;
      y.col(j).array() -= mean;
    }
  }
  return {std::move(y), std::move(grid)};
}

ImageBuffer assemble_patches(const DenseMatrix& patches, const PatchGrid& grid) {
  const int p = grid.patch;
  require(patches.rows() == static_cast<Index>(p) * p,
          "assemble_patches: row count does not match patch size");
  require(patches.cols() == grid.patch_count(),
          "assemble_patches: column count does not match grid");

  ImageBuffer sum = make_image(grid.image_width, grid.image_height, 0.0);
  std::vector<double> weight(sum.pixels.size(), 0.0);

  for (Index j = 0; j < patches.cols(); ++j) {
    const auto [ox, oy] = grid.origins[static_cast<std::size_t>(j)];
    const double mean = grid.mean_subtracted ? grid.means(j) : 0.0;
    Index row = 0;
    for (int px = 0; px < p; ++px)
      for (int py = 0; py < p; ++py) {
        const std::size_t idx =
            static_cast<std::size_t>(oy + py) * grid.image_width + (ox + px);
        sum.pixels[idx] += patches(row++, j) + mean;
        weight[idx] += 1.0;
      }
  }
  for (std::size_t i = 0; i < sum.pixels.size(); ++i) {
    if (weight[i] > 0.0) sum.pixels[i] /= weight[i];
  }
  return sum;
}

double GaussianStream::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double GaussianStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  have_spare_ = true;
  return u * scale;
}

ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma_noise,
                               std::uint64_t seed) {
  require(sigma_noise >= 0.0, "add_gaussian_noise: sigma must be nonnegative");
  ImageBuffer out = img;
  if (sigma_noise == 0.0) return out;
  GaussianStream rng(seed);
  for (double& px : out.pixels) px += sigma_noise * rng.normal();
  return out;
}

double psnr(const ImageBuffer& a, const ImageBuffer& b, double peak) {
  check_same_dims(a, b, "psnr");
  require(peak > 0.0, "psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double diff = a.pixels[i] - b.pixels[i];
    mse += diff * diff;
  }
  mse /= static_cast<double>(a.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  check_same_dims(a, b, "ssim");
  constexpr int kWin = 8;
  require(a.width >= kWin && a.height >= kWin, "ssim: image smaller than window");
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  constexpr double kInvN = 1.0 / (kWin * kWin);

  double total = 0.0;
  std::size_t windows = 0;
  for (int oy = 0; oy + kWin <= a.height; ++oy) {
    for (int ox = 0; ox + kWin <= a.width; ++ox) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int py = 0; py < kWin; ++py)
        for (int px = 0; px < kWin; ++px) {
          const double va = a.at(ox + px, oy + py);
          const double vb = b.at(ox + px, oy + py);
          sx += va;
          sy += vb;
          sxx += va * va;
          syy += vb * vb;
          sxy += va * vb;
        }
      const double mx = sx * kInvN;
      const double my = sy * kInvN;
      const double vx = sxx * kInvN - mx * mx;
      const double vy = syy * kInvN - my * my;
      const double cov = sxy * kInvN - mx * my;
      total += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

ImageBuffer load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);

  // Header tokens may be separated by whitespace and '#' comment lines.
  const auto next_token = [&in, &path]() {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw IoError("truncated image header: " + path);
    return tok;
  };

  if (next_token() != "P5") {
    throw IoError("unsupported image format (expected binary PGM P5): " + path);
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IoError("malformed PGM header: " + path);
  }
  if (width <= 0 || height <= 0) throw IoError("invalid PGM dimensions: " + path);
  if (maxval <= 0 || maxval > 255) {
    throw IoError("unsupported PGM bit depth (maxval " + std::to_string(maxval) +
                  "): " + path);
  }

  ImageBuffer img = make_image(width, height);
  std::vector<unsigned char> raw(img.pixels.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError("truncated PGM pixel data: " + path);
  }
  for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i];
  return img;
}

void save_image(const ImageBuffer& img, const std::string& path,
                const std::vector<std::string>& comments) {
  require(img.width > 0 && img.height > 0 &&
              img.pixels.size() == static_cast<std::size_t>(img.width) * img.height,
          "save_image: inconsistent image buffer");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file: " + path);

  out << "P5\n";
  for (const auto& c : comments) out << "# " << c << "\n";
  out << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 255.0);
    raw[i] = static_cast<unsigned char>(std::llround(v));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing image file: " + path);
}

}  // namespace condtrans
