#pragma once

// Chroma keying on the CIELAB b (blue-yellow) channel, background
// subtraction, and binary morphology.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <queue>
#include <utility>

#include "gantrylab/errors.hpp"
#include "gantrylab/image.hpp"

namespace gantrylab {

namespace lab {

// sRGB primaries to CIE XYZ, D65.
inline constexpr std::array<std::array<double, 3>, 3> kRgbToXyz = {{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

// Reference white is the image of linear RGB (1, 1, 1), so achromatic
// inputs land exactly on a = b = 0.
inline constexpr double kWhiteY = kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2];
inline constexpr double kWhiteZ = kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2];

inline double srgb_to_linear(std::uint8_t c) {
  const double v = c / 255.0;
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

inline double b_value(const Rgb& px) {
  const double r = srgb_to_linear(px.r);
  const double g = srgb_to_linear(px.g);
  const double b = srgb_to_linear(px.b);
  const double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
  const double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
  return 200.0 * (f(y / kWhiteY) - f(z / kWhiteZ));
}

}  // namespace lab

inline FloatMap b_channel(const Image& img) {
  FloatMap out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = lab::b_value(img.pixels()[i]);
  return out;
}

/// Foreground where b > threshold.
inline Mask threshold_keyout(const FloatMap& bmap, double threshold = 0.0) {
  Mask m(bmap.width(), bmap.height());
  for (std::size_t i = 0; i < bmap.size(); ++i) m.data()[i] = bmap.data()[i] > threshold;
  return m;
}

/// Foreground where any channel differs from the background by more than
/// `tolerance`.
inline Mask background_subtract(const Image& img, const Image& background, int tolerance) {
  require_same_shape(img, background, "background_subtract");
  Mask m(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const Rgb& a = img.pixels()[i];
    const Rgb& b = background.pixels()[i];
    const int d = std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
    m.data()[i] = d > tolerance;
  }
  return m;
}

enum class MorphOp { Dilate, Erode, FillHoles };

namespace detail {

// Square structuring element, separable into a row pass and a column pass.
// Out-of-image neighbors are ignored.
inline Mask square_filter(const Mask& in, int radius, bool dilate) {
  const int w = in.width(), h = in.height();
  auto pass = [&](const Mask& src, bool horizontal) {
    Mask dst(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int lo = std::max(0, (horizontal ? x : y) - radius);
        const int hi = std::min((horizontal ? w : h) - 1, (horizontal ? x : y) + radius);
        std::uint8_t acc = dilate ? 0 : 1;
        for (int k = lo; k <= hi; ++k) {
          const std::uint8_t v = horizontal ? src.at(k, y) : src.at(x, k);
          if (dilate && v) { acc = 1; break; }
          if (!dilate && !v) { acc = 0; break; }
        }
        dst.at(x, y) = acc;
      }
    }
    return dst;
  };
  return pass(pass(in, true), false);
}

}  // namespace detail

/// Fills background regions that are not 4-connected to the image border.
inline Mask fill_holes(const Mask& in) {
  const int w = in.width(), h = in.height();
  Mask outside(w, h);
  std::queue<std::pair<int, int>> todo;
  auto seed = [&](int x, int y) {
    if (!in.at(x, y) && !outside.at(x, y)) {
      outside.at(x, y) = 1;
      todo.emplace(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!todo.empty()) {
    auto [x, y] = todo.front();
    todo.pop();
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  Mask out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = !outside.data()[i];
  return out;
}

inline Mask morphology(const Mask& mask, MorphOp op, int radius = 1) {
  if (op == MorphOp::FillHoles) return fill_holes(mask);
  if (radius < 1) throw DomainError("morphology: kernel radius must be >= 1");
  return detail::square_filter(mask, radius, op == MorphOp::Dilate);
}

/// Box blur with a (2r+1)^2 window, clamped at the borders. Meant for
/// camera images before keying; rendered images do not need it.
inline Image box_blur(const Image& img, int radius) {
  if (radius < 1) return img;
  const int w = img.width(), h = img.height();
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int sum[3] = {0, 0, 0}, n = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          const Rgb& p = img.at(std::clamp(x + dx, 0, w - 1), yy);
          sum[0] += p.r;
          sum[1] += p.g;
          sum[2] += p.b;
          ++n;
        }
      }
      out.at(x, y) = {static_cast<std::uint8_t>((sum[0] + n / 2) / n),
                      static_cast<std::uint8_t>((sum[1] + n / 2) / n),
                      static_cast<std::uint8_t>((sum[2] + n / 2) / n)};
    }
  }
  return out;
}

}  // namespace gantrylab
