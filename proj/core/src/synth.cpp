#include "aigikit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aigikit/rng.hpp"

namespace aigikit {

namespace {

struct Rgb {
  double r, g, b;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void put(PixelBuffer& img, int x, int y, const Rgb& c) {
  img.at(x, y, 0) = to_byte(c.r);
  img.at(x, y, 1) = to_byte(c.g);
  img.at(x, y, 2) = to_byte(c.b);
}

void add_grain(PixelBuffer& img, std::uint64_t seed, double sigma) {
  GaussianStream noise(seed);
  for (auto& s : img.data) {
    s = to_byte(s + sigma * noise.next());
  }
}

void draw_disk(PixelBuffer& img, double cx, double cy, double radius, const Rgb& color) {
  const int x0 = std::max(0, static_cast<int>(cx - radius) - 1);
  const int x1 = std::min(img.width - 1, static_cast<int>(cx + radius) + 1);
  const int y0 = std::max(0, static_cast<int>(cy - radius) - 1);
  const int y1 = std::min(img.height - 1, static_cast<int>(cy + radius) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d <= radius) put(img, x, y, color);
    }
  }
}

}  // namespace

PixelBuffer synth_photo(std::uint64_t seed, int width, int height) {
  SplitMix64 rng(seed);
  PixelBuffer img(width, height);

  // Sky gradient with a seeded hue.
  const double sky_r = rng.uniform(90, 150), sky_g = rng.uniform(140, 190),
               sky_b = rng.uniform(200, 245);
  // Ridge line: sum of a few seeded sinusoids.
  const double ridge_base = rng.uniform(0.35, 0.6) * height;
  const double a1 = rng.uniform(0.02, 0.08) * height, f1 = rng.uniform(1.0, 3.0);
  const double a2 = rng.uniform(0.01, 0.05) * height, f2 = rng.uniform(3.0, 7.0);
  const double phase1 = rng.uniform(0, 6.283), phase2 = rng.uniform(0, 6.283);

  const double ground_r = rng.uniform(60, 110), ground_g = rng.uniform(110, 160),
               ground_b = rng.uniform(40, 80);
  const double rock_shade = rng.uniform(0.35, 0.6);

  for (int x = 0; x < width; ++x) {
    const double t = static_cast<double>(x) / width;
    const double ridge = ridge_base + a1 * std::sin(f1 * 6.283 * t + phase1) +
                         a2 * std::sin(f2 * 6.283 * t + phase2);
    for (int y = 0; y < height; ++y) {
      const double v = static_cast<double>(y) / height;
      if (y < ridge) {
        // Sky lightens toward the horizon.
        const double k = 0.55 + 0.45 * (y / std::max(1.0, ridge));
        put(img, x, y, {sky_r * k + 60 * (1 - k), sky_g * k + 60 * (1 - k), sky_b});
      } else {
        // Ground with depth shading and furrow texture.
        const double depth = (v - ridge / height) / std::max(0.05, 1.0 - ridge / height);
        const double furrow = 12.0 * std::sin(0.9 * x + 0.35 * y) * std::sin(0.17 * y);
        const double k = 1.0 - rock_shade * depth;
        put(img, x, y,
            {ground_r * k + furrow, ground_g * k + furrow, ground_b * k + 0.5 * furrow});
      }
    }
  }

  // Sun.
  draw_disk(img, rng.uniform(0.1, 0.9) * width, rng.uniform(0.08, 0.3) * ridge_base,
            rng.uniform(0.03, 0.08) * width, {250, 240, 200});

  // A few foreground bushes.
  const int blobs = static_cast<int>(rng.uniform_int(2, 5));
  for (int i = 0; i < blobs; ++i) {
    const double shade = rng.uniform(0.5, 0.9);
    draw_disk(img, rng.uniform(0.05, 0.95) * width, rng.uniform(ridge_base, height - 1.0),
              rng.uniform(0.02, 0.07) * width,
              {ground_r * shade * 0.6, ground_g * shade, ground_b * shade * 0.7});
  }

  add_grain(img, rng.next(), 5.0);
  return img;
}

PixelBuffer synth_surreal(std::uint64_t seed, int width, int height) {
  SplitMix64 rng(seed);
  PixelBuffer img(width, height);

  // Inverted world: ground tones above, banded sky below.
  const double band_w = rng.uniform(6, 18);
  const double split = rng.uniform(0.3, 0.7) * height;
  const double hue_r = rng.uniform(120, 220), hue_g = rng.uniform(40, 120),
               hue_b = rng.uniform(130, 240);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (y < split) {
        const double furrow = 12.0 * std::sin(0.9 * x + 0.35 * y) * std::sin(0.17 * y);
        const double k = 1.0 - 0.4 * (y / split);
        put(img, x, y, {hue_g * k + furrow, hue_r * k + furrow, 70 * k + 0.5 * furrow});
      } else {
        // Vertical candy-stripe "sky".
        const bool band = static_cast<int>(x / band_w) % 2 == 0;
        const double k = 0.6 + 0.4 * ((y - split) / std::max(1.0, height - split));
        put(img, x, y,
            band ? Rgb{hue_r * k, hue_g * k, hue_b} : Rgb{hue_b * k, hue_r * k, hue_g});
      }
    }
  }

  // Several suns, some below the horizon.
  const int suns = static_cast<int>(rng.uniform_int(2, 4));
  for (int i = 0; i < suns; ++i) {
    draw_disk(img, rng.uniform(0.05, 0.95) * width, rng.uniform(0.05, 0.95) * height,
              rng.uniform(0.03, 0.09) * width, {250, 240, 200});
  }
  // Floating cubes.
  const int cubes = static_cast<int>(rng.uniform_int(2, 4));
  for (int i = 0; i < cubes; ++i) {
    const int side = std::max(3, static_cast<int>(rng.uniform(0.04, 0.12) * width));
    const int cx = static_cast<int>(rng.uniform(0, std::max(1, width - side)));
    const int cy = static_cast<int>(rng.uniform(0, std::max(1, height - side)));
    const Rgb c{rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
    for (int y = cy; y < std::min(height, cy + side); ++y) {
      for (int x = cx; x < std::min(width, cx + side); ++x) put(img, x, y, c);
    }
  }

  // Same grain level as synth_photo so low-level statistics match.
  add_grain(img, rng.next(), 5.0);
  return img;
}

}  // namespace aigikit
