#include "aigikit/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aigikit/image_io.hpp"
#include "aigikit/rng.hpp"

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint8_t clamp_round(double v) {
  const long r = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

// Symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i = ((i % period) + period) % period;
  return i < n ? i : period - 1 - i;
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Catmull-Rom (a = -0.5).
double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

PixelBuffer resample(const PixelBuffer& img, int out_w, int out_h, ResizeKernel kernel) {
  PixelBuffer out(out_w, out_h);
  const double x_ratio = static_cast<double>(img.width) / out_w;
  const double y_ratio = static_cast<double>(img.height) / out_h;

  switch (kernel) {
    case ResizeKernel::Nearest: {
      for (int y = 0; y < out_h; ++y) {
        const int sy = clamp_index(static_cast<int>((y + 0.5) * y_ratio), img.height);
        for (int x = 0; x < out_w; ++x) {
          const int sx = clamp_index(static_cast<int>((x + 0.5) * x_ratio), img.width);
          for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
      }
      break;
    }
    case ResizeKernel::Bilinear: {
      for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * y_ratio - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        const int ya = clamp_index(y0, img.height);
        const int yb = clamp_index(y0 + 1, img.height);
        for (int x = 0; x < out_w; ++x) {
          const double sx = (x + 0.5) * x_ratio - 0.5;
          const int x0 = static_cast<int>(std::floor(sx));
          const double fx = sx - x0;
          const int xa = clamp_index(x0, img.width);
          const int xb = clamp_index(x0 + 1, img.width);
          for (int c = 0; c < 3; ++c) {
            const double top = img.at(xa, ya, c) * (1.0 - fx) + img.at(xb, ya, c) * fx;
            const double bot = img.at(xa, yb, c) * (1.0 - fx) + img.at(xb, yb, c) * fx;
            out.at(x, y, c) = clamp_round(top * (1.0 - fy) + bot * fy);
          }
        }
      }
      break;
    }
    case ResizeKernel::Bicubic: {
      for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * y_ratio - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        double wy[4];
        for (int k = 0; k < 4; ++k) wy[k] = cubic_weight(fy - (k - 1));
        for (int x = 0; x < out_w; ++x) {
          const double sx = (x + 0.5) * x_ratio - 0.5;
          const int x0 = static_cast<int>(std::floor(sx));
          const double fx = sx - x0;
          double wx[4];
          for (int k = 0; k < 4; ++k) wx[k] = cubic_weight(fx - (k - 1));
          for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int ky = 0; ky < 4; ++ky) {
              const int yy = clamp_index(y0 - 1 + ky, img.height);
              double row = 0.0;
              for (int kx = 0; kx < 4; ++kx) {
                const int xx = clamp_index(x0 - 1 + kx, img.width);
                row += wx[kx] * img.at(xx, yy, c);
              }
              acc += wy[ky] * row;
            }
            out.at(x, y, c) = clamp_round(acc);
          }
        }
      }
      break;
    }
  }
  return out;
}

struct OpValidator {
  void operator()(const DegradationOp::Jpeg& o) const {
    if (o.quality < 1 || o.quality > 100) throw Error("jpeg quality out of range 1..100");
  }
  void operator()(const DegradationOp::DoubleJpeg& o) const {
    if (o.quality < 1 || o.quality > 100) throw Error("double_jpeg quality out of range 1..100");
  }
  void operator()(const DegradationOp::Resize& o) const {
    if (!(o.scale > 0.0) || o.scale > 4.0) throw Error("resize scale out of range (0,4]");
  }
  void operator()(const DegradationOp::DoubleResize& o) const {
    if (!(o.scale > 0.0) || o.scale > 1.0) throw Error("double_resize scale out of range (0,1]");
  }
  void operator()(const DegradationOp::GaussianBlur& o) const {
    if (!(o.sigma > 0.0)) throw Error("gaussian_blur sigma must be > 0");
  }
  void operator()(const DegradationOp::GaussianNoise& o) const {
    if (!(o.sigma > 0.0)) throw Error("gaussian_noise sigma must be > 0");
  }
};

ordered_json op_to_json(const DegradationOp& op) {
  ordered_json j;
  j["kind"] = std::string(op.kind());
  std::visit(
      [&j](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DegradationOp::Jpeg> ||
                      std::is_same_v<T, DegradationOp::DoubleJpeg>) {
          j["quality"] = o.quality;
        } else if constexpr (std::is_same_v<T, DegradationOp::Resize> ||
                             std::is_same_v<T, DegradationOp::DoubleResize>) {
          j["scale"] = o.scale;
          j["kernel"] = std::string(to_string(o.kernel));
        } else if constexpr (std::is_same_v<T, DegradationOp::GaussianBlur>) {
          j["sigma"] = o.sigma;
        } else {
          j["sigma"] = o.sigma;
          j["seed"] = o.seed;
        }
      },
      op.op);
  return j;
}

DegradationOp op_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  DegradationOp op;
  if (kind == "jpeg") {
    op.op = DegradationOp::Jpeg{j.at("quality").get<int>()};
  } else if (kind == "double_jpeg") {
    op.op = DegradationOp::DoubleJpeg{j.at("quality").get<int>()};
  } else if (kind == "resize") {
    op.op = DegradationOp::Resize{j.at("scale").get<double>(),
                                  kernel_from_string(j.at("kernel").get<std::string>())};
  } else if (kind == "double_resize") {
    op.op = DegradationOp::DoubleResize{j.at("scale").get<double>(),
                                        kernel_from_string(j.at("kernel").get<std::string>())};
  } else if (kind == "gaussian_blur") {
    op.op = DegradationOp::GaussianBlur{j.at("sigma").get<double>()};
  } else if (kind == "gaussian_noise") {
    op.op = DegradationOp::GaussianNoise{j.at("sigma").get<double>(),
                                         j.at("seed").get<std::uint64_t>()};
  } else {
    throw Error("unknown degradation op kind: " + kind);
  }
  op.validate();
  return op;
}

}  // namespace

std::string_view to_string(ResizeKernel k) {
  switch (k) {
    case ResizeKernel::Nearest: return "nearest";
    case ResizeKernel::Bilinear: return "bilinear";
    case ResizeKernel::Bicubic: return "bicubic";
  }
  return "bilinear";
}

ResizeKernel kernel_from_string(std::string_view s) {
  if (s == "nearest") return ResizeKernel::Nearest;
  if (s == "bilinear") return ResizeKernel::Bilinear;
  if (s == "bicubic") return ResizeKernel::Bicubic;
  throw Error("unknown resize kernel: " + std::string(s));
}

std::string_view DegradationOp::kind() const {
  switch (op.index()) {
    case 0: return "jpeg";
    case 1: return "double_jpeg";
    case 2: return "resize";
    case 3: return "double_resize";
    case 4: return "gaussian_blur";
    default: return "gaussian_noise";
  }
}

void DegradationOp::validate() const { std::visit(OpValidator{}, op); }

bool operator==(const DegradationOp& a, const DegradationOp& b) {
  return op_to_json(a) == op_to_json(b);
}

void DegradationSpec::validate() const {
  if (ops.size() > 8) throw Error("degradation spec longer than 8 ops");
  for (const auto& op : ops) op.validate();
}

bool operator==(const DegradationSpec& a, const DegradationSpec& b) {
  return spec_to_json(a) == spec_to_json(b);
}

std::string spec_to_json(const DegradationSpec& spec) {
  ordered_json j;
  j["seed"] = spec.seed;
  j["ops"] = ordered_json::array();
  for (const auto& op : spec.ops) j["ops"].push_back(op_to_json(op));
  return j.dump();
}

DegradationSpec spec_from_json(const std::string& json_text) {
  const auto j = ordered_json::parse(json_text);
  DegradationSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jop : j.at("ops")) spec.ops.push_back(op_from_json(jop));
  spec.validate();
  return spec;
}

PixelBuffer jpeg_compress(const PixelBuffer& img, int quality) {
  return decode_jpeg(encode_jpeg(img, quality));
}

PixelBuffer double_jpeg(const PixelBuffer& img, int quality) {
  return jpeg_compress(jpeg_compress(img, quality), quality);
}

PixelBuffer resize_to(const PixelBuffer& img, int out_w, int out_h, ResizeKernel kernel) {
  if (out_w < 1 || out_h < 1) {
    throw DegenerateOutput("resize target dimension is zero");
  }
  if (out_w == img.width && out_h == img.height) {
    return img;  // identity short-circuit, bit-exact
  }
  return resample(img, out_w, out_h, kernel);
}

PixelBuffer resize(const PixelBuffer& img, double scale, ResizeKernel kernel) {
  if (!(scale > 0.0)) throw Error("resize scale must be > 0");
  if (scale == 1.0) return img;
  const int out_w = static_cast<int>(std::lround(img.width * scale));
  const int out_h = static_cast<int>(std::lround(img.height * scale));
  return resize_to(img, out_w, out_h, kernel);
}

PixelBuffer double_resize(const PixelBuffer& img, double scale, ResizeKernel kernel) {
  if (!(scale > 0.0) || scale > 1.0) throw Error("double_resize scale must be in (0,1]");
  if (scale == 1.0) return img;
  const PixelBuffer down = resize(img, scale, kernel);
  return resize_to(down, img.width, img.height, kernel);
}

PixelBuffer gaussian_blur(const PixelBuffer& img, double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian_blur sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& w : kernel) w /= sum;

  const std::size_t plane = img.data.size();
  std::vector<double> tmp(plane), tmp2(plane);

  // Horizontal pass.
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xx = reflect_index(x + k, img.width);
          acc += kernel[static_cast<std::size_t>(k + radius)] * img.at(xx, y, c);
        }
        tmp[(static_cast<std::size_t>(y) * img.width + x) * 3 + c] = acc;
      }
    }
  }
  // Vertical pass.
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = reflect_index(y + k, img.height);
          acc += kernel[static_cast<std::size_t>(k + radius)] *
                 tmp[(static_cast<std::size_t>(yy) * img.width + x) * 3 + c];
        }
        tmp2[(static_cast<std::size_t>(y) * img.width + x) * 3 + c] = acc;
      }
    }
  }

  PixelBuffer out(img.width, img.height);
  for (std::size_t i = 0; i < plane; ++i) out.data[i] = clamp_round(tmp2[i]);
  return out;
}

PixelBuffer gaussian_noise(const PixelBuffer& img, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw Error("gaussian_noise sigma must be > 0");
  GaussianStream stream(seed);
  PixelBuffer out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = clamp_round(img.data[i] + sigma * stream.next());
  }
  return out;
}

PixelBuffer apply_op(const DegradationOp& op, const PixelBuffer& img) {
  op.validate();
  return std::visit(
      [&img](const auto& o) -> PixelBuffer {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DegradationOp::Jpeg>) {
          return jpeg_compress(img, o.quality);
        } else if constexpr (std::is_same_v<T, DegradationOp::DoubleJpeg>) {
          return double_jpeg(img, o.quality);
        } else if constexpr (std::is_same_v<T, DegradationOp::Resize>) {
          return resize(img, o.scale, o.kernel);
        } else if constexpr (std::is_same_v<T, DegradationOp::DoubleResize>) {
          return double_resize(img, o.scale, o.kernel);
        } else if constexpr (std::is_same_v<T, DegradationOp::GaussianBlur>) {
          return gaussian_blur(img, o.sigma);
        } else {
          return gaussian_noise(img, o.sigma, o.seed);
        }
      },
      op.op);
}

PixelBuffer apply_spec(const DegradationSpec& spec, const PixelBuffer& img) {
  spec.validate();
  PixelBuffer out = img;
  for (const auto& op : spec.ops) out = apply_op(op, out);
  return out;
}

void PipelineProfile::validate() const {
  if (pool.empty()) throw EmptyPool("pipeline profile has an empty op pool");
  if (min_len < 0 || max_len < min_len) throw ProfileError("bad pipeline length range");
  if (static_cast<std::size_t>(max_len) > pool.size()) {
    throw ProfileError("max_len exceeds pool size (ops are drawn without replacement)");
  }
  for (const auto& e : pool) {
    if (e.kind != "jpeg" && e.kind != "double_jpeg" && e.kind != "resize" &&
        e.kind != "double_resize" && e.kind != "gaussian_blur" && e.kind != "gaussian_noise") {
      throw ProfileError("unknown op kind in pool: " + e.kind);
    }
    if (!(e.lo <= e.hi)) throw ProfileError("bad parameter range for " + e.kind);
  }
}

PipelineProfile default_heavy_profile() {
  PipelineProfile p;
  p.pool = {
      {"jpeg", 30, 75, ResizeKernel::Bilinear},
      {"double_jpeg", 30, 75, ResizeKernel::Bilinear},
      {"double_resize", 0.3, 0.7, ResizeKernel::Bilinear},
      {"gaussian_blur", 0.8, 2.0, ResizeKernel::Bilinear},
      {"gaussian_noise", 2.0, 8.0, ResizeKernel::Bilinear},
  };
  p.min_len = 2;
  p.max_len = 4;
  return p;
}

DegradationSpec sample_heavy_pipeline(std::uint64_t seed, const PipelineProfile& profile) {
  profile.validate();
  SplitMix64 rng(seed);
  DegradationSpec spec;
  spec.seed = seed;

  const int len = static_cast<int>(rng.uniform_int(profile.min_len, profile.max_len));

  // Partial Fisher-Yates draw without replacement.
  std::vector<std::size_t> order(profile.pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int i = 0; i < len; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(i, static_cast<std::int64_t>(order.size()) - 1));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }

  for (int i = 0; i < len; ++i) {
    const OpPoolEntry& entry = profile.pool[order[static_cast<std::size_t>(i)]];
    DegradationOp op;
    if (entry.kind == "jpeg") {
      op.op = DegradationOp::Jpeg{static_cast<int>(
          rng.uniform_int(static_cast<std::int64_t>(entry.lo), static_cast<std::int64_t>(entry.hi)))};
    } else if (entry.kind == "double_jpeg") {
      op.op = DegradationOp::DoubleJpeg{static_cast<int>(
          rng.uniform_int(static_cast<std::int64_t>(entry.lo), static_cast<std::int64_t>(entry.hi)))};
    } else if (entry.kind == "resize") {
      op.op = DegradationOp::Resize{rng.uniform(entry.lo, entry.hi), entry.kernel};
    } else if (entry.kind == "double_resize") {
      op.op = DegradationOp::DoubleResize{rng.uniform(entry.lo, entry.hi), entry.kernel};
    } else if (entry.kind == "gaussian_blur") {
      op.op = DegradationOp::GaussianBlur{rng.uniform(entry.lo, entry.hi)};
    } else {
      op.op = DegradationOp::GaussianNoise{rng.uniform(entry.lo, entry.hi), rng.next()};
    }
    op.validate();
    spec.ops.push_back(std::move(op));
  }
  return spec;
}

}  // namespace aigikit
