// Copyright 2026 The GroundPrior Kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gpk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gpk/ground_maps.hpp"

namespace gpk {

namespace {

// Samples whose spread is rounding noise (below 1e-9 relative) are treated
// as constant: the cluster is placed inside the middle bin.
std::pair<double, double> padded_range(double lo, double hi, std::size_t bins) {
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-3});
  if (hi - lo > scale * 1e-9) return {lo, hi};
  const double width = 2.0 * std::max(hi - lo, scale * 1e-9);
  const double start = lo - (static_cast<double>(bins / 2) + 0.25) * width;
  return {start, start + static_cast<double>(bins) * width};
}

std::size_t bin_index(double x, double lo, double hi, std::size_t bins) {
  const double t = (x - lo) / (hi - lo) * static_cast<double>(bins);
  return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t))));
}

}  // namespace

Histogram::Histogram(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("histogram edges must be finite and increasing");
  }
}

Histogram Histogram::fit(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw EmptyInput("no samples to histogram");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const auto [lo, hi] = padded_range(*mn, *mx, bins);
  Histogram h(lo, hi, bins);
  for (double x : samples) h.add(x);
  return h;
}

void Histogram::add(double x) {
  ++total_;
  sum_ += x;
  if (x < lo_) {
    ++underflow_;
  } else if (x > hi_) {
    ++overflow_;
  } else {
    ++counts_[bin_index(x, lo_, hi_, counts_.size())];
  }
}

void Histogram::merge(const Histogram& other) {
  if (other.lo_ != lo_ || other.hi_ != hi_ || other.counts_.size() != counts_.size()) {
    throw DimensionMismatch("histograms have different edges");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  underflow_ += other.underflow_;
  overflow_ += other.overflow_;
  total_ += other.total_;
  sum_ += other.sum_;
}

double Histogram::edge(std::size_t i) const {
  if (i == counts_.size()) return hi_;
  return lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(counts_.size());
}

double Histogram::mean() const {
  return total_ == 0 ? std::numeric_limits<double>::quiet_NaN() : sum_ / static_cast<double>(total_);
}

std::size_t Histogram::occupied_bins() const {
  return static_cast<std::size_t>(
      std::count_if(counts_.begin(), counts_.end(), [](std::uint64_t c) { return c > 0; }));
}

double Histogram::occupied_width() const {
  const auto first = std::find_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; });
  if (first == counts_.end()) return 0.0;
  const auto last = std::find_if(counts_.rbegin(), counts_.rend(), [](auto c) { return c > 0; });
  const auto i0 = static_cast<std::size_t>(first - counts_.begin());
  const auto i1 = counts_.size() - 1 - static_cast<std::size_t>(last - counts_.rbegin());
  return edge(i1 + 1) - edge(i0);
}

double Histogram::relative_support() const {
  const double m = std::abs(mean());
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return occupied_width() / m;
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::kDepth: return "depth";
    case Quantity::kRoll: return "roll";
    case Quantity::kPitch: return "pitch";
  }
  return "unknown";
}

Quantity parse_quantity(std::string_view name) {
  if (name == "depth") return Quantity::kDepth;
  if (name == "roll") return Quantity::kRoll;
  if (name == "pitch") return Quantity::kPitch;
  throw ConfigError("unknown quantity '" + std::string(name) + "'");
}

std::string_view to_string(Condition c) {
  return c == Condition::kClean ? "clean" : "perturbed";
}

std::vector<double> object_depths(std::span<const FrameRecord> frames) {
  std::vector<double> depths;
  for (const auto& f : frames) {
    for (const auto& o : f.objects) depths.push_back(bottom_center(o.box, f.ground).z());
  }
  return depths;
}

Histogram depth_histogram(std::span<const FrameRecord> frames, std::size_t bins,
                          std::optional<std::pair<double, double>> range) {
  const auto depths = object_depths(frames);
  if (depths.empty()) throw EmptyInput("no annotated objects");
  if (!range) return Histogram::fit(depths, bins);
  Histogram h(range->first, range->second, bins);
  for (double z : depths) h.add(z);
  return h;
}

AttitudeSamples attitude_samples(const FrameRecord& frame, ImageSize image, int stride) {
  if (stride <= 0) throw ConfigError("stride must be positive");
  const std::size_t h = image.height / static_cast<std::size_t>(stride);
  const std::size_t w = image.width / static_cast<std::size_t>(stride);
  if (h == 0 || w == 0) throw ConfigError("map resolution is empty at this stride");

  std::vector<BBox3D> boxes;
  boxes.reserve(frame.objects.size());
  for (const auto& o : frame.objects) boxes.push_back(o.box);
  const DenormMap map = build_refined_denorm_map(
      frame.ground, boxes, frame.rig.intrinsics.downscaled(stride), h, w);

  AttitudeSamples s;
  s.roll.reserve(h * w);
  s.pitch.reserve(h * w);
  s.height.reserve(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const CameraAttitude a = plane_to_attitude(map.at(r, c));
      s.roll.push_back(a.roll);
      s.pitch.push_back(a.pitch);
      s.height.push_back(a.height);
    }
  }
  return s;
}

AttitudeHistograms attitude_histograms(std::span<const FrameRecord> frames, std::size_t bins,
                                       ImageSize image, int stride) {
  if (frames.empty()) throw EmptyInput("no frames");
  AttitudeSamples all;
  for (const auto& f : frames) {
    AttitudeSamples s = attitude_samples(f, image, stride);
    all.roll.insert(all.roll.end(), s.roll.begin(), s.roll.end());
    all.pitch.insert(all.pitch.end(), s.pitch.begin(), s.pitch.end());
    all.height.insert(all.height.end(), s.height.begin(), s.height.end());
  }
  return {Histogram::fit(all.roll, bins), Histogram::fit(all.pitch, bins),
          Histogram::fit(all.height, bins)};
}

ScatterSeries v_correlation_series(std::span<const FrameRecord> frames, Quantity quantity,
                                   ImageSize image,
                                   std::optional<std::span<const MountOffset>> offsets) {
  if (offsets && offsets->size() != frames.size()) {
    throw DimensionMismatch("need one mount offset per frame");
  }
  ScatterSeries series;
  series.quantity = quantity;
  series.condition = offsets ? Condition::kPerturbed : Condition::kClean;
  const double width = static_cast<double>(image.width);
  const double height = static_cast<double>(image.height);

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const Mat3 rot = offsets ? perturbation_rotation((*offsets)[i].droll, (*offsets)[i].dpitch)
                             : Mat3::Identity();
    const GroundPlane plane = f.ground.rotated(rot);
    const CameraAttitude attitude = plane_to_attitude(plane);
    for (const auto& o : f.objects) {
      const Vec3 p = rot * bottom_center(o.box, f.ground);
      if (!(p.z() > 0.0)) continue;
      const Pixel px = project_point(p, f.rig.intrinsics);
      if (px.u < 0.0 || px.u >= width || px.v < 0.0 || px.v >= height) continue;
      double value = 0.0;
      switch (quantity) {
        case Quantity::kDepth: value = p.z(); break;
        case Quantity::kRoll: value = attitude.roll; break;
        case Quantity::kPitch: value = attitude.pitch; break;
      }
      series.points.push_back({f.id, px.v, value});
    }
  }
  if (series.points.empty()) throw EmptyInput("no visible annotated objects");
  return series;
}

double overlap_coefficient(const ScatterSeries& a, const ScatterSeries& b, std::size_t bins) {
  if (a.points.empty() || b.points.empty()) throw EmptyInput("overlap of an empty series");
  if (a.quantity != b.quantity) throw QuantityMismatch("series carry different quantities");
  if (bins == 0) throw ConfigError("overlap needs at least one bin");

  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  double xmin = vmin, xmax = -vmin;
  for (const auto* s : {&a, &b}) {
    for (const auto& p : s->points) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
      xmin = std::min(xmin, p.value);
      xmax = std::max(xmax, p.value);
    }
  }
  const auto [v0, v1] = padded_range(vmin, vmax, bins);
  const auto [x0, x1] = padded_range(xmin, xmax, bins);

  const auto density = [&](const ScatterSeries& s) {
    std::vector<double> cells(bins * bins, 0.0);
    const double w = 1.0 / static_cast<double>(s.points.size());
    for (const auto& p : s.points) {
      cells[bin_index(p.v, v0, v1, bins) * bins + bin_index(p.value, x0, x1, bins)] += w;
    }
    return cells;
  };
  const auto da = density(a);
  const auto db = density(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) sum += std::min(da[i], db[i]);
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<MountOffset> sample_mount_offsets(std::size_t frames, double sigma,
                                              std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  std::vector<MountOffset> out(frames);
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  const auto draw = [&] {
    for (;;) {
      const double x = normal(rng);
      if (std::abs(x) <= 3.0 * sigma) return x;
    }
  };
  for (auto& o : out) {
    o.droll = draw();
    o.dpitch = draw();
  }
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_real(h.edge(i)) + "," + format_real(h.edge(i + 1)) + "," +
           std::to_string(h.counts()[i]) + "\n";
  }
  return out;
}

std::string scatter_csv(std::span<const ScatterSeries> series) {
  std::string out = "frame_id,v,value,condition\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += p.frame_id + "," + format_real(p.v) + "," + format_real(p.value) + "," +
             std::string(to_string(s.condition)) + "\n";
    }
  }
  return out;
}

namespace {

constexpr double kSvgWidth = 640.0;
constexpr double kSvgHeight = 400.0;
constexpr double kMargin = 48.0;

std::string svg_header(std::string_view title) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
      << kSvgHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"24\">" << title << "</text>\n"
      << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kSvgWidth - 2 * kMargin << "\" height=\"" << kSvgHeight - 2 * kMargin
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  return out.str();
}

}  // namespace

std::string histogram_svg(const Histogram& h, std::string_view title) {
  std::ostringstream out;
  out << svg_header(title);
  const auto peak = std::max<std::uint64_t>(1, *std::max_element(h.counts().begin(), h.counts().end()));
  const double plot_w = kSvgWidth - 2 * kMargin;
  const double plot_h = kSvgHeight - 2 * kMargin;
  const double bar_w = plot_w / static_cast<double>(h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double bh = plot_h * static_cast<double>(h.counts()[i]) / static_cast<double>(peak);
    out << "<rect x=\"" << kMargin + bar_w * static_cast<double>(i) << "\" y=\""
        << kMargin + plot_h - bh << "\" width=\"" << bar_w << "\" height=\"" << bh
        << "\" fill=\"steelblue\"/>\n";
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kSvgHeight - 16 << "\">" << format_real(h.lo())
      << "</text>\n<text x=\"" << kSvgWidth - kMargin << "\" y=\"" << kSvgHeight - 16
      << "\" text-anchor=\"end\">" << format_real(h.hi()) << "</text>\n</svg>\n";
  return out.str();
}

std::string scatter_svg(std::span<const ScatterSeries> series, std::string_view title) {
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin, xmin = vmin, xmax = -vmin;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
      xmin = std::min(xmin, p.value);
      xmax = std::max(xmax, p.value);
    }
  }
  std::ostringstream out;
  out << svg_header(title);
  if (vmin <= vmax) {
    const auto [v0, v1] = padded_range(vmin, vmax, 1);
    const auto [x0, x1] = padded_range(xmin, xmax, 1);
    const double plot_w = kSvgWidth - 2 * kMargin;
    const double plot_h = kSvgHeight - 2 * kMargin;
    for (const auto& s : series) {
      const char* color = s.condition == Condition::kClean ? "darkorange" : "royalblue";
      for (const auto& p : s.points) {
        out << "<circle cx=\"" << kMargin + plot_w * (p.v - v0) / (v1 - v0) << "\" cy=\""
            << kMargin + plot_h * (1.0 - (p.value - x0) / (x1 - x0)) << "\" r=\"2\" fill=\""
            << color << "\" fill-opacity=\"0.6\"/>\n";
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gpk
