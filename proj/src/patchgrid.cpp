#include "nbnlkit/patchgrid.hpp"

#include <cmath>

#include "nbnlkit/rng.hpp"

namespace nbnlkit {

namespace {

// Grid positions along one axis: multiples of the stride plus a final
// position clamped to the far edge when the stride does not divide the span.
std::vector<int> axis_positions(int span, int stride) {
  std::vector<int> out;
  for (int p = 0; p <= span; p += stride) out.push_back(p);
  if (out.back() != span) out.push_back(span);
  return out;
}

std::size_t axis_count(int span, int stride) {
  return static_cast<std::size_t>(span / stride) + 1 +
         (span % stride != 0 ? 1 : 0);
}

}  // namespace

std::vector<PatchSpec> plan_patches(int width, int height,
                                    const PatchPlanConfig& config,
                                    std::vector<std::string>* warnings) {
  if (config.min_patch != 16 && config.min_patch != 32 &&
      config.min_patch != 64) {
    throw InvalidParameter("plan_patches: min_patch must be 16, 32 or 64");
  }
  if (config.levels < 1) {
    throw InvalidParameter("plan_patches: levels must be >= 1");
  }
  if (config.target_patches < 1) {
    throw InvalidParameter("plan_patches: target_patches must be >= 1");
  }
  if (width < config.min_patch || height < config.min_patch) {
    throw InvalidInput("plan_patches: image " + std::to_string(width) + "x" +
                       std::to_string(height) +
                       " is smaller than min_patch " +
                       std::to_string(config.min_patch));
  }

  std::vector<PatchSpec> specs;
  if (config.include_level0) {
    specs.push_back({0, width, height, 0, 0, 0.5, 0.5});
  }

  const double budget =
      static_cast<double>(config.target_patches) / config.levels;
  for (int level = 1; level <= config.levels; ++level) {
    const int size = config.min_patch << (level - 1);
    if (size > width || size > height) {
      if (warnings) {
        warnings->push_back("level " + std::to_string(level) + " patch size " +
                            std::to_string(size) + " exceeds image " +
                            std::to_string(width) + "x" +
                            std::to_string(height) + "; level dropped");
      }
      continue;
    }
    const int span_x = width - size;
    const int span_y = height - size;
    const int max_stride = std::max({span_x, span_y, 1});
    int stride = max_stride;
    for (int t = 1; t <= max_stride; ++t) {
      if (static_cast<double>(axis_count(span_x, t)) * axis_count(span_y, t) <=
          budget) {
        stride = t;
        break;
      }
    }
    for (int y0 : axis_positions(span_y, stride)) {
      for (int x0 : axis_positions(span_x, stride)) {
        specs.push_back({level, size, size, x0, y0,
                         (x0 + size / 2.0) / width,
                         (y0 + size / 2.0) / height});
      }
    }
  }
  return specs;
}

Vector DownsampleExtractor::extract(const GrayImage& patch) const {
  const GrayImage small = resize_bilinear(patch, 8, 8);
  Vector v(64);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      v[y * 8 + x] = static_cast<double>(small.at(x, y));
    }
  }
  return (v.array() - v.mean()).matrix();
}

RandprojExtractor::RandprojExtractor(int dim, std::uint64_t seed) {
  if (dim < 1) {
    throw InvalidParameter("RandprojExtractor: dimension must be >= 1");
  }
  projection_.resize(256, dim);
  Rng rng(seed);
  for (Eigen::Index j = 0; j < projection_.cols(); ++j) {
    for (Eigen::Index i = 0; i < projection_.rows(); ++i) {
      projection_(i, j) = rng.normal() / 16.0;  // N(0, 1/256)
    }
  }
}

Vector RandprojExtractor::extract(const GrayImage& patch) const {
  const GrayImage small = resize_bilinear(patch, 16, 16);
  Vector v(256);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      v[y * 16 + x] = static_cast<double>(small.at(x, y));
    }
  }
  return projection_.transpose() * v;
}

FeatureBag extract_bag(const GrayImage& image, const std::string& image_id,
                       const PatchPlanConfig& config,
                       const DescriptorExtractor& extractor,
                       const StandardizationStats* stats,
                       bool force_unit_norm,
                       std::vector<std::string>* warnings) {
  const GrayImage resized = resize_longest_side(image, 200);
  const std::vector<PatchSpec> specs =
      plan_patches(resized.width, resized.height, config, warnings);

  const int feature_dim = extractor.dim();
  if (stats && stats->dim() != feature_dim) {
    throw InvalidInput("extract_bag: standardization stats have dimension " +
                       std::to_string(stats->dim()) + ", extractor '" +
                       extractor.name() + "' produces " +
                       std::to_string(feature_dim));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(specs.size());
  Matrix features(n, feature_dim);
  Matrix positions(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PatchSpec& spec = specs[static_cast<std::size_t>(i)];
    Vector desc;
    try {
      desc = extractor.extract(
          crop(resized, spec.x0, spec.y0, spec.width, spec.height));
    } catch (const std::exception& e) {
      throw Error("extract_bag: extractor '" + extractor.name() +
                  "' failed on patch level=" + std::to_string(spec.level) +
                  " size=" + std::to_string(spec.width) + "x" +
                  std::to_string(spec.height) + " at (" +
                  std::to_string(spec.x0) + "," + std::to_string(spec.y0) +
                  "): " + e.what());
    }
    if (desc.size() != feature_dim) {
      throw Error("extract_bag: extractor '" + extractor.name() +
                  "' returned dimension " + std::to_string(desc.size()));
    }
    if (stats) {
      desc = (desc - stats->mean).cwiseQuotient(stats->stddev);
    }
    features.row(i) = (force_unit_norm ? unit_norm(desc) : cap_norm(desc))
                          .transpose();
    positions(i, 0) = spec.cx;
    positions(i, 1) = spec.cy;
  }

  FeatureBag bag;
  bag.image_id = image_id;
  bag.positions = positions;
  if (config.position_weight > 0.0) {
    bag.patches.resize(n, feature_dim + 2);
    bag.patches.leftCols(feature_dim) = features;
    bag.patches.rightCols(2) = config.position_weight * positions;
  } else {
    bag.patches = std::move(features);
  }
  return bag;
}

}  // namespace nbnlkit
