#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nbnlkit/core.hpp"
#include "nbnlkit/image.hpp"

namespace nbnlkit {

/// Multi-scale patch planning configuration. Level l (1-based) uses square
/// patches of side min_patch * 2^(l-1); level 0, when enabled, is one
/// whole-image patch. The per-level patch budget is target_patches / levels.
struct PatchPlanConfig {
  int min_patch = 32;        // {16, 32, 64}
  int levels = 3;
  int target_patches = 100;  // ~100 sparse, ~400 dense
  bool include_level0 = true;
  double position_weight = 1.0;
};

/// One planned patch. Width and height are equal for the square grid
/// levels; level 0 covers the whole (possibly non-square) image. (cx, cy)
/// is the patch center normalized to [0,1]^2.
struct PatchSpec {
  int level = 0;
  int width = 0;
  int height = 0;
  int x0 = 0;
  int y0 = 0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Computes the multi-scale patch grid for an image of the given size.
///
/// Each level lays a regular grid with one shared stride for both axes: the
/// smallest integer stride whose grid produces at most target/levels
/// patches. Grid positions step by the stride from the top-left corner and
/// the last row/column is clamped to the image edge, so the borders are
/// always covered. Levels whose patch size exceeds either image dimension
/// are dropped with a warning.
std::vector<PatchSpec> plan_patches(int width, int height,
                                    const PatchPlanConfig& config,
                                    std::vector<std::string>* warnings =
                                        nullptr);

/// Deterministic patch-to-descriptor map. Implementations must be pure:
/// the same patch pixels always produce the same descriptor, and extract()
/// must be safe to call concurrently.
class DescriptorExtractor {
 public:
  virtual ~DescriptorExtractor() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual Vector extract(const GrayImage& patch) const = 0;
};

/// Test-scale stand-in for CNN features: bilinear resize to 8x8, flatten
/// row-major, shift to zero mean over the 64 values.
class DownsampleExtractor final : public DescriptorExtractor {
 public:
  std::string name() const override { return "downsample"; }
  int dim() const override { return 64; }
  Vector extract(const GrayImage& patch) const override;
};

/// Dimension-configurable stand-in: resize to 16x16 and project by a seeded
/// Gaussian matrix (256 x dim, entries N(0, 1/256)). The projection is
/// built once and shared read-only.
class RandprojExtractor final : public DescriptorExtractor {
 public:
  RandprojExtractor(int dim, std::uint64_t seed);
  std::string name() const override { return "randproj"; }
  int dim() const override { return static_cast<int>(projection_.cols()); }
  Vector extract(const GrayImage& patch) const override;

 private:
  Matrix projection_;  // 256 x dim
};

/// Full extraction pipeline for one image:
/// resize to 200px longest side -> plan patches -> per-patch descriptor ->
/// optional standardization -> cap_norm (or unit_norm when forced) ->
/// optional position concatenation with the configured weight.
///
/// Normalized patch centers are always stored in the bag's positions
/// matrix, whether or not they are appended to the descriptors.
FeatureBag extract_bag(const GrayImage& image, const std::string& image_id,
                       const PatchPlanConfig& config,
                       const DescriptorExtractor& extractor,
                       const StandardizationStats* stats = nullptr,
                       bool force_unit_norm = false,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace nbnlkit
