#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lfdepth/descriptor.hpp"
#include "lfdepth/image.hpp"

namespace lfdepth {

struct Pyramid {
  std::vector<Image> levels;  // levels[0] is the input image
  double factor = 0.5;
};

// k levels, each ceil(previous * eta) in size, produced by a Gaussian
// prefilter followed by bilinear resampling. Throws SizeError when the
// coarsest level would be smaller than min_size in either dimension.
Pyramid build_pyramid(const Image& img, int levels, double eta, int min_size = 16);

// Number of levels (<= requested) whose coarsest level is at least min_size.
int feasible_levels(int width, int height, int requested, double eta, int min_size);

struct SeedPoint {
  int x = 0;
  int y = 0;
};

// Regular lattice of seeds, row-major; cols x rows lattice entries.
struct SeedGrid {
  int spacing = 3;
  int cols = 0;
  int rows = 0;
  int offset = 1;
  std::vector<SeedPoint> seeds;

  std::size_t size() const noexcept { return seeds.size(); }
};

SeedGrid make_seed_grid(int width, int height, int spacing);
// The same lattice with positions scaled to a pyramid level of the given size.
SeedGrid scale_seed_grid(const SeedGrid& grid, double scale, int width, int height);

struct SparseMatch {
  int x = 0;
  int y = 0;
  double u = 0.0;
  double v = 0.0;
  // Matching cost at the integer match (before sub-pixel refinement).
  double cost = 0.0;
  double confidence = 1.0;
};

struct SparseMatchSet {
  int width = 0;
  int height = 0;
  std::vector<SparseMatch> matches;
  std::uint64_t rng_seed = 0;
};

// SAD between descriptors summed over the patch x patch neighbourhoods
// centred on p1 and p2. Neighbour coordinates are clamped to each field.
double match_cost(const DescriptorField& desc1, SeedPoint p1, const DescriptorField& desc2, SeedPoint p2,
                  int patch = 3);

struct SearchParams {
  // Half-width of the search window around the seed: |u|, |v| <= radius.
  int radius = 8;
  // Restrict candidates to the horizontal epipolar line (v == 0).
  bool epipolar = true;
  int iterations = 6;
  int patch = 3;
  std::uint64_t seed = 0;
};

// Per-iteration cost snapshots, for checking monotone descent.
struct PatchMatchTrace {
  std::vector<double> initial;
  std::vector<std::vector<double>> per_iteration;
};

// Patch match over the seed lattice: alternating forward/backward scans with
// propagation from already-visited lattice neighbours, then random search with
// radius radius, radius/2, ..., 1. Without init, flows start uniformly random
// inside the window. Candidates are accepted only on strictly lower cost.
SparseMatchSet patchmatch_level(const DescriptorField& desc1, const DescriptorField& desc2, const SeedGrid& seeds,
                                const std::optional<SparseMatchSet>& init, const SearchParams& search,
                                PatchMatchTrace* trace = nullptr);

struct CpmParams {
  int levels = 5;
  double eta = 0.5;
  int patch = 3;
  int seed_spacing = 3;
  int iterations = 6;
  // Window radius at full resolution; 0 means the larger image dimension.
  int radius = 0;
  double tau_fb = 1.5;
  double sigma_c = 1.0;
  bool subpixel = true;
  bool epipolar = true;
  std::uint64_t rng_seed = 42;
  DescriptorParams descriptor;
};

// Descriptor pyramid of one view, reusable across the pairs it belongs to.
struct CpmFrame {
  std::vector<DescriptorField> levels;
  int width = 0;
  int height = 0;
};

// Levels are reduced to the deepest pyramid whose coarsest level still holds
// a full descriptor support.
CpmFrame make_cpm_frame(const Image& img, const CpmParams& params);

struct CpmPairResult {
  SparseMatchSet forward;   // raw matches I1 -> I2 on the seed lattice
  SparseMatchSet backward;  // raw matches I2 -> I1 on the same lattice
  SparseMatchSet filtered;  // forward matches passing the consistency check, with confidence
};

// Coarse-to-fine matching in both directions followed by the
// forward-backward consistency filter. Matches that moved onto the outermost
// column or row of I2 are dropped as clamped. `stream` selects an independent RNG
// stream derived from params.rng_seed.
CpmPairResult cpm_match_pair(const CpmFrame& f1, const CpmFrame& f2, const CpmParams& params,
                             std::uint64_t stream = 0);
SparseMatchSet cpm_match(const Image& i1, const Image& i2, const CpmParams& params, std::uint64_t stream = 0);

// |fwd(x) + bwd(x + fwd(x))|_1 per forward match, with bwd interpolated
// bilinearly over the seed lattice.
std::vector<double> forward_backward_difference(const SparseMatchSet& fwd, const SparseMatchSet& bwd,
                                                const SeedGrid& grid);

// exp(-difference / sigma_c) per forward match.
std::vector<double> flow_confidence(const SparseMatchSet& fwd, const SparseMatchSet& bwd, const SeedGrid& grid,
                                    double sigma_c);

// Rasterises per-match confidence; pixels without a match get 0.
Image confidence_map(const SparseMatchSet& matches);

// One line per match: "x y u v cost confidence".
void write_matches(std::ostream& out, const SparseMatchSet& matches);

}  // namespace lfdepth
