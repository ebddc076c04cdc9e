#pragma once

#include "caplab/domain.hpp"

namespace caplab {

struct FraenkelOptions {
  int voxels = 128;      // per axis over the bounding cube
  int coarse = 7;        // candidate centers per axis
  int refine_rounds = 3;  // golden-section sweeps over x, y, z
};

struct FraenkelResult {
  double alpha = 0.0;
  Vec3 center = Vec3::Zero();  // optimal ball center
  double radius = 0.0;         // equal-volume radius
  double volume = 0.0;
};

/// inf over balls B with |B| = |Omega| of |Omega sym-diff B| / |Omega|, from
/// fractional voxel occupancies.
FraenkelResult fraenkel_asymmetry(const ImplicitDomain& domain, const FraenkelOptions& opts = {});

}  // namespace caplab
