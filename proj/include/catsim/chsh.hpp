#pragma once

// CHSH combination and a deterministic maximizer over the four measurement
// angles. Correlations of this apparatus are pi-periodic in every angle.

#include <functional>

namespace catsim {

struct BellAngles {
    double thetaI = 0.0;
    double thetaI_prime = 0.0;
    double thetaII = 0.0;
    double thetaII_prime = 0.0;
};

struct BellResult {
    double value = 0.0;
    BellAngles angles;
};

using CorrelationFn = std::function<double(double thetaI, double thetaII)>;

/// |C(a,b) + C(a,b') + C(a',b) - C(a',b')|
double chsh_value(const CorrelationFn &c, const BellAngles &angles);

/// Exhaustive search on a grid of `grid` points per angle over [0, pi),
/// followed by coordinate refinement with step halving down to 1e-10.
BellResult maximize_chsh(const CorrelationFn &c, int grid = 64);

/// Every angle reduced to [0, pi).
BellAngles reduce_mod_pi(const BellAngles &a);

/// Continuous invariances of C that the comparison may factor out.
enum class ShiftSymmetry {
    none,
    common,  // all four angles shifted together (C depends on thetaI - thetaII)
    counter, // side I shifted by +c, side II by -c (C depends on thetaI + thetaII)
};

/// Largest per-angle distance (mod pi) between `found` and the closest image
/// of `reference` under the discrete CHSH symmetries (swapping the primed and
/// unprimed angle of one side while flipping an outcome on the other, party
/// exchange, reflection of either side, outcome flips on a whole side),
/// optionally combined with a continuous shift.
double angle_distance_mod_symmetry(const BellAngles &found, const BellAngles &reference,
                                   ShiftSymmetry shift = ShiftSymmetry::none);

} // namespace catsim
