#pragma once

// Mutual information and the Bell experiment evaluated directly on simulated
// heralded states: pseudo-spin rotations on each side, ideal yes/no detection
// of the four output modes, X = z24 - z25 and Y = z34 - z35.

#include <array>
#include <vector>

#include "catsim/apparatus.hpp"
#include "catsim/chsh.hpp"

namespace catsim {

/// I = S1 + S2 - S with side I = {24, 25} and side II = {34, 35}, in nats.
double mutual_information_oracle(const HeraldedState &h);

/// Linear extension of |A,0> -> cos t |A,0> + sin t |0,A>,
/// |0,A> -> -sin t |A,0> + cos t |0,A> on one side (1 or 2), followed by
/// renormalization of the whole state. Throws RotationLeakage when more than
/// 1e-8 of the weight lies outside span{|A,0>, |0,A>}.
HeraldedState rotate(const HeraldedState &h, int side, double theta);

/// Weight of the state outside the two-component span of one side.
double rotation_leakage(const HeraldedState &h, int side);

struct XYDistribution {
    // probs[X + 1][Y + 1]
    std::array<std::array<double, 3>, 3> probs{};

    double total() const;
    double correlation() const;
};

/// Joint yes/no statistics of 24, 25, 34, 35 after the rotations; index bit
/// (3 - i) is set when the i-th of those modes clicks.
std::vector<double> detection_probabilities(const HeraldedState &h, double thetaI, double thetaII);

XYDistribution xy_distribution(const HeraldedState &h, double thetaI, double thetaII);
double correlation_oracle(const HeraldedState &h, double thetaI, double thetaII);
double bell_oracle(const HeraldedState &h, const BellAngles &angles);
BellResult bell_max_oracle(const HeraldedState &h);

} // namespace catsim
