#pragma once

#include <array>
#include <string>

#include "catsim/errors.hpp"

namespace catsim {

// Mode labels of the entangling apparatus. 12-15 carry the single photon
// (occupancy 0 or 1), 21-25 and 31-35 carry coherent fields.
enum class ModeId : int {
    m12 = 12, m13 = 13, m14 = 14, m15 = 15,
    m21 = 21, m22 = 22, m23 = 23, m24 = 24, m25 = 25,
    m31 = 31, m32 = 32, m33 = 33, m34 = 34, m35 = 35,
};

enum class ModeKind { photon, field };

inline constexpr std::array<ModeId, 14> all_modes = {
    ModeId::m12, ModeId::m13, ModeId::m14, ModeId::m15,
    ModeId::m21, ModeId::m22, ModeId::m23, ModeId::m24, ModeId::m25,
    ModeId::m31, ModeId::m32, ModeId::m33, ModeId::m34, ModeId::m35,
};

constexpr int label(ModeId m) { return static_cast<int>(m); }

constexpr ModeKind kind_of(ModeId m) { return label(m) < 20 ? ModeKind::photon : ModeKind::field; }

inline ModeId mode_from_label(int l) {
    for (ModeId m : all_modes)
        if (label(m) == l) return m;
    throw StructuralError("unknown mode label " + std::to_string(l));
}

inline std::string to_string(ModeId m) { return std::to_string(label(m)); }

} // namespace catsim
