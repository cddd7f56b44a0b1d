#include "catsim/chsh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace catsim {

namespace {

using Quad = std::array<double, 4>;

double wrap_pi(double x) {
    double r = std::fmod(x, std::numbers::pi);
    if (r < 0.0) r += std::numbers::pi;
    return r;
}

// distance between two angles modulo pi
double dist_pi(double x, double y) { return std::abs(std::remainder(x - y, std::numbers::pi)); }

Quad to_quad(const BellAngles &a) { return {a.thetaI, a.thetaI_prime, a.thetaII, a.thetaII_prime}; }

bool same_mod_pi(const Quad &a, const Quad &b) {
    for (int k = 0; k < 4; ++k)
        if (dist_pi(a[k], b[k]) > 1e-12) return false;
    return true;
}

// Discrete symmetries of |B|. Adding pi/2 to an angle flips the sign of that
// party's outcome for that setting.
std::vector<Quad> orbit(const Quad &start) {
    constexpr double h = std::numbers::pi / 2;
    const std::array<Quad (*)(const Quad &), 6> gens = {
        [](const Quad &q) { return Quad{q[1], q[0], q[2], q[3] + h}; },
        [](const Quad &q) { return Quad{q[0], q[1] + h, q[3], q[2]}; },
        [](const Quad &q) { return Quad{q[2], q[3], q[0], q[1]}; },
        [](const Quad &q) { return Quad{-q[0], -q[1], q[2], q[3]}; },
        [](const Quad &q) { return Quad{q[0], q[1], -q[2], -q[3]}; },
        [](const Quad &q) { return Quad{q[0] + h, q[1] + h, q[2], q[3]}; },
    };
    std::vector<Quad> out{start};
    for (std::size_t i = 0; i < out.size() && out.size() < 4096; ++i) {
        for (auto g : gens) {
            Quad n = g(out[i]);
            for (auto &x : n) x = wrap_pi(x);
            if (std::none_of(out.begin(), out.end(), [&](const Quad &o) { return same_mod_pi(o, n); }))
                out.push_back(n);
        }
    }
    return out;
}

double quad_distance(const Quad &f, const Quad &r, ShiftSymmetry shift) {
    if (shift == ShiftSymmetry::none) {
        double m = 0.0;
        for (int k = 0; k < 4; ++k) m = std::max(m, dist_pi(f[k], r[k]));
        return m;
    }
    // Best shift: circular mean of the differences on the 2*angle circle.
    const std::array<double, 4> sgn = shift == ShiftSymmetry::common ? std::array<double, 4>{1, 1, 1, 1}
                                                                     : std::array<double, 4>{1, 1, -1, -1};
    double cs = 0.0, sn = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double delta = sgn[k] * (f[k] - r[k]);
        cs += std::cos(2 * delta);
        sn += std::sin(2 * delta);
    }
    const double c = 0.5 * std::atan2(sn, cs);
    double m = 0.0;
    for (int k = 0; k < 4; ++k) m = std::max(m, dist_pi(f[k], r[k] + sgn[k] * c));
    return m;
}

} // namespace

double chsh_value(const CorrelationFn &c, const BellAngles &a) {
    return std::abs(c(a.thetaI, a.thetaII) + c(a.thetaI, a.thetaII_prime) + c(a.thetaI_prime, a.thetaII) -
                    c(a.thetaI_prime, a.thetaII_prime));
}

BellAngles reduce_mod_pi(const BellAngles &a) {
    return {wrap_pi(a.thetaI), wrap_pi(a.thetaI_prime), wrap_pi(a.thetaII), wrap_pi(a.thetaII_prime)};
}

BellResult maximize_chsh(const CorrelationFn &c, int grid) {
    const int n = grid;
    const double step = std::numbers::pi / n;
    std::vector<double> t(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(i * n + j)] = c(i * step, j * step);

    // For fixed (a, a'): B = S_b + D_b' with S_b = T[a][b] + T[a'][b] and
    // D_b = T[a][b] - T[a'][b], so the best (b, b') follows from the extremes.
    double best = -1.0;
    std::array<int, 4> arg{0, 0, 0, 0};
    for (int a = 0; a < n; ++a) {
        for (int ap = 0; ap < n; ++ap) {
            int smax = 0, smin = 0, dmax = 0, dmin = 0;
            double vsmax = -1e300, vsmin = 1e300, vdmax = -1e300, vdmin = 1e300;
            for (int b = 0; b < n; ++b) {
                const double ta = t[static_cast<std::size_t>(a * n + b)], tp = t[static_cast<std::size_t>(ap * n + b)];
                const double s = ta + tp, d = ta - tp;
                if (s > vsmax) { vsmax = s; smax = b; }
                if (s < vsmin) { vsmin = s; smin = b; }
                if (d > vdmax) { vdmax = d; dmax = b; }
                if (d < vdmin) { vdmin = d; dmin = b; }
            }
            if (vsmax + vdmax > best) {
                best = vsmax + vdmax;
                arg = {a, ap, smax, dmax};
            }
            if (-(vsmin + vdmin) > best) {
                best = -(vsmin + vdmin);
                arg = {a, ap, smin, dmin};
            }
        }
    }

    std::array<double, 4> x{arg[0] * step, arg[1] * step, arg[2] * step, arg[3] * step};
    auto eval = [&](const std::array<double, 4> &q) { return chsh_value(c, {q[0], q[1], q[2], q[3]}); };
    double fx = eval(x);
    for (double h = step / 2; h >= 1e-10; h /= 2) {
        bool improved = true;
        for (int iter = 0; improved && iter < 64; ++iter) {
            improved = false;
            for (int k = 0; k < 4; ++k) {
                for (double dir : {1.0, -1.0}) {
                    auto y = x;
                    y[k] += dir * h;
                    const double fy = eval(y);
                    if (fy > fx + 1e-15) {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
    }
    return {fx, reduce_mod_pi({x[0], x[1], x[2], x[3]})};
}

double angle_distance_mod_symmetry(const BellAngles &found, const BellAngles &reference, ShiftSymmetry shift) {
    const Quad f = to_quad(found);
    double best = 1e300;
    for (const auto &r : orbit(to_quad(reduce_mod_pi(reference)))) best = std::min(best, quad_distance(f, r, shift));
    return best;
}

} // namespace catsim
