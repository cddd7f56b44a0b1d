#pragma once

// Plain-text run configuration:
//
//   # comment
//   [apparatus]
//   n_mean = 9
//   R = 0.01
//   [sweep]
//   n_mean = 0.25:0.25:20, 25
//
// Keys outside the known set are errors. Grid values are comma-separated
// numbers or start:step:stop ranges (stop included).

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "catsim/apparatus.hpp"
#include "catsim/chsh.hpp"

namespace catsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepEngine { closed, branch, fock };
enum class SignChoice { plus, minus, both };

struct SweepSpec {
    std::vector<double> n_mean_grid;
    std::vector<double> R_grid;
    std::vector<double> a_grid{1.0};
    SignChoice sign = SignChoice::minus;
    SweepEngine engine = SweepEngine::closed;

    /// n_mean = 0.25 k (k = 1..80), R = 0.0125 k (k = 0..40), a = 1, both signs.
    static SweepSpec surface_default();
    /// Points covering the exact and the large-amplitude regimes, both signs,
    /// branch engine.
    static SweepSpec validation_default();

    std::vector<Sign> signs() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
};

struct RunConfig {
    ApparatusConfig apparatus;
    std::optional<SweepSpec> sweep;
    std::optional<BellAngles> angles;
};

RunConfig parse_config(const std::string &text, const std::string &source = "<config>");
RunConfig load_config(const std::string &path);

std::vector<double> parse_grid(const std::string &value, const std::string &key);

} // namespace catsim
