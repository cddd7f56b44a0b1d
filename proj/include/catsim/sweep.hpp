#pragma once

// Parameter sweeps over (n_mean, R, a, sign), CSV output, and the report that
// compares the closed forms (as printed and as corrected) with simulation.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "catsim/closed_form.hpp"
#include "catsim/config.hpp"

namespace catsim {

inline constexpr const char *csv_header =
    "n_mean,R,a,sign,mu,d,I_closed,Bmax_closed,thI,thIp,thII,thIIp,I_oracle,Bmax_oracle,herald_prob,status";

struct SurfaceRecord {
    double n_mean = 0.0;
    double R = 0.0;
    double a = 1.0;
    Sign sign = Sign::minus;
    std::optional<double> mu, d, I_closed, Bmax_closed;
    std::optional<BellAngles> Bmax_angles;
    std::optional<double> I_oracle, Bmax_oracle;
    std::optional<double> herald_prob;
    // "ok", or '|'-separated flags: unsupported, leakage, above_tsirelson, error:<message>
    std::string status = "ok";
};

/// One grid point; never throws, problems end up in `status`.
SurfaceRecord evaluate_point(double n_mean, double R, double a, Sign sign, SweepEngine engine);

/// Evaluates every grid point on `threads` workers; the result is ordered by
/// (n_mean, R, a, sign) with + before -.
std::vector<SurfaceRecord> surface_sweep(const SweepSpec &spec, unsigned threads = 1);

void write_csv(const std::vector<SurfaceRecord> &records, std::ostream &out);
void emit_csv(const std::vector<SurfaceRecord> &records, const std::string &path);
std::vector<SurfaceRecord> parse_csv(std::istream &in);

/// "%.9g"
std::string format_double(double v);

struct ValidationRow {
    double n_mean = 0.0, R = 0.0, a = 1.0;
    Sign sign = Sign::minus;
    double mu = 0.0, d = 0.0, d_printed = 0.0;
    SpectrumPair corrected, printed;
    double oracle_p1 = 0.0, oracle_p2 = 0.0, oracle_p1r = 0.0, oracle_p2r = 0.0;
    double spectrum_err_corrected = 0.0, spectrum_err_printed = 0.0;
    double I_corrected = 0.0, I_printed = 0.0, I_oracle = 0.0;
    // max |C_oracle + C_closed| over a 5x5 angle grid, per N3 form
    double C_err_squared = 0.0, C_err_printed = 0.0;
    double B_ref_closed = 0.0, B_ref_printed_n3 = 0.0, B_ref_oracle = 0.0;
    double Bmax_closed = 0.0;
    std::optional<double> Bmax_oracle;
    std::optional<double> I_asymptotic, B_asymptotic;
    std::string status = "ok";
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    double exact_spectrum_err = 0.0; // corrected vs oracle, dephasing-only rows
    double exact_I_err = 0.0;
    double printed_deviation = 0.0; // printed vs oracle at mu = e^-1, a = 0.5
    bool printed_point_found = false;
    double n3_err_squared = 0.0, n3_err_printed = 0.0; // at n_mean = 9
    bool n3_point_found = false;
    std::string text;
};

ValidationReport validate(const SweepSpec &spec, unsigned threads = 1);

} // namespace catsim
