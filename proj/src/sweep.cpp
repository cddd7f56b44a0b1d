#include "catsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "catsim/analysis.hpp"

namespace catsim {

namespace {

constexpr double tsirelson = 2.0 * std::numbers::sqrt2;

std::string sanitize(std::string s) {
    for (auto &c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

void add_flag(std::string &status, const std::string &flag) {
    status = status == "ok" ? flag : status + "|" + flag;
}

bool mixed(double R, double a) { return R > 0.0 && a < 1.0; }

ApparatusConfig point_config(double n_mean, double R, double a, Sign sign, Engine engine) {
    auto cfg = ApparatusConfig::symmetric(n_mean, R, a, herald_of(sign));
    cfg.engine = engine;
    return cfg;
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F f) {
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
    };
    const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < t; ++k) pool.emplace_back(worker);
    worker();
    for (auto &th : pool) th.join();
    return out;
}

struct Point {
    double n_mean, R, a;
    Sign sign;
};

std::vector<Point> grid_points(const SweepSpec &spec) {
    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    std::vector<Point> pts;
    for (double n : sorted(spec.n_mean_grid))
        for (double R : sorted(spec.R_grid))
            for (double a : sorted(spec.a_grid))
                for (Sign s : spec.signs()) pts.push_back({n, R, a, s});
    return pts;
}

std::optional<double> parse_optional(const std::string &field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

double max_sorted_diff(std::array<double, 2> a, std::array<double, 2> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

std::array<double, 2> top_two(std::vector<double> ev) {
    std::sort(ev.begin(), ev.end(), std::greater<>());
    ev.resize(std::max<std::size_t>(ev.size(), 2), 0.0);
    return {ev[0], ev[1]};
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

SurfaceRecord evaluate_point(double n_mean, double R, double a, Sign sign, SweepEngine engine) {
    SurfaceRecord r;
    r.n_mean = n_mean;
    r.R = R;
    r.a = a;
    r.sign = sign;
    try {
        if (mixed(R, a)) {
            add_flag(r.status, "unsupported");
        } else {
            const auto p = disturbance_params(point_config(n_mean, R, a, sign, Engine::branch));
            r.mu = p.mu;
            r.d = p.d;
            r.herald_prob = herald_probability(p);
            r.I_closed = mutual_information(p.mu, p.d, p.sign);
            const auto b = bell_max(p.mu, p.d, p.sign);
            r.Bmax_closed = b.value;
            r.Bmax_angles = b.angles;
            if (b.value > tsirelson + 1e-6) add_flag(r.status, "above_tsirelson");
        }
        if (engine != SweepEngine::closed) {
            const auto h = run_apparatus(
                point_config(n_mean, R, a, sign, engine == SweepEngine::fock ? Engine::fock : Engine::branch));
            r.herald_prob = h.herald_prob;
            r.I_oracle = mutual_information_oracle(h);
            try {
                r.Bmax_oracle = bell_max_oracle(h).value;
            } catch (const RotationLeakage &) {
                add_flag(r.status, "leakage");
            }
        } else if (!r.herald_prob) {
            r.herald_prob = run_apparatus(point_config(n_mean, R, a, sign, Engine::branch)).herald_prob;
        }
    } catch (const std::exception &e) {
        add_flag(r.status, "error:" + sanitize(e.what()));
    }
    return r;
}

std::vector<SurfaceRecord> surface_sweep(const SweepSpec &spec, unsigned threads) {
    spec.validate();
    const auto pts = grid_points(spec);
    return parallel_map<SurfaceRecord>(pts.size(), threads, [&](std::size_t i) {
        return evaluate_point(pts[i].n_mean, pts[i].R, pts[i].a, pts[i].sign, spec.engine);
    });
}

void write_csv(const std::vector<SurfaceRecord> &records, std::ostream &out) {
    auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string(); };
    out << csv_header << '\n';
    for (const auto &r : records) {
        out << format_double(r.n_mean) << ',' << format_double(r.R) << ',' << format_double(r.a) << ','
            << sign_char(r.sign) << ',' << opt(r.mu) << ',' << opt(r.d) << ',' << opt(r.I_closed) << ','
            << opt(r.Bmax_closed) << ',';
        if (r.Bmax_angles) {
            const auto &g = *r.Bmax_angles;
            out << format_double(g.thetaI) << ',' << format_double(g.thetaI_prime) << ',' << format_double(g.thetaII)
                << ',' << format_double(g.thetaII_prime) << ',';
        } else {
            out << ",,,,";
        }
        out << opt(r.I_oracle) << ',' << opt(r.Bmax_oracle) << ',' << opt(r.herald_prob) << ',' << sanitize(r.status)
            << '\n';
    }
}

void emit_csv(const std::vector<SurfaceRecord> &records, const std::string &path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    write_csv(records, f);
    f.flush();
    if (!f) throw IoError("error while writing " + path);
}

std::vector<SurfaceRecord> parse_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header) throw StructuralError("CSV header mismatch");
    std::vector<SurfaceRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 16) throw StructuralError("CSV line " + std::to_string(line_no) + ": expected 16 fields");
        try {
            SurfaceRecord r;
            r.n_mean = std::stod(f[0]);
            r.R = std::stod(f[1]);
            r.a = std::stod(f[2]);
            if (f[3] != "+" && f[3] != "-") throw StructuralError("bad sign");
            r.sign = f[3] == "+" ? Sign::plus : Sign::minus;
            r.mu = parse_optional(f[4]);
            r.d = parse_optional(f[5]);
            r.I_closed = parse_optional(f[6]);
            r.Bmax_closed = parse_optional(f[7]);
            if (!f[8].empty())
                r.Bmax_angles = BellAngles{std::stod(f[8]), std::stod(f[9]), std::stod(f[10]), std::stod(f[11])};
            r.I_oracle = parse_optional(f[12]);
            r.Bmax_oracle = parse_optional(f[13]);
            r.herald_prob = parse_optional(f[14]);
            r.status = f[15];
            out.push_back(std::move(r));
        } catch (const std::logic_error &e) {
            throw StructuralError("CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------- validation

namespace {

ValidationRow validation_row(const Point &pt) {
    ValidationRow row;
    row.n_mean = pt.n_mean;
    row.R = pt.R;
    row.a = pt.a;
    row.sign = pt.sign;
    try {
        const auto cfg = point_config(pt.n_mean, pt.R, pt.a, pt.sign, Engine::branch);
        const auto p = disturbance_params(cfg);
        row.mu = p.mu;
        row.d = p.d;
        row.d_printed = pt.R > 0.0 ? p.d : printed_dephasing_d(pt.a);
        row.corrected = spectra(p.mu, p.d, p.sign);
        row.printed = spectra_printed(p.mu, row.d_printed, p.sign);

        const auto h = run_apparatus(cfg);
        const auto &s = h.branch();
        const auto g = top_two(spectrum_from_branches(s, {ModeId::m24, ModeId::m25, ModeId::m34, ModeId::m35}).eigenvalues);
        const auto r = top_two(spectrum_from_branches(s, {ModeId::m24, ModeId::m25}).eigenvalues);
        row.oracle_p1 = g[0];
        row.oracle_p2 = g[1];
        row.oracle_p1r = r[0];
        row.oracle_p2r = r[1];
        auto err = [&](const SpectrumPair &q) {
            return std::max(max_sorted_diff({q.p1, q.p2}, g), max_sorted_diff({q.p1r, q.p2r}, r));
        };
        row.spectrum_err_corrected = err(row.corrected);
        row.spectrum_err_printed = err(row.printed);
        row.I_corrected = mutual_information(row.corrected);
        row.I_printed = mutual_information(row.printed);
        row.I_oracle = mutual_information_oracle(h);

        // The simulated X Y correlation carries the opposite overall sign.
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const double t1 = i * std::numbers::pi / 5, t2 = j * std::numbers::pi / 5 + 0.1;
                const double co = correlation_oracle(h, t1, t2);
                row.C_err_squared = std::max(row.C_err_squared, std::abs(co + correlation(t1, t2, p.mu, p.d, p.sign, N3Form::squared)));
                row.C_err_printed = std::max(row.C_err_printed, std::abs(co + correlation(t1, t2, p.mu, p.d, p.sign, N3Form::printed)));
            }
        const auto ref = reference_angles(p.sign);
        row.B_ref_closed = bell_factor(ref, p.mu, p.d, p.sign, N3Form::squared);
        row.B_ref_printed_n3 = bell_factor(ref, p.mu, p.d, p.sign, N3Form::printed);
        row.B_ref_oracle = bell_oracle(h, ref);
        row.Bmax_closed = bell_max(p.mu, p.d, p.sign).value;
        row.Bmax_oracle = bell_max_oracle(h).value;
        const auto asym = pt.R > 0.0 ? asymptotic_loss(pt.R, pt.n_mean) : asymptotic_decoherence(pt.a);
        row.I_asymptotic = asym.I;
        row.B_asymptotic = asym.Bmax;
    } catch (const UnsupportedScenario &) {
        row.status = "unsupported";
    } catch (const std::exception &e) {
        row.status = "error:" + sanitize(e.what());
    }
    return row;
}

bool near(double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); }

} // namespace

ValidationReport validate(const SweepSpec &spec, unsigned threads) {
    spec.validate();
    std::vector<Point> pts;
    for (const auto &p : grid_points(spec))
        if (!mixed(p.R, p.a)) pts.push_back(p);
    ValidationReport rep;
    rep.rows = parallel_map<ValidationRow>(pts.size(), threads, [&](std::size_t i) { return validation_row(pts[i]); });

    for (const auto &r : rep.rows) {
        if (r.status != "ok") continue;
        if (r.R == 0.0) {
            rep.exact_spectrum_err = std::max(rep.exact_spectrum_err, r.spectrum_err_corrected);
            rep.exact_I_err = std::max(rep.exact_I_err, std::abs(r.I_corrected - r.I_oracle));
        }
        if (r.R == 0.0 && near(r.n_mean, 1.0) && near(r.a, 0.5)) {
            rep.printed_point_found = true;
            rep.printed_deviation = std::max({rep.printed_deviation, r.spectrum_err_printed,
                                              std::abs(r.I_printed - r.I_oracle)});
        }
        if (near(r.n_mean, 9.0)) {
            rep.n3_point_found = true;
            rep.n3_err_squared = std::max(rep.n3_err_squared, r.C_err_squared);
            rep.n3_err_printed = std::max(rep.n3_err_printed, r.C_err_printed);
        }
    }

    std::ostringstream t;
    auto f = format_double;
    t << "closed-form validation against the branch-engine simulation\n";
    t << "points: " << rep.rows.size() << "\n\n";
    t << "exact regime (dephasing only, any amplitude)\n";
    t << "  corrected spectra, max deviation: " << f(rep.exact_spectrum_err)
      << (rep.exact_spectrum_err <= 1e-9 ? "  [match within 1e-9]" : "  [MISMATCH]") << "\n";
    t << "  corrected I, max deviation:       " << f(rep.exact_I_err)
      << (rep.exact_I_err <= 1e-9 ? "  [match within 1e-9]" : "  [MISMATCH]") << "\n";
    if (rep.printed_point_found)
        t << "  printed variant (reduced denominators 2(1+-mu d), d = sqrt(1-a^2)) at mu = e^-1, a = 0.5: deviation "
          << f(rep.printed_deviation) << (rep.printed_deviation > 1e-3 ? "  [deviates]" : "  [agrees]") << "\n";
    t << "\nN3 form of the correlation (simulated C = -closed C), n_mean = 9, 5x5 angle grid\n";
    if (rep.n3_point_found) {
        const bool sq = rep.n3_err_squared <= 5e-3, pr = rep.n3_err_printed <= 5e-3;
        t << "  1 - mu^2 sin^2: max deviation " << f(rep.n3_err_squared) << (sq ? "  [match within 5e-3]" : "  [no match]")
          << "\n";
        t << "  1 - mu sin^2:   max deviation " << f(rep.n3_err_printed) << (pr ? "  [match within 5e-3]" : "  [no match]")
          << "\n";
        t << "  outcome: "
          << (sq && pr ? "both forms match at this amplitude; the squared form is kept"
                       : sq ? "squared form selected"
                            : pr ? "printed form selected" : "neither form matches")
          << "\n";
    } else {
        t << "  no n_mean = 9 point in the grid\n";
    }
    t << "\n[table]\n";
    t << "n_mean,R,a,sign,mu,d,d_printed,p1,p2,p1r,p2r,p1_printed,p2_printed,p1r_printed,p2r_printed,"
         "p1_oracle,p2_oracle,p1r_oracle,p2r_oracle,spec_err,spec_err_printed,I_closed,I_printed,I_oracle,"
         "C_err_squared,C_err_printed,B_ref_closed,B_ref_printed_n3,B_ref_oracle,Bmax_closed,Bmax_oracle,"
         "I_asymptotic,B_asymptotic,status\n";
    auto opt = [&](const std::optional<double> &v) { return v ? f(*v) : std::string(); };
    for (const auto &r : rep.rows) {
        t << f(r.n_mean) << ',' << f(r.R) << ',' << f(r.a) << ',' << sign_char(r.sign) << ',' << f(r.mu) << ','
          << f(r.d) << ',' << f(r.d_printed) << ',' << f(r.corrected.p1) << ',' << f(r.corrected.p2) << ','
          << f(r.corrected.p1r) << ',' << f(r.corrected.p2r) << ',' << f(r.printed.p1) << ',' << f(r.printed.p2)
          << ',' << f(r.printed.p1r) << ',' << f(r.printed.p2r) << ',' << f(r.oracle_p1) << ',' << f(r.oracle_p2)
          << ',' << f(r.oracle_p1r) << ',' << f(r.oracle_p2r) << ',' << f(r.spectrum_err_corrected) << ','
          << f(r.spectrum_err_printed) << ',' << f(r.I_corrected) << ',' << f(r.I_printed) << ',' << f(r.I_oracle)
          << ',' << f(r.C_err_squared) << ',' << f(r.C_err_printed) << ',' << f(r.B_ref_closed) << ','
          << f(r.B_ref_printed_n3) << ',' << f(r.B_ref_oracle) << ',' << f(r.Bmax_closed) << ','
          << opt(r.Bmax_oracle) << ',' << opt(r.I_asymptotic) << ',' << opt(r.B_asymptotic) << ',' << r.status
          << '\n';
    }
    rep.text = t.str();
    return rep;
}

} // namespace catsim
