#include <doctest.h>

#include <cmath>
#include <sstream>

#include "catsim/sweep.hpp"

using namespace catsim;

namespace {

const double ln2 = std::log(2.0);
const double tsirelson = 2.0 * std::sqrt(2.0);

std::string csv_of(const std::vector<SurfaceRecord> &r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

bool close_opt(const std::optional<double> &a, const std::optional<double> &b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || std::abs(*a - *b) <= 1e-8 * std::max(1.0, std::abs(*a));
}

} // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config("# one point\n[apparatus]\nn_mean = 4\nR = 0.01\na = 0.5\nsign = minus\n"
                                "[sweep]\nn_mean = 1\nR = 0\n[bell]\nthetaII = 0.3\n");
    CHECK(std::abs(c.apparatus.alpha2.real() - 2.0) < 1e-15);
    CHECK(c.apparatus.alpha3 == c.apparatus.alpha2);
    CHECK(c.apparatus.loss(ModeId::m23) == 0.01);
    CHECK(c.apparatus.loss(ModeId::m12) == 0.0);
    CHECK(c.apparatus.env_overlap_a == 0.5);
    CHECK(c.apparatus.herald == Herald::D2);
    REQUIRE(c.sweep);
    CHECK(c.sweep->n_mean_grid == std::vector<double>{1.0});
    CHECK(c.sweep->R_grid == std::vector<double>{0.0});
    REQUIRE(c.angles);
    CHECK(c.angles->thetaII == 0.3);

    auto message = [](const std::string &text) {
        try {
            parse_config(text, "f.cfg");
        } catch (const ConfigError &e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("[apparatus]\nR = 1.5\n").find("R") != std::string::npos);
    CHECK(message("[apparatus]\nbogus = 1\n").find("f.cfg:2") != std::string::npos);
    CHECK(message("[nope]\n").find("f.cfg:1") != std::string::npos);
    CHECK(message("[sweep]\nn_mean =\n") != "no error");
    CHECK(message("[sweep]\nR = 0, 2\n").find("R") != std::string::npos);
    CHECK(message("[apparatus]\nn_mean = 1\nn_mean = 2\n") != "no error");
    CHECK(message("[sweep]\nn_mean = 3\nengine = fock\n") != "no error");
    CHECK(message("n_mean = 1\n") != "no error");

    const auto g = parse_grid("0.25:0.25:1, 3", "n_mean");
    CHECK(g == std::vector<double>{0.25, 0.5, 0.75, 1.0, 3.0});
    CHECK_THROWS_AS(parse_grid("", "n_mean"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:0:2", "n_mean"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), IoError);
}

TEST_CASE("default grids") {
    const auto s = SweepSpec::surface_default();
    CHECK(s.n_mean_grid.size() == 80);
    CHECK(s.n_mean_grid.front() == 0.25);
    CHECK(s.n_mean_grid.back() == 20.0);
    CHECK(s.R_grid.size() == 41);
    CHECK(s.R_grid.front() == 0.0);
    CHECK(std::abs(s.R_grid.back() - 0.5) < 1e-15);
    CHECK(s.signs() == std::vector<Sign>{Sign::plus, Sign::minus});
    CHECK_NOTHROW(s.validate());
    CHECK_NOTHROW(SweepSpec::validation_default().validate());
}

TEST_CASE("grid points") {
    auto r = evaluate_point(9.0, 0.0, 1.0, Sign::minus, SweepEngine::closed);
    CHECK(r.status == "ok");
    CHECK(std::abs(*r.I_closed - 2 * ln2) < 1e-6);
    CHECK(std::abs(*r.Bmax_closed - tsirelson) < 1e-6);
    CHECK(!r.I_oracle);

    r = evaluate_point(0.0, 0.0, 1.0, Sign::plus, SweepEngine::closed);
    CHECK(std::abs(*r.I_closed) < 1e-12);
    r = evaluate_point(0.0, 0.0, 1.0, Sign::minus, SweepEngine::closed);
    CHECK(r.status.rfind("error:", 0) == 0);
    CHECK(r.status.find(',') == std::string::npos);

    // the entangled part fades with loss at large amplitude
    r = evaluate_point(40.0, 0.1, 1.0, Sign::minus, SweepEngine::closed);
    const double g = std::exp(-8.0);
    CHECK(std::abs(*r.I_closed - ln2) < 1e-3);
    CHECK(std::abs(*r.d - g) < 1e-12);
    CHECK(*r.Bmax_closed <= 2 * std::sqrt(1 + g * g) + 1e-9);

    r = evaluate_point(1.0, 0.0, 0.5, Sign::plus, SweepEngine::branch);
    CHECK(r.status == "ok");
    CHECK(std::abs(*r.I_oracle - *r.I_closed) < 1e-9);
    REQUIRE(r.Bmax_oracle);
    CHECK(*r.Bmax_oracle <= tsirelson + 1e-6);
    CHECK(std::abs(*r.herald_prob - (1 + std::exp(-2.0) * 0.5) / 2) < 1e-12);

    r = evaluate_point(1.0, 0.1, 0.5, Sign::plus, SweepEngine::branch);
    CHECK(r.status.find("unsupported") != std::string::npos);
    CHECK(!r.I_closed);
    CHECK(r.I_oracle);

    const auto f = evaluate_point(1.0, 0.05, 1.0, Sign::minus, SweepEngine::fock);
    const auto b = evaluate_point(1.0, 0.05, 1.0, Sign::minus, SweepEngine::branch);
    CHECK(std::abs(*f.I_oracle - *b.I_oracle) < 1e-6);
    CHECK(std::abs(*f.Bmax_oracle - *b.Bmax_oracle) < 1e-6);
}

TEST_CASE("CSV contract") {
    CHECK(csv_of({}) == std::string(csv_header) + "\n");

    SweepSpec spec;
    spec.n_mean_grid = {9.0, 0.5};
    spec.R_grid = {0.02, 0.0};
    spec.a_grid = {1.0};
    spec.sign = SignChoice::both;
    const auto recs = surface_sweep(spec, 3);
    REQUIRE(recs.size() == 8);
    CHECK(recs[0].n_mean == 0.5);
    CHECK(recs[0].R == 0.0);
    CHECK(recs[0].sign == Sign::plus);
    CHECK(recs[1].sign == Sign::minus);
    CHECK(recs[7].n_mean == 9.0);

    const auto text = csv_of(recs);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text == csv_of(surface_sweep(spec, 1)));
    CHECK(text.find("1.38629436") != std::string::npos);

    std::istringstream in(text);
    const auto back = parse_csv(in);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].n_mean == recs[i].n_mean);
        CHECK(back[i].sign == recs[i].sign);
        CHECK(close_opt(back[i].I_closed, recs[i].I_closed));
        CHECK(close_opt(back[i].Bmax_closed, recs[i].Bmax_closed));
        CHECK(close_opt(back[i].I_oracle, recs[i].I_oracle));
        CHECK(back[i].status == recs[i].status);
    }
    CHECK(csv_of(back) == text);

    std::istringstream bad("n_mean,R\n1,2\n");
    CHECK_THROWS_AS(parse_csv(bad), StructuralError);
    CHECK_THROWS_AS(emit_csv(recs, "/nonexistent/dir/out.csv"), IoError);
    CHECK(format_double(2 * ln2) == "1.38629436");
}

TEST_CASE("validation report") {
    SweepSpec spec;
    spec.n_mean_grid = {1.0, 9.0};
    spec.R_grid = {0.0};
    spec.a_grid = {0.5, 1.0};
    spec.sign = SignChoice::both;
    spec.engine = SweepEngine::branch;
    const auto rep = validate(spec);
    CHECK(rep.rows.size() == 8);
    CHECK(rep.exact_spectrum_err < 1e-9);
    CHECK(rep.exact_I_err < 1e-9);
    REQUIRE(rep.printed_point_found);
    CHECK(rep.printed_deviation > 1e-3);
    REQUIRE(rep.n3_point_found);
    CHECK(rep.n3_err_squared < 5e-3);
    CHECK(rep.text.find("[table]") != std::string::npos);
    // with negligible overlap the two one-side denominators coincide
    for (const auto &row : rep.rows)
        if (row.a == 1.0 && row.n_mean == 9.0) {
            const auto p = spectra_printed(row.mu, row.d, row.sign);
            CHECK(std::abs(p.p1r - row.corrected.p1r) < row.mu);
            CHECK(std::abs(row.I_corrected - row.I_oracle) < 1e-9);
        }
}
