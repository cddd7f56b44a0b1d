// catsim: command-line driver for the entangling-apparatus simulator.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "catsim/analysis.hpp"
#include "catsim/closed_form.hpp"
#include "catsim/config.hpp"
#include "catsim/sweep.hpp"

using namespace catsim;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string engine;
    std::string sign;
    unsigned threads = 1;
};

const char *engine_name(Engine e) { return e == Engine::branch ? "branch" : "fock"; }

void write_output(const std::string &text, const std::string &path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    if (!f) throw IoError("error while writing " + path);
}

RunConfig load(const Options &o) {
    RunConfig rc = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.config.empty()) rc.apparatus = ApparatusConfig::symmetric(9.0);
    if (!o.sign.empty()) {
        rc.apparatus.herald = o.sign == "plus" ? Herald::D1 : Herald::D2;
        if (rc.sweep) rc.sweep->sign = o.sign == "plus" ? SignChoice::plus : SignChoice::minus;
    }
    if (!o.engine.empty()) {
        if (o.engine == "fock") rc.apparatus.engine = Engine::fock;
        if (o.engine == "branch") rc.apparatus.engine = Engine::branch;
    }
    return rc;
}

SweepSpec sweep_spec(const Options &o, const RunConfig &rc, SweepSpec fallback) {
    SweepSpec s = rc.sweep ? *rc.sweep : fallback;
    if (!o.sign.empty()) s.sign = o.sign == "plus" ? SignChoice::plus : SignChoice::minus;
    if (o.engine == "closed") s.engine = SweepEngine::closed;
    if (o.engine == "branch") s.engine = SweepEngine::branch;
    if (o.engine == "fock") s.engine = SweepEngine::fock;
    try {
        s.validate();
    } catch (const ConfigError &e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    return s;
}

std::string line(const std::string &key, double v) { return key + " = " + format_double(v) + "\n"; }

std::optional<DisturbanceParams> params_if_any(const ApparatusConfig &cfg) {
    try {
        return disturbance_params(cfg);
    } catch (const UnsupportedScenario &) {
        return std::nullopt;
    }
}

std::string cmd_state(const RunConfig &rc) {
    std::ostringstream s;
    const auto &cfg = rc.apparatus;
    const auto h = run_apparatus(cfg);
    s << "engine = " << engine_name(cfg.engine) << "\n";
    s << "herald = " << (cfg.herald == Herald::D1 ? "D1" : "D2") << "\n";
    s << line("herald_prob", h.herald_prob);
    s << line("side_amplitude_I", std::abs(h.side_amplitude[0]));
    s << line("side_amplitude_II", std::abs(h.side_amplitude[1]));
    std::vector<double> global;
    if (h.is_branch()) {
        s << "branches = " << h.branch().size() << "\n";
        global = spectrum_from_branches(h.branch(), {ModeId::m24, ModeId::m25, ModeId::m34, ModeId::m35}).eigenvalues;
    } else {
        s << "ensemble_members = " << h.fock().members().size() << "\n";
        const auto ev = h.fock().spectrum();
        global.assign(ev.data(), ev.data() + ev.size());
    }
    std::sort(global.begin(), global.end(), std::greater<>());
    s << "spectrum =";
    for (double p : global)
        if (p > 1e-14) s << ' ' << format_double(p);
    s << "\n";
    if (auto p = params_if_any(cfg)) s << line("mu", p->mu) << line("d", p->d);
    for (int side : {1, 2}) s << line("leakage_side_" + std::to_string(side), rotation_leakage(h, side));
    return s.str();
}

std::string cmd_mi(const RunConfig &rc, const std::string &engine) {
    std::ostringstream s;
    if (auto p = params_if_any(rc.apparatus)) s << line("I_closed", mutual_information(p->mu, p->d, p->sign));
    if (engine != "closed") s << line("I_oracle", mutual_information_oracle(run_apparatus(rc.apparatus)));
    return s.str();
}

std::string angles_text(const BellAngles &a) {
    return format_double(a.thetaI) + " " + format_double(a.thetaI_prime) + " " + format_double(a.thetaII) + " " +
           format_double(a.thetaII_prime);
}

std::string cmd_bell(const RunConfig &rc, const std::string &engine) {
    std::ostringstream s;
    const auto p = params_if_any(rc.apparatus);
    if (p) {
        const auto b = bell_max(p->mu, p->d, p->sign);
        s << line("Bmax_closed", b.value) << "angles_closed = " << angles_text(b.angles) << "\n";
        s << line("B_reference_closed", bell_factor(reference_angles(p->sign), p->mu, p->d, p->sign));
        if (rc.angles) s << line("B_closed", bell_factor(*rc.angles, p->mu, p->d, p->sign));
    }
    if (engine != "closed") {
        const auto h = run_apparatus(rc.apparatus);
        const auto b = bell_max_oracle(h);
        s << line("Bmax_oracle", b.value) << "angles_oracle = " << angles_text(b.angles) << "\n";
        s << line("B_reference_oracle", bell_oracle(h, reference_angles(sign_of(rc.apparatus.herald))));
        if (rc.angles) s << line("B_oracle", bell_oracle(h, *rc.angles));
    }
    return s.str();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Coherent-state entangling apparatus: simulation, closed forms and parameter sweeps"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App *c) {
        c->add_option("--config", o.config, "configuration file");
        c->add_option("--out", o.out, "output file (default: stdout)");
        c->add_option("--engine", o.engine, "closed, branch or fock")
            ->check(CLI::IsMember({"closed", "branch", "fock"}));
        c->add_option("--sign", o.sign, "plus (D1) or minus (D2)")->check(CLI::IsMember({"plus", "minus"}));
        c->add_option("--threads", o.threads, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
    };
    auto *state = app.add_subcommand("state", "summary of one heralded state");
    auto *mi = app.add_subcommand("mi", "mutual information");
    auto *bell = app.add_subcommand("bell", "Bell factor and its maximum");
    auto *surface = app.add_subcommand("surface", "sweep over (n_mean, R) and write CSV");
    auto *val = app.add_subcommand("validate", "compare closed forms with simulation");
    for (auto *c : {state, mi, bell, surface, val}) add_common(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const RunConfig rc = load(o);
        if (state->parsed()) {
            write_output(cmd_state(rc), o.out);
        } else if (mi->parsed()) {
            write_output(cmd_mi(rc, o.engine.empty() ? "branch" : o.engine), o.out);
        } else if (bell->parsed()) {
            write_output(cmd_bell(rc, o.engine.empty() ? "branch" : o.engine), o.out);
        } else if (surface->parsed()) {
            const auto records = surface_sweep(sweep_spec(o, rc, SweepSpec::surface_default()), o.threads);
            if (o.out.empty())
                write_csv(records, std::cout);
            else
                emit_csv(records, o.out);
        } else if (val->parsed()) {
            write_output(validate(sweep_spec(o, rc, SweepSpec::validation_default()), o.threads).text, o.out);
        }
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
