#include "catsim/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace catsim {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string &text, const std::string &key) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(key + ": missing value");
    char *end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(key + ": not a number: '" + t + "'");
    return v;
}

void check_unit(double v, const std::string &key) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(key + ": value outside [0,1]");
}

void check_n_mean(double v, const std::string &key) {
    if (!(v >= 0.0)) throw ConfigError(key + ": must be non-negative");
}

Herald parse_herald(const std::string &v, const std::string &key) {
    if (v == "D1" || v == "d1") return Herald::D1;
    if (v == "D2" || v == "d2") return Herald::D2;
    throw ConfigError(key + ": expected D1 or D2");
}

const std::set<std::string> apparatus_keys = {"n_mean", "alpha2", "alpha3", "R",   "R12",    "R13",
                                              "R22",    "R23",    "R32",    "R33", "a",      "herald",
                                              "sign",   "engine", "cutoff", "tail_tolerance"};
const std::set<std::string> sweep_keys = {"n_mean", "R", "a", "sign", "engine"};
const std::set<std::string> bell_keys = {"thetaI", "thetaI_prime", "thetaII", "thetaII_prime"};

} // namespace

std::vector<double> parse_grid(const std::string &value, const std::string &key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.find(':') == std::string::npos) {
            out.push_back(parse_number(item, key));
            continue;
        }
        std::stringstream rs(item);
        std::string a, b, c;
        std::getline(rs, a, ':');
        std::getline(rs, b, ':');
        std::getline(rs, c);
        const double start = parse_number(a, key), step = parse_number(b, key), stop = parse_number(c, key);
        if (!(step > 0.0)) throw ConfigError(key + ": range step must be positive");
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        if (n < 0) throw ConfigError(key + ": empty range");
        if (n > 1000000) throw ConfigError(key + ": range too long");
        for (long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    }
    if (out.empty()) throw ConfigError(key + ": empty grid");
    return out;
}

SweepSpec SweepSpec::surface_default() {
    SweepSpec s;
    for (int k = 1; k <= 80; ++k) s.n_mean_grid.push_back(0.25 * k);
    for (int k = 0; k <= 40; ++k) s.R_grid.push_back(0.0125 * k);
    s.sign = SignChoice::both;
    return s;
}

SweepSpec SweepSpec::validation_default() {
    SweepSpec s;
    s.n_mean_grid = {0.25, 1.0, 4.0, 9.0};
    s.R_grid = {0.0, 0.25 / 9.0, 1.0 / 9.0};
    s.a_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    s.sign = SignChoice::both;
    s.engine = SweepEngine::branch;
    return s;
}

std::vector<Sign> SweepSpec::signs() const {
    switch (sign) {
    case SignChoice::plus: return {Sign::plus};
    case SignChoice::minus: return {Sign::minus};
    default: return {Sign::plus, Sign::minus};
    }
}

void SweepSpec::validate() const {
    if (n_mean_grid.empty()) throw ConfigError("n_mean: empty grid");
    if (R_grid.empty()) throw ConfigError("R: empty grid");
    if (a_grid.empty()) throw ConfigError("a: empty grid");
    for (double v : n_mean_grid) check_n_mean(v, "n_mean");
    for (double v : R_grid) check_unit(v, "R");
    for (double v : a_grid) check_unit(v, "a");
    if (engine == SweepEngine::fock)
        for (double v : n_mean_grid)
            if (v > 2.0) throw ConfigError("n_mean: the fock engine needs n_mean <= 2");
}

RunConfig parse_config(const std::string &text, const std::string &source) {
    RunConfig cfg;
    std::optional<SweepSpec> sweep;
    BellAngles angles;
    bool have_angles = false;
    std::optional<double> n_mean, R_all;
    std::string section;
    std::set<std::string> seen;

    std::stringstream in(text);
    std::string raw;
    int line_no = 0;
    auto fail = [&](const std::string &msg) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "apparatus" && section != "sweep" && section != "bell") fail("unknown section '" + section + "'");
            if (section == "sweep" && !sweep) sweep = SweepSpec::surface_default();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) fail("key '" + key + "' outside a section");
        if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "'");
        try {
            if (section == "apparatus") {
                if (!apparatus_keys.count(key)) fail("unknown key '" + key + "' in [apparatus]");
                auto &ap = cfg.apparatus;
                if (key == "n_mean") {
                    n_mean = parse_number(value, key);
                    check_n_mean(*n_mean, key);
                } else if (key == "alpha2") {
                    ap.alpha2 = parse_number(value, key);
                } else if (key == "alpha3") {
                    ap.alpha3 = parse_number(value, key);
                } else if (key == "R") {
                    R_all = parse_number(value, key);
                    check_unit(*R_all, key);
                } else if (key.size() == 3 && key[0] == 'R') {
                    const double r = parse_number(value, key);
                    check_unit(r, key);
                    ap.loss_R[mode_from_label(std::stoi(key.substr(1)))] = r;
                } else if (key == "a") {
                    ap.env_overlap_a = parse_number(value, key);
                    check_unit(ap.env_overlap_a, key);
                } else if (key == "herald") {
                    ap.herald = parse_herald(value, key);
                } else if (key == "sign") {
                    if (value == "plus") ap.herald = Herald::D1;
                    else if (value == "minus") ap.herald = Herald::D2;
                    else throw ConfigError("sign: expected plus or minus");
                } else if (key == "engine") {
                    if (value == "branch") ap.engine = Engine::branch;
                    else if (value == "fock") ap.engine = Engine::fock;
                    else throw ConfigError("engine: expected branch or fock");
                } else if (key == "cutoff") {
                    const double c = parse_number(value, key);
                    if (c < 4 || c > 1024 || c != std::floor(c)) throw ConfigError("cutoff: expected an integer in [4,1024]");
                    ap.cutoff.explicit_cutoff = static_cast<int>(c);
                } else if (key == "tail_tolerance") {
                    ap.cutoff.tail_tolerance = parse_number(value, key);
                    if (!(ap.cutoff.tail_tolerance > 0.0 && ap.cutoff.tail_tolerance < 1.0))
                        throw ConfigError("tail_tolerance: expected a value in (0,1)");
                }
            } else if (section == "sweep") {
                if (!sweep_keys.count(key)) fail("unknown key '" + key + "' in [sweep]");
                if (key == "n_mean") sweep->n_mean_grid = parse_grid(value, key);
                else if (key == "R") sweep->R_grid = parse_grid(value, key);
                else if (key == "a") sweep->a_grid = parse_grid(value, key);
                else if (key == "sign") {
                    if (value == "plus") sweep->sign = SignChoice::plus;
                    else if (value == "minus") sweep->sign = SignChoice::minus;
                    else if (value == "both") sweep->sign = SignChoice::both;
                    else throw ConfigError("sign: expected plus, minus or both");
                } else if (key == "engine") {
                    if (value == "closed") sweep->engine = SweepEngine::closed;
                    else if (value == "branch") sweep->engine = SweepEngine::branch;
                    else if (value == "fock") sweep->engine = SweepEngine::fock;
                    else throw ConfigError("engine: expected closed, branch or fock");
                }
            } else {
                if (!bell_keys.count(key)) fail("unknown key '" + key + "' in [bell]");
                const double v = parse_number(value, key);
                have_angles = true;
                if (key == "thetaI") angles.thetaI = v;
                else if (key == "thetaI_prime") angles.thetaI_prime = v;
                else if (key == "thetaII") angles.thetaII = v;
                else angles.thetaII_prime = v;
            }
        } catch (const ConfigError &e) {
            const std::string msg = e.what();
            if (msg.rfind(source + ":", 0) == 0) throw;
            fail(msg);
        } catch (const StructuralError &e) {
            fail(key + ": " + e.what());
        }
    }

    auto &ap = cfg.apparatus;
    if (n_mean) {
        if (seen.count("apparatus.alpha2") || seen.count("apparatus.alpha3"))
            throw ConfigError(source + ": n_mean: give either n_mean or alpha2/alpha3");
        ap.alpha2 = ap.alpha3 = std::sqrt(*n_mean);
    }
    if (R_all)
        for (ModeId m : {ModeId::m22, ModeId::m23, ModeId::m32, ModeId::m33})
            if (!ap.loss_R.count(m)) ap.loss_R[m] = *R_all;
    try {
        ap.validate();
    } catch (const DomainError &e) {
        throw ConfigError(source + ": " + e.what());
    }
    if (sweep) {
        try {
            sweep->validate();
        } catch (const ConfigError &e) {
            throw ConfigError(source + ": " + e.what());
        }
    }
    cfg.sweep = sweep;
    if (have_angles) cfg.angles = angles;
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace catsim
