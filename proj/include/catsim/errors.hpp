#pragma once

#include <stdexcept>
#include <string>

namespace catsim {

// Mismatched mode sets, wrong mode kinds, malformed inputs to a state operation.
struct StructuralError : std::logic_error {
    using std::logic_error::logic_error;
};

// A physical parameter outside its admissible range (R > 1, |a| > 1, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Input the branch calculus cannot represent (two photons meeting on a 50:50 splitter).
struct UnsupportedInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Conditioning on an outcome whose probability is (numerically) zero.
class HeraldImpossible : public std::runtime_error {
public:
    HeraldImpossible(const std::string &what, double probability)
        : std::runtime_error(what), probability_(probability) {}
    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

// Internal cross-checks that failed beyond tolerance.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed forms that do not exist for the requested configuration.
struct UnsupportedScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bell rotation requested on a state that leaves the two-branch span.
class RotationLeakage : public std::runtime_error {
public:
    RotationLeakage(const std::string &what, double leakage)
        : std::runtime_error(what), leakage_(leakage) {}
    double leakage() const noexcept { return leakage_; }

private:
    double leakage_;
};

} // namespace catsim
