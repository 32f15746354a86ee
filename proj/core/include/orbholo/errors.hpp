#ifndef ORBHOLO_ERRORS_HPP
#define ORBHOLO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace orbholo {

// Invalid physical or grid parameters detected before any computation.
class domain_error : public std::invalid_argument {
public:
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Evaluation at a point where the model is singular (e.g. |r| = 0).
class singularity_error : public domain_error {
public:
    explicit singularity_error(const std::string& what) : domain_error(what) {}
};

// Base for failures of the numerical machinery (as opposed to bad inputs).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Closed-form quartic resolvent degenerated; caller falls back to the
// iterative root finder.
class resolvent_degeneracy_error : public numerical_error {
public:
    explicit resolvent_degeneracy_error(const std::string& what) : numerical_error(what) {}
};

// Trajectory reached |r| below the hard-collision radius.
class hard_collision_error : public numerical_error {
public:
    explicit hard_collision_error(const std::string& what) : numerical_error(what) {}
};

// Adaptive step size underflowed without meeting the error tolerance.
class integration_failure_error : public numerical_error {
public:
    explicit integration_failure_error(const std::string& what) : numerical_error(what) {}
};

// End-of-propagation state has nonpositive energy; no asymptotic momentum.
class bound_electron_error : public numerical_error {
public:
    explicit bound_electron_error(const std::string& what) : numerical_error(what) {}
};

// Newton shooting failed to converge; carries the best residual reached.
class non_convergence_error : public numerical_error {
public:
    non_convergence_error(const std::string& what, double best_residual)
        : numerical_error(what), best_residual(best_residual) {}
    double best_residual;
};

} // namespace orbholo

#endif
