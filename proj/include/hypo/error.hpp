#pragma once

#include <stdexcept>
#include <string>

namespace hypo {

enum class errc {
    invalid_argument,
    cutoff_failure,
    step_underflow,
    non_finite,
    mismatched_points,
    overflow,
    unreliable_contour,
    budget_exhausted,
    no_convergence,
    certification_failed,
    real_axis_zero,
    proportionality_defect,
    decay_failure,
    quadrature_failure,
    degenerate_fit,
    insufficient_domain,
};

inline const char* to_string(errc code) {
    switch (code) {
        case errc::invalid_argument: return "invalid_argument";
        case errc::cutoff_failure: return "cutoff_failure";
        case errc::step_underflow: return "step_underflow";
        case errc::non_finite: return "non_finite";
        case errc::mismatched_points: return "mismatched_points";
        case errc::overflow: return "overflow";
        case errc::unreliable_contour: return "unreliable_contour";
        case errc::budget_exhausted: return "budget_exhausted";
        case errc::no_convergence: return "no_convergence";
        case errc::certification_failed: return "certification_failed";
        case errc::real_axis_zero: return "real_axis_zero";
        case errc::proportionality_defect: return "proportionality_defect";
        case errc::decay_failure: return "decay_failure";
        case errc::quadrature_failure: return "quadrature_failure";
        case errc::degenerate_fit: return "degenerate_fit";
        case errc::insufficient_domain: return "insufficient_domain";
    }
    return "unknown";
}

// Every failure in the library is reported through this type. The code lets
// callers (scan, the CLI) decide whether to mark, retry or abort.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

}  // namespace hypo
