#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "hypo/error.hpp"

namespace hypo {

// A complex scalar held as e^{log_mag} * unit with |unit| = 1. Wronskians grow
// like exp(c|zeta|^{m/(m-1)}) and the derivative moments like (mk)!, both far
// outside the range of a double.
class LogComplex {
public:
    LogComplex() = default;

    static LogComplex zero() { return {}; }

    static LogComplex from_complex(std::complex<double> z) {
        const double r = std::abs(z);
        if (r == 0.0) return {};
        return from_parts(std::log(r), z / r);
    }

    static LogComplex from_polar(double log_mag, double phase) {
        return from_parts(log_mag, std::polar(1.0, phase));
    }

    // exp(w) for complex w, never overflowing.
    static LogComplex exp(std::complex<double> w) { return from_polar(w.real(), w.imag()); }

    // Builds from an arbitrary nonzero "unit" that is renormalized here.
    static LogComplex from_parts(double log_mag, std::complex<double> unit) {
        LogComplex out;
        const double r = std::abs(unit);
        if (r == 0.0 || log_mag == -std::numeric_limits<double>::infinity()) return out;
        out.log_mag_ = log_mag + std::log(r);
        out.unit_ = unit / r;
        return out;
    }

    // Stores the parts as given; for restoring serialized values bit for bit.
    static LogComplex from_raw(double log_mag, std::complex<double> unit) {
        LogComplex out;
        out.log_mag_ = log_mag;
        out.unit_ = unit;
        return out;
    }

    double log_mag() const { return log_mag_; }
    double abs_log() const { return log_mag_; }
    std::complex<double> unit() const { return unit_; }
    double arg() const { return std::arg(unit_); }
    bool is_zero() const { return log_mag_ == -std::numeric_limits<double>::infinity(); }

    std::complex<double> to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        if (log_mag_ > max_log()) throw error(errc::overflow, "LogComplex::to_complex: magnitude exceeds double range");
        return std::exp(log_mag_) * unit_;
    }

    LogComplex conj() const {
        LogComplex out = *this;
        out.unit_ = std::conj(unit_);
        return out;
    }

    LogComplex operator-() const {
        LogComplex out = *this;
        out.unit_ = -unit_;
        return out;
    }

    // Rescale to a new reference: returns this / e^{ref} as a plain complex.
    std::complex<double> relative_to(double ref_log) const {
        if (is_zero()) return {0.0, 0.0};
        return std::exp(log_mag_ - ref_log) * unit_;
    }

    friend LogComplex operator*(const LogComplex& a, const LogComplex& b) {
        if (a.is_zero() || b.is_zero()) return {};
        return from_parts(a.log_mag_ + b.log_mag_, a.unit_ * b.unit_);
    }

    friend LogComplex operator/(const LogComplex& a, const LogComplex& b) {
        if (b.is_zero()) throw error(errc::non_finite, "LogComplex: division by zero");
        if (a.is_zero()) return {};
        return from_parts(a.log_mag_ - b.log_mag_, a.unit_ * std::conj(b.unit_));
    }

    // Exact in the frame of the larger operand.
    friend LogComplex operator+(const LogComplex& a, const LogComplex& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const LogComplex& big = a.log_mag_ >= b.log_mag_ ? a : b;
        const LogComplex& small = a.log_mag_ >= b.log_mag_ ? b : a;
        const std::complex<double> sum = big.unit_ + small.unit_ * std::exp(small.log_mag_ - big.log_mag_);
        return from_parts(big.log_mag_, sum);
    }

    friend LogComplex operator-(const LogComplex& a, const LogComplex& b) { return a + (-b); }

    LogComplex& operator*=(const LogComplex& o) { return *this = *this * o; }
    LogComplex& operator+=(const LogComplex& o) { return *this = *this + o; }

    static double max_log() { return std::log(std::numeric_limits<double>::max()); }

private:
    double log_mag_ = -std::numeric_limits<double>::infinity();
    std::complex<double> unit_{1.0, 0.0};
};

// Relative distance |a - b| / max(|a|, |b|), computed without leaving log space.
inline double relative_difference(const LogComplex& a, const LogComplex& b) {
    if (a.is_zero() && b.is_zero()) return 0.0;
    const double ref = std::max(a.log_mag(), b.log_mag());
    return std::abs(a.relative_to(ref) - b.relative_to(ref));
}

}  // namespace hypo
