#pragma once

#include <complex>

#ifdef HYPO_HAVE_FLOAT128
#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/float128.hpp>
#endif

namespace hypo {

// Maps a real scalar type to its complex counterpart. double is the working
// precision; float128 (33 significant digits) is the stress-test precision.
template <class Real>
struct scalar_traits {
    using complex = std::complex<Real>;
    static double to_double(const Real& x) { return static_cast<double>(x); }
};

#ifdef HYPO_HAVE_FLOAT128
using extended_real = boost::multiprecision::float128;

template <>
struct scalar_traits<extended_real> {
    using complex = boost::multiprecision::complex128;
    static double to_double(const extended_real& x) { return x.convert_to<double>(); }
};
#endif

template <class Real>
using complex_t = typename scalar_traits<Real>::complex;

template <class Real>
inline std::complex<double> to_std(const complex_t<Real>& z) {
    using std::imag;
    using std::real;
    return {scalar_traits<Real>::to_double(real(z)), scalar_traits<Real>::to_double(imag(z))};
}

template <class Real>
inline complex_t<Real> from_std(std::complex<double> z) {
    return complex_t<Real>(Real(z.real()), Real(z.imag()));
}

}  // namespace hypo
