#pragma once

// Scalar field support shared by every module. Three backends are used:
// double for real asymptotics, std::complex<double> for the complex groups,
// and an exact rational type for identities that a float cannot decide.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <concepts>
#include <type_traits>

namespace hypermix {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using Complex = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
inline constexpr bool is_rational_v = std::is_same_v<T, Rational>;

template <typename T>
concept Field = std::same_as<T, double> || std::same_as<T, Complex> || std::same_as<T, Rational>;

enum class FieldTag { Real, Complex, Rational };

template <Field T>
constexpr FieldTag field_tag_of() {
    if constexpr (std::is_same_v<T, double>) return FieldTag::Real;
    else if constexpr (std::is_same_v<T, Complex>) return FieldTag::Complex;
    else return FieldTag::Rational;
}

/// Modulus as a double. Exact for the rational backend up to conversion.
template <Field T>
double magnitude(const T& x) {
    if constexpr (is_rational_v<T>) return std::abs(x.template convert_to<double>());
    else return std::abs(x);
}

template <Field T>
T conjugate(const T& x) {
    if constexpr (is_complex_v<T>) return std::conj(x);
    else return x;
}

template <Field T>
bool is_zero(const T& x) {
    if constexpr (is_rational_v<T>) return x == 0;
    else return x == T(0);
}

template <Field T>
Complex to_complex(const T& x) {
    if constexpr (is_rational_v<T>) return Complex(x.template convert_to<double>(), 0.0);
    else return Complex(x);
}

/// Converts a rational constant into the target field.
template <Field T>
T from_rational(const Rational& r) {
    if constexpr (is_rational_v<T>) return r;
    else return T(r.template convert_to<double>());
}

/// Maps an integer into the field without going through double for rationals.
template <Field T>
T from_int(long long v) {
    return T(v);
}

} // namespace hypermix
