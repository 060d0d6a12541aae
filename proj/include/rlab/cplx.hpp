#pragma once

// Minimal complex value over a generic real type. std::complex is only
// specified for the builtin floating types, so the templated evaluation
// paths use this instead.

#include <cmath>

#include "rlab/bigfloat.hpp"

namespace rlab {

template <class R>
struct Cplx {
    R re{};
    R im{};

    Cplx() = default;
    Cplx(R r, R i) : re(std::move(r)), im(std::move(i)) {}
    explicit Cplx(R r) : re(std::move(r)), im(R(0)) {}

    friend Cplx operator+(const Cplx& a, const Cplx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cplx operator-(const Cplx& a, const Cplx& b) { return {a.re - b.re, a.im - b.im}; }
    friend Cplx operator-(const Cplx& a) { return {-a.re, -a.im}; }
    friend Cplx operator*(const Cplx& a, const Cplx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cplx operator*(const R& s, const Cplx& a) { return {s * a.re, s * a.im}; }
    friend Cplx operator*(const Cplx& a, const R& s) { return {a.re * s, a.im * s}; }
    friend Cplx operator/(const Cplx& a, const R& s) { return {a.re / s, a.im / s}; }
    friend Cplx operator/(const Cplx& a, const Cplx& b) {
        R d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    Cplx& operator+=(const Cplx& o) {
        re = re + o.re;
        im = im + o.im;
        return *this;
    }

    friend Cplx conj(const Cplx& a) { return {a.re, -a.im}; }
};

template <class R>
R modulus(const Cplx<R>& z) {
    using std::hypot;
    return hypot(z.re, z.im);
}

// e^{i*phi}
template <class R>
Cplx<R> unit_phase(const R& phi) {
    using std::cos;
    using std::sin;
    return {cos(phi), sin(phi)};
}

} // namespace rlab
