#pragma once

// Arbitrary-precision real backed by MPFR. Value semantics; every value
// carries its own mantissa width, new values are created at the process-wide
// default width (see set_default_precision). All operations round to nearest.

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

namespace rlab {

class BigFloat {
  public:
    static mpfr_prec_t default_precision() { return default_prec_(); }
    static void set_default_precision(mpfr_prec_t bits) {
        default_prec_() = bits < MPFR_PREC_MIN ? MPFR_PREC_MIN : bits;
    }

    BigFloat() {
        mpfr_init2(v_, default_prec_());
        mpfr_set_zero(v_, 1);
    }
    BigFloat(double d) {
        mpfr_init2(v_, default_prec_());
        mpfr_set_d(v_, d, MPFR_RNDN);
    }
    BigFloat(int i) {
        mpfr_init2(v_, default_prec_());
        mpfr_set_si(v_, i, MPFR_RNDN);
    }
    BigFloat(long i) {
        mpfr_init2(v_, default_prec_());
        mpfr_set_si(v_, i, MPFR_RNDN);
    }
    explicit BigFloat(const std::string& s) {
        mpfr_init2(v_, default_prec_());
        mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN);
    }

    // Construction loops drive theta to exponents far beyond the library
    // default range; the full range is enabled once per process.
    static void extend_exponent_range() {
        static const bool done = [] {
            mpfr_set_emin(mpfr_get_emin_min());
            mpfr_set_emax(mpfr_get_emax_max());
            return true;
        }();
        (void)done;
    }
    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    // Binary exponent of the leading bit; 0 for zero.
    long exponent2() const { return mpfr_zero_p(v_) ? 0 : static_cast<long>(mpfr_get_exp(v_)); }
    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

    // Decimal string with enough digits to reload bit-exactly at the same
    // mantissa width.
    std::string to_string() const {
        long digits = static_cast<long>(static_cast<double>(mpfr_get_prec(v_)) * 0.30103) + 3;
        char* raw = nullptr;
        mpfr_asprintf(&raw, "%.*Re", static_cast<int>(digits), v_);
        std::string out(raw);
        mpfr_free_str(raw);
        return out;
    }

    static BigFloat pi() {
        BigFloat r;
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

#define RLAB_BF_COMPOUND(op, fn)                                  \
    BigFloat& operator op(const BigFloat& o) {                    \
        fn(v_, v_, o.v_, MPFR_RNDN);                              \
        return *this;                                             \
    }
    RLAB_BF_COMPOUND(+=, mpfr_add)
    RLAB_BF_COMPOUND(-=, mpfr_sub)
    RLAB_BF_COMPOUND(*=, mpfr_mul)
    RLAB_BF_COMPOUND(/=, mpfr_div)
#undef RLAB_BF_COMPOUND

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b) { return binop(mpfr_add, a, b); }
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b) { return binop(mpfr_sub, a, b); }
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b) { return binop(mpfr_mul, a, b); }
    friend BigFloat operator/(const BigFloat& a, const BigFloat& b) { return binop(mpfr_div, a, b); }
    friend BigFloat operator-(const BigFloat& a) {
        BigFloat r;
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator+(const BigFloat& a) { return a; }

    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) != 0; }
    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

#define RLAB_BF_UNARY(name, fn)                \
    friend BigFloat name(const BigFloat& a) {  \
        BigFloat r;                            \
        fn(r.v_, a.v_, MPFR_RNDN);             \
        return r;                              \
    }
    RLAB_BF_UNARY(abs, mpfr_abs)
    RLAB_BF_UNARY(fabs, mpfr_abs)
    RLAB_BF_UNARY(sqrt, mpfr_sqrt)
    RLAB_BF_UNARY(sin, mpfr_sin)
    RLAB_BF_UNARY(cos, mpfr_cos)
    RLAB_BF_UNARY(tan, mpfr_tan)
    RLAB_BF_UNARY(asin, mpfr_asin)
    RLAB_BF_UNARY(acos, mpfr_acos)
    RLAB_BF_UNARY(atan, mpfr_atan)
    RLAB_BF_UNARY(log, mpfr_log)
    RLAB_BF_UNARY(log2, mpfr_log2)
    RLAB_BF_UNARY(exp, mpfr_exp)
    RLAB_BF_UNARY(expm1, mpfr_expm1)
    RLAB_BF_UNARY(floor, mpfr_rint_floor)
    RLAB_BF_UNARY(ceil, mpfr_rint_ceil)
    RLAB_BF_UNARY(round, mpfr_rint_round)
#undef RLAB_BF_UNARY

    friend BigFloat pow(const BigFloat& a, const BigFloat& b) { return binop(mpfr_pow, a, b); }
    friend BigFloat hypot(const BigFloat& a, const BigFloat& b) { return binop(mpfr_hypot, a, b); }
    friend BigFloat atan2(const BigFloat& a, const BigFloat& b) { return binop(mpfr_atan2, a, b); }
    friend BigFloat fmod(const BigFloat& a, const BigFloat& b) { return binop(mpfr_fmod, a, b); }
    friend BigFloat min(const BigFloat& a, const BigFloat& b) { return a <= b ? a : b; }
    friend BigFloat max(const BigFloat& a, const BigFloat& b) { return a >= b ? a : b; }

  private:
    using BinFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    static BigFloat binop(BinFn fn, const BigFloat& a, const BigFloat& b) {
        BigFloat r;
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    static mpfr_prec_t& default_prec_() {
        extend_exponent_range();
        static mpfr_prec_t p = 256;
        return p;
    }
    mpfr_t v_;
};

// Scoped default-precision override.
class PrecisionGuard {
  public:
    explicit PrecisionGuard(mpfr_prec_t bits) : saved_(BigFloat::default_precision()) {
        BigFloat::set_default_precision(bits);
    }
    ~PrecisionGuard() { BigFloat::set_default_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

  private:
    mpfr_prec_t saved_;
};

// Uniform facade over the two real types used by the templated numerics.
template <class R>
struct real_traits;

template <>
struct real_traits<double> {
    static double pi() { return 3.14159265358979323846; }
    static double eps() { return 2.220446049250313e-16; }
    // Smallest positive value the construction loops treat as resolvable.
    static double tiny() { return 1e-300; }
    static double from_double(double d) { return d; }
    static double from_string(const std::string& s) { return std::stod(s); }
    static long precision_bits() { return 53; }
    static bool finite(double x) { return x == x && x < 1e308 && x > -1e308; }
};

template <>
struct real_traits<BigFloat> {
    static BigFloat pi() { return BigFloat::pi(); }
    static BigFloat eps() {
        BigFloat e(1.0);
        mpfr_div_2exp(e.raw(), e.raw(), BigFloat::default_precision() - 1, MPFR_RNDN);
        return e;
    }
    static BigFloat tiny() {
        // Far inside MPFR's exponent range; the practical depth limit is the
        // mantissa width, not the exponent.
        BigFloat e(1.0);
        mpfr_div_2exp(e.raw(), e.raw(), 1u << 28, MPFR_RNDN);
        return e;
    }
    static BigFloat from_double(double d) { return BigFloat(d); }
    static BigFloat from_string(const std::string& s) { return BigFloat(s); }
    static long precision_bits() { return static_cast<long>(BigFloat::default_precision()); }
    static bool finite(const BigFloat& x) { return x.is_finite(); }
};

inline double to_double(double x) { return x; }
inline double to_double(const BigFloat& x) { return x.to_double(); }

} // namespace rlab
