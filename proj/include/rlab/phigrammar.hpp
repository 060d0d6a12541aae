#pragma once

// Textual phi specifications for the CLI and config files.
//
// Grammar (whitespace between tokens is ignored):
//   spec    := factor ('*' factor)*
//   factor  := base ('^' signed-number)?
//   base    := 'theta' | 'abs(log(theta))' | number
//
// Examples: "theta^-0.25", "abs(log(theta))^2", "3*theta^-0.5*abs(log(theta))".
// A parsed spec compiles to a function handle usable with any real type.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rlab/construct.hpp"
#include "rlab/errors.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

enum class PhiBase { theta, abs_log_theta, constant };

struct PhiFactor {
    PhiBase base = PhiBase::constant;
    double exponent = 1.0; // ignored for constant
    double value = 1.0;    // constant base only
};

struct PhiSpec {
    std::vector<PhiFactor> factors;
    std::string text; // normalized source, kept for serialization
};

namespace detail {

struct PhiLexer {
    const std::string& src;
    std::size_t pos = 0;

    explicit PhiLexer(const std::string& s) : src(s) {}

    void skip_space() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool done() {
        skip_space();
        return pos >= src.size();
    }
    char peek() {
        skip_space();
        return pos < src.size() ? src[pos] : '\0';
    }
    bool accept(char c) {
        skip_space();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c, const char* where) {
        if (!accept(c))
            throw format_error(std::string("expected '") + c + "' " + where + " in phi specification");
    }
    // Identifier: letters only. Returns empty string when the next token is not one.
    std::string ident() {
        skip_space();
        std::size_t start = pos;
        while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
        return src.substr(start, pos - start);
    }
    // Number with optional sign, integer or decimal, optional exponent part.
    double number(const char* where) {
        skip_space();
        std::size_t start = pos;
        if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
        std::size_t digits = pos;
        while (pos < src.size() && (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.')) ++pos;
        if (pos == digits)
            throw format_error(std::string("expected a number ") + where + " in phi specification");
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        try {
            std::size_t used = 0;
            std::string tok = src.substr(start, pos - start);
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw format_error("malformed number in phi specification");
            return v;
        } catch (const format_error&) {
            throw;
        } catch (const std::exception&) {
            throw format_error("malformed number in phi specification");
        }
    }
};

} // namespace detail

// Parses the grammar above. Throws format_error on any malformed input;
// never throws anything else for string inputs.
inline PhiSpec parse_phi_spec(const std::string& text) {
    detail::PhiLexer lex(text);
    PhiSpec spec;
    if (lex.done()) throw format_error("empty phi specification");
    for (;;) {
        PhiFactor f;
        char c = lex.peek();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id = lex.ident();
            if (id == "theta") {
                f.base = PhiBase::theta;
            } else if (id == "abs") {
                lex.expect('(', "after 'abs'");
                if (lex.ident() != "log") throw format_error("only abs(log(theta)) is recognized");
                lex.expect('(', "after 'log'");
                if (lex.ident() != "theta") throw format_error("only abs(log(theta)) is recognized");
                lex.expect(')', "closing 'log'");
                lex.expect(')', "closing 'abs'");
                f.base = PhiBase::abs_log_theta;
            } else {
                throw format_error("unknown name '" + id + "' in phi specification");
            }
            if (lex.accept('^')) f.exponent = lex.number("after '^'");
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-') {
            f.base = PhiBase::constant;
            f.value = lex.number("as a constant factor");
            if (f.value < 0) throw format_error("constant factors must be nonnegative");
            if (lex.accept('^')) {
                double e = lex.number("after '^'");
                f.value = std::pow(f.value, e);
            }
        } else {
            throw format_error("unexpected character in phi specification");
        }
        spec.factors.push_back(f);
        if (!lex.accept('*')) break;
    }
    if (!lex.done()) throw format_error("trailing input after phi specification");

    spec.text.clear();
    for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        if (i) spec.text += "*";
        const PhiFactor& f = spec.factors[i];
        char buf[64];
        switch (f.base) {
        case PhiBase::theta:
            spec.text += "theta";
            break;
        case PhiBase::abs_log_theta:
            spec.text += "abs(log(theta))";
            break;
        case PhiBase::constant:
            std::snprintf(buf, sizeof buf, "%.17g", f.value);
            spec.text += buf;
            break;
        }
        if (f.base != PhiBase::constant && f.exponent != 1.0) {
            std::snprintf(buf, sizeof buf, "^%.17g", f.exponent);
            spec.text += buf;
        }
    }
    return spec;
}

// Compiles a parsed spec to a handle over any real type. The handle requires
// theta > 0 (abs(log(theta)) and negative powers are undefined at 0).
template <class R>
RealFn<R> compile_phi(const PhiSpec& spec) {
    std::vector<PhiFactor> factors = spec.factors;
    return [factors](const R& theta) -> R {
        if (!(theta > R(0))) throw precondition_error("phi handles require theta > 0");
        using std::fabs;
        using std::log;
        using std::pow;
        R out(1);
        for (const PhiFactor& f : factors) {
            switch (f.base) {
            case PhiBase::theta:
                out *= pow(theta, real_traits<R>::from_double(f.exponent));
                break;
            case PhiBase::abs_log_theta:
                out *= pow(fabs(log(theta)), real_traits<R>::from_double(f.exponent));
                break;
            case PhiBase::constant:
                out *= real_traits<R>::from_double(f.value);
                break;
            }
        }
        return out;
    };
}

template <class R>
RealFn<R> parse_phi(const std::string& text) {
    return compile_phi<R>(parse_phi_spec(text));
}

} // namespace rlab
