#pragma once
// Recursive-descent parser for the expression grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := rational | ident | func '(' args ')' | '(' expr ')'
// Reserved functions: sin cos tan cot exp abs log hyp2f1. log requires an
// abs(...) argument; hyp2f1 takes three rational parameters, ';', then an
// argument expression. Identifiers must be chart coordinates (or pi).

#include "bmsym/chart.hpp"
#include "bmsym/error.hpp"
#include "bmsym/expr.hpp"
#include "bmsym/simplify.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace bmsym {

namespace detail {

class Parser {
public:
    Parser(const std::string& text, const ChartModel* chart) : s_(text), chart_(chart) {}

    Ex parse() {
        Ex e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError(pos_, "unexpected trailing input");
        return e;
    }

private:
    const std::string& s_;
    const ChartModel* chart_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    void expect(char c) {
        if (!eat(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
    }

    Ex expr() {
        bool neg = false;
        skip_ws();
        if (eat('-')) neg = true;
        else eat('+');
        Ex acc = term();
        if (neg) acc = mul({num(-1), acc});
        for (;;) {
            if (eat('+')) {
                acc = acc + term();
            } else if (eat('-')) {
                acc = acc - term();
            } else {
                return acc;
            }
        }
    }

    Ex term() {
        Ex acc = factor();
        for (;;) {
            if (eat('*')) {
                acc = acc * factor();
            } else if (eat('/')) {
                acc = acc / factor();
            } else {
                return acc;
            }
        }
    }

    Ex factor() {
        Ex b = base();
        if (eat('^')) {
            long long e = integer();
            return pow(b, e);
        }
        return b;
    }

    long long integer() {
        skip_ws();
        bool paren = eat('(');
        skip_ws();
        bool neg = eat('-');
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError(pos_, "exponent must be an integer");
        long long v = std::stoll(s_.substr(start, pos_ - start));
        if (pos_ < s_.size() && s_[pos_] == '.')
            throw ParseError(pos_, "exponent must be an integer, not a decimal");
        if (paren) expect(')');
        return neg ? -v : v;
    }

    Rat rational() {
        skip_ws();
        bool neg = eat('-');
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError(pos_, "expected a rational number");
        BigInt n(s_.substr(start, pos_ - start));
        BigInt d(1);
        if (pos_ < s_.size() && s_[pos_] == '/') {
            ++pos_;
            size_t ds = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == ds) throw ParseError(pos_, "expected denominator digits");
            d = BigInt(s_.substr(ds, pos_ - ds));
            if (d == 0) throw ParseError(pos_, "zero denominator");
        }
        Rat r(n, d);
        return neg ? -r : r;
    }

    Ex base() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError(pos_, "unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ < s_.size() && s_[pos_] == '.')
                throw ParseError(pos_, "decimal literals are not part of the grammar; use rationals");
            return num(Rat(BigInt(s_.substr(start, pos_ - start))));
        }
        if (c == '(') {
            ++pos_;
            Ex e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (peek() == '(') return call(id, start);
            if (id == "pi") return sym("pi");
            if (chart_ && !chart_->has(id)) throw ParseError(start, "unknown coordinate: " + id);
            return sym(id);
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    Ex call(const std::string& name, size_t name_pos) {
        expect('(');
        if (name == "hyp2f1") {
            Rat a = rational();
            expect(',');
            Rat b = rational();
            expect(',');
            Rat c = rational();
            expect(';');
            Ex arg = expr();
            expect(')');
            return hyp2f1(a, b, c, arg);
        }
        Ex arg = expr();
        expect(')');
        if (name == "sin") return fun(Fn::Sin, arg);
        if (name == "cos") return fun(Fn::Cos, arg);
        if (name == "tan") return fun(Fn::Tan, arg);
        if (name == "cot") return fun(Fn::Cot, arg);
        if (name == "exp") return fun(Fn::Exp, arg);
        if (name == "abs") return fun(Fn::Abs, arg);
        if (name == "log") {
            // only log of |.| belongs to the function class
            if (arg->kind == Kind::Fun && arg->fn == Fn::Abs) return fun(Fn::LogAbs, arg->kids[0]);
            throw ParseError(name_pos, "log requires an abs(...) argument, e.g. log(abs(h))");
        }
        throw ParseError(name_pos, "unknown function: " + name);
    }
};

}  // namespace detail

inline Ex parse_expr(const std::string& text, const ChartModel& chart) {
    return detail::Parser(text, &chart).parse();
}

// For internal fixtures where no chart discipline is wanted.
inline Ex parse_expr_free(const std::string& text) {
    return detail::Parser(text, nullptr).parse();
}

// Canonical text form; parse(print(e)) == canon(e).
inline std::string print_canonical(const Ex& e) { return to_string(canon(e)); }

}  // namespace bmsym
