#pragma once
// IEEE-double evaluation. Integer powers go through binary powering so that
// algebraically equal subexpressions cancel bit-exactly; hyp2f1 uses the Gauss
// series for |x| < 1 (term cutoff 1e-15) and the Pfaff transformation x -> x/(x-1)
// on the negative axis.

#include "bmsym/error.hpp"
#include "bmsym/expr.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace bmsym {

using Point = std::map<std::string, double>;

struct ExtFunction {
    std::string display;
    // eval(order, x): the order-th derivative at x
    std::function<double(int, double)> eval;
};

inline std::vector<ExtFunction>& ext_registry() {
    static std::vector<ExtFunction> reg;
    return reg;
}

inline int register_ext(ExtFunction f) {
    ext_registry().push_back(std::move(f));
    return static_cast<int>(ext_registry().size()) - 1;
}

inline double ipow(double x, long long e) {
    if (e < 0) {
        if (x == 0.0) throw SingularEvalError("zero raised to a negative power");
        return 1.0 / ipow(x, -e);
    }
    double r = 1.0, b = x;
    while (e) {
        if (e & 1) r *= b;
        e >>= 1;
        if (e) b *= b;
    }
    return r;
}

inline double eval_hyp2f1(double a, double b, double c, double x);

namespace detail {

inline double hyp_series(double a, double b, double c, double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 20000; ++k) {
        double ck = c + k;
        if (ck == 0.0) throw DomainError("hyp2f1: series hit a non-positive integer c");
        term *= (a + k) * (b + k) / (ck * (k + 1)) * x;
        sum += term;
        if (std::fabs(term) <= 1e-15 * std::fabs(sum)) return sum;
        if (term == 0.0) return sum;
    }
    throw DomainError("hyp2f1: series failed to converge");
}

}  // namespace detail

inline double eval_hyp2f1(double a, double b, double c, double x) {
    if (x == 0.0) return 1.0;
    if (x < 0.0) {
        // map (-inf, 0) into (0, 1)
        double z = x / (x - 1.0);
        return std::pow(1.0 - x, -a) * detail::hyp_series(a, c - b, c, z);
    }
    if (x >= 1.0) throw DomainError("hyp2f1: argument outside the series domain |x| < 1");
    return detail::hyp_series(a, b, c, x);
}

inline double eval_at(const Ex& e, const Point& p) {
    switch (e->kind) {
        case Kind::Num:
            return to_double(e->num);
        case Kind::Sym: {
            auto it = p.find(e->sym);
            if (it != p.end()) return it->second;
            if (e->sym == "pi") return M_PI;
            throw Error("unbound symbol in evaluation: " + e->sym);
        }
        case Kind::Add: {
            double s = 0.0;
            for (const auto& k : e->kids) s += eval_at(k, p);
            return s;
        }
        case Kind::Mul: {
            double s = 1.0;
            for (const auto& k : e->kids) s *= eval_at(k, p);
            return s;
        }
        case Kind::Pow:
            return ipow(eval_at(e->kids[0], p), e->ipow);
        case Kind::Fun: {
            double u = eval_at(e->kids[0], p);
            switch (e->fn) {
                case Fn::Sin:
                    return std::sin(u);
                case Fn::Cos:
                    return std::cos(u);
                case Fn::Tan: {
                    double c = std::cos(u);
                    if (c == 0.0) throw SingularEvalError("tan at a pole");
                    return std::sin(u) / c;
                }
                case Fn::Cot: {
                    double s = std::sin(u);
                    if (s == 0.0) throw SingularEvalError("cot at a pole");
                    return std::cos(u) / s;
                }
                case Fn::Exp:
                    return std::exp(u);
                case Fn::Abs:
                    return std::fabs(u);
                case Fn::LogAbs:
                    if (u == 0.0) throw SingularEvalError("log|.| at zero");
                    return std::log(std::fabs(u));
            }
            return 0.0;
        }
        case Kind::Hyp:
            return eval_hyp2f1(to_double(e->ha), to_double(e->hb), to_double(e->hc),
                               eval_at(e->kids[0], p));
        case Kind::Ext: {
            const auto& reg = ext_registry();
            if (e->ext_id < 0 || e->ext_id >= static_cast<int>(reg.size()))
                throw Error("unregistered external function id");
            return reg[e->ext_id].eval(e->ext_order, eval_at(e->kids[0], p));
        }
    }
    return 0.0;
}

}  // namespace bmsym
