#pragma once
// Laurent expansion in a single coordinate t, with a separate log|t| channel:
//   S(t) = sum_j a_j t^j  +  (sum_j l_j t^j) log|t|
// Coefficients are canonical expressions independent of t. Anything outside
// this class (log^2, |t|^c, poles inside smooth function arguments) raises
// SeriesError. Truncation honesty is tracked in `order`: coefficients with
// exponent <= order are exact.

#include "bmsym/error.hpp"
#include "bmsym/expr.hpp"
#include "bmsym/simplify.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <string>

namespace bmsym {

struct LSeries {
    int order = INT_MAX / 2;
    std::map<int, Ex> a;
    std::map<int, Ex> l;
};

namespace series_detail {

constexpr int kExact = INT_MAX / 2;

inline void put(std::map<int, Ex>& m, int j, const Ex& v) {
    Ex c = canon(v);
    if (c->kind == Kind::Num && c->num == Rat(0)) return;
    auto it = m.find(j);
    if (it == m.end()) {
        m.emplace(j, c);
    } else {
        Ex s = canon(it->second + c);
        if (s->kind == Kind::Num && s->num == Rat(0))
            m.erase(it);
        else
            it->second = s;
    }
}

inline void truncate(LSeries& s, int cap) {
    auto clip = [&](std::map<int, Ex>& m) {
        for (auto it = m.begin(); it != m.end();)
            it = (it->first > cap) ? m.erase(it) : std::next(it);
    };
    clip(s.a);
    clip(s.l);
    s.order = std::min(s.order, cap);
}

}  // namespace series_detail

inline bool series_is_zero(const LSeries& s) { return s.a.empty() && s.l.empty(); }

inline bool series_log_free(const LSeries& s) { return s.l.empty(); }

inline int series_valuation(const LSeries& s) {
    int v = INT_MAX;
    if (!s.a.empty()) v = std::min(v, s.a.begin()->first);
    if (!s.l.empty()) v = std::min(v, s.l.begin()->first);
    return v;
}

inline Ex series_coeff(const LSeries& s, int j) {
    auto it = s.a.find(j);
    return it == s.a.end() ? num(0) : it->second;
}

inline Ex series_log_coeff(const LSeries& s, int j) {
    auto it = s.l.find(j);
    return it == s.l.end() ? num(0) : it->second;
}

namespace series_detail {

inline LSeries s_const(const Ex& c) {
    LSeries s;
    put(s.a, 0, c);
    return s;
}

inline LSeries s_var() {
    LSeries s;
    put(s.a, 1, num(1));
    return s;
}

inline LSeries s_add(const LSeries& x, const LSeries& y) {
    LSeries r;
    r.order = std::min(x.order, y.order);
    r.a = x.a;
    r.l = x.l;
    for (const auto& [j, c] : y.a) put(r.a, j, c);
    for (const auto& [j, c] : y.l) put(r.l, j, c);
    truncate(r, r.order);
    return r;
}

inline LSeries s_scale(const LSeries& x, const Ex& c) {
    LSeries r;
    r.order = x.order;
    for (const auto& [j, v] : x.a) put(r.a, j, v * c);
    for (const auto& [j, v] : x.l) put(r.l, j, v * c);
    return r;
}

inline LSeries s_shift(const LSeries& x, int k) {
    LSeries r;
    r.order = (x.order >= kExact) ? kExact : x.order + k;
    for (const auto& [j, v] : x.a) r.a.emplace(j + k, v);
    for (const auto& [j, v] : x.l) r.l.emplace(j + k, v);
    return r;
}

inline LSeries s_mul(const LSeries& x, const LSeries& y, int cap) {
    if (!x.l.empty() && !y.l.empty())
        throw SeriesError("log^2 term produced; outside the representable class");
    LSeries r;
    int vx = series_is_zero(x) ? 0 : series_valuation(x);
    int vy = series_is_zero(y) ? 0 : series_valuation(y);
    long long ox = (x.order >= kExact) ? kExact : static_cast<long long>(x.order) + vy;
    long long oy = (y.order >= kExact) ? kExact : static_cast<long long>(y.order) + vx;
    r.order = static_cast<int>(std::min<long long>({ox, oy, cap}));
    if (series_is_zero(x) || series_is_zero(y)) {
        r.order = std::min<int>(r.order, cap);
        return r;
    }
    for (const auto& [i, ci] : x.a)
        for (const auto& [j, cj] : y.a) {
            if (i + j > r.order) continue;
            put(r.a, i + j, ci * cj);
        }
    for (const auto& [i, ci] : x.a)
        for (const auto& [j, cj] : y.l) {
            if (i + j > r.order) continue;
            put(r.l, i + j, ci * cj);
        }
    for (const auto& [i, ci] : x.l)
        for (const auto& [j, cj] : y.a) {
            if (i + j > r.order) continue;
            put(r.l, i + j, ci * cj);
        }
    truncate(r, r.order);
    return r;
}

inline LSeries s_pow(LSeries base, long long k, int cap);

inline LSeries s_inv(const LSeries& x, int cap) {
    if (!x.l.empty()) throw SeriesError("cannot invert a series with log terms");
    if (x.a.empty()) throw DivisionByZero();
    int v = x.a.begin()->first;
    Ex c0 = x.a.begin()->second;
    // x = c0 t^v (1 + u), valuation(u) >= 1
    LSeries u;
    u.order = (x.order >= kExact) ? kExact : x.order - v;
    for (auto it = std::next(x.a.begin()); it != x.a.end(); ++it)
        put(u.a, it->first - v, it->second * pow(c0, -1));
    // 1/(1+u) = sum (-u)^k
    LSeries geom = s_const(num(1));
    LSeries termpow = s_const(num(1));
    LSeries nu = s_scale(u, num(-1));
    int iters = std::max(0, cap - (-v) + 1);
    for (int k = 1; k <= iters; ++k) {
        termpow = s_mul(termpow, nu, cap + std::abs(v) + 2);
        if (series_is_zero(termpow)) break;
        geom = s_add(geom, termpow);
    }
    geom.order = std::min(geom.order, u.order);
    LSeries r = s_shift(s_scale(geom, pow(c0, -1)), -v);
    truncate(r, std::min<long long>(r.order, cap));
    return r;
}

inline LSeries s_pow(LSeries base, long long k, int cap) {
    if (k == 0) return s_const(num(1));
    if (k < 0) {
        base = s_inv(base, cap + static_cast<int>(std::min<long long>(-k * 4, 64)));
        k = -k;
    }
    LSeries r = s_const(num(1));
    while (k) {
        if (k & 1) r = s_mul(r, base, cap);
        k >>= 1;
        if (k) base = s_mul(base, base, cap);
    }
    truncate(r, cap);
    return r;
}

// Smooth composition f(a0 + A1) with symbolically supplied derivatives of f at a0.
template <typename DerivAt>
inline LSeries s_compose(const LSeries& arg, int cap, DerivAt f_deriv_over_kfact) {
    if (!arg.l.empty()) throw SeriesError("log terms inside a smooth function argument");
    int v = series_is_zero(arg) ? 0 : series_valuation(arg);
    if (v < 0) throw SeriesError("pole inside a smooth function argument");
    Ex a0 = series_coeff(arg, 0);
    LSeries hi = arg;
    hi.a.erase(0);
    LSeries r = s_const(f_deriv_over_kfact(0, a0));
    LSeries p = s_const(num(1));
    int kmax = series_is_zero(hi) ? 0 : cap;
    for (int k = 1; k <= kmax; ++k) {
        p = s_mul(p, hi, cap);
        if (series_is_zero(p)) break;
        r = s_add(r, s_scale(p, f_deriv_over_kfact(k, a0)));
    }
    r.order = std::min(r.order, arg.order);
    truncate(r, cap);
    return r;
}

inline Rat factorial(int k) {
    BigInt f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return Rat(f);
}

LSeries s_of(const Ex& e, const std::string& t, int cap);

inline LSeries s_fun(Fn f, const LSeries& A, int cap) {
    switch (f) {
        case Fn::Sin:
            return s_compose(A, cap, [](int k, const Ex& a0) -> Ex {
                Ex d;
                switch (k % 4) {
                    case 0: d = fun(Fn::Sin, a0); break;
                    case 1: d = fun(Fn::Cos, a0); break;
                    case 2: d = -fun(Fn::Sin, a0); break;
                    default: d = -fun(Fn::Cos, a0); break;
                }
                return d * num(rat_pow(factorial(k), -1));
            });
        case Fn::Cos:
            return s_compose(A, cap, [](int k, const Ex& a0) -> Ex {
                Ex d;
                switch (k % 4) {
                    case 0: d = fun(Fn::Cos, a0); break;
                    case 1: d = -fun(Fn::Sin, a0); break;
                    case 2: d = -fun(Fn::Cos, a0); break;
                    default: d = fun(Fn::Sin, a0); break;
                }
                return d * num(rat_pow(factorial(k), -1));
            });
        case Fn::Exp:
            return s_compose(A, cap, [](int k, const Ex& a0) -> Ex {
                return fun(Fn::Exp, a0) * num(rat_pow(factorial(k), -1));
            });
        case Fn::Abs: {
            if (!A.l.empty()) throw SeriesError("log terms inside abs");
            if (series_is_zero(A)) return s_const(num(0));
            if (series_valuation(A) != 0)
                throw SeriesError("abs of a quantity vanishing at t=0 is not in the class");
            // |A| = sgn(a0) A, the sign locally constant near t = 0
            Ex a0 = series_coeff(A, 0);
            Ex sgn = a0 * pow(fun(Fn::Abs, a0), -1);
            return s_scale(A, sgn);
        }
        case Fn::LogAbs: {
            if (!A.l.empty()) throw SeriesError("nested logs are not in the class");
            if (series_is_zero(A)) throw SeriesError("log|0|");
            int v = series_valuation(A);
            LSeries B = s_shift(A, -v);  // valuation 0
            Ex b0 = series_coeff(B, 0);
            // log|A| = v log|t| + log|b0| + log(1 + u),  u = B/b0 - 1
            LSeries u = s_scale(B, pow(b0, -1));
            u.a.erase(0);
            LSeries r = s_const(fun(Fn::LogAbs, b0));
            LSeries p = s_const(num(1));
            if (!series_is_zero(u)) {
                for (int k = 1; k <= cap; ++k) {
                    p = s_mul(p, u, cap);
                    if (series_is_zero(p)) break;
                    Rat c = Rat(BigInt((k % 2) ? 1 : -1), BigInt(k));
                    r = s_add(r, s_scale(p, num(c)));
                }
            }
            r.order = std::min(r.order, A.order);
            if (v != 0) put(r.l, 0, num(v));
            truncate(r, cap);
            return r;
        }
        case Fn::Tan: {
            LSeries s = s_fun(Fn::Sin, A, cap);
            LSeries c = s_fun(Fn::Cos, A, cap);
            return s_mul(s, s_inv(c, cap), cap);
        }
        case Fn::Cot: {
            LSeries s = s_fun(Fn::Sin, A, cap);
            LSeries c = s_fun(Fn::Cos, A, cap);
            return s_mul(c, s_inv(s, cap), cap);
        }
    }
    throw SeriesError("unhandled function in series expansion");
}

inline LSeries s_of(const Ex& e, const std::string& t, int cap) {
    switch (e->kind) {
        case Kind::Num:
            return s_const(e);
        case Kind::Sym:
            if (e->sym == t) return s_var();
            return s_const(e);
        case Kind::Add: {
            LSeries r;  // zero
            r.order = kExact;
            for (const auto& k : e->kids) r = s_add(r, s_of(k, t, cap));
            return r;
        }
        case Kind::Mul: {
            LSeries r = s_const(num(1));
            for (const auto& k : e->kids) r = s_mul(r, s_of(k, t, cap), cap);
            return r;
        }
        case Kind::Pow:
            return s_pow(s_of(e->kids[0], t, cap), e->ipow, cap);
        case Kind::Fun:
            return s_fun(e->fn, s_of(e->kids[0], t, cap), cap);
        case Kind::Hyp: {
            LSeries A = s_of(e->kids[0], t, cap);
            Rat a = e->ha, b = e->hb, c = e->hc;
            return s_compose(A, cap, [a, b, c](int k, const Ex& a0) -> Ex {
                Rat f(1);
                for (int i = 0; i < k; ++i) {
                    Rat ci = c + Rat(i);
                    if (ci == Rat(0))
                        throw SeriesError("hyp2f1 derivative hit a non-positive integer c");
                    f *= (a + Rat(i)) * (b + Rat(i)) / ci;
                }
                return num(f * rat_pow(factorial(k), -1)) *
                       hyp2f1(a + Rat(k), b + Rat(k), c + Rat(k), a0);
            });
        }
        case Kind::Ext: {
            LSeries A = s_of(e->kids[0], t, cap);
            int id = e->ext_id, ord = e->ext_order;
            std::string disp = e->sym;
            return s_compose(A, cap, [id, ord, disp](int k, const Ex& a0) -> Ex {
                return ext(id, ord + k, disp, a0) * num(rat_pow(factorial(k), -1));
            });
        }
    }
    throw SeriesError("unhandled node in series expansion");
}

}  // namespace series_detail

// Expand e in t; coefficients with exponent <= order are exact on return.
inline LSeries series_of(const Ex& e, const std::string& t, int order) {
    int pad = 8;
    for (int attempt = 0; attempt < 4; ++attempt) {
        LSeries s = series_detail::s_of(e, t, order + pad);
        if (s.order >= order) {
            series_detail::truncate(s, order);
            return s;
        }
        pad *= 2;
    }
    throw SeriesError("series truncation did not stabilize at the requested order");
}

// Value at t = 0 through a removable singularity; throws if the limit does not
// exist as a finite number.
inline Ex series_limit_at_zero(const Ex& e, const std::string& t) {
    LSeries s = series_of(e, t, 1);
    if (!series_log_free(s)) throw SingularEvalError("log divergence at t=0 in " + to_string(e));
    if (!s.a.empty() && s.a.begin()->first < 0)
        throw SingularEvalError("pole at t=0 in " + to_string(e));
    return series_coeff(s, 0);
}

}  // namespace bmsym
