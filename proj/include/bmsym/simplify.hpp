#pragma once
// Canonicalization into a sum of sorted monomials over atomic factors, plus the
// named rewrites (Pythagorean, cot/tan elimination, hypergeometric square-root
// reduction). Trig atoms are never expanded automatically: sin^2+cos^2 -> 1 is
// applied only through trig_normal().

#include "bmsym/error.hpp"
#include "bmsym/expr.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace bmsym {

struct Factor {
    Ex atom;        // canonical, kind in {Sym, Fun, Hyp, Ext, Add}
    long long exp;  // never 0; abs(...) atoms always carry exp = +1 or -1
};
using Monomial = std::vector<Factor>;  // sorted by cmp(atom)
struct PTerm {
    Monomial mono;
    Rat coef;
};
using Poly = std::vector<PTerm>;  // sorted by monomial order, no zero coefs

namespace detail {

inline int mono_cmp(const Monomial& a, const Monomial& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        if (int c = cmp(a[i].atom, b[i].atom)) return c;
        if (a[i].exp != b[i].exp) return a[i].exp < b[i].exp ? -1 : 1;
    }
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

inline void poly_insert(Poly& p, PTerm t) {
    if (t.coef == Rat(0)) return;
    auto it = std::lower_bound(p.begin(), p.end(), t, [](const PTerm& x, const PTerm& y) {
        return mono_cmp(x.mono, y.mono) < 0;
    });
    if (it != p.end() && mono_cmp(it->mono, t.mono) == 0) {
        it->coef += t.coef;
        if (it->coef == Rat(0)) p.erase(it);
    } else {
        p.insert(it, std::move(t));
    }
}

inline Poly poly_const(Rat r) {
    Poly p;
    if (!(r == Rat(0))) p.push_back({{}, std::move(r)});
    return p;
}

inline Poly poly_atom(Ex atom, long long e = 1) {
    Poly p;
    p.push_back({{Factor{std::move(atom), e}}, Rat(1)});
    return p;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& t : b) poly_insert(r, t);
    return r;
}

Poly canon_poly(const Ex& e);  // fwd
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& p, long long k);
Ex rebuild(const Poly& p);

// Multiply p by atom^e, with the abs-parity and exp-power collapses applied.
inline Poly poly_mul_atom_pow(const Poly& p, const Ex& atom, long long e) {
    if (e == 0 || p.empty()) return p;
    if (atom->kind == Kind::Fun && atom->fn == Fn::Abs) {
        // abs(u)^even == u^even; odd exponents keep one abs factor
        long long s = e > 0 ? 1 : -1;
        long long even_part = (e % 2 == 0) ? e : e - s;
        Poly r = p;
        if (even_part != 0) r = poly_mul(r, poly_pow(canon_poly(atom->kids[0]), even_part));
        if (e % 2 != 0) {
            Poly q;
            for (const auto& t : r) {
                PTerm nt = t;
                auto it = std::lower_bound(nt.mono.begin(), nt.mono.end(), atom,
                                           [](const Factor& f, const Ex& a) { return cmp(f.atom, a) < 0; });
                if (it != nt.mono.end() && cmp(it->atom, atom) == 0) {
                    // abs factors only ever carry +-1 here, so two of them collapse
                    long long tot = it->exp + s;
                    nt.mono.erase(it);
                    Poly one;
                    one.push_back(std::move(nt));
                    Poly merged = poly_mul_atom_pow(one, atom, tot);
                    for (auto& mt : merged) poly_insert(q, std::move(mt));
                    continue;
                }
                nt.mono.insert(it, Factor{atom, s});
                poly_insert(q, std::move(nt));
            }
            r = std::move(q);
        }
        return r;
    }
    Ex at = atom;
    long long ee = e;
    if (at->kind == Kind::Fun && at->fn == Fn::Exp && ee != 1) {
        // exp(u)^k == exp(k u)
        Poly scaled = canon_poly(mul({num(ee), at->kids[0]}));
        if (scaled.empty()) return p;  // exp(0) == 1
        at = fun(Fn::Exp, rebuild(scaled));
        ee = 1;
    }
    Poly r;
    for (const auto& t : p) {
        PTerm nt = t;
        auto it = std::lower_bound(nt.mono.begin(), nt.mono.end(), at,
                                   [](const Factor& f, const Ex& a) { return cmp(f.atom, a) < 0; });
        if (it != nt.mono.end() && cmp(it->atom, at) == 0) {
            it->exp += ee;
            if (it->exp == 0) nt.mono.erase(it);
        } else {
            nt.mono.insert(it, Factor{at, ee});
        }
        poly_insert(r, std::move(nt));
    }
    return r;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& ta : a) {
        for (const auto& tb : b) {
            Poly acc;
            acc.push_back(PTerm{ta.mono, ta.coef * tb.coef});
            for (const auto& f : tb.mono) acc = poly_mul_atom_pow(acc, f.atom, f.exp);
            for (auto& t : acc) poly_insert(r, std::move(t));
        }
    }
    return r;
}

constexpr long long kExpandCap = 16;

inline Poly poly_pow(const Poly& p, long long k) {
    if (k == 0) return poly_const(Rat(1));
    if (k == 1) return p;
    if (p.empty()) {
        if (k < 0) throw DivisionByZero();
        return p;
    }
    if (p.size() == 1) {
        const PTerm& t = p[0];
        Poly r = poly_const(rat_pow(t.coef, k));
        for (const auto& f : t.mono) r = poly_mul_atom_pow(r, f.atom, f.exp * k);
        return r;
    }
    if (k < 0 || k > kExpandCap) {
        return poly_atom(rebuild(p), k);  // keep the sum as an opaque base
    }
    Poly r = poly_const(Rat(1));
    Poly base = p;
    long long kk = k;
    while (kk) {
        if (kk & 1) r = poly_mul(r, base);
        kk >>= 1;
        if (kk) base = poly_mul(base, base);
    }
    return r;
}

inline Poly poly_neg(const Poly& p) {
    Poly r = p;
    for (auto& t : r) t.coef = -t.coef;
    return r;
}

inline bool is_atom_kind(const Ex& e) {
    switch (e->kind) {
        case Kind::Sym:
        case Kind::Fun:
        case Kind::Hyp:
        case Kind::Ext:
            return true;
        default:
            return false;
    }
}

// abs() pushed through the multiplicative structure of an already-canonical arg.
inline Ex abs_of(const Ex& a) {
    switch (a->kind) {
        case Kind::Num:
            return num(a->num < Rat(0) ? -a->num : a->num);
        case Kind::Mul: {
            std::vector<Ex> parts;
            parts.reserve(a->kids.size());
            for (const auto& k : a->kids) parts.push_back(abs_of(k));
            return mul(std::move(parts));
        }
        case Kind::Pow:
            return pow(abs_of(a->kids[0]), a->ipow);
        case Kind::Fun:
            if (a->fn == Fn::Abs) return a;
            if (a->fn == Fn::Exp) return a;  // exp is positive
            return fun(Fn::Abs, a);
        default:
            return fun(Fn::Abs, a);
    }
}

// log(abs(.)) split over products and powers of an already-canonical arg.
inline Ex logabs_of(const Ex& a) {
    switch (a->kind) {
        case Kind::Num: {
            if (a->num == Rat(0)) return fun(Fn::LogAbs, a);  // singular, kept verbatim
            Rat q = a->num < Rat(0) ? -a->num : a->num;
            if (q == Rat(1)) return num(0);
            return fun(Fn::LogAbs, num(q));
        }
        case Kind::Mul: {
            std::vector<Ex> parts;
            parts.reserve(a->kids.size());
            for (const auto& k : a->kids) parts.push_back(logabs_of(k));
            return add(std::move(parts));
        }
        case Kind::Pow:
            return mul({num(a->ipow), logabs_of(a->kids[0])});
        case Kind::Fun:
            if (a->fn == Fn::Abs) return logabs_of(a->kids[0]);
            if (a->fn == Fn::Exp) return a->kids[0];
            return fun(Fn::LogAbs, a);
        default:
            return fun(Fn::LogAbs, a);
    }
}

inline Ex canon_fun(Fn f, const Ex& arg /* canonical */) {
    if (arg->kind == Kind::Num) {
        const Rat& q = arg->num;
        switch (f) {
            case Fn::Sin:
            case Fn::Tan:
                if (q == Rat(0)) return num(0);
                break;
            case Fn::Cos:
                if (q == Rat(0)) return num(1);
                break;
            case Fn::Exp:
                if (q == Rat(0)) return num(1);
                break;
            case Fn::Abs:
                return num(q < Rat(0) ? -q : q);
            case Fn::LogAbs:
                return logabs_of(arg);
            case Fn::Cot:
                break;  // cot(0) is singular; kept as written
        }
    }
    if (f == Fn::Abs) return abs_of(arg);
    if (f == Fn::LogAbs) return logabs_of(arg);
    // odd/even argument normalization for a deterministic representative
    bool odd = (f == Fn::Sin || f == Fn::Tan || f == Fn::Cot);
    bool even = (f == Fn::Cos);
    if (odd || even) {
        Ex na = rebuild(poly_neg(canon_poly(arg)));
        if (cmp(na, arg) < 0) {
            Ex base = fun(f, na);
            return odd ? mul({num(-1), base}) : base;
        }
    }
    return fun(f, arg);
}

inline Poly canon_poly_impl(const Ex& e) {
    switch (e->kind) {
        case Kind::Num:
            return poly_const(e->num);
        case Kind::Sym:
            return poly_atom(e);
        case Kind::Add: {
            Poly r;
            for (const auto& k : e->kids) r = poly_add(r, canon_poly(k));
            return r;
        }
        case Kind::Mul: {
            Poly r = poly_const(Rat(1));
            for (const auto& k : e->kids) {
                r = poly_mul(r, canon_poly(k));
                if (r.empty()) return r;
            }
            return r;
        }
        case Kind::Pow:
            return poly_pow(canon_poly(e->kids[0]), e->ipow);
        case Kind::Fun: {
            Ex arg = rebuild(canon_poly(e->kids[0]));
            Ex r = canon_fun(e->fn, arg);
            if (r->kind == Kind::Num) return poly_const(r->num);
            if (r->kind == Kind::Fun && identical(r->kids[0], arg)) return poly_atom(r);
            if (r->kind == Kind::Fun) return poly_atom(r);  // arg folded inside (e.g. log(abs(q)))
            return canon_poly(r);
        }
        case Kind::Hyp: {
            Ex arg = rebuild(canon_poly(e->kids[0]));
            if (arg->kind == Kind::Num && arg->num == Rat(0)) return poly_const(Rat(1));
            return poly_atom(hyp2f1(e->ha, e->hb, e->hc, arg));
        }
        case Kind::Ext: {
            Ex arg = rebuild(canon_poly(e->kids[0]));
            return poly_atom(ext(e->ext_id, e->ext_order, e->sym, arg));
        }
    }
    return poly_const(Rat(0));
}

inline Poly canon_poly(const Ex& e) { return canon_poly_impl(e); }

inline Ex rebuild(const Poly& p) {
    if (p.empty()) return num(0);
    std::vector<Ex> terms;
    terms.reserve(p.size());
    for (const auto& t : p) {
        std::vector<Ex> factors;
        if (!(t.coef == Rat(1)) || t.mono.empty()) factors.push_back(num(t.coef));
        for (const auto& f : t.mono) factors.push_back(pow(f.atom, f.exp));
        terms.push_back(mul(std::move(factors)));
    }
    return add(std::move(terms));
}

}  // namespace detail

inline Ex canon(const Ex& e) {
    // the key expression is pinned in the cache entry so node addresses
    // cannot be recycled while the entry lives
    struct Entry {
        Ex self;
        Ex result;
    };
    thread_local std::unordered_map<const Node*, Entry> cache;
    auto it = cache.find(e.get());
    if (it != cache.end()) return it->second.result;
    Ex r = detail::rebuild(detail::canon_poly(e));
    if (cache.size() > (1u << 20)) cache.clear();
    cache.emplace(e.get(), Entry{e, r});
    return r;
}

inline bool is_zero(const Ex& e) {
    Ex c = canon(e);
    return c->kind == Kind::Num && c->num == Rat(0);
}

inline bool equal(const Ex& a, const Ex& b) { return is_zero(a - b); }

// Throws unless the expression folds to an exact rational.
inline Rat as_rat(const Ex& e) {
    Ex c = canon(e);
    if (c->kind != Kind::Num) throw Error("expected a rational constant, got: " + to_string(c));
    return c->num;
}

// ---- named rewrites -------------------------------------------------------

// cot -> cos/sin, tan -> sin/cos (a rewrite, never applied automatically)
inline Ex rewrite_cot_tan(const Ex& e) {
    if (e->kind == Kind::Fun && (e->fn == Fn::Cot || e->fn == Fn::Tan)) {
        Ex a = rewrite_cot_tan(e->kids[0]);
        if (e->fn == Fn::Cot) return fun(Fn::Cos, a) * pow(fun(Fn::Sin, a), -1);
        return fun(Fn::Sin, a) * pow(fun(Fn::Cos, a), -1);
    }
    if (e->kids.empty()) return e;
    std::vector<Ex> kids;
    kids.reserve(e->kids.size());
    bool changed = false;
    for (const auto& k : e->kids) {
        kids.push_back(rewrite_cot_tan(k));
        changed |= kids.back().get() != k.get();
    }
    if (!changed) return e;
    auto n = std::make_shared<Node>(*e);
    n->kids = std::move(kids);
    return n;
}

// sin^2+cos^2 -> 1, realized by eliminating positive even cos powers.
inline Ex pythagorean_normal(const Ex& e) {
    Ex cur = canon(e);
    for (int guard = 0; guard < 64; ++guard) {
        Poly p = detail::canon_poly(cur);
        bool changed = false;
        Poly out;
        for (const auto& t : p) {
            const Factor* hit = nullptr;
            for (const auto& f : t.mono) {
                if (f.atom->kind == Kind::Fun && f.atom->fn == Fn::Cos && f.exp >= 2) {
                    hit = &f;
                    break;
                }
            }
            if (!hit) {
                detail::poly_insert(out, t);
                continue;
            }
            long long q = hit->exp / 2, rem = hit->exp % 2;
            Ex u = hit->atom->kids[0];
            PTerm rest{Monomial{}, t.coef};
            for (const auto& f : t.mono) {
                if (&f == hit) continue;
                rest.mono.push_back(f);
            }
            Poly acc;
            acc.push_back(std::move(rest));
            if (rem) acc = detail::poly_mul_atom_pow(acc, hit->atom, 1);
            Ex one_minus_sin2 = num(1) - pow(fun(Fn::Sin, u), 2);
            acc = detail::poly_mul(acc, detail::poly_pow(detail::canon_poly(one_minus_sin2), q));
            for (auto& nt : acc) detail::poly_insert(out, std::move(nt));
            changed = true;
        }
        cur = detail::rebuild(out);
        if (!changed) break;
    }
    return cur;
}

inline Ex trig_normal(const Ex& e) { return pythagorean_normal(canon(rewrite_cot_tan(e))); }

inline bool is_zero_trig(const Ex& e) {
    if (is_zero(e)) return true;
    Ex t = trig_normal(e);
    return t->kind == Kind::Num && t->num == Rat(0);
}

inline bool equal_trig(const Ex& a, const Ex& b) { return is_zero_trig(a - b); }

// hyp2f1(1/2,-1/2;1/2; sin(u)^2) -> abs(cos(u))
inline Ex rewrite_hyp_sqrt(const Ex& e) {
    if (e->kind == Kind::Hyp && e->ha == rat(1, 2) && e->hb == rat(-1, 2) && e->hc == rat(1, 2)) {
        Ex arg = canon(e->kids[0]);
        Poly p = detail::canon_poly(arg);
        if (p.size() == 1 && p[0].coef == Rat(1) && p[0].mono.size() == 1 && p[0].mono[0].exp == 2 &&
            p[0].mono[0].atom->kind == Kind::Fun && p[0].mono[0].atom->fn == Fn::Sin) {
            return fun(Fn::Abs, fun(Fn::Cos, p[0].mono[0].atom->kids[0]));
        }
    }
    if (e->kids.empty()) return e;
    std::vector<Ex> kids;
    kids.reserve(e->kids.size());
    bool changed = false;
    for (const auto& k : e->kids) {
        kids.push_back(rewrite_hyp_sqrt(k));
        changed |= kids.back().get() != k.get();
    }
    if (!changed) return e;
    auto n = std::make_shared<Node>(*e);
    n->kids = std::move(kids);
    return n;
}

}  // namespace bmsym
