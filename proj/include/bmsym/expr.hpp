#pragma once
// Immutable symbolic expression trees: rational constants, coordinate symbols,
// sums, products, integer powers, a fixed set of unary functions, the Gauss
// hypergeometric function with rational parameters, and registered opaque
// numeric functions (used for desingularization profiles).

#include "bmsym/rational.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace bmsym {

enum class Kind : uint8_t { Num, Sym, Add, Mul, Pow, Fun, Hyp, Ext };

enum class Fn : uint8_t { Sin, Cos, Tan, Cot, Exp, Abs, LogAbs };

inline const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Cot: return "cot";
        case Fn::Exp: return "exp";
        case Fn::Abs: return "abs";
        case Fn::LogAbs: return "log";  // always log of abs; printed as log(abs(...))
    }
    return "?";
}

struct Node;
using Ex = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    Rat num;                 // Num
    std::string sym;         // Sym; Ext display name
    std::vector<Ex> kids;    // Add/Mul operands; arg at kids[0] for Pow/Fun/Hyp/Ext
    long long ipow = 0;      // Pow exponent
    Fn fn = Fn::Sin;         // Fun
    Rat ha, hb, hc;          // Hyp parameters
    int ext_id = -1;         // Ext registry id
    int ext_order = 0;       // Ext derivative order
};

inline Ex num(Rat r) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Num;
    n->num = std::move(r);
    return n;
}
inline Ex num(long long v) { return num(Rat(BigInt(v))); }

inline Ex sym(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sym;
    n->sym = std::move(name);
    return n;
}

inline Ex add(std::vector<Ex> kids) {
    if (kids.empty()) return num(0);
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<Node>();
    n->kind = Kind::Add;
    n->kids = std::move(kids);
    return n;
}

inline Ex mul(std::vector<Ex> kids) {
    if (kids.empty()) return num(1);
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<Node>();
    n->kind = Kind::Mul;
    n->kids = std::move(kids);
    return n;
}

inline Ex pow(Ex base, long long e) {
    if (e == 1) return base;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->kids = {std::move(base)};
    n->ipow = e;
    return n;
}

inline Ex fun(Fn f, Ex arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Fun;
    n->fn = f;
    n->kids = {std::move(arg)};
    return n;
}

inline Ex hyp2f1(Rat a, Rat b, Rat c, Ex arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Hyp;
    n->ha = std::move(a);
    n->hb = std::move(b);
    n->hc = std::move(c);
    n->kids = {std::move(arg)};
    return n;
}

// Opaque registered function; `order` counts formal derivatives taken of it.
inline Ex ext(int id, int order, std::string display, Ex arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Ext;
    n->ext_id = id;
    n->ext_order = order;
    n->sym = std::move(display);
    n->kids = {std::move(arg)};
    return n;
}

inline Ex operator+(const Ex& a, const Ex& b) { return add({a, b}); }
inline Ex operator*(const Ex& a, const Ex& b) { return mul({a, b}); }
inline Ex operator-(const Ex& a) { return mul({num(-1), a}); }
inline Ex operator-(const Ex& a, const Ex& b) { return add({a, mul({num(-1), b})}); }
inline Ex operator/(const Ex& a, const Ex& b) { return mul({a, pow(b, -1)}); }

inline bool is_num(const Ex& e) { return e->kind == Kind::Num; }
inline bool is_num(const Ex& e, long long v) { return e->kind == Kind::Num && e->num == Rat(BigInt(v)); }

// Deterministic total order on trees; the basis of canonical term ordering.
inline int cmp(const Ex& a, const Ex& b) {
    if (a.get() == b.get()) return 0;
    auto rank = [](Kind k) {
        switch (k) {
            case Kind::Num: return 0;
            case Kind::Sym: return 1;
            case Kind::Fun: return 2;
            case Kind::Hyp: return 3;
            case Kind::Ext: return 4;
            case Kind::Pow: return 5;
            case Kind::Mul: return 6;
            case Kind::Add: return 7;
        }
        return 8;
    };
    if (rank(a->kind) != rank(b->kind)) return rank(a->kind) < rank(b->kind) ? -1 : 1;
    switch (a->kind) {
        case Kind::Num:
            return rat_cmp(a->num, b->num);
        case Kind::Sym:
            return a->sym.compare(b->sym) < 0 ? -1 : (a->sym == b->sym ? 0 : 1);
        case Kind::Fun:
            if (a->fn != b->fn) return static_cast<int>(a->fn) < static_cast<int>(b->fn) ? -1 : 1;
            return cmp(a->kids[0], b->kids[0]);
        case Kind::Hyp: {
            if (int c = rat_cmp(a->ha, b->ha)) return c;
            if (int c = rat_cmp(a->hb, b->hb)) return c;
            if (int c = rat_cmp(a->hc, b->hc)) return c;
            return cmp(a->kids[0], b->kids[0]);
        }
        case Kind::Ext: {
            if (a->ext_id != b->ext_id) return a->ext_id < b->ext_id ? -1 : 1;
            if (a->ext_order != b->ext_order) return a->ext_order < b->ext_order ? -1 : 1;
            return cmp(a->kids[0], b->kids[0]);
        }
        case Kind::Pow: {
            if (int c = cmp(a->kids[0], b->kids[0])) return c;
            if (a->ipow != b->ipow) return a->ipow < b->ipow ? -1 : 1;
            return 0;
        }
        case Kind::Mul:
        case Kind::Add: {
            size_t n = std::min(a->kids.size(), b->kids.size());
            for (size_t i = 0; i < n; ++i)
                if (int c = cmp(a->kids[i], b->kids[i])) return c;
            if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
            return 0;
        }
    }
    return 0;
}

inline bool identical(const Ex& a, const Ex& b) { return cmp(a, b) == 0; }

namespace detail {

inline void print_rec(std::string& out, const Ex& e, int parent_prec);

// precedence: 0 add, 1 mul, 2 pow, 3 atom
inline int precedence(const Ex& e) {
    switch (e->kind) {
        case Kind::Add: return 0;
        case Kind::Mul: return 1;
        case Kind::Pow: return 2;
        case Kind::Num: return (e->num < Rat(0) || !is_integer(e->num)) ? 1 : 3;
        default: return 3;
    }
}

inline void print_rec(std::string& out, const Ex& e, int parent_prec) {
    int prec = precedence(e);
    bool paren = prec < parent_prec;
    if (paren) out += '(';
    switch (e->kind) {
        case Kind::Num:
            out += to_string(e->num);
            break;
        case Kind::Sym:
            out += e->sym;
            break;
        case Kind::Add:
            for (size_t i = 0; i < e->kids.size(); ++i) {
                const Ex& k = e->kids[i];
                // fold a leading -1 coefficient into a binary minus
                bool neg = false;
                Ex body = k;
                if (k->kind == Kind::Num && k->num < Rat(0)) {
                    neg = true;
                    body = num(-k->num);
                } else if (k->kind == Kind::Mul && !k->kids.empty() && k->kids[0]->kind == Kind::Num &&
                           k->kids[0]->num < Rat(0)) {
                    neg = true;
                    std::vector<Ex> rest(k->kids.begin(), k->kids.end());
                    rest[0] = num(-rest[0]->num);
                    if (rest[0]->kind == Kind::Num && rest[0]->num == Rat(1) && rest.size() > 1)
                        rest.erase(rest.begin());
                    body = mul(std::move(rest));
                }
                if (i == 0) {
                    if (neg) out += '-';
                } else {
                    out += neg ? " - " : " + ";
                }
                print_rec(out, body, 1);
            }
            break;
        case Kind::Mul:
            for (size_t i = 0; i < e->kids.size(); ++i) {
                if (i) out += '*';
                print_rec(out, e->kids[i], 2);
            }
            break;
        case Kind::Pow: {
            print_rec(out, e->kids[0], 3);
            out += '^';
            if (e->ipow < 0) {
                out += '(';
                out += std::to_string(e->ipow);
                out += ')';
            } else {
                out += std::to_string(e->ipow);
            }
            break;
        }
        case Kind::Fun:
            if (e->fn == Fn::LogAbs) {
                out += "log(abs(";
                print_rec(out, e->kids[0], 0);
                out += "))";
            } else {
                out += fn_name(e->fn);
                out += '(';
                print_rec(out, e->kids[0], 0);
                out += ')';
            }
            break;
        case Kind::Hyp:
            out += "hyp2f1(";
            out += to_string(e->ha);
            out += ',';
            out += to_string(e->hb);
            out += ',';
            out += to_string(e->hc);
            out += "; ";
            print_rec(out, e->kids[0], 0);
            out += ')';
            break;
        case Kind::Ext:
            out += e->sym;
            for (int i = 0; i < e->ext_order; ++i) out += '\'';
            out += '(';
            print_rec(out, e->kids[0], 0);
            out += ')';
            break;
    }
    if (paren) out += ')';
}

}  // namespace detail

// Raw structural printing; callers wanting a stable text should canonicalize first.
inline std::string to_string(const Ex& e) {
    std::string out;
    detail::print_rec(out, e, 0);
    return out;
}

inline bool contains_sym(const Ex& e, const std::string& name) {
    if (e->kind == Kind::Sym) return e->sym == name;
    for (const auto& k : e->kids)
        if (contains_sym(k, name)) return true;
    return false;
}

inline Ex substitute(const Ex& e, const std::string& name, const Ex& repl) {
    if (e->kind == Kind::Sym) return e->sym == name ? repl : e;
    if (e->kids.empty()) return e;
    bool changed = false;
    std::vector<Ex> kids;
    kids.reserve(e->kids.size());
    for (const auto& k : e->kids) {
        Ex nk = substitute(k, name, repl);
        changed |= nk.get() != k.get();
        kids.push_back(std::move(nk));
    }
    if (!changed) return e;
    auto n = std::make_shared<Node>(*e);
    n->kids = std::move(kids);
    return n;
}

}  // namespace bmsym
