#pragma once
// Partial differentiation. sgn-type factors u/abs(u) differentiate to zero
// away from their zeros because abs' = u/abs(u) combined with the abs-parity
// normalization cancels exactly.

#include "bmsym/expr.hpp"
#include "bmsym/simplify.hpp"

#include <string>
#include <vector>

namespace bmsym {

inline Ex differentiate(const Ex& e, const std::string& x) {
    switch (e->kind) {
        case Kind::Num:
            return num(0);
        case Kind::Sym:
            return num(e->sym == x ? 1 : 0);
        case Kind::Add: {
            std::vector<Ex> parts;
            parts.reserve(e->kids.size());
            for (const auto& k : e->kids) parts.push_back(differentiate(k, x));
            return add(std::move(parts));
        }
        case Kind::Mul: {
            std::vector<Ex> sum;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                std::vector<Ex> prod;
                prod.reserve(e->kids.size());
                for (size_t j = 0; j < e->kids.size(); ++j)
                    prod.push_back(i == j ? differentiate(e->kids[j], x) : e->kids[j]);
                sum.push_back(mul(std::move(prod)));
            }
            return add(std::move(sum));
        }
        case Kind::Pow: {
            const Ex& b = e->kids[0];
            return mul({num(e->ipow), pow(b, e->ipow - 1), differentiate(b, x)});
        }
        case Kind::Fun: {
            const Ex& u = e->kids[0];
            Ex du = differentiate(u, x);
            switch (e->fn) {
                case Fn::Sin:
                    return fun(Fn::Cos, u) * du;
                case Fn::Cos:
                    return mul({num(-1), fun(Fn::Sin, u), du});
                case Fn::Tan:
                    return pow(fun(Fn::Cos, u), -2) * du;
                case Fn::Cot:
                    return mul({num(-1), pow(fun(Fn::Sin, u), -2), du});
                case Fn::Exp:
                    return fun(Fn::Exp, u) * du;
                case Fn::Abs:
                    return mul({u, pow(fun(Fn::Abs, u), -1), du});
                case Fn::LogAbs:
                    return pow(u, -1) * du;
            }
            return num(0);
        }
        case Kind::Hyp: {
            const Ex& u = e->kids[0];
            Rat factor = e->ha * e->hb / e->hc;
            return mul({num(factor), hyp2f1(e->ha + Rat(1), e->hb + Rat(1), e->hc + Rat(1), u),
                        differentiate(u, x)});
        }
        case Kind::Ext: {
            const Ex& u = e->kids[0];
            return ext(e->ext_id, e->ext_order + 1, e->sym, u) * differentiate(u, x);
        }
    }
    return num(0);
}

inline Ex differentiate_n(Ex e, const std::string& x, int n) {
    for (int i = 0; i < n; ++i) e = canon(differentiate(e, x));
    return e;
}

}  // namespace bmsym
