#pragma once
// Torus actions on chart models: invariance and exactness tests for the
// contraction, symbolic moment maps through a closed antiderivative table
// (poles, log, csc/sec power reductions, polynomial-times-trig by parts), and
// the canonical split of the resulting Hamiltonians. Working sign convention
// throughout: iota_{xi} omega = -d mu.

#include "bmsym/bmfunction.hpp"
#include "bmsym/error.hpp"
#include "bmsym/forms.hpp"
#include "bmsym/laurent.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bmsym {

struct ActionGenerator {
    std::string name;
    VectorFieldExpr field;
};

struct ActionSpec {
    std::vector<ActionGenerator> gens;
    int rank = 0;

    static ActionSpec rotations(const ChartModel& chart, const std::vector<std::string>& angles) {
        ActionSpec a;
        for (const auto& ang : angles) a.gens.push_back({"d_" + ang, coordinate_field(chart, ang)});
        a.rank = static_cast<int>(a.gens.size());
        return a;
    }
};

// bare (non-trigonometric) occurrences of an angle make a field ill-defined on
// the torus
inline bool bare_occurrence(const Ex& e, const std::string& angle) {
    switch (e->kind) {
        case Kind::Sym:
            return e->sym == angle;
        case Kind::Fun:
            if (e->fn == Fn::Sin || e->fn == Fn::Cos || e->fn == Fn::Tan || e->fn == Fn::Cot)
                return false;
            return bare_occurrence(e->kids[0], angle);
        default:
            for (const auto& k : e->kids)
                if (bare_occurrence(k, angle)) return true;
            return false;
    }
}

inline void validate_action(const ActionSpec& a, const ChartModel& chart) {
    for (const auto& g : a.gens)
        if (!g.field.chart.same_coords(chart)) throw InputError("generator chart mismatch");
    for (size_t i = 0; i < a.gens.size(); ++i)
        for (size_t j = i + 1; j < a.gens.size(); ++j) {
            VectorFieldExpr br = lie_bracket(a.gens[i].field, a.gens[j].field);
            for (const auto& c : br.comp)
                if (!is_zero_trig(c))
                    throw InputError("generators " + a.gens[i].name + ", " + a.gens[j].name +
                                     " do not commute");
        }
    for (size_t ci = 0; ci < chart.dim(); ++ci) {
        if (!chart.periodic[ci]) continue;
        for (const auto& g : a.gens)
            for (const auto& comp : g.field.comp)
                if (bare_occurrence(canon(comp), chart.coords[ci]))
                    throw InputError("generator " + g.name + " is not single-valued in " +
                                     chart.coords[ci]);
    }
}

struct HamiltonianCheck {
    struct Row {
        std::string gen;
        bool invariant = false;
        bool closed_contraction = false;
        bool in_class = false;
        SingularForm contraction;
        std::string note;
    };
    std::vector<Row> rows;
    bool all_pass = true;
};

inline HamiltonianCheck check_bm_hamiltonian(const SingularForm& w_in, const ActionSpec& a) {
    SingularForm w = to_standard_coframe_if_needed(w_in);
    if (w.degree != 2) throw InputError("hamiltonian check: degree must be 2");
    const ChartModel& ch = w.chart;
    HamiltonianCheck out;
    for (const auto& g : a.gens) {
        HamiltonianCheck::Row row;
        row.gen = g.name;
        SingularForm lie = lie_derivative(g.field, w);
        row.invariant = true;
        for (const auto& t : lie.terms)
            if (!is_zero_trig(t.coeff)) {
                row.invariant = false;
                row.note = "L_xi w has term " + to_string(t.coeff);
                break;
            }
        row.contraction = interior_product(g.field, w);
        SingularForm dc = ext_d(row.contraction);
        row.closed_contraction = true;
        for (const auto& t : dc.terms)
            if (!is_zero_trig(t.coeff)) {
                row.closed_contraction = false;
                if (row.note.empty()) row.note = "d(iota_xi w) has term " + to_string(t.coeff);
                break;
            }
        row.in_class = true;
        if (ch.defining) {
            const std::string& t = *ch.defining;
            const int def = ch.defining_index();
            for (const auto& term : row.contraction.terms) {
                try {
                    LSeries s = series_of(term.coeff, t, 1);
                    int allowed = (term.idx[0] == def) ? ch.m : ch.m - 1;
                    if (!series_log_free(s) ||
                        (!s.a.empty() && s.a.begin()->first < -allowed)) {
                        row.in_class = false;
                        if (row.note.empty()) row.note = "contraction outside the admissible class";
                    }
                } catch (const SeriesError& e) {
                    row.in_class = false;
                    if (row.note.empty()) row.note = e.what();
                }
            }
        }
        out.all_pass = out.all_pass && row.invariant && row.closed_contraction && row.in_class;
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---- antiderivative table ---------------------------------------------------

namespace antider_detail {

// I(p, q) = integral of sin^p(u) cos^q(u) du, expressed in closed form or
// rejected. `L` is the (linear) inner argument.
inline Ex trig_integral(long long p, long long q, const Ex& L, int depth = 0) {
    if (depth > 64) throw AntiderivativeNotInTable("trig reduction did not terminate");
    Ex S = fun(Fn::Sin, L), C = fun(Fn::Cos, L);
    if (p == 0 && q == 0) return L;
    if (q == 1) {
        if (p == -1) return fun(Fn::LogAbs, S);
        return pow(S, p + 1) * num(rat(1, p + 1));
    }
    if (p == 1) {
        if (q == -1) return -fun(Fn::LogAbs, C);
        return -(pow(C, q + 1) * num(rat(1, q + 1)));
    }
    if (q == 0) {
        if (p >= 2)
            return -(pow(S, p - 1) * C * num(rat(1, p))) +
                   num(rat(p - 1, p)) * trig_integral(p - 2, 0, L, depth + 1);
        if (p == -1) throw AntiderivativeNotInTable("odd cosecant power: log(tan(u/2)) not in class");
        // p <= -2: cosecant reduction, base csc^2 -> -cot
        long long n = -p;
        if (n == 2) return -fun(Fn::Cot, L);
        return -(C * pow(S, p + 1) * num(rat(1, n - 1))) +
               num(rat(n - 2, n - 1)) * trig_integral(p + 2, 0, L, depth + 1);
    }
    if (p == 0) {
        if (q >= 2)
            return pow(C, q - 1) * S * num(rat(1, q)) +
                   num(rat(q - 1, q)) * trig_integral(0, q - 2, L, depth + 1);
        if (q == -1) throw AntiderivativeNotInTable("odd secant power not in class");
        long long n = -q;
        if (n == 2) return fun(Fn::Tan, L);
        return S * pow(C, q + 1) * num(rat(1, n - 1)) +
               num(rat(n - 2, n - 1)) * trig_integral(0, q + 2, L, depth + 1);
    }
    if (q >= 2 || (q > 0 && q % 2 == 1)) {
        // cos^2 = 1 - sin^2
        return trig_integral(p, q - 2, L, depth + 1) - trig_integral(p + 2, q - 2, L, depth + 1);
    }
    if (p >= 2) {
        // sin^2 = 1 - cos^2
        return trig_integral(p - 2, q, L, depth + 1) - trig_integral(p - 2, q + 2, L, depth + 1);
    }
    // both exponents negative: insert sin^2 + cos^2 = 1
    if (p < 0 && q < 0)
        return trig_integral(p + 2, q, L, depth + 1) + trig_integral(p, q + 2, L, depth + 1);
    throw AntiderivativeNotInTable("sin^" + std::to_string(p) + " cos^" + std::to_string(q));
}

struct XPart {
    long long n = 0;                 // power of x
    std::optional<Ex> trig_arg;      // common linear argument
    Rat slope = Rat(0);              // d(arg)/dx
    long long p = 0, q = 0;          // sin/cos exponents
    std::optional<Ex> exp_arg;       // linear exponential argument
    Rat exp_slope = Rat(0);
    Monomial constants;              // x-free factors
};

inline bool depends_on(const Ex& e, const std::string& x) { return contains_sym(e, x); }

inline Rat linear_slope(const Ex& arg, const std::string& x) {
    Ex d = canon(differentiate(arg, x));
    if (d->kind != Kind::Num)
        throw AntiderivativeNotInTable("non-linear inner argument: " + to_string(arg));
    Ex dd = canon(differentiate(d, x));
    (void)dd;  // derivative of a constant; nothing further to check
    if (d->num == Rat(0)) throw AntiderivativeNotInTable("inner argument does not involve x");
    return d->num;
}

inline XPart classify(const PTerm& term, const std::string& x) {
    XPart part;
    for (const auto& f : term.mono) {
        if (!depends_on(f.atom, x)) {
            part.constants.push_back(f);
            continue;
        }
        if (f.atom->kind == Kind::Sym && f.atom->sym == x) {
            part.n = f.exp;
            continue;
        }
        if (f.atom->kind == Kind::Fun &&
            (f.atom->fn == Fn::Sin || f.atom->fn == Fn::Cos)) {
            const Ex& arg = f.atom->kids[0];
            Rat r = linear_slope(arg, x);
            if (part.trig_arg) {
                if (!identical(*part.trig_arg, arg))
                    throw AntiderivativeNotInTable("mixed trigonometric arguments in one monomial");
            } else {
                part.trig_arg = arg;
                part.slope = r;
            }
            (f.atom->fn == Fn::Sin ? part.p : part.q) += f.exp;
            continue;
        }
        if (f.atom->kind == Kind::Fun && f.atom->fn == Fn::Exp && f.exp == 1) {
            part.exp_arg = f.atom->kids[0];
            part.exp_slope = linear_slope(f.atom->kids[0], x);
            continue;
        }
        throw AntiderivativeNotInTable("factor outside the table: " + to_string(f.atom) + "^" +
                                       std::to_string(f.exp));
    }
    return part;
}

inline Ex restore_constants(const XPart& part, const Rat& coef, const Ex& integral) {
    std::vector<Ex> fs;
    fs.push_back(num(coef));
    for (const auto& f : part.constants) fs.push_back(pow(f.atom, f.exp));
    fs.push_back(integral);
    return mul(std::move(fs));
}

inline Ex integrate_monomial(const PTerm& term, const std::string& x, int depth = 0);

inline Ex power_times_trig(long long n, Fn which, const Ex& L, const Rat& r, const std::string& x,
                           int depth) {
    // by parts: d(x^n cos L) and d(x^n sin L)
    if (depth > 8) throw AntiderivativeNotInTable("integration-by-parts depth exceeded");
    Ex xs = sym(x);
    Rat inv_r = rat_pow(r, -1);
    if (n == 0) {
        if (which == Fn::Sin) return -(fun(Fn::Cos, L) * num(inv_r));
        return fun(Fn::Sin, L) * num(inv_r);
    }
    if (n > 4) throw AntiderivativeNotInTable("polynomial degree beyond by-parts depth 4");
    if (which == Fn::Sin) {
        return -(pow(xs, n) * fun(Fn::Cos, L) * num(inv_r)) +
               num(Rat(BigInt(n)) * inv_r) * power_times_trig(n - 1, Fn::Cos, L, r, x, depth + 1);
    }
    return pow(xs, n) * fun(Fn::Sin, L) * num(inv_r) -
           num(Rat(BigInt(n)) * inv_r) * power_times_trig(n - 1, Fn::Sin, L, r, x, depth + 1);
}

inline Ex power_times_exp(long long n, const Ex& E, const Rat& r, const std::string& x, int depth) {
    if (depth > 8) throw AntiderivativeNotInTable("integration-by-parts depth exceeded");
    Rat inv_r = rat_pow(r, -1);
    if (n == 0) return fun(Fn::Exp, E) * num(inv_r);
    if (n > 4) throw AntiderivativeNotInTable("polynomial degree beyond by-parts depth 4");
    return pow(sym(x), n) * fun(Fn::Exp, E) * num(inv_r) -
           num(Rat(BigInt(n)) * inv_r) * power_times_exp(n - 1, E, r, x, depth + 1);
}

inline Ex integrate_monomial(const PTerm& term, const std::string& x, int) {
    XPart part = classify(term, x);
    if (part.exp_arg && part.trig_arg)
        throw AntiderivativeNotInTable("mixed exponential and trigonometric factors");
    if (part.exp_arg) {
        if (part.n < 0) throw AntiderivativeNotInTable("negative power times exponential");
        return restore_constants(part, term.coef,
                                 power_times_exp(part.n, *part.exp_arg, part.exp_slope, x, 0));
    }
    if (!part.trig_arg) {
        // pure power of x
        if (part.n == -1) return restore_constants(part, term.coef, fun(Fn::LogAbs, sym(x)));
        return restore_constants(part, term.coef * rat(1, part.n + 1), pow(sym(x), part.n + 1));
    }
    if (part.n == 0) {
        Ex I = trig_integral(part.p, part.q, *part.trig_arg);
        return restore_constants(part, term.coef * rat_pow(part.slope, -1), I);
    }
    if (part.n > 0 && ((part.p == 1 && part.q == 0) || (part.p == 0 && part.q == 1))) {
        Fn which = part.p == 1 ? Fn::Sin : Fn::Cos;
        return restore_constants(
            part, term.coef, power_times_trig(part.n, which, *part.trig_arg, part.slope, x, 0));
    }
    throw AntiderivativeNotInTable("x^" + std::to_string(part.n) + " sin^" +
                                   std::to_string(part.p) + " cos^" + std::to_string(part.q));
}

}  // namespace antider_detail

// Antiderivative in x of an expression in the table class; the caller is
// expected to verify d/dx of the result.
inline Ex antiderivative(const Ex& g, const std::string& x) {
    Ex gg = canon(rewrite_cot_tan(g));
    Poly p = detail::canon_poly(gg);
    std::vector<Ex> parts;
    for (const auto& term : p) parts.push_back(antider_detail::integrate_monomial(term, x, 0));
    return canon(add(std::move(parts)));
}

// ---- moment maps ------------------------------------------------------------

inline Ex moment_scalar_for(const SingularForm& w, const VectorFieldExpr& xi) {
    SingularForm c = interior_product(xi, to_standard_coframe_if_needed(w));
    // d mu = -iota_xi w
    SingularForm target = form_scale(c, num(-1));
    const ChartModel& ch = w.chart;
    Ex A = num(0);
    for (size_t i = 0; i < ch.dim(); ++i) {
        SingularForm grad = ext_d(scalar_form(ch, A));
        SingularForm rest = form_sub(target, grad);
        Ex gi = num(0);
        for (const auto& term : rest.terms)
            if (term.idx[0] == static_cast<int>(i)) gi = term.coeff;
        if (is_zero(gi)) continue;
        A = canon(A + antiderivative(gi, ch.coords[i]));
    }
    SingularForm residual = form_sub(ext_d(scalar_form(ch, A)), target);
    for (const auto& term : residual.terms)
        if (!is_zero_trig(term.coeff))
            throw AntiderivativeNotInTable("moment residual in d" +
                                           ch.coords[static_cast<size_t>(term.idx[0])] + ": " +
                                           to_string(term.coeff));
    return A;
}

// Base point for the smooth-part normalization: every coordinate at 0, the
// defining coordinate through its t -> 0 limit.
inline Ex smooth_value_at_base(const Ex& smooth, const ChartModel& ch) {
    Ex v = smooth;
    if (ch.defining) v = series_limit_at_zero(v, *ch.defining);
    for (const auto& c : ch.coords) {
        if (ch.defining && c == *ch.defining) continue;
        v = substitute(v, c, num(0));
    }
    return canon(v);
}

inline std::vector<BmFunction> compute_moment(const SingularForm& w, const ActionSpec& a) {
    validate_action(a, w.chart);
    HamiltonianCheck chk = check_bm_hamiltonian(w, a);
    if (!chk.all_pass) {
        std::string why;
        for (const auto& r : chk.rows)
            if (!(r.invariant && r.closed_contraction && r.in_class)) why += r.gen + ": " + r.note + "; ";
        throw ModelViolation("action is not admissible: " + why);
    }
    std::vector<BmFunction> out;
    for (const auto& g : a.gens) {
        Ex mu = moment_scalar_for(w, g.field);
        BmFunction f = w.chart.defining
                           ? split_bm_scalar(mu, w.chart)
                           : BmFunction{w.chart, num(0), {}, canon(mu)};
        Ex base_val = smooth_value_at_base(f.smooth, w.chart);
        if (base_val->kind == Kind::Num) f.smooth = canon(f.smooth - base_val);
        out.push_back(std::move(f));
    }
    return out;
}

// Split of a moment component; verifies constancy of the c's on the slice.
inline std::pair<std::vector<Ex>, Ex> split_moment(const BmFunction& mu, double tol = 1e-9) {
    std::vector<Ex> cs;
    cs.push_back(mu.log_coef);
    for (const auto& c : mu.pole_coefs) cs.push_back(c);
    auto pts = enumerate_grid(slice_grid(mu.chart));
    for (size_t i = 0; i < cs.size(); ++i) {
        const Ex c = canon(cs[i]);
        if (c->kind == Kind::Num) continue;
        double lo = 0, hi = 0;
        bool first = true;
        for (const auto& p : pts) {
            double v = eval_limit(c, p, mu.chart);
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (hi - lo > tol)
            throw ModelViolation("moment coefficient c_" + std::to_string(i + 1) +
                                 " is not constant on the slice");
    }
    return {cs, mu.smooth};
}

// The displayed model moment map: c1 log|a| + sum c_{i+1} a^{-i}/i + mu0.
inline BmFunction cotangent_lift_moment(int m, const std::vector<Ex>& cs, const ChartModel& chart,
                                        const Ex& mu0) {
    if (static_cast<int>(cs.size()) != m) throw InputError("expected m constants");
    if (!chart.defining) throw InputError("cotangent model needs a defining coordinate");
    BmFunction f;
    f.chart = chart;
    f.log_coef = canon(cs[0]);
    for (int i = 1; i <= m - 1; ++i) f.pole_coefs.push_back(canon(cs[static_cast<size_t>(i)]));
    f.smooth = canon(mu0);
    return f;
}

}  // namespace bmsym
