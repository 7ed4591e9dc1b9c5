#pragma once
// Semilocal decomposition of a closed singular 2-form near Z:
//   w = sum_{j=1..m} (dt/t^j) ^ alpha_j + beta
// with each alpha_j a closed 1-form on the slice (t-independent coefficients,
// no dt slot) and beta smooth across t = 0. beta is stored as the exact
// symbolic complement, so reconstruction is an identity; a Taylor view of beta
// is available for reporting.

#include "bmsym/error.hpp"
#include "bmsym/forms.hpp"
#include "bmsym/series.hpp"

#include <string>
#include <vector>

namespace bmsym {

struct LaurentDecomposition {
    ChartModel chart;
    int m = 1;
    std::vector<SingularForm> alpha;  // alpha[j-1], j = 1..m
    SingularForm beta;                // exact complement, certified finite at t=0
    int taylor_order = 8;
};

inline LaurentDecomposition decompose_2form(const SingularForm& w_in, int order = 8) {
    SingularForm w = to_standard_coframe_if_needed(w_in);
    if (w.degree != 2) throw InputError("laurent: degree must be 2");
    const ChartModel& ch = w.chart;
    if (!ch.defining) throw InputError("laurent: chart has no defining coordinate");
    const int m = ch.m;
    const int def = ch.defining_index();
    const std::string& t = ch.coords[static_cast<size_t>(def)];

    {
        SingularForm dw = ext_d(w);
        for (const auto& term : dw.terms)
            if (!is_zero_trig(term.coeff))
                throw NotClosed("laurent: input 2-form is not closed; d has term " +
                                to_string(term.coeff));
    }

    std::vector<SingularForm> alpha(static_cast<size_t>(m), zero_form(ch, 1));
    for (const auto& term : w.terms) {
        bool has_dt = std::find(term.idx.begin(), term.idx.end(), def) != term.idx.end();
        LSeries s;
        try {
            s = series_of(term.coeff, t, order);
        } catch (const SeriesError& err) {
            throw NotBmFunction(std::string("laurent: coefficient not expandable: ") + err.what());
        }
        if (!series_log_free(s))
            throw NotBmFunction("laurent: log coefficient is outside the b-form class");
        int val = series_is_zero(s) ? 0 : series_valuation(s);
        if (!has_dt) {
            if (val < 0)
                throw NotBmFunction("laurent: pole of order " + std::to_string(-val) +
                                    " in a slot without dt");
            continue;
        }
        if (val < -m)
            throw OrderMismatch("laurent: dt coefficient has pole order " + std::to_string(-val) +
                                " > m = " + std::to_string(m));
        // permute dt to the front to read the slice 1-form factor
        int other = term.idx[0] == def ? term.idx[1] : term.idx[0];
        int sign = term.idx[0] == def ? 1 : -1;
        for (int j = 1; j <= m; ++j) {
            Ex cj = series_coeff(s, -j);
            if (is_zero(cj)) continue;
            if (sign < 0) cj = canon(-cj);
            alpha[static_cast<size_t>(j - 1)] = form_add(
                alpha[static_cast<size_t>(j - 1)],
                make_form(ch, 1, Coframe::Standard, {{cj, {other}}}));
        }
    }

    for (int j = 1; j <= m; ++j) {
        SingularForm da = ext_d(alpha[static_cast<size_t>(j - 1)]);
        for (const auto& term : da.terms)
            if (!is_zero_trig(term.coeff))
                throw NotClosed("laurent: extracted alpha_" + std::to_string(j) + " is not closed");
    }

    LaurentDecomposition d;
    d.chart = ch;
    d.m = m;
    d.alpha = std::move(alpha);
    d.taylor_order = order;

    // beta := w - sum_j (dt/t^j) ^ alpha_j, exactly
    SingularForm acc = w;
    for (int j = 1; j <= m; ++j) {
        SingularForm dt_j = make_form(ch, 1, Coframe::Standard, {{pow(sym(t), -j), {def}}});
        acc = form_sub(acc, wedge(dt_j, d.alpha[static_cast<size_t>(j - 1)]));
    }
    d.beta = acc;
    for (const auto& term : d.beta.terms) {
        LSeries s = series_of(term.coeff, t, 0);
        if (!series_log_free(s) || (!s.a.empty() && s.a.begin()->first < 0))
            throw NotBmFunction("laurent: residual beta is not smooth across t=0");
    }
    return d;
}

inline SingularForm reconstruct(const LaurentDecomposition& d) {
    const std::string& t = *d.chart.defining;
    const int def = d.chart.defining_index();
    SingularForm out = d.beta;
    for (int j = 1; j <= d.m; ++j) {
        SingularForm dt_j = make_form(d.chart, 1, Coframe::Standard, {{pow(sym(t), -j), {def}}});
        out = form_add(out, wedge(dt_j, d.alpha[static_cast<size_t>(j - 1)]));
    }
    return out;
}

// The other indexing of the same data: w = (dt/t^m) ^ sum_i t^i alpha~_i + beta
// with alpha~_i = alpha_{m-i}.
inline std::vector<SingularForm> alpha_by_power(const LaurentDecomposition& d) {
    std::vector<SingularForm> out;
    out.reserve(static_cast<size_t>(d.m));
    for (int i = 0; i <= d.m - 1; ++i) out.push_back(d.alpha[static_cast<size_t>(d.m - i - 1)]);
    return out;
}

// alpha_j(xi) evaluated over the slice; must be a constant.
inline double modular_weight(const LaurentDecomposition& d, int j, const VectorFieldExpr& xi,
                             double tol = 1e-9) {
    if (j < 1 || j > d.m) throw InputError("modular weight index out of range");
    if (!xi.chart.same_coords(d.chart)) throw InputError("modular weight: chart mismatch");
    {
        // xi must be tangent to the slice t = 0
        Ex tc = xi.comp[static_cast<size_t>(d.chart.defining_index())];
        if (!is_zero(tc)) {
            LSeries s = series_of(tc, *d.chart.defining, 0);
            if (series_is_zero(s) ? false : (series_valuation(s) < 1))
                throw InputError("modular weight: generator is not tangent to the slice");
        }
    }
    SingularForm paired = interior_product(xi, d.alpha[static_cast<size_t>(j - 1)]);
    Ex scalar = paired.terms.empty() ? num(0) : paired.terms[0].coeff;
    auto pts = enumerate_grid(slice_grid(d.chart));
    double lo = 0, hi = 0;
    bool first = true;
    for (const auto& p : pts) {
        double v = eval_limit(scalar, p, d.chart);
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo > tol)
        throw NonConstantWeight("alpha_" + std::to_string(j) +
                                "(xi) varies over the slice by " + std::to_string(hi - lo));
    return (lo + hi) / 2;
}

// Numeric residual sup |w - reconstruct(d)| over a grid away from t = 0.
inline double laurent_residual(const LaurentDecomposition& d, const SingularForm& w,
                               const std::vector<Point>& pts) {
    SingularForm diff = form_sub(to_standard_coframe_if_needed(w), reconstruct(d));
    double worst = 0;
    for (const auto& term : diff.terms)
        for (const auto& p : pts) worst = std::max(worst, std::fabs(eval_limit(term.coeff, p, d.chart)));
    return worst;
}

// Truncated Taylor view of beta for reports.
inline SingularForm beta_taylor_view(const LaurentDecomposition& d) {
    const std::string& t = *d.chart.defining;
    std::vector<FormTerm> raw;
    for (const auto& term : d.beta.terms) {
        LSeries s = series_of(term.coeff, t, d.taylor_order);
        std::vector<Ex> parts;
        for (const auto& [j, c] : s.a) parts.push_back(c * pow(sym(t), j));
        raw.push_back({add(std::move(parts)), term.idx});
    }
    return make_form(d.chart, 2, Coframe::Standard, std::move(raw));
}

}  // namespace bmsym
