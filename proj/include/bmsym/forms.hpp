#pragma once
// Graded algebra of differential forms with singular coefficients, stored as
// sparse term lists against either the coordinate coframe {dt, dx_i} or the
// singular coframe {dt/t^m, dx_i}.

#include "bmsym/chart.hpp"
#include "bmsym/diff.hpp"
#include "bmsym/error.hpp"
#include "bmsym/eval.hpp"
#include "bmsym/expr.hpp"
#include "bmsym/grid.hpp"
#include "bmsym/series.hpp"
#include "bmsym/simplify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace bmsym {

enum class Coframe { Standard, BSingular };

struct FormTerm {
    Ex coeff;
    std::vector<int> idx;  // strictly increasing basis indices
};

struct SingularForm {
    ChartModel chart;
    int degree = 0;
    Coframe frame = Coframe::Standard;
    std::vector<FormTerm> terms;

    bool is_zero_form() const { return terms.empty(); }
};

namespace form_detail {

// sorts indices in place, returns the permutation sign; 0 on a repeat
inline int normalize_idx(std::vector<int>& idx) {
    int sign = 1;
    for (size_t i = 1; i < idx.size(); ++i)
        for (size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
            std::swap(idx[j], idx[j - 1]);
            sign = -sign;
        }
    for (size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

inline bool idx_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace form_detail

inline SingularForm make_form(ChartModel chart, int degree, Coframe frame,
                              std::vector<FormTerm> raw) {
    std::map<std::vector<int>, Ex> acc;
    for (auto& t : raw) {
        if (static_cast<int>(t.idx.size()) != degree)
            throw InputError("form term arity does not match the degree");
        for (int i : t.idx)
            if (i < 0 || i >= static_cast<int>(chart.dim()))
                throw InputError("form term index out of chart range");
        int sign = form_detail::normalize_idx(t.idx);
        if (sign == 0) continue;
        Ex c = sign == 1 ? t.coeff : -t.coeff;
        auto it = acc.find(t.idx);
        if (it == acc.end())
            acc.emplace(std::move(t.idx), c);
        else
            it->second = it->second + c;
    }
    SingularForm f;
    f.chart = std::move(chart);
    f.degree = degree;
    f.frame = frame;
    for (auto& [idx, c] : acc) {
        Ex cc = canon(c);
        if (cc->kind == Kind::Num && cc->num == Rat(0)) continue;
        f.terms.push_back({cc, idx});
    }
    return f;
}

inline SingularForm zero_form(const ChartModel& chart, int degree,
                              Coframe frame = Coframe::Standard) {
    return make_form(chart, degree, frame, {});
}

inline SingularForm scalar_form(const ChartModel& chart, const Ex& f,
                                Coframe frame = Coframe::Standard) {
    return make_form(chart, 0, frame, {{f, {}}});
}

inline SingularForm form_add(const SingularForm& a, const SingularForm& b) {
    if (!a.chart.same_coords(b.chart) || a.frame != b.frame || a.degree != b.degree)
        throw InputError("form addition: mismatched chart, frame, or degree");
    std::vector<FormTerm> raw = a.terms;
    raw.insert(raw.end(), b.terms.begin(), b.terms.end());
    return make_form(a.chart, a.degree, a.frame, std::move(raw));
}

inline SingularForm form_scale(const SingularForm& a, const Ex& c) {
    std::vector<FormTerm> raw;
    raw.reserve(a.terms.size());
    for (const auto& t : a.terms) raw.push_back({c * t.coeff, t.idx});
    return make_form(a.chart, a.degree, a.frame, std::move(raw));
}

inline SingularForm form_sub(const SingularForm& a, const SingularForm& b) {
    return form_add(a, form_scale(b, num(-1)));
}

inline SingularForm wedge(const SingularForm& a, const SingularForm& b) {
    if (!a.chart.same_coords(b.chart)) throw InputError("wedge: charts differ");
    if (a.frame != b.frame) throw InputError("wedge: coframe mismatch");
    int deg = a.degree + b.degree;
    if (deg > static_cast<int>(a.chart.dim())) return zero_form(a.chart, 0, a.frame);
    std::vector<FormTerm> raw;
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) {
            std::vector<int> idx = ta.idx;
            idx.insert(idx.end(), tb.idx.begin(), tb.idx.end());
            raw.push_back({ta.coeff * tb.coeff, std::move(idx)});
        }
    return make_form(a.chart, deg, a.frame, std::move(raw));
}

// d of the basis elements is zero in both coframes (d(dt/t^m) = 0 is a basis
// identity); the coefficient differential picks up t^m on the dt/t^m slot.
inline SingularForm ext_d(const SingularForm& a) {
    const ChartModel& ch = a.chart;
    int def = (a.frame == Coframe::BSingular) ? ch.defining_index() : -1;
    std::vector<FormTerm> raw;
    for (const auto& t : a.terms)
        for (int i = 0; i < static_cast<int>(ch.dim()); ++i) {
            Ex dci = differentiate(t.coeff, ch.coords[static_cast<size_t>(i)]);
            if (is_zero(dci)) continue;
            if (i == def) dci = dci * pow(sym(ch.coords[static_cast<size_t>(i)]), ch.m);
            std::vector<int> idx;
            idx.reserve(t.idx.size() + 1);
            idx.push_back(i);
            idx.insert(idx.end(), t.idx.begin(), t.idx.end());
            raw.push_back({dci, std::move(idx)});
        }
    return make_form(ch, a.degree + 1, a.frame, std::move(raw));
}

struct VectorFieldExpr {
    ChartModel chart;
    std::vector<Ex> comp;  // aligned with chart.coords

    VectorFieldExpr() = default;
    VectorFieldExpr(ChartModel ch, std::vector<Ex> c) : chart(std::move(ch)), comp(std::move(c)) {
        if (comp.size() != chart.dim()) throw InputError("vector field arity mismatch");
    }
};

inline VectorFieldExpr coordinate_field(const ChartModel& chart, const std::string& coord) {
    std::vector<Ex> c(chart.dim(), num(0));
    c[static_cast<size_t>(chart.index(coord))] = num(1);
    return VectorFieldExpr(chart, std::move(c));
}

inline bool is_bm_vector_field(const VectorFieldExpr& v) {
    if (!v.chart.defining) return true;
    const std::string& t = *v.chart.defining;
    Ex tc = v.comp[static_cast<size_t>(v.chart.defining_index())];
    if (is_zero(tc)) return true;
    LSeries s = series_of(tc, t, v.chart.m);
    return series_log_free(s) && series_valuation(s) >= v.chart.m;
}

inline VectorFieldExpr lie_bracket(const VectorFieldExpr& v, const VectorFieldExpr& w) {
    const ChartModel& ch = v.chart;
    std::vector<Ex> out;
    out.reserve(ch.dim());
    for (size_t i = 0; i < ch.dim(); ++i) {
        std::vector<Ex> parts;
        for (size_t j = 0; j < ch.dim(); ++j) {
            parts.push_back(v.comp[j] * differentiate(w.comp[i], ch.coords[j]));
            parts.push_back(-(w.comp[j] * differentiate(v.comp[i], ch.coords[j])));
        }
        out.push_back(canon(add(std::move(parts))));
    }
    return VectorFieldExpr(ch, std::move(out));
}

inline SingularForm interior_product(const VectorFieldExpr& v, const SingularForm& a) {
    if (!v.chart.same_coords(a.chart)) throw InputError("interior product: charts differ");
    if (a.degree == 0) return zero_form(a.chart, 0, a.frame);
    const ChartModel& ch = a.chart;
    int def = (a.frame == Coframe::BSingular) ? ch.defining_index() : -1;
    std::vector<FormTerm> raw;
    for (const auto& t : a.terms)
        for (size_t p = 0; p < t.idx.size(); ++p) {
            int i = t.idx[p];
            Ex pairing = v.comp[static_cast<size_t>(i)];
            if (is_zero(pairing)) continue;
            if (i == def) pairing = pairing * pow(sym(ch.coords[static_cast<size_t>(i)]), -ch.m);
            Ex c = t.coeff * pairing;
            if (p % 2 == 1) c = -c;
            std::vector<int> idx;
            for (size_t q = 0; q < t.idx.size(); ++q)
                if (q != p) idx.push_back(t.idx[q]);
            raw.push_back({c, std::move(idx)});
        }
    return make_form(ch, a.degree - 1, a.frame, std::move(raw));
}

inline SingularForm lie_derivative(const VectorFieldExpr& v, const SingularForm& a) {
    return form_add(interior_product(v, ext_d(a)), ext_d(interior_product(v, a)));
}

// Change of basis into {dt/t^m, dx_i}; every dt-slot coefficient must be
// finite at t = 0 after multiplication by t^m.
inline SingularForm to_b_coframe(const SingularForm& a) {
    if (a.frame == Coframe::BSingular) return a;
    const ChartModel& ch = a.chart;
    int def = ch.defining_index();
    const std::string& t = ch.coords[static_cast<size_t>(def)];
    std::vector<FormTerm> raw;
    for (const auto& term : a.terms) {
        Ex c = term.coeff;
        if (std::find(term.idx.begin(), term.idx.end(), def) != term.idx.end()) {
            c = canon(c * pow(sym(t), ch.m));
            LSeries s = series_of(c, t, 0);
            if (!series_log_free(s))
                throw OrderMismatch("log coefficient against dt cannot enter the singular coframe");
            if (!s.a.empty() && s.a.begin()->first < 0)
                throw OrderMismatch("dt coefficient has a pole of order " +
                                    std::to_string(ch.m - s.a.begin()->first) +
                                    " > m = " + std::to_string(ch.m));
        }
        raw.push_back({c, term.idx});
    }
    return make_form(ch, a.degree, Coframe::BSingular, std::move(raw));
}

inline SingularForm to_standard_coframe(const SingularForm& a) {
    if (a.frame == Coframe::Standard) return a;
    const ChartModel& ch = a.chart;
    int def = ch.defining_index();
    const std::string& t = ch.coords[static_cast<size_t>(def)];
    std::vector<FormTerm> raw;
    for (const auto& term : a.terms) {
        Ex c = term.coeff;
        if (std::find(term.idx.begin(), term.idx.end(), def) != term.idx.end())
            c = c * pow(sym(t), -ch.m);
        raw.push_back({c, term.idx});
    }
    return make_form(ch, a.degree, Coframe::Standard, std::move(raw));
}

inline SingularForm to_standard_coframe_if_needed(const SingularForm& a) {
    return a.frame == Coframe::BSingular ? to_standard_coframe(a) : a;
}

inline bool form_equal(const SingularForm& a, const SingularForm& b) {
    SingularForm d = form_sub(a, b);
    return d.terms.empty();
}

inline bool form_equal_trig(const SingularForm& a, const SingularForm& b) {
    SingularForm d = form_sub(a, b);
    for (const auto& t : d.terms)
        if (!is_zero_trig(t.coeff)) return false;
    return true;
}

// Numeric value through a removable singularity at t = 0. Memoized on the
// expression node (the key is pinned to keep the address stable).
inline double eval_limit(const Ex& e, const Point& p, const ChartModel& chart) {
    try {
        return eval_at(e, p);
    } catch (const SingularEvalError&) {
        if (!chart.defining) throw;
        const std::string& t = *chart.defining;
        auto it = p.find(t);
        if (it == p.end() || it->second != 0.0) throw;
        struct Entry {
            Ex self;
            Ex limit;
        };
        thread_local std::unordered_map<const Node*, Entry> cache;
        auto hit = cache.find(e.get());
        Ex lim;
        if (hit != cache.end()) {
            lim = hit->second.limit;
        } else {
            lim = series_limit_at_zero(e, t);
            if (cache.size() > (1u << 16)) cache.clear();
            cache.emplace(e.get(), Entry{e, lim});
        }
        return eval_at(lim, p);
    }
}

// Antisymmetric coefficient matrix of a 2-form at a point.
inline Eigen::MatrixXd form_matrix_at(const SingularForm& a, const Point& p) {
    if (a.degree != 2) throw InputError("form matrix: degree must be 2");
    const int n = static_cast<int>(a.chart.dim());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : a.terms) {
        double v = eval_limit(t.coeff, p, a.chart);
        M(t.idx[0], t.idx[1]) += v;
        M(t.idx[1], t.idx[0]) -= v;
    }
    return M;
}

inline double pfaffian(Eigen::MatrixXd M) {
    const int n = static_cast<int>(M.rows());
    if (n % 2 != 0) return 0.0;
    if (n == 0) return 1.0;
    // recursive expansion along the first row; charts are small (dim <= 8)
    double acc = 0.0;
    int sign = 1;
    for (int j = 1; j < n; ++j) {
        double mij = M(0, j);
        if (mij != 0.0) {
            Eigen::MatrixXd sub(n - 2, n - 2);
            int r = 0;
            for (int i = 1; i < n; ++i) {
                if (i == j) continue;
                int c = 0;
                for (int k = 1; k < n; ++k) {
                    if (k == j) continue;
                    sub(r, c++) = M(i, k);
                }
                ++r;
            }
            acc += sign * mij * pfaffian(std::move(sub));
        }
        sign = -sign;
    }
    return acc;
}

struct NondegReport {
    struct Row {
        Point point;
        double pfaffian;
        bool pass;
    };
    std::vector<Row> rows;
    bool all_pass = true;
};

// True when some standard-frame coefficient genuinely blows up at t = 0.
inline bool has_singular_coefficients(const SingularForm& a) {
    if (!a.chart.defining) return false;
    SingularForm w = to_standard_coframe_if_needed(a);
    const std::string& t = *w.chart.defining;
    for (const auto& term : w.terms) {
        LSeries s = series_of(term.coeff, t, 0);
        if (!series_log_free(s)) return true;
        if (!s.a.empty() && s.a.begin()->first < 0) return true;
    }
    return false;
}

// Tests the Pfaffian of the coefficient matrix at each sample. Genuinely
// singular forms are rated in the singular coframe (finite on Z); smooth forms
// in the coordinate coframe.
inline NondegReport nondegeneracy_check(const SingularForm& a, const std::vector<Point>& samples,
                                        double tol = 1e-9) {
    if (a.degree != 2) throw InputError("nondegeneracy: degree must be 2");
    if (a.chart.dim() % 2 != 0) throw InputError("nondegeneracy: chart dimension must be even");
    SingularForm w = (a.frame == Coframe::BSingular || has_singular_coefficients(a))
                         ? to_b_coframe(to_standard_coframe_if_needed(a))
                         : a;
    NondegReport rep;
    for (const auto& p : samples) {
        double pf = pfaffian(form_matrix_at(w, p));
        bool ok = std::fabs(pf) > tol;
        rep.all_pass = rep.all_pass && ok;
        rep.rows.push_back({p, pf, ok});
    }
    return rep;
}

// Pointwise inverse of the coefficient matrix; the Poisson bivector at p.
inline Eigen::MatrixXd form_to_bivector(const SingularForm& a, const Point& p) {
    Eigen::MatrixXd M = form_matrix_at(to_standard_coframe_if_needed(a), p);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw SingularMatrix("degenerate 2-form at the requested point");
    Eigen::MatrixXd Pi = lu.inverse();
    double err = (Pi * M - Eigen::MatrixXd::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-12) throw SingularMatrix("bivector inversion residual above 1e-12");
    return Pi;
}

// Pullback along coord -> expression, producing a form on `target`.
inline SingularForm pullback(const SingularForm& a, const ChartModel& target,
                             const std::map<std::string, Ex>& subs) {
    SingularForm src = to_standard_coframe_if_needed(a);
    auto substitute_all = [&](Ex e) {
        for (const auto& [name, repl] : subs) e = substitute(e, name, repl);
        return e;
    };
    // d(phi_i) as 1-forms on the target chart
    std::vector<SingularForm> dphi;
    dphi.reserve(src.chart.dim());
    for (const auto& c : src.chart.coords) {
        auto it = subs.find(c);
        Ex image = it != subs.end() ? it->second : sym(c);
        std::vector<FormTerm> raw;
        for (size_t j = 0; j < target.dim(); ++j) {
            Ex d = differentiate(image, target.coords[j]);
            if (!is_zero(d)) raw.push_back({d, {static_cast<int>(j)}});
        }
        dphi.push_back(make_form(target, 1, Coframe::Standard, std::move(raw)));
    }
    SingularForm out = zero_form(target, src.degree);
    for (const auto& t : src.terms) {
        SingularForm piece = scalar_form(target, canon(substitute_all(t.coeff)));
        for (int i : t.idx) piece = wedge(piece, dphi[static_cast<size_t>(i)]);
        out = form_add(out, piece);
    }
    return out;
}

inline std::string to_string(const SingularForm& f) {
    if (f.terms.empty()) return "0";
    const ChartModel& ch = f.chart;
    int def = (f.frame == Coframe::BSingular && ch.defining) ? ch.defining_index() : -1;
    std::string out;
    for (size_t k = 0; k < f.terms.size(); ++k) {
        if (k) out += " + ";
        out += "(" + to_string(f.terms[k].coeff) + ")";
        for (int i : f.terms[k].idx) {
            out += " ^ d" + ch.coords[static_cast<size_t>(i)];
            if (i == def) out += "/" + ch.coords[static_cast<size_t>(i)] + "^" + std::to_string(ch.m);
        }
    }
    return out;
}

}  // namespace bmsym
