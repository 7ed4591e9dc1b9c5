#pragma once
// Marsden-Weinstein reduction in the slice normal-form model
//   omega = sum_i c_i dt/t^i ^ dtheta + omega_H,
// with a transverse circle factor and rotations of designated slice planes.
// Reducing the circle at the distinguished level {t = 0} removes the singular
// part entirely; slice stages are standard symplectic cuts of rotated planes.

#include "bmsym/action.hpp"
#include "bmsym/bmfunction.hpp"
#include "bmsym/desing.hpp"
#include "bmsym/error.hpp"
#include "bmsym/forms.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace bmsym {

struct CotangentModel {
    int n = 1;  // half-dimension; chart dim = 2n
    int m = 1;
    ChartModel chart;                 // (theta, t, x1, y1, ..., x_{n-1}, y_{n-1})
    std::vector<Rat> c;               // c[0] = c_1 ... c[m-1] = c_m
    SingularForm omega;
    SingularForm omega_H;             // canonical slice part, lifted to the chart
    std::vector<int> rotated_planes;  // 1-based plane indices carrying rotations
    Ex mu0 = num(0);                  // sum of (x_i^2 + y_i^2)/2 over rotated planes
};

struct ReducedSpace {
    ChartModel chart;
    SingularForm form;
    std::vector<std::string> trace;
};

inline CotangentModel build_cotangent_model(int n, int m, std::vector<Rat> c,
                                            std::vector<int> rotated_planes,
                                            bool allow_degenerate = false) {
    if (n < 1) throw InputError("model: n must be >= 1");
    if (m < 1) throw InputError("model: m must be >= 1");
    if (static_cast<int>(c.size()) != m) throw InputError("model: expected m constants");
    if (!allow_degenerate && c.back() == Rat(0))
        throw ModelViolation(
            "zero highest modular weight: the transverse circle is Hamiltonian in the ordinary "
            "sense and this model does not apply");
    for (int p : rotated_planes)
        if (p < 1 || p > n - 1) throw InputError("model: rotated plane index out of range");

    CotangentModel model;
    model.n = n;
    model.m = m;
    model.c = std::move(c);
    model.rotated_planes = std::move(rotated_planes);

    std::vector<std::string> coords{"theta", "t"};
    std::vector<bool> periodic{true, false};
    for (int i = 1; i <= n - 1; ++i) {
        coords.push_back("x" + std::to_string(i));
        coords.push_back("y" + std::to_string(i));
        periodic.push_back(false);
        periodic.push_back(false);
    }
    model.chart = ChartModel(coords, periodic, "t", m);

    std::vector<FormTerm> raw;
    for (int i = 1; i <= m; ++i) {
        if (model.c[static_cast<size_t>(i - 1)] == Rat(0)) continue;
        raw.push_back({num(model.c[static_cast<size_t>(i - 1)]) * pow(sym("t"), -i), {1, 0}});
    }
    std::vector<FormTerm> slice_raw;
    for (int i = 1; i <= n - 1; ++i) {
        int xi = 2 * i, yi = 2 * i + 1;
        slice_raw.push_back({num(1), {xi, yi}});
    }
    model.omega_H = make_form(model.chart, 2, Coframe::Standard, slice_raw);
    raw.insert(raw.end(), slice_raw.begin(), slice_raw.end());
    model.omega = make_form(model.chart, 2, Coframe::Standard, std::move(raw));

    std::vector<Ex> mu_parts;
    for (int p : model.rotated_planes) {
        Ex x = sym("x" + std::to_string(p)), y = sym("y" + std::to_string(p));
        mu_parts.push_back(num(rat(1, 2)) * (x * x + y * y));
    }
    model.mu0 = canon(add(std::move(mu_parts)));

    if (!allow_degenerate) {
        auto rep = nondegeneracy_check(model.omega, enumerate_grid(default_grid(model.chart, true, 5, 3)));
        if (!rep.all_pass) throw ModelViolation("model form fails nondegeneracy on the sample grid");
    }
    return model;
}

inline ActionSpec circle_action(const CotangentModel& model) {
    return ActionSpec::rotations(model.chart, {"theta"});
}

inline ActionSpec slice_action(const CotangentModel& model) {
    ActionSpec a;
    for (int p : model.rotated_planes) {
        std::vector<Ex> comp(model.chart.dim(), num(0));
        std::string xn = "x" + std::to_string(p), yn = "y" + std::to_string(p);
        comp[static_cast<size_t>(model.chart.index(xn))] = -sym(yn);
        comp[static_cast<size_t>(model.chart.index(yn))] = sym(xn);
        a.gens.push_back({"rot_" + std::to_string(p), VectorFieldExpr(model.chart, comp)});
    }
    a.rank = static_cast<int>(a.gens.size());
    return a;
}

namespace reduction_detail {

// restriction of a form to the coordinates that survive; coefficients must not
// depend on the dropped ones, and terms touching them must vanish structurally
inline SingularForm drop_coordinates(const SingularForm& w, const ChartModel& sub,
                                     const std::vector<std::string>& dropped) {
    SingularForm src = to_standard_coframe_if_needed(w);
    std::vector<FormTerm> raw;
    for (const auto& term : src.terms) {
        bool touches = false;
        for (int i : term.idx)
            for (const auto& d : dropped)
                if (src.chart.coords[static_cast<size_t>(i)] == d) touches = true;
        if (touches) continue;
        Ex c = term.coeff;
        for (const auto& d : dropped) {
            if (d == src.chart.defining.value_or("")) {
                // evaluate across Z by the t -> 0 limit
                if (contains_sym(c, d)) c = series_limit_at_zero(c, d);
            } else if (contains_sym(canon(c), d)) {
                throw ModelViolation("coefficient depends on the reduced coordinate " + d + ": " +
                                     to_string(c));
            }
        }
        std::vector<int> idx;
        for (int i : term.idx) idx.push_back(sub.index(src.chart.coords[static_cast<size_t>(i)]));
        raw.push_back({c, std::move(idx)});
    }
    return make_form(sub, src.degree, Coframe::Standard, std::move(raw));
}

}  // namespace reduction_detail

// Reduction by the transverse circle at the distinguished level: the t = 0
// slice of the extended model, quotiented by the theta-translation. Both the
// dt/t^i ^ dtheta terms die, which is exactly the removal of the singularity.
inline ReducedSpace reduce_circle(const CotangentModel& model) {
    if (model.c.back() == Rat(0))
        throw ModelViolation("zero highest modular weight: circle level {t=0} is not transverse");
    std::vector<std::string> coords;
    std::vector<bool> periodic;
    for (size_t i = 2; i < model.chart.dim(); ++i) {
        coords.push_back(model.chart.coords[i]);
        periodic.push_back(model.chart.periodic[i]);
    }
    ChartModel sub(coords, periodic);
    ReducedSpace red;
    red.chart = sub;
    red.form = reduction_detail::drop_coordinates(model.omega, sub, {"theta", "t"});
    red.trace.push_back("circle stage: level {t=0, mu_theta at infinity}, quotient by theta");
    return red;
}

// One symplectic cut per rotated plane at level rho = (x^2+y^2)/2.
inline ReducedSpace reduce_torus_stage(const ReducedSpace& r, const std::vector<int>& planes,
                                       const std::vector<double>& levels) {
    if (planes.size() != levels.size()) throw InputError("stage: one level per rotated plane");
    ReducedSpace cur = r;
    for (size_t i = 0; i < planes.size(); ++i) {
        int p = planes[i];
        double rho = levels[i];
        if (!(rho > 0))
            throw LevelNotRegular("level " + std::to_string(rho) + " for plane " + std::to_string(p) +
                                  " is not a regular value (need rho > 0)");
        std::string xn = "x" + std::to_string(p), yn = "y" + std::to_string(p);
        if (!cur.chart.has(xn) || !cur.chart.has(yn))
            throw InputError("stage: plane " + std::to_string(p) + " not present");
        std::vector<std::string> coords;
        std::vector<bool> periodic;
        for (size_t j = 0; j < cur.chart.dim(); ++j) {
            if (cur.chart.coords[j] == xn || cur.chart.coords[j] == yn) continue;
            coords.push_back(cur.chart.coords[j]);
            periodic.push_back(cur.chart.periodic[j]);
        }
        ChartModel sub(coords, periodic);
        cur.form = reduction_detail::drop_coordinates(cur.form, sub, {xn, yn});
        cur.chart = sub;
        cur.trace.push_back("slice stage: plane " + std::to_string(p) + " cut at level " +
                            std::to_string(rho));
    }
    return cur;
}

// pi^* omega_red == i^* omega with the level circle parameterized by an angle:
// x = R cos(phi), y = R sin(phi) at fixed radius. Checked symbolically.
inline bool check_level_pullback(const CotangentModel& model, int plane,
                                 const ReducedSpace& reduced) {
    std::string xn = "x" + std::to_string(plane), yn = "y" + std::to_string(plane);
    std::vector<std::string> coords = reduced.chart.coords;
    std::vector<bool> periodic = reduced.chart.periodic;
    coords.push_back("phi_level");
    periodic.push_back(true);
    ChartModel level_chart(coords, periodic);
    std::map<std::string, Ex> mp{{xn, sym("R_level") * fun(Fn::Cos, sym("phi_level"))},
                                 {yn, sym("R_level") * fun(Fn::Sin, sym("phi_level"))}};
    std::vector<std::string> slice_coords;
    std::vector<bool> slice_per;
    for (size_t i = 2; i < model.chart.dim(); ++i) {
        slice_coords.push_back(model.chart.coords[i]);
        slice_per.push_back(model.chart.periodic[i]);
    }
    ChartModel slice(slice_coords, slice_per);
    SingularForm omega_slice = reduction_detail::drop_coordinates(model.omega, slice, {"theta", "t"});
    SingularForm pulled = pullback(omega_slice, level_chart, mp);
    SingularForm lifted = zero_form(level_chart, 2);
    {
        std::vector<FormTerm> raw;
        for (const auto& term : reduced.form.terms) {
            std::vector<int> idx;
            for (int i : term.idx)
                idx.push_back(level_chart.index(reduced.chart.coords[static_cast<size_t>(i)]));
            raw.push_back({term.coeff, idx});
        }
        lifted = make_form(level_chart, 2, Coframe::Standard, raw);
    }
    return form_equal_trig(pulled, lifted);
}

struct CommutationReport {
    double max_deviation = 0;
    double level_root = 0;  // located level of the desingularized circle moment
    bool pass = false;
    std::string note;
};

// Path A: reduce the model, then cut the slice planes. Path B: desingularize,
// reduce the symplectic form at the matched level (the f_eps-image of 0),
// then cut. Compares the reduced forms coefficientwise.
inline CommutationReport check_commutation(const CotangentModel& model, double eps,
                                           const std::vector<double>& levels, double tol = 1e-9) {
    if (model.m % 2 != 0) throw InputError("commutation check requires an even-order profile");
    if (model.c.back() == Rat(0))
        throw ModelViolation("zero highest modular weight: reduction model does not apply");

    ReducedSpace a0 = reduce_circle(model);
    ReducedSpace a = a0;
    if (!model.rotated_planes.empty()) a = reduce_torus_stage(a0, model.rotated_planes, levels);

    DesingProfile pr = make_profile(model.m, eps);
    SingularForm weps = desingularize(model.omega, pr);

    // circle moment of the desingularized form: mu_eps' (t) = f_eps'(t) sum_j c_j t^{m-j}
    auto mu_eps_deriv = [&](double t) {
        double poly = 0;
        for (int j = 1; j <= model.m; ++j)
            poly += to_double(model.c[static_cast<size_t>(j - 1)]) * ipow(t, model.m - j);
        return f_eps_deriv(pr, 1, t) * poly;
    };
    auto mu_eps = [&](double t) {
        // Simpson rule from 0 to t
        const int steps = 512;
        double h = t / steps, acc = mu_eps_deriv(0) + mu_eps_deriv(t);
        for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * mu_eps_deriv(i * h);
        return acc * h / 3.0;
    };
    // level = mu_eps-image of t = 0, i.e. root of mu_eps(t) = mu_eps(0) = 0
    double lo = -0.4, hi = 0.4;
    double flo = mu_eps(lo), fhi = mu_eps(hi);
    CommutationReport rep;
    if (flo * fhi > 0) {
        rep.note = "desingularized circle moment has no level crossing in range";
        return rep;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = (lo + hi) / 2, fm = mu_eps(mid);
        if (flo * fm <= 0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    rep.level_root = (lo + hi) / 2;

    // reduce the desingularized (symplectic) form at {t = level_root}: terms
    // with dt or dtheta die on the level/quotient, coefficients restrict
    SingularForm b_form = a.form;  // same chart as path A
    {
        std::vector<FormTerm> raw;
        SingularForm src = to_standard_coframe_if_needed(weps);
        for (const auto& term : src.terms) {
            bool touches = false;
            for (int i : term.idx)
                if (i <= 1) touches = true;  // theta or t slot
            if (touches) continue;
            if (contains_sym(canon(term.coeff), "t"))
                throw ModelViolation("slice coefficient depends on t; not a normal-form model");
            std::vector<int> idx;
            for (int i : term.idx)
                idx.push_back(a0.chart.index(src.chart.coords[static_cast<size_t>(i)]));
            raw.push_back({term.coeff, idx});
        }
        SingularForm restricted = make_form(a0.chart, 2, Coframe::Standard, raw);
        ReducedSpace b{a0.chart, restricted, {}};
        if (!model.rotated_planes.empty()) b = reduce_torus_stage(b, model.rotated_planes, levels);
        b_form = b.form;
    }

    SingularForm diff = form_sub(a.form, b_form);
    GridSpec g;
    for (size_t i = 0; i < a.chart.dim(); ++i) g.axes.push_back({a.chart.coords[i], -1.0, 1.0, 3});
    for (const auto& p : enumerate_grid(g))
        for (const auto& term : diff.terms)
            rep.max_deviation = std::max(rep.max_deviation, std::fabs(eval_at(term.coeff, p)));
    rep.pass = rep.max_deviation < tol && std::fabs(rep.level_root) < 1e-9;
    if (!rep.pass && rep.note.empty()) rep.note = "paths disagree beyond tolerance";
    return rep;
}

}  // namespace bmsym
