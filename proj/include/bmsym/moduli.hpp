#pragma once
// Darboux forms on flat-connection moduli in holonomy coordinates, the
// singular variant with one marked degenerating holonomy, and the
// desingularized-family limit against the surface picture.

#include "bmsym/desing.hpp"
#include "bmsym/error.hpp"
#include "bmsym/forms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bmsym {

struct HolonomyChart {
    int genus = 1;
    std::vector<std::string> coords;  // a1, b1, ..., ag, bg
    std::optional<std::string> marked;

    static HolonomyChart make(int g, std::optional<std::string> marked = std::nullopt) {
        if (g < 0) throw InputError("genus must be >= 0");
        HolonomyChart h;
        h.genus = g;
        for (int i = 1; i <= g; ++i) {
            h.coords.push_back("a" + std::to_string(i));
            h.coords.push_back("b" + std::to_string(i));
        }
        if (marked) {
            bool found = false;
            for (const auto& c : h.coords) found |= c == *marked;
            if (!found) throw InputError("marked coordinate " + *marked + " is not a holonomy");
        }
        h.marked = std::move(marked);
        return h;
    }

    ChartModel chart_model(int m = 1) const {
        std::vector<bool> per(coords.size(), false);
        if (marked) return ChartModel(coords, per, marked, m);
        return ChartModel(coords, per);
    }
};

// omega = sum_i db_i ^ da_i
inline SingularForm ab_form(const HolonomyChart& h) {
    if (h.marked) throw InputError("marked chart: use singular_ab_form");
    ChartModel ch = h.chart_model();
    std::vector<FormTerm> raw;
    for (int i = 0; i < h.genus; ++i) raw.push_back({num(-1), {2 * i, 2 * i + 1}});  // db ^ da
    return make_form(ch, 2, Coframe::Standard, raw);
}

// one marked holonomy degenerates: its block becomes db/b ^ da
inline SingularForm singular_ab_form(const HolonomyChart& h) {
    if (!h.marked) throw InputError("no marked coordinate: use ab_form");
    ChartModel ch = h.chart_model(1);
    std::vector<FormTerm> raw;
    for (int i = 0; i < h.genus; ++i) {
        Ex coeff = num(-1);
        const std::string& b = ch.coords[static_cast<size_t>(2 * i + 1)];
        const std::string& a = ch.coords[static_cast<size_t>(2 * i)];
        if (b == *h.marked) {
            raw.push_back({num(-1) * pow(sym(b), -1), {2 * i, 2 * i + 1}});
        } else if (a == *h.marked) {
            raw.push_back({pow(sym(a), -1), {2 * i, 2 * i + 1}});  // da/a ^ db = -db/a ^ da
        } else {
            raw.push_back({coeff, {2 * i, 2 * i + 1}});
        }
    }
    return make_form(ch, 2, Coframe::Standard, raw);
}

struct LimitFamilyReport {
    std::vector<double> eps;
    std::vector<double> sup_inside;   // deviation over a fixed off-Z grid near the hypersurface
    double sup_outside = 0;           // deviation on |t| >= 2 max(eps); expected exactly 0
    bool decreasing = true;
};

// The degenerate torus surface form dtheta/sin^2(theta/2) ^ dphi as the limit
// of its desingularized family: exact agreement outside each eps-neighborhood
// and pointwise convergence inside.
inline LimitFamilyReport b2_limit_check(const std::vector<double>& eps_list, int taylor_order = 8) {
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0)) throw InputError("epsilon must be positive");
        if (i && !(eps_list[i] < eps_list[i - 1]))
            throw InputError("epsilon list must be decreasing");
    }
    ChartModel ch({"theta", "phi"}, {false, true}, "theta", 2);
    Ex csc2 = pow(fun(Fn::Sin, sym("theta") * num(rat(1, 2))), -2);
    SingularForm w = make_form(ch, 2, Coframe::Standard, {{csc2, {0, 1}}});

    LimitFamilyReport rep;
    rep.eps = eps_list;
    // fixed off-Z sample points; pointwise agreement improves as eps shrinks
    double eps_min = eps_list.back(), eps_max = eps_list.front();
    std::vector<double> near;
    for (double t = eps_min / 2; t < eps_max; t *= 1.5) near.push_back(t);
    for (double eps : eps_list) {
        DesingProfile pr = make_profile(2, eps);
        SingularForm weps = desingularize(w, pr, taylor_order);
        SingularForm diff = form_sub(weps, w);
        double inside = 0;
        for (int s = -1; s <= 1; s += 2)
            for (double t : near)
                for (const auto& term : diff.terms)
                    inside = std::max(inside,
                                      std::fabs(eval_at(term.coeff, {{"theta", s * t}, {"phi", 1.0}})));
        rep.sup_inside.push_back(inside);
        for (int s = -1; s <= 1; s += 2)
            for (double t : {2 * eps_max, 2.5 * eps_max, 1.0, 2.0})
                for (const auto& term : diff.terms)
                    rep.sup_outside = std::max(
                        rep.sup_outside, std::fabs(eval_at(term.coeff, {{"theta", s * t}, {"phi", 1.0}})));
    }
    for (size_t i = 1; i < rep.sup_inside.size(); ++i)
        if (!(rep.sup_inside[i] < rep.sup_inside[i - 1])) rep.decreasing = false;
    return rep;
}

}  // namespace bmsym
