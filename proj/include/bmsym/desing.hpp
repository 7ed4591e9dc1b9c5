#pragma once
// Desingularization profiles f_eps and the replacement of the singular
// primitive dt/t^m by d f_eps. Even order m = 2k produces symplectic forms,
// odd order folded ones. Profiles enter symbolic forms as registered opaque
// atoms whose numeric evaluator is piecewise: displayed branches outside the
// transition region (evaluated branch-exactly so that omega_eps == omega is an
// exact float identity there) and a C^2 Hermite bridge inside.

#include "bmsym/error.hpp"
#include "bmsym/eval.hpp"
#include "bmsym/forms.hpp"
#include "bmsym/laurent.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace bmsym {

struct DesingProfile {
    int m = 2;        // chart singularity order
    int k = 1;        // m = 2k (even) or m = 2k+1 (odd)
    bool even = true;
    double eps = 0.1;
    std::vector<double> inner;   // even: odd poly on [-1,1]; odd: bridge poly on [1,2]
    int ext_id = -1;             // registered atom for f_eps'
    std::string display;
};

namespace desing_detail {

// derivatives of c * x^p
inline double mono_deriv(double c, int p, int order, double x) {
    double f = c;
    for (int i = 0; i < order; ++i) f *= (p - i);
    return f * ipow(x, p - order);
}

inline double poly_eval(const std::vector<double>& c, double x) {
    double r = 0;
    for (size_t i = c.size(); i > 0; --i) r = r * x + c[i - 1];
    return r;
}

inline std::vector<double> poly_deriv(std::vector<double> c) {
    if (c.empty()) return c;
    for (size_t i = 1; i < c.size(); ++i) c[i - 1] = c[i] * static_cast<double>(i);
    c.pop_back();
    return c;
}

// unscaled profile and its derivatives, orders 0..5
inline double profile_unscaled(const DesingProfile& pr, int order, double x) {
    if (order > 5) throw Error("profile derivatives beyond order 5 are not provided");
    std::vector<double> p = pr.inner;
    if (pr.even) {
        if (std::fabs(x) <= 1.0) {
            for (int i = 0; i < order; ++i) p = poly_deriv(p);
            return poly_eval(p, x);
        }
        // f = -1/((2k-1) x^{2k-1}) +- 2
        double v = mono_deriv(-1.0 / (2 * pr.k - 1), -(2 * pr.k - 1), order, x);
        if (order == 0) v += (x > 0 ? 2.0 : -2.0);
        return v;
    }
    double ax = std::fabs(x);
    double sgn = x < 0 ? -1.0 : 1.0;
    double mirror = 1.0;  // even function: f^{(r)}(x) = (-1)^r f^{(r)}(-x)
    for (int i = 0; i < order && x < 0; ++i) mirror = -mirror;
    if (ax <= 1.0) {
        // -x^2 + 2
        if (order == 0) return -x * x + 2.0;
        if (order == 1) return -2.0 * x;
        if (order == 2) return -2.0;
        return 0.0;
    }
    if (ax < 2.0) {
        std::vector<double> p2 = pr.inner;
        for (int i = 0; i < order; ++i) p2 = poly_deriv(p2);
        return mirror * poly_eval(p2, ax);
    }
    if (pr.k == 0) {
        // log|x|
        if (order == 0) return std::log(ax);
        double v = mono_deriv(1.0, -1, order - 1, x);
        return v;
    }
    // -1/((2k+2) x^{2k+2}), as printed
    return mono_deriv(-1.0 / (2 * pr.k + 2), -(2 * pr.k + 2), order, x);
}

}  // namespace desing_detail

// f_eps(x) = eps^{-(2k-1)} f(x/eps) (even) or eps^{-2k} f(x/eps) (odd).
inline double f_eps(const DesingProfile& pr, double x) {
    double scale = pr.even ? ipow(pr.eps, -(2 * pr.k - 1)) : ipow(pr.eps, -(2 * pr.k));
    return scale * desing_detail::profile_unscaled(pr, 0, x / pr.eps);
}

// order >= 1 derivatives of f_eps; outside the transition region these are the
// displayed closed-form branches computed directly in x (bit-exact agreement
// with dt/t^m and its derivatives).
inline double f_eps_deriv(const DesingProfile& pr, int order, double x) {
    using desing_detail::mono_deriv;
    if (order == 0) return f_eps(pr, x);
    double ax = std::fabs(x);
    if (pr.even) {
        if (ax > pr.eps) return mono_deriv(1.0, -2 * pr.k, order - 1, x);  // d/dx of x^{-2k} chain
        double scale = ipow(pr.eps, -(2 * pr.k - 1) - order);
        return scale * desing_detail::profile_unscaled(pr, order, x / pr.eps);
    }
    if (pr.k == 0 && ax > 2 * pr.eps) return mono_deriv(1.0, -1, order - 1, x);
    if (pr.k > 0 && ax > 2 * pr.eps)
        return mono_deriv(pr.eps * pr.eps, -(2 * pr.k + 3), order - 1, x);
    double scale = ipow(pr.eps, -(2 * pr.k) - order);
    return scale * desing_detail::profile_unscaled(pr, order, x / pr.eps);
}

inline DesingProfile make_profile(int m, double eps) {
    if (m < 1) throw InputError("profile: m must be >= 1");
    if (!(eps > 0)) throw InputError("profile: epsilon must be positive");
    DesingProfile pr;
    pr.m = m;
    pr.even = (m % 2 == 0);
    pr.k = pr.even ? m / 2 : (m - 1) / 2;
    pr.eps = eps;

    if (pr.even) {
        // odd degree-7 polynomial a1 x + a3 x^3 + a5 x^5 + a7 x^7 matching the
        // outer branch to third order at x = 1
        int k = pr.k;
        double f1 = 2.0 - 1.0 / (2 * k - 1);
        double d1 = 1.0, d2 = -2.0 * k, d3 = 2.0 * k * (2 * k + 1);
        Eigen::Matrix4d A;
        Eigen::Vector4d b;
        A << 1, 1, 1, 1,
             1, 3, 5, 7,
             0, 6, 20, 42,
             0, 6, 60, 210;
        b << f1, d1, d2, d3;
        Eigen::Vector4d sol = A.fullPivLu().solve(b);
        pr.inner = {0, sol(0), 0, sol(1), 0, sol(2), 0, sol(3)};
        // f' > 0 on [-1,1], checked on a 1e-3 grid
        std::vector<double> dp = desing_detail::poly_deriv(pr.inner);
        for (double x = 0.0; x <= 1.0 + 1e-12; x += 1e-3)
            if (desing_detail::poly_eval(dp, x) <= 0)
                throw Error("even profile bridge lost monotonicity at x = " + std::to_string(x));
    } else {
        // degree-7 bridge on [1,2] between -x^2+2 and the printed outer branch,
        // C^3 at both ends
        int k = pr.k;
        double g0, g1, g2, g3;
        if (k == 0) {
            g0 = std::log(2.0);
            g1 = 0.5;
            g2 = -0.25;
            g3 = 0.25;
        } else {
            g0 = -1.0 / ((2 * k + 2) * ipow(2.0, 2 * k + 2));
            g1 = ipow(2.0, -(2 * k + 3));
            g2 = -(2 * k + 3) * ipow(2.0, -(2 * k + 4));
            g3 = (2 * k + 3) * (2 * k + 4) * ipow(2.0, -(2 * k + 5));
        }
        Eigen::MatrixXd A(8, 8);
        Eigen::VectorXd b(8);
        auto fill = [&](int row, double x, int order, double val) {
            for (int j = 0; j < 8; ++j) A(row, j) = desing_detail::mono_deriv(1.0, j, order, x);
            b(row) = val;
        };
        fill(0, 1.0, 0, 1.0);
        fill(1, 1.0, 1, -2.0);
        fill(2, 1.0, 2, -2.0);
        fill(3, 1.0, 3, 0.0);
        fill(4, 2.0, 0, g0);
        fill(5, 2.0, 1, g1);
        fill(6, 2.0, 2, g2);
        fill(7, 2.0, 3, g3);
        Eigen::VectorXd sol = A.fullPivLu().solve(b);
        pr.inner.assign(sol.data(), sol.data() + 8);
    }

    char buf[64];
    std::snprintf(buf, sizeof(buf), "dprofile[m=%d,eps=%.6g]", m, eps);
    pr.display = buf;
    auto shared = std::make_shared<DesingProfile>(pr);
    pr.ext_id = register_ext(
        {pr.display, [shared](int order, double x) { return f_eps_deriv(*shared, order + 1, x); }});
    return pr;
}

// The 1-form d f_eps = f_eps'(t) dt as a symbolic object.
inline SingularForm d_f_eps_form(const DesingProfile& pr, const ChartModel& chart) {
    int def = chart.defining_index();
    Ex atom = ext(pr.ext_id, 0, pr.display, sym(chart.coords[static_cast<size_t>(def)]));
    return make_form(chart, 1, Coframe::Standard, {{atom, {def}}});
}

// omega_eps = d f_eps ^ (sum_j t^{m-j} alpha_j) + beta. Exact outside the
// eps-neighborhood because d f_eps reproduces dt/t^m there branch-exactly.
inline SingularForm desingularize(const SingularForm& w, const DesingProfile& pr,
                                  int taylor_order = 8) {
    LaurentDecomposition d = decompose_2form(w, taylor_order);
    if (pr.m != d.chart.m)
        throw InputError("profile order does not match the chart singularity order");
    const std::string& t = *d.chart.defining;
    SingularForm S = zero_form(d.chart, 1);
    for (int j = 1; j <= d.m; ++j)
        S = form_add(S, form_scale(d.alpha[static_cast<size_t>(j - 1)], pow(sym(t), d.m - j)));
    SingularForm weps = form_add(wedge(d_f_eps_form(pr, d.chart), S), d.beta);

    // closedness is symbolic: d alpha_j = 0 was certified by the decomposition
    SingularForm dweps = ext_d(weps);
    for (const auto& term : dweps.terms)
        if (!is_zero_trig(term.coeff))
            throw Error("desingularized form failed the closedness certificate");
    return weps;
}

// Pointwise check that weps agrees with w at samples in |t| >= 2 eps; the
// difference form is canonicalized first, so the agreement is exact where the
// displayed branches are.
inline double desing_agreement(const SingularForm& w, const SingularForm& weps,
                               const std::vector<Point>& pts) {
    SingularForm diff = form_sub(weps, to_standard_coframe_if_needed(w));
    double worst = 0;
    for (const auto& term : diff.terms)
        for (const auto& p : pts)
            worst = std::max(worst, std::fabs(eval_at(term.coeff, p)));
    return worst;
}

struct ConvergenceTable {
    std::vector<double> eps;
    std::vector<int> orders;                  // derivative orders, 0..2k-1
    std::vector<std::vector<double>> sup_dev; // [eps index][order index]
};

// C^{2k-1} convergence of the bivectors: sup over an off-Z grid of the entries
// of Pi_eps - Pi and their coordinate derivatives (central differences).
inline ConvergenceTable convergence_report(const SingularForm& w, const std::vector<double>& eps_list,
                                           const std::vector<Point>& grid, int taylor_order = 8) {
    if (w.chart.m % 2 != 0) throw InputError("convergence report requires even order");
    const int k = w.chart.m / 2;
    ConvergenceTable table;
    table.eps = eps_list;
    for (int r = 0; r <= 2 * k - 1; ++r) table.orders.push_back(r);
    SingularForm w_std = to_standard_coframe_if_needed(w);

    for (double eps : eps_list) {
        if (!(eps > 0)) throw InputError("epsilon must be positive");
        DesingProfile pr = make_profile(w.chart.m, eps);
        SingularForm weps = desingularize(w_std, pr, taylor_order);
        const int n = static_cast<int>(w.chart.dim());
        double fd_step = std::min(1e-3, eps / 20);

        auto entry_dev = [&](Point p) -> Eigen::MatrixXd {
            Eigen::MatrixXd a = form_to_bivector(weps, p);
            Eigen::MatrixXd b = form_to_bivector(w_std, p);
            return a - b;
        };
        std::vector<double> sup(static_cast<size_t>(2 * k), 0.0);
        for (const auto& p : grid) {
            sup[0] = std::max(sup[0], entry_dev(p).cwiseAbs().maxCoeff());
            for (int r = 1; r <= 2 * k - 1; ++r) {
                for (int c = 0; c < n; ++c) {
                    const std::string& coord = w.chart.coords[static_cast<size_t>(c)];
                    auto shifted = [&](int steps) {
                        Point q = p;
                        q[coord] += steps * fd_step;
                        return entry_dev(q);
                    };
                    Eigen::MatrixXd der;
                    switch (r) {
                        case 1:
                            der = (shifted(1) - shifted(-1)) / (2 * fd_step);
                            break;
                        case 2:
                            der = (shifted(1) - 2 * shifted(0) + shifted(-1)) / (fd_step * fd_step);
                            break;
                        case 3:
                            der = (shifted(2) - 2 * shifted(1) + 2 * shifted(-1) - shifted(-2)) /
                                  (2 * fd_step * fd_step * fd_step);
                            break;
                        default:
                            throw Error("derivative order beyond the provided stencils");
                    }
                    sup[static_cast<size_t>(r)] =
                        std::max(sup[static_cast<size_t>(r)], der.cwiseAbs().maxCoeff());
                }
            }
        }
        table.sup_dev.push_back(std::move(sup));
    }
    return table;
}

struct FoldReport {
    enum class Verdict { Symplectic, TransverseFold, DegenerateFold };
    Verdict verdict = Verdict::Symplectic;
    std::string fold_coord;
    std::vector<double> locations;       // distinct zero locations along fold_coord
    bool restriction_max_rank = false;
    double transversality_min = 0;       // min |dPf/dcoord| over located zeros
    std::string note;
};

// Locates the Pfaffian zero set of a smooth 2-form along each coordinate
// direction of a grid, checks transverse vanishing and the rank of the
// restriction to the zero slice.
inline FoldReport fold_check(const SingularForm& w, const std::vector<Point>& grid,
                             double zero_tol = 1e-10) {
    if (w.degree != 2) throw InputError("fold check: degree must be 2");
    const ChartModel& ch = w.chart;
    const int n = static_cast<int>(ch.dim());
    auto pf_at = [&](const Point& p) { return pfaffian(form_matrix_at(w, p)); };

    FoldReport rep;
    struct Zero {
        std::string coord;
        double loc;
        Point at;
    };
    std::vector<Zero> zeros;

    // organize grid into lines along each coordinate
    for (int c = 0; c < n; ++c) {
        const std::string& coord = ch.coords[static_cast<size_t>(c)];
        std::map<std::string, std::vector<std::pair<double, Point>>> lines;
        for (const auto& p : grid) {
            std::string key;
            for (const auto& [name, v] : p)
                if (name != coord) key += name + "=" + std::to_string(v) + ";";
            lines[key].push_back({p.at(coord), p});
        }
        for (auto& [key, pts] : lines) {
            std::sort(pts.begin(), pts.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<double> vals;
            vals.reserve(pts.size());
            for (const auto& [x, p] : pts) vals.push_back(pf_at(p));
            for (size_t i = 0; i < pts.size(); ++i) {
                if (std::fabs(vals[i]) <= zero_tol) {
                    zeros.push_back({coord, pts[i].first, pts[i].second});
                } else if (i + 1 < pts.size() && vals[i] * vals[i + 1] < 0) {
                    // bisect to the crossing
                    double lo = pts[i].first, hi = pts[i + 1].first;
                    Point q = pts[i].second;
                    double flo = vals[i];
                    for (int it = 0; it < 100; ++it) {
                        double mid = (lo + hi) / 2;
                        q[coord] = mid;
                        double fm = pf_at(q);
                        if (flo * fm <= 0)
                            hi = mid;
                        else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    q[coord] = (lo + hi) / 2;
                    zeros.push_back({coord, (lo + hi) / 2, q});
                }
            }
        }
    }

    if (zeros.empty()) {
        rep.verdict = FoldReport::Verdict::Symplectic;
        rep.note = "no Pfaffian zeros on the sampled grid";
        return rep;
    }

    // dedupe zero points found from several scan directions
    std::vector<Point> zero_pts;
    for (const auto& z : zeros) {
        bool seen = false;
        for (const auto& q : zero_pts) {
            double d = 0;
            for (const auto& [name, v] : z.at) d = std::max(d, std::fabs(v - q.at(name)));
            if (d < 1e-6) {
                seen = true;
                break;
            }
        }
        if (!seen) zero_pts.push_back(z.at);
    }

    // transverse vanishing means the full Pfaffian gradient is nonzero; the
    // fold-normal coordinate is the direction of the largest component
    rep.verdict = FoldReport::Verdict::TransverseFold;
    rep.restriction_max_rank = true;
    rep.transversality_min = std::numeric_limits<double>::infinity();
    double h = 1e-6;
    for (const auto& z : zero_pts) {
        Eigen::VectorXd grad(n);
        for (int c = 0; c < n; ++c) {
            Point a = z, b = z;
            a[ch.coords[static_cast<size_t>(c)]] += h;
            b[ch.coords[static_cast<size_t>(c)]] -= h;
            grad(c) = (pf_at(a) - pf_at(b)) / (2 * h);
        }
        int normal;
        double gmax = grad.cwiseAbs().maxCoeff(&normal);
        rep.transversality_min = std::min(rep.transversality_min, gmax);
        if (gmax < 1e-6) {
            rep.verdict = FoldReport::Verdict::DegenerateFold;
            rep.note = "Pfaffian gradient vanishes at a zero point";
            continue;
        }
        const std::string& coord = ch.coords[static_cast<size_t>(normal)];
        if (rep.fold_coord.empty()) rep.fold_coord = coord;
        // restriction to the zero slice: drop the fold-normal row/col
        Eigen::MatrixXd M = form_matrix_at(w, z);
        Eigen::MatrixXd R(n - 1, n - 1);
        int r = 0;
        for (int i = 0; i < n; ++i) {
            if (i == normal) continue;
            int cc = 0;
            for (int j = 0; j < n; ++j) {
                if (j == normal) continue;
                R(r, cc++) = M(i, j);
            }
            ++r;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
        lu.setThreshold(1e-9);
        if (lu.rank() < n - 2) rep.restriction_max_rank = false;
        if (coord == rep.fold_coord) {
            double loc = z.at(coord);
            bool seen = false;
            for (double l : rep.locations)
                if (std::fabs(l - loc) < 1e-6) seen = true;
            if (!seen) rep.locations.push_back(loc);
        }
    }
    std::sort(rep.locations.begin(), rep.locations.end());
    return rep;
}

}  // namespace bmsym
