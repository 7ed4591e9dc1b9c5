#pragma once
// Singular quasi-Hamiltonian spaces for torus groups: exponentiation of
// Hamiltonian packages, the fusion product, axiom verification, and abelian
// reduction. Circle values are stored additively as angle expressions; for
// tori the Maurer-Cartan 3-form vanishes and the correction 2-form varpi is
// derived to be zero, so exponentiation keeps sigma = omega.

#include "bmsym/action.hpp"
#include "bmsym/bmfunction.hpp"
#include "bmsym/error.hpp"
#include "bmsym/forms.hpp"
#include "bmsym/laurent.hpp"
#include "bmsym/reduction.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace bmsym {

struct QuasiFactor {
    std::string name;
    ActionGenerator gen;
    Ex phi_angle = num(0);  // moment component, additive angle
    bool boundary = false;  // angle has b-type content; reduced only at exp(0) ~ {t=0}
};

struct QuasiSpace {
    ChartModel chart;
    SingularForm sigma;
    std::vector<std::vector<Rat>> pairing;  // SPD, indexed like factors
    std::vector<QuasiFactor> factors;

    int rank() const { return static_cast<int>(factors.size()); }
};

inline std::vector<std::vector<Rat>> identity_pairing(int r) {
    std::vector<std::vector<Rat>> P(static_cast<size_t>(r),
                                    std::vector<Rat>(static_cast<size_t>(r), Rat(0)));
    for (int i = 0; i < r; ++i) P[static_cast<size_t>(i)][static_cast<size_t>(i)] = Rat(1);
    return P;
}

// varpi = (1/2) * integral over s of (pairing of exp_s-pulled left-invariant
// forms with their s-derivative). For a torus both entries are multiples of
// the same coordinate differentials, so the pairing wedges to zero by the
// symmetry of the matrix. The derivation runs through the wedge machinery.
inline SingularForm varpi_form(int r, const std::vector<std::vector<Rat>>& pairing,
                               bool abelian = true) {
    if (!abelian) throw UnsupportedGroup("varpi: only torus groups are supported");
    if (r < 1) throw InputError("varpi: rank must be >= 1");
    if (static_cast<int>(pairing.size()) != r) throw InputError("varpi: pairing size mismatch");
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            if (!(pairing[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
                  pairing[static_cast<size_t>(j)][static_cast<size_t>(i)]))
                throw InputError("varpi: pairing must be symmetric");
    std::vector<std::string> coords;
    std::vector<bool> per;
    for (int i = 0; i < r; ++i) {
        coords.push_back("eta" + std::to_string(i + 1));
        per.push_back(false);
    }
    coords.push_back("s");
    per.push_back(false);
    ChartModel ch(coords, per);
    // exp_s-pulled left-invariant form in component i is s * d eta_i
    SingularForm integrand = zero_form(ch, 2);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            Rat p = pairing[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (p == Rat(0)) continue;
            SingularForm a = make_form(ch, 1, Coframe::Standard, {{sym("s"), {i}}});
            SingularForm b = make_form(ch, 1, Coframe::Standard, {{num(1), {j}}});
            integrand = form_add(integrand, form_scale(wedge(a, b), num(p)));
        }
    if (!integrand.terms.empty())
        throw Error("varpi derivation failed: symmetric pairing did not cancel");
    // the s-integral of the zero 2-form on the eta-chart
    std::vector<std::string> out_coords(coords.begin(), coords.end() - 1);
    std::vector<bool> out_per(per.begin(), per.end() - 1);
    return zero_form(ChartModel(out_coords, out_per), 2);
}

namespace quasi_detail {

inline SingularForm d_phi(const QuasiSpace& Q, size_t j) {
    return ext_d(scalar_form(Q.chart, Q.factors[j].phi_angle));
}

}  // namespace quasi_detail

struct AxiomReport {
    bool closed = false;
    bool moment_condition = false;
    bool weakly_nondegenerate = false;
    std::string witness;
    bool all() const { return closed && moment_condition && weakly_nondegenerate; }
};

// (i) d sigma = 0; (ii) iota_{xi_j} sigma = - sum_k P_jk d phi_k;
// (iii) ker sigma and ker dPhi intersect trivially at every sample.
inline AxiomReport verify_axioms(const QuasiSpace& Q, const std::vector<Point>& samples,
                                 double rank_tol = 1e-9) {
    AxiomReport rep;
    rep.closed = true;
    SingularForm ds = ext_d(Q.sigma);
    for (const auto& t : ds.terms)
        if (!is_zero_trig(t.coeff)) {
            rep.closed = false;
            rep.witness = "d sigma term " + to_string(t.coeff);
        }

    rep.moment_condition = true;
    for (size_t j = 0; j < Q.factors.size(); ++j) {
        SingularForm lhs = interior_product(Q.factors[j].gen.field, Q.sigma);
        SingularForm rhs = zero_form(Q.chart, 1, Q.sigma.frame);
        for (size_t k = 0; k < Q.factors.size(); ++k) {
            Rat p = Q.pairing[j][k];
            if (p == Rat(0)) continue;
            SingularForm dphi = quasi_detail::d_phi(Q, k);
            if (Q.sigma.frame == Coframe::BSingular) dphi = to_b_coframe(dphi);
            rhs = form_add(rhs, form_scale(dphi, num(-p)));
        }
        if (!form_equal_trig(lhs, rhs)) {
            rep.moment_condition = false;
            rep.witness = "moment condition fails for factor " + Q.factors[j].name;
        }
    }

    rep.weakly_nondegenerate = true;
    const int n = static_cast<int>(Q.chart.dim());
    const int r = Q.rank();
    bool singular = has_singular_coefficients(Q.sigma);
    SingularForm sig = singular ? to_b_coframe(to_standard_coframe_if_needed(Q.sigma))
                                : to_standard_coframe_if_needed(Q.sigma);
    std::vector<SingularForm> dphis;
    for (size_t k = 0; k < Q.factors.size(); ++k) {
        SingularForm d = quasi_detail::d_phi(Q, k);
        dphis.push_back(singular ? to_b_coframe(d) : d);
    }
    for (const auto& p : samples) {
        Eigen::MatrixXd A(n + r, n);
        A.topRows(n) = form_matrix_at(sig, p);
        for (int k = 0; k < r; ++k) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
            for (const auto& term : dphis[static_cast<size_t>(k)].terms)
                row(term.idx[0]) = eval_limit(term.coeff, p, Q.chart);
            A.row(n + k) = row;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(rank_tol);
        if (lu.rank() < n) {
            rep.weakly_nondegenerate = false;
            rep.witness = "joint kernel is nontrivial at a sample point";
            break;
        }
    }
    return rep;
}

inline std::vector<Point> default_axiom_grid(const ChartModel& chart) {
    return enumerate_grid(default_grid(chart, true, 5, 3));
}

// Hamiltonian package -> quasi space: sigma = omega (varpi vanishes for tori,
// machine-derived), phi_j = mu_j as an angle.
inline QuasiSpace exponentiate_space(const SingularForm& w, const ActionSpec& a,
                                     const std::vector<BmFunction>& mus) {
    if (mus.size() != a.gens.size()) throw InputError("exponentiate: one moment per generator");
    QuasiSpace Q;
    Q.chart = w.chart;
    Q.sigma = w;
    Q.pairing = identity_pairing(static_cast<int>(a.gens.size()));
    SingularForm correction = varpi_form(std::max<int>(1, static_cast<int>(a.gens.size())),
                                         identity_pairing(std::max<int>(1, static_cast<int>(a.gens.size()))));
    if (!correction.terms.empty()) throw Error("varpi correction unexpectedly nonzero");
    for (size_t i = 0; i < a.gens.size(); ++i) {
        QuasiFactor f;
        f.name = a.gens[i].name;
        f.gen = a.gens[i];
        f.phi_angle = mus[i].reassemble();
        f.boundary = mus[i].highest_pole() > 0 || !is_zero(mus[i].log_coef);
        Q.factors.push_back(std::move(f));
    }
    AxiomReport rep = verify_axioms(Q, default_axiom_grid(Q.chart));
    if (!rep.all()) throw AxiomViolation("exponentiation violated an axiom: " + rep.witness);
    return Q;
}

namespace quasi_detail {

inline SingularForm lift_form(const SingularForm& f, const ChartModel& product) {
    std::vector<FormTerm> raw;
    for (const auto& t : f.terms) {
        std::vector<int> idx;
        for (int i : t.idx) idx.push_back(product.index(f.chart.coords[static_cast<size_t>(i)]));
        raw.push_back({t.coeff, idx});
    }
    return make_form(product, f.degree, Coframe::Standard, raw);
}

inline VectorFieldExpr lift_field(const VectorFieldExpr& v, const ChartModel& product) {
    std::vector<Ex> comp(product.dim(), num(0));
    for (size_t i = 0; i < v.chart.dim(); ++i)
        comp[static_cast<size_t>(product.index(v.chart.coords[i]))] = v.comp[i];
    return VectorFieldExpr(product, comp);
}

}  // namespace quasi_detail

// Fusion along one shared circle factor: product chart, moment angles added,
// sigma corrected by -(1/2) P dPhi_1 ^ dPhi_2.
inline QuasiSpace fuse(const QuasiSpace& A, size_t iA, const QuasiSpace& B, size_t iB) {
    if (iA >= A.factors.size() || iB >= B.factors.size())
        throw InputError("fuse: factor index out of range");
    Rat pA = A.pairing[iA][iA], pB = B.pairing[iB][iB];
    if (!(pA == pB)) throw InputError("fuse: shared factor pairings differ");
    for (size_t k = 0; k < A.factors.size(); ++k)
        if (k != iA && !(A.pairing[iA][k] == Rat(0)))
            throw UnsupportedGroup("fuse: shared factor must pair diagonally");
    for (size_t k = 0; k < B.factors.size(); ++k)
        if (k != iB && !(B.pairing[iB][k] == Rat(0)))
            throw UnsupportedGroup("fuse: shared factor must pair diagonally");
    for (const auto& ca : A.chart.coords)
        if (B.chart.has(ca)) throw InputError("fuse: coordinate name clash: " + ca);

    std::vector<std::string> coords = A.chart.coords;
    std::vector<bool> per = A.chart.periodic;
    coords.insert(coords.end(), B.chart.coords.begin(), B.chart.coords.end());
    for (bool b : B.chart.periodic) per.push_back(b);
    std::optional<std::string> defining = A.chart.defining;
    int m = A.chart.m;
    if (!defining && B.chart.defining) {
        defining = B.chart.defining;
        m = B.chart.m;
    }
    ChartModel product(coords, per, defining, m);

    QuasiSpace F;
    F.chart = product;
    SingularForm sA = quasi_detail::lift_form(to_standard_coframe_if_needed(A.sigma), product);
    SingularForm sB = quasi_detail::lift_form(to_standard_coframe_if_needed(B.sigma), product);
    Ex phiA = A.factors[iA].phi_angle, phiB = B.factors[iB].phi_angle;
    SingularForm dA = ext_d(scalar_form(product, phiA));
    SingularForm dB = ext_d(scalar_form(product, phiB));
    F.sigma = form_add(form_add(sA, sB),
                       form_scale(wedge(dA, dB), num(-pA * rat(1, 2))));

    QuasiFactor shared;
    shared.name = A.factors[iA].name + "*" + B.factors[iB].name;
    std::vector<Ex> comp(product.dim(), num(0));
    VectorFieldExpr gA = quasi_detail::lift_field(A.factors[iA].gen.field, product);
    VectorFieldExpr gB = quasi_detail::lift_field(B.factors[iB].gen.field, product);
    for (size_t i = 0; i < product.dim(); ++i) comp[i] = canon(gA.comp[i] + gB.comp[i]);
    shared.gen = {shared.name, VectorFieldExpr(product, comp)};
    shared.phi_angle = canon(phiA + phiB);
    shared.boundary = A.factors[iA].boundary || B.factors[iB].boundary;
    F.factors.push_back(shared);
    for (size_t k = 0; k < A.factors.size(); ++k) {
        if (k == iA) continue;
        QuasiFactor f = A.factors[k];
        f.gen.field = quasi_detail::lift_field(f.gen.field, product);
        F.factors.push_back(std::move(f));
    }
    for (size_t k = 0; k < B.factors.size(); ++k) {
        if (k == iB) continue;
        QuasiFactor f = B.factors[k];
        f.gen.field = quasi_detail::lift_field(f.gen.field, product);
        F.factors.push_back(std::move(f));
    }
    // carried factors keep their own diagonal pairings
    F.pairing = identity_pairing(F.rank());
    F.pairing[0][0] = pA;
    {
        size_t idx = 1;
        for (size_t k = 0; k < A.factors.size(); ++k)
            if (k != iA) F.pairing[idx][idx] = A.pairing[k][k], ++idx;
        for (size_t k = 0; k < B.factors.size(); ++k)
            if (k != iB) F.pairing[idx][idx] = B.pairing[k][k], ++idx;
    }

    AxiomReport rep = verify_axioms(F, default_axiom_grid(F.chart));
    if (!rep.all()) throw AxiomViolation("fusion violated an axiom: " + rep.witness);
    return F;
}

struct QuasiReduced {
    std::optional<QuasiSpace> space;   // remaining factors, when any
    std::optional<ReducedSpace> final; // fully reduced
    std::vector<std::string> trace;
};

namespace quasi_detail {

// generator must be a constant-coefficient combination of angle fields; the
// quotient is a linear change of angle coordinates
inline std::vector<std::pair<std::string, Rat>> angle_combination(const VectorFieldExpr& v) {
    std::vector<std::pair<std::string, Rat>> out;
    for (size_t i = 0; i < v.chart.dim(); ++i) {
        Ex c = canon(v.comp[i]);
        if (c->kind == Kind::Num && c->num == Rat(0)) continue;
        if (c->kind != Kind::Num)
            throw UnsupportedGroup("quotient: generator component is not constant");
        if (!v.chart.periodic[i])
            throw UnsupportedGroup("quotient: generator moves a non-angle coordinate");
        out.push_back({v.chart.coords[i], c->num});
    }
    if (out.empty()) throw InputError("quotient: generator vanishes");
    return out;
}

inline ChartModel remove_coords(const ChartModel& ch, const std::vector<std::string>& dropped,
                                bool drop_defining) {
    std::vector<std::string> coords;
    std::vector<bool> per;
    for (size_t i = 0; i < ch.dim(); ++i) {
        bool dropped_here = false;
        for (const auto& d : dropped) dropped_here |= ch.coords[i] == d;
        if (dropped_here) continue;
        coords.push_back(ch.coords[i]);
        per.push_back(ch.periodic[i]);
    }
    std::optional<std::string> defining = ch.defining;
    if (drop_defining) defining.reset();
    if (defining) {
        bool still = false;
        for (const auto& c : coords) still |= c == *defining;
        if (!still) defining.reset();
    }
    return defining ? ChartModel(coords, per, defining, ch.m) : ChartModel(coords, per);
}

inline bool singular_in(const Ex& e, const std::string& t) {
    Ex c = canon(e);
    std::function<bool(const Ex&)> scan = [&](const Ex& n) -> bool {
        if (n->kind == Kind::Pow && n->ipow < 0 && contains_sym(n->kids[0], t)) return true;
        if (n->kind == Kind::Fun && n->fn == Fn::LogAbs && contains_sym(n->kids[0], t)) return true;
        for (const auto& k : n->kids)
            if (scan(k)) return true;
        return false;
    };
    return scan(c);
}

}  // namespace quasi_detail

// Reduction of one factor. Boundary factors (nonzero highest modular weight)
// reduce at the distinguished level exp(0), i.e. the t = 0 locus; smooth
// factors at a regular angle level. When the reduced structure still carries
// poles of the reduced factor they are absorbed by reparameterizing t through
// the pole primitive, exhibiting the reduced form as smooth.
namespace quasi_detail {

// an angle coordinate entering the moment with a constant rational slope makes
// the level solvable in closed form
inline std::optional<std::pair<std::string, Rat>> linear_angle(const ChartModel& ch, const Ex& phi) {
    for (size_t i = 0; i < ch.dim(); ++i) {
        if (!ch.periodic[i]) continue;
        Ex d = canon(differentiate(phi, ch.coords[i]));
        if (d->kind == Kind::Num && !(d->num == Rat(0))) return std::make_pair(ch.coords[i], d->num);
    }
    return std::nullopt;
}

}  // namespace quasi_detail

inline QuasiReduced quasi_reduce_abelian(const QuasiSpace& Q, size_t factor,
                                         std::optional<Ex> level = std::nullopt,
                                         double tol = 1e-9) {
    if (factor >= Q.factors.size()) throw InputError("reduce: factor index out of range");
    const QuasiFactor& f = Q.factors[factor];
    QuasiReduced out;

    ChartModel sub;
    SingularForm sigma_red = Q.sigma;
    std::map<std::string, Ex> carried_subst;

    auto owned_angle = quasi_detail::linear_angle(Q.chart, f.phi_angle);
    bool smooth_path = level.has_value() && owned_angle.has_value();

    if (!smooth_path) {
        if (!f.boundary)
            throw InputError("smooth factor needs a level angle entering the moment linearly");
        if (level && !is_zero(*level))
            throw LevelNotRegular(
                "boundary factor without an angle part reduces only at the distinguished level "
                "exp(0)");
        if (!Q.chart.defining) throw InputError("boundary factor on a chart without t");
        const std::string t = *Q.chart.defining;
        // the generator must be a single angle translation
        auto combo = quasi_detail::angle_combination(f.gen.field);
        if (combo.size() != 1 || !(combo[0].second == Rat(1)))
            throw UnsupportedGroup("boundary factor generator must translate one angle");
        std::string theta = combo[0].first;
        // regularity at the boundary level: the highest modular weight must be nonzero
        BmFunction bm = split_bm_scalar(f.phi_angle, Q.chart);
        bool highest = Q.chart.m == 1 ? !is_zero(bm.log_coef)
                                      : (bm.highest_pole() == Q.chart.m - 1);
        if (!highest)
            throw LevelNotRegular("factor " + f.name +
                                  " has zero highest modular weight; the t=0 level is not regular");
        // basic-ness: the contraction must have no components besides dt on the level
        SingularForm contr = interior_product(f.gen.field, to_standard_coframe_if_needed(Q.sigma));
        for (const auto& term : contr.terms) {
            if (Q.chart.coords[static_cast<size_t>(term.idx[0])] == t) continue;
            Ex at0 = series_limit_at_zero(term.coeff, t);
            if (!is_zero_trig(at0))
                throw AxiomViolation("pullback of sigma is not basic on the level");
        }
        sub = quasi_detail::remove_coords(Q.chart, {t, theta}, true);
        sigma_red = reduction_detail::drop_coordinates(Q.sigma, sub, {t, theta});
        out.trace.push_back("factor " + f.name + " reduced at exp(0): level {" + t +
                            "=0} / " + theta + "-translation");
    } else {
        // locate critical values of the moment angle; the level must avoid them
        {
            SingularForm dphi = ext_d(scalar_form(Q.chart, f.phi_angle));
            auto pts = enumerate_grid(default_grid(Q.chart, false, 6, 6));
            for (const auto& p : pts) {
                double norm = 0, phi_val;
                try {
                    phi_val = eval_at(f.phi_angle, p);
                    for (const auto& term : dphi.terms)
                        norm = std::max(norm, std::fabs(eval_at(term.coeff, p)));
                } catch (const SingularEvalError&) {
                    continue;
                }
                double lv = eval_at(*level, {});
                double dphase = std::remainder(phi_val - lv, 2 * M_PI);
                if (norm < 1e-3 && std::fabs(dphase) < 1e-2)
                    throw LevelNotRegular("level passes through a critical point of the moment");
            }
        }
        const std::string owned = owned_angle->first;
        const Rat slope = owned_angle->second;
        Ex rest = canon(f.phi_angle - num(slope) * sym(owned));
        Ex image = canon((*level - rest) * num(rat_pow(slope, -1)));
        // quotient: absorb one angle moved by the generator
        auto combo = quasi_detail::angle_combination(f.gen.field);
        std::string absorbed;
        Rat acoef(0);
        for (const auto& [name, rcoef] : combo)
            if (name != owned) {
                absorbed = name;
                acoef = rcoef;
                break;
            }
        if (absorbed.empty()) {
            absorbed = combo[0].first;
            acoef = combo[0].second;
        }
        std::map<std::string, Ex> subst;
        subst[owned] = image;
        // invariants psi_i = phi_i - (a_i/a_q) phi_q replace the other moved angles
        for (const auto& [name, rcoef] : combo) {
            if (name == absorbed || name == owned) continue;
            subst[name] = canon(sym("psi_" + name) + num(rcoef * rat_pow(acoef, -1)) * sym(absorbed));
        }
        std::vector<std::string> coords;
        std::vector<bool> per;
        for (size_t i = 0; i < Q.chart.dim(); ++i) {
            const std::string& c = Q.chart.coords[i];
            if (c == owned || c == absorbed) continue;
            bool renamed = subst.count(c) > 0;
            coords.push_back(renamed ? "psi_" + c : c);
            per.push_back(Q.chart.periodic[i]);
        }
        coords.push_back(absorbed);  // temporarily keep for the basic-ness check
        per.push_back(true);
        std::optional<std::string> lv_def = Q.chart.defining;
        if (lv_def && std::find(coords.begin(), coords.end(), *lv_def) == coords.end())
            lv_def.reset();
        ChartModel level_chart(coords, per, lv_def, Q.chart.m);
        SingularForm pulled = pullback(to_standard_coframe_if_needed(Q.sigma), level_chart, subst);
        for (const auto& term : pulled.terms)
            for (int i : term.idx)
                if (level_chart.coords[static_cast<size_t>(i)] == absorbed)
                    if (!is_zero_trig(term.coeff))
                        throw AxiomViolation("level form is not basic for the quotient circle");
        sub = quasi_detail::remove_coords(level_chart, {absorbed}, false);
        sigma_red = reduction_detail::drop_coordinates(pulled, sub, {absorbed});
        out.trace.push_back("factor " + f.name + " reduced at angle " + to_string(canon(*level)) +
                            "; quotient absorbed " + absorbed);
        carried_subst = subst;
    }

    // absorb leftover poles of the reduced factor by reparameterizing t
    if (sub.defining && [&] {
            for (const auto& term : sigma_red.terms)
                if (quasi_detail::singular_in(term.coeff, *sub.defining)) return true;
            return false;
        }()) {
        const std::string t = *sub.defining;
        BmFunction bm = split_bm_scalar(f.phi_angle, Q.chart);
        int pole = bm.highest_pole();
        std::map<std::string, Ex> repar;
        std::string how;
        if (pole == 1) {
            // u = -1/t  (t = -1/u)
            repar[t] = canon(num(-1) * pow(sym("u"), -1));
            how = "t = -1/u";
        } else if (pole == 0 && !is_zero(bm.log_coef)) {
            repar[t] = fun(Fn::Exp, sym("u"));
            how = "t = exp(u), t > 0 component";
        } else {
            throw UnsupportedGroup("pole order beyond the supported reparameterizations");
        }
        std::vector<std::string> coords;
        std::vector<bool> per;
        for (size_t i = 0; i < sub.dim(); ++i) {
            coords.push_back(sub.coords[i] == t ? "u" : sub.coords[i]);
            per.push_back(sub.periodic[i]);
        }
        ChartModel smooth_chart(coords, per);
        sigma_red = pullback(sigma_red, smooth_chart, repar);
        sub = smooth_chart;
        out.trace.push_back("singular coordinate absorbed: " + how);
        for (const auto& term : sigma_red.terms)
            if (quasi_detail::singular_in(term.coeff, "u"))
                throw Error("reparameterization failed to remove the singular content");
    }

    // carry the remaining factors
    std::vector<QuasiFactor> rest;
    for (size_t k = 0; k < Q.factors.size(); ++k) {
        if (k == factor) continue;
        const QuasiFactor& g = Q.factors[k];
        Ex phi = g.phi_angle;
        for (const auto& [name, repl] : carried_subst) phi = substitute(phi, name, repl);
        for (size_t i = 0; i < Q.chart.dim(); ++i) {
            const std::string& c = Q.chart.coords[i];
            if (!sub.has(c) && contains_sym(canon(phi), c))
                throw UnsupportedGroup("carried factor depends on reduced coordinates");
        }
        std::vector<Ex> comp(sub.dim(), num(0));
        for (size_t i = 0; i < Q.chart.dim(); ++i) {
            const std::string& c = Q.chart.coords[i];
            if (!sub.has(c)) {
                if (!is_zero(g.gen.field.comp[i]))
                    throw UnsupportedGroup("carried generator moves reduced coordinates");
                continue;
            }
            comp[static_cast<size_t>(sub.index(c))] = g.gen.field.comp[i];
        }
        QuasiFactor ng = g;
        ng.phi_angle = phi;
        ng.gen.field = VectorFieldExpr(sub, comp);
        rest.push_back(std::move(ng));
    }

    if (rest.empty()) {
        ReducedSpace r;
        r.chart = sub;
        r.form = sigma_red;
        r.trace = out.trace;
        out.final = std::move(r);
    } else {
        QuasiSpace R;
        R.chart = sub;
        R.sigma = sigma_red;
        R.factors = rest;
        R.pairing = identity_pairing(static_cast<int>(rest.size()));
        {
            size_t idx = 0;
            for (size_t k = 0; k < Q.factors.size(); ++k)
                if (k != factor) R.pairing[idx][idx] = Q.pairing[k][k], ++idx;
        }
        AxiomReport rep = verify_axioms(R, default_axiom_grid(R.chart), tol);
        if (!rep.all()) throw AxiomViolation("reduced space violates an axiom: " + rep.witness);
        out.space = std::move(R);
    }
    return out;
}

}  // namespace bmsym
