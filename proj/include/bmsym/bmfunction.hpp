#pragma once
// The admissible Hamiltonian class near Z and its canonical split
//   c1 log|t| + sum_{i>=1} c_{i+1} t^{-i}/i + mu0
// with t-independent c's and mu0 finite at t = 0.

#include "bmsym/chart.hpp"
#include "bmsym/error.hpp"
#include "bmsym/expr.hpp"
#include "bmsym/series.hpp"
#include "bmsym/simplify.hpp"

#include <string>
#include <vector>

namespace bmsym {

struct BmFunction {
    ChartModel chart;
    Ex log_coef = num(0);         // c1
    std::vector<Ex> pole_coefs;   // pole_coefs[i-1] = c_{i+1}, multiplying t^{-i}/i
    Ex smooth = num(0);           // mu0

    Ex singular_part() const {
        const std::string& t = *chart.defining;
        std::vector<Ex> parts;
        if (!is_zero(log_coef)) parts.push_back(log_coef * fun(Fn::LogAbs, sym(t)));
        for (size_t i = 1; i <= pole_coefs.size(); ++i) {
            if (is_zero(pole_coefs[i - 1])) continue;
            parts.push_back(pole_coefs[i - 1] * pow(sym(t), -static_cast<long long>(i)) *
                            num(rat(1, static_cast<long long>(i))));
        }
        return add(std::move(parts));
    }

    Ex reassemble() const { return canon(singular_part() + smooth); }

    int highest_pole() const {
        for (size_t i = pole_coefs.size(); i >= 1; --i)
            if (!is_zero(pole_coefs[i - 1])) return static_cast<int>(i);
        return 0;
    }
};

inline BmFunction split_bm_scalar(const Ex& e, const ChartModel& chart) {
    if (!chart.defining) throw InputError("split: chart has no defining coordinate");
    const std::string& t = *chart.defining;
    const int m = chart.m;

    LSeries s;
    try {
        s = series_of(e, t, m + 1);
    } catch (const SeriesError& err) {
        throw NotBmFunction(std::string("expression does not expand near t=0: ") + err.what());
    }
    for (const auto& [j, c] : s.l)
        if (j != 0)
            throw NotBmFunction("t^" + std::to_string(j) + " log|t| term: outside the class");
    if (!s.a.empty() && s.a.begin()->first <= -m)
        throw NotBmFunction("pole of order " + std::to_string(-s.a.begin()->first) +
                            " meets or exceeds m = " + std::to_string(m));

    BmFunction f;
    f.chart = chart;
    f.log_coef = series_log_coeff(s, 0);
    f.pole_coefs.assign(static_cast<size_t>(std::max(0, m - 1)), num(0));
    for (int i = 1; i <= m - 1; ++i)
        f.pole_coefs[static_cast<size_t>(i - 1)] = canon(num(i) * series_coeff(s, -i));
    f.smooth = canon(e - f.singular_part());

    // certify the remainder is finite at t = 0
    LSeries rest = series_of(f.smooth, t, m);
    if (!series_log_free(rest) || (!rest.a.empty() && rest.a.begin()->first < 0))
        throw NotBmFunction("remainder not smooth at t=0");
    return f;
}

}  // namespace bmsym
