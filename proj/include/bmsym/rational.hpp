#pragma once
// Exact rational scalars used as the coefficient field of the expression engine.

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bmsym {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

// boost::rational over cpp_int requires a positive denominator at construction
inline Rat make_rat(BigInt n, BigInt d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    return Rat(std::move(n), std::move(d));
}

inline Rat rat(long long n, long long d = 1) { return make_rat(BigInt(n), BigInt(d)); }

inline bool is_integer(const Rat& r) { return r.denominator() == 1; }

inline double to_double(const Rat& r) {
    return r.numerator().convert_to<double>() / r.denominator().convert_to<double>();
}

inline Rat rat_pow(const Rat& base, long long e) {
    if (e == 0) return Rat(1);
    if (base.numerator() == 0) {
        if (e < 0) throw std::domain_error("rat_pow: zero to a negative power");
        return Rat(0);
    }
    BigInt n = base.numerator(), d = base.denominator();
    bool neg = e < 0;
    unsigned long long k = neg ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
    BigInt rn = 1, rd = 1;
    while (k) {
        if (k & 1) { rn *= n; rd *= d; }
        n *= n; d *= d; k >>= 1;
    }
    if (neg) return make_rat(rd, rn);
    return make_rat(rn, rd);
}

inline std::string to_string(const Rat& r) {
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << '/' << r.denominator();
    return os.str();
}

// Total order usable as a tie-breaker in canonical term ordering.
inline int rat_cmp(const Rat& a, const Rat& b) {
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
}

}  // namespace bmsym
