#include "stablesde/drift_space.hpp"

#include "stablesde/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace stablesde::drift {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Exact value of the shortest decimal string that round-trips to x, so
/// 0.1 is read as 1/10 rather than its binary neighbour.
Rational decimal(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific);
    const std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
    const auto e_pos = text.find('e');
    int exponent = 0;
    std::from_chars(text.data() + e_pos + (text[e_pos + 1] == '+' ? 2 : 1), text.data() + text.size(), exponent);
    std::string digits;
    for (char c : text.substr(0, e_pos)) {
        if (c == '.') {
            continue;
        }
        digits.push_back(c);
    }
    const auto dot = text.find('.');
    if (dot != std::string_view::npos && dot < e_pos) {
        exponent -= static_cast<int>(e_pos - dot - 1);
    }
    std::int64_t small = 0;
    const auto parsed = std::from_chars(digits.data(), digits.data() + digits.size(), small);
    const bool fits = parsed.ec == std::errc() && parsed.ptr == digits.data() + digits.size();
    if (fits && std::abs(exponent) <= 18) {
        std::int64_t scale = 1;
        for (int i = 0; i < std::abs(exponent); ++i) {
            scale *= 10;
        }
        return exponent >= 0 ? Rational(Integer(small) * scale) : Rational(Integer(small), Integer(scale));
    }
    Rational value{Integer(digits)};
    const Integer ten_pow = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::abs(exponent)));
    if (exponent >= 0) {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    return value;
}

/// 1/p with 1/inf = 0.
Rational reciprocal(double p) { return std::isinf(p) ? Rational(0) : Rational(1) / decimal(p); }

Regime regime_of(const Rational& exponent) {
    if (exponent > 0) {
        return Regime::Subcritical;
    }
    if (exponent < 0) {
        return Regime::Supercritical;
    }
    return Regime::Critical;
}

void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

void check_stable_alpha(double alpha) {
    require(alpha > 0.0 && alpha < 2.0 && std::isfinite(alpha), "stability index must satisfy 0 < alpha < 2");
}

} // namespace

std::string to_string(SpaceFamily family) {
    switch (family) {
    case SpaceFamily::LqLpBrownian:
        return "Lq-Lp-Brownian";
    case SpaceFamily::LpHolderBrownian:
        return "Lp-Holder-Brownian";
    case SpaceFamily::LinfBesovStable:
        return "Linf-Besov-stable";
    case SpaceFamily::LpHolderStable:
        return "Lp-Holder-stable";
    }
    return "unknown";
}

std::string to_string(Regime regime) {
    switch (regime) {
    case Regime::Subcritical:
        return "subcritical";
    case Regime::Critical:
        return "critical";
    case Regime::Supercritical:
        return "supercritical";
    }
    return "unknown";
}

SpaceFamily parse_family(const std::string& name) {
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    for (auto family : {SpaceFamily::LqLpBrownian, SpaceFamily::LpHolderBrownian, SpaceFamily::LinfBesovStable,
                        SpaceFamily::LpHolderStable}) {
        std::string candidate = to_string(family);
        std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (key == candidate) {
            return family;
        }
    }
    throw ArgumentError("unknown space family '" + name +
                        "' (expected lq-lp-brownian, lp-holder-brownian, linf-besov-stable, lp-holder-stable)");
}

CriticalityReport classify_criticality(double alpha, double beta_or_q, double p, int dim, SpaceFamily family) {
    require(dim >= 1, "dimension must be >= 1");
    require(!std::isnan(alpha) && !std::isnan(beta_or_q) && !std::isnan(p), "parameters must not be NaN");
    const Rational d(dim);
    const Rational inv_p = reciprocal(p);
    Rational exponent;
    double threshold = 0.0;

    switch (family) {
    case SpaceFamily::LqLpBrownian: {
        const double q = beta_or_q;
        require(p >= 2.0 && q >= 2.0, "L^q(L^p) family requires p, q in [2, inf]");
        const Rational inv_q = reciprocal(q);
        exponent = Rational(1, 2) - d * inv_p / 2 - inv_q;
        // d/p + 2/q < 1  <=>  p > d / (1 - 2/q)
        const Rational gap = 1 - 2 * inv_q;
        threshold = gap > 0 ? static_cast<double>(Rational(d / gap)) : kInf;
        break;
    }
    case SpaceFamily::LpHolderBrownian: {
        const double beta = beta_or_q;
        require(beta > 0.0 && beta < 1.0, "Holder index must satisfy 0 < beta < 1");
        require(p >= 1.0, "time integrability must satisfy p >= 1");
        const Rational b = decimal(beta);
        exponent = Rational(1, 2) - inv_p + b / 2;
        threshold = static_cast<double>(Rational(2 / (1 + b)));
        break;
    }
    case SpaceFamily::LinfBesovStable: {
        const double beta = beta_or_q;
        check_stable_alpha(alpha);
        require(std::isfinite(beta), "Besov index must be finite");
        require(p > 1.0 && std::isfinite(p), "Besov integrability must satisfy 1 < p < inf");
        const Rational a = decimal(alpha);
        const Rational b = decimal(beta);
        if (!(a + b > 1)) {
            throw DomainError("this family requires alpha + beta > 1, got alpha + beta = " + std::to_string(alpha + beta));
        }
        const Rational excess = a + b - 1;
        exponent = (excess - d * inv_p) / a;
        threshold = static_cast<double>(Rational(d / excess));
        break;
    }
    case SpaceFamily::LpHolderStable: {
        const double beta = beta_or_q;
        check_stable_alpha(alpha);
        require(beta > 0.0 && beta < 1.0, "Holder index must satisfy 0 < beta < 1");
        require(p >= 1.0, "time integrability must satisfy p >= 1");
        const Rational a = decimal(alpha);
        const Rational b = decimal(beta);
        if (!(a + b > 1)) {
            throw DomainError("this family requires alpha + beta > 1, got alpha + beta = " + std::to_string(alpha + beta));
        }
        const Rational excess = a + b - 1;
        exponent = excess / a - inv_p;
        threshold = static_cast<double>(Rational(a / excess));
        break;
    }
    }
    return CriticalityReport{family, regime_of(exponent), static_cast<double>(exponent), threshold};
}

} // namespace stablesde::drift
