#include "stablesde/drift_space.hpp"

#include "stablesde/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace stablesde::drift {

struct DriftField::Impl {
    DriftMeta meta;
    EvalFn eval;
    std::optional<SeparableForm> form;
    double sup_bound = kInf;
};

void DriftMeta::validate() const {
    if (!(p >= 1.0)) {
        throw ParameterError("time integrability p must be >= 1, got " + std::to_string(p));
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ParameterError("Holder index beta must lie in (0, 1), got " + std::to_string(beta));
    }
    if (!(sing_exponent >= 0.0) || !std::isfinite(sing_exponent)) {
        throw ParameterError("singularity exponent must be finite and >= 0");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ParameterError("horizon T must be positive and finite");
    }
    if (dim < 1) {
        throw ParameterError("drift dimension must be >= 1");
    }
}

DriftField::DriftField(DriftMeta meta, EvalFn eval, double sup_bound) {
    meta.validate();
    if (!eval) {
        throw ArgumentError("drift evaluator is empty");
    }
    impl_ = std::make_shared<const Impl>(Impl{std::move(meta), std::move(eval), std::nullopt, sup_bound});
}

DriftField::DriftField(DriftMeta meta, SeparableForm form) {
    meta.validate();
    if (!form.time_factor || !form.profile) {
        throw ArgumentError("separable drift needs both a time factor and a profile");
    }
    auto g = form.time_factor;
    auto h = form.profile;
    EvalFn eval = [g, h](double t, std::span<const double> x, std::span<double> out) {
        h(x, out);
        const double factor = g(t);
        for (double& v : out) {
            v *= factor;
        }
    };
    double bound = kInf;
    if (meta.sing_exponent == 0.0 && form.profile_sup == 0.0) {
        bound = 0.0;
    }
    impl_ = std::make_shared<const Impl>(Impl{std::move(meta), std::move(eval), std::move(form), bound});
}

const DriftMeta& DriftField::meta() const noexcept { return impl_->meta; }

int DriftField::dim() const noexcept { return impl_->meta.dim; }

void DriftField::eval(double t, std::span<const double> x, std::span<double> out) const { impl_->eval(t, x, out); }

double DriftField::eval1(double t, double x) const {
    if (impl_->meta.dim == 1) {
        double out = 0.0;
        impl_->eval(t, std::span<const double>(&x, 1), std::span<double>(&out, 1));
        return out;
    }
    std::vector<double> point(static_cast<std::size_t>(impl_->meta.dim), 0.0), out(point.size());
    point[0] = x;
    impl_->eval(t, point, out);
    return out[0];
}

const SeparableForm* DriftField::separable() const noexcept { return impl_->form ? &*impl_->form : nullptr; }

double DriftField::sup_bound() const noexcept { return impl_->sup_bound; }

DriftField DriftField::with_norm(double norm) const {
    DriftField copy = *this;
    copy.norm_ = norm;
    return copy;
}

std::optional<double> DriftField::cached_norm() const noexcept { return norm_; }

double counterexample_profile(double x, double beta, double theta0) {
    const double ax = std::abs(x);
    const double sign = x < 0.0 ? -1.0 : 1.0;
    if (ax <= theta0) {
        return sign * std::pow(ax, beta);
    }
    const double level = std::pow(theta0, beta);
    if (ax >= 2.0 * theta0) {
        return sign * 2.0 * level;
    }
    // Hermite data: value theta0^beta, slope beta theta0^{beta-1} at theta0;
    // value 2 theta0^beta, slope 0 at 2 theta0. Slope ratio beta <= 3 keeps it
    // monotone (Fritsch-Carlson).
    const double s = (ax - theta0) / theta0;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    return sign * (h00 * level + h10 * beta * level + h01 * 2.0 * level);
}

DriftField time_singular_drift(double p_hat, double beta, double theta0, double p, double horizon) {
    if (!(p_hat > 1.0)) {
        throw ParameterError("p_hat must exceed 1 so that t^{-1/p_hat} is integrable");
    }
    if (!(theta0 > 0.0)) {
        throw ParameterError("theta0 must be positive");
    }
    DriftMeta meta{p, beta, 1.0 / p_hat, horizon, 1, ""};
    std::ostringstream label;
    label.precision(17);
    label << "time-singular:" << p_hat << "," << beta << "," << theta0;
    meta.label = label.str();
    const double a = 1.0 / p_hat;
    SeparableForm form;
    form.time_factor = [a](double t) { return std::pow(t, -a); };
    form.time_power = a;
    form.profile = [beta, theta0](std::span<const double> x, std::span<double> out) {
        out[0] = counterexample_profile(x[0], beta, theta0);
    };
    form.profile_sup = 2.0 * std::pow(theta0, beta);
    form.kinks = {-2.0 * theta0, -theta0, 0.0, theta0, 2.0 * theta0};
    return DriftField(std::move(meta), std::move(form));
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& id) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string token = text.substr(start, end - start);
        double value = 0.0;
        const auto* first = token.data();
        const auto* last = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (token.empty() || ec != std::errc() || ptr != last) {
            throw ParameterError("malformed number '" + token + "' in drift id '" + id + "'");
        }
        out.push_back(value);
        start = end + 1;
    }
    return out;
}

SeparableForm time_constant(ProfileFn profile, double sup) {
    SeparableForm form;
    form.time_factor = [](double) { return 1.0; };
    form.time_power = 0.0;
    form.profile = std::move(profile);
    form.profile_sup = sup;
    return form;
}

} // namespace

DriftField make_drift(const std::string& id, int dim, const LibraryOptions& options) {
    if (dim < 1) {
        throw ParameterError("drift dimension must be >= 1");
    }
    const auto colon = id.find(':');
    const std::string name = id.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : id.substr(colon + 1);
    const double horizon = options.horizon;
    DriftMeta meta{kInf, 0.5, 0.0, horizon, dim, id};

    auto require_args = [&](bool wanted) {
        if (wanted == args.empty()) {
            throw ParameterError(wanted ? "drift id '" + id + "' needs parameters"
                                        : "drift id '" + id + "' takes no parameters");
        }
    };

    if (name == "zero") {
        require_args(false);
        auto profile = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
        return DriftField(meta, time_constant(profile, 0.0));
    }
    if (name == "constant") {
        require_args(true);
        auto c = parse_numbers(args, id);
        if (c.size() == 1) {
            c.assign(static_cast<std::size_t>(dim), c[0]);
        }
        if (c.size() != static_cast<std::size_t>(dim)) {
            throw ParameterError("constant drift needs 1 or dim values");
        }
        double norm = 0.0;
        for (double v : c) {
            norm += v * v;
        }
        auto profile = [c](std::span<const double>, std::span<double> out) { std::copy(c.begin(), c.end(), out.begin()); };
        return DriftField(meta, time_constant(profile, std::sqrt(norm)));
    }
    if (name == "sin") {
        require_args(false);
        auto profile = [](std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            out[0] = std::sin(x[0]);
        };
        return DriftField(meta, time_constant(profile, 1.0));
    }
    if (name == "linear") {
        require_args(true);
        const auto k = parse_numbers(args, id);
        if (k.size() != 1) {
            throw ParameterError("linear drift takes one coefficient");
        }
        auto profile = [slope = k[0]](std::span<const double> x, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = slope * x[i];
            }
        };
        return DriftField(meta, time_constant(profile, k[0] == 0.0 ? 0.0 : kInf));
    }
    if (name == "time-singular" || name == "counterexample") {
        if (dim != 1) {
            throw ParameterError("drift '" + name + "' is one-dimensional");
        }
        double p_hat = 2.0, beta = 0.5, theta0 = 1.0;
        if (name == "time-singular") {
            require_args(true);
            const auto v = parse_numbers(args, id);
            if (v.size() != 3) {
                throw ParameterError("time-singular drift takes p_hat,beta,theta0");
            }
            p_hat = v[0];
            beta = v[1];
            theta0 = v[2];
        } else {
            require_args(false);
        }
        // Declared p halfway between 1 and p_hat keeps the norm finite.
        auto field = time_singular_drift(p_hat, beta, theta0, 0.5 * (1.0 + p_hat), horizon);
        return field;
    }
    throw ArgumentError("unknown drift id '" + id +
                        "' (expected zero, constant:c, sin, linear:k, time-singular:p_hat,beta,theta0, counterexample)");
}

} // namespace stablesde::drift
