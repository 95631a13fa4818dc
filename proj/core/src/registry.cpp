#include "gcalc/registry.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include "gcalc/errors.hpp"

namespace gcalc {

namespace {

std::vector<double> parse_args(const std::string& spec, const std::string& args,
                               std::size_t expected) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= args.size()) {
        const std::size_t comma = args.find(',', pos);
        const std::string token =
            args.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw ValidationError("registry: malformed number '" + token + "' in '" + spec + "'");
        out.push_back(value);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != expected)
        throw ValidationError("registry: '" + spec + "' expects " + std::to_string(expected) +
                              " argument(s), got " + std::to_string(out.size()));
    return out;
}

}  // namespace

NamedCoefficient make_coefficient(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (head == "zero") {
        if (!args.empty()) throw ValidationError("registry: 'zero' takes no arguments");
        return {spec, [](double, double) { return 0.0; }, 0.0};
    }
    if (head == "constant") {
        const auto a = parse_args(spec, args, 1);
        const double c = a[0];
        return {spec, [c](double, double) { return c; }, 0.0};
    }
    if (head == "linear") {
        const auto a = parse_args(spec, args, 2);
        const double slope = a[0], offset = a[1];
        return {spec, [slope, offset](double, double x) { return slope * x + offset; },
                std::abs(slope)};
    }
    if (head == "sin") {
        if (!args.empty()) throw ValidationError("registry: 'sin' takes no arguments");
        return {spec, [](double, double x) { return std::sin(x); }, 1.0};
    }
    throw ValidationError("registry: unknown coefficient '" + spec + "'");
}

std::function<NamedCoefficient(double)> make_coefficient_family(const std::string& spec) {
    const std::string prefix = "additive-eps:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string base_spec = spec.substr(prefix.size());
        const NamedCoefficient base = make_coefficient(base_spec);
        return [base, spec](double eps) {
            NamedCoefficient shifted;
            shifted.name = spec;
            shifted.fn = [fn = base.fn, eps](double t, double x) { return fn(t, x) + eps; };
            shifted.lipschitz = base.lipschitz;
            return shifted;
        };
    }
    make_coefficient(spec);  // validate eagerly; same coefficient for every eps
    return [spec](double) { return make_coefficient(spec); };
}

NamedFunctional make_functional(const std::string& spec) {
    if (spec == "bt") return {spec, [](double x) { return x; }, GrowthBound{1.0, 0}};
    if (spec == "bt_squared")
        return {spec, [](double x) { return x * x; }, GrowthBound{1.0, 1}};
    if (spec == "bt_call")
        return {spec, [](double x) { return x > 0.0 ? x : 0.0; }, GrowthBound{1.0, 0}};
    if (spec == "bt_abs") return {spec, [](double x) { return std::abs(x); }, GrowthBound{1.0, 0}};
    throw ValidationError("registry: unknown functional '" + spec + "'");
}

}  // namespace gcalc
