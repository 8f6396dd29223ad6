#pragma once

#include <stdexcept>
#include <string>

namespace diffcond {

enum class errc {
    division_by_zero,
    incompatible_shift,
    precision_exhausted,
    non_unit_denominator,
    uncertified_leading_term,
    zero_element,
    uncertified_value,
    lead_not_s_free,
    radius_out_of_range,
    no_convergence,
    not_eventually_linear,
    context_mismatch,
    unknown_decomposition,
    not_reduced,
    unsupported_template,
    singular_a,
    no_contraction,
    parse_error,
};

inline const char* errc_name(errc e) {
    switch (e) {
    case errc::division_by_zero: return "DivisionByZero";
    case errc::incompatible_shift: return "IncompatibleShift";
    case errc::precision_exhausted: return "PrecisionExhausted";
    case errc::non_unit_denominator: return "NonUnitDenominator";
    case errc::uncertified_leading_term: return "UncertifiedLeadingTerm";
    case errc::zero_element: return "ZeroElement";
    case errc::uncertified_value: return "UncertifiedValue";
    case errc::lead_not_s_free: return "LeadNotSFree";
    case errc::radius_out_of_range: return "RadiusOutOfRange";
    case errc::no_convergence: return "NoConvergence";
    case errc::not_eventually_linear: return "NotEventuallyLinear";
    case errc::context_mismatch: return "ContextMismatch";
    case errc::unknown_decomposition: return "UnknownDecomposition";
    case errc::not_reduced: return "NotReduced";
    case errc::unsupported_template: return "UnsupportedTemplate";
    case errc::singular_a: return "SingularA";
    case errc::no_contraction: return "NoContraction";
    case errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

}  // namespace diffcond
