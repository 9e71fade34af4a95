#pragma once

#include "adl/core.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace adl {

/// Polynomial observable in (q, p, friction).
///
/// Text form: sums of products, e.g. "q", "q^2", "p^2 - 1/beta", "q*p",
/// "xi^2", "q[3]" (coordinate 3), "2*q^2 + 1". "xi" and "zeta" both name
/// the friction slot of the state. "beta" is substituted at parse time.
/// Short aliases q2, p2, xi2, qp are accepted.
class Observable {
public:
    enum class Variable { Q, P, Friction };

    struct Factor {
        Variable var;
        std::size_t coord = 0;
        int power = 1;
    };

    struct Term {
        double coeff = 1.0;
        std::vector<Factor> factors;
    };

    /// Throws ParameterError on malformed text.
    static Observable parse(std::string_view text, double beta = 1.0);

    const std::string& name() const noexcept { return name_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }

    /// Largest coordinate index referenced, +1 (0 for constants).
    std::size_t min_dimension() const noexcept;

    /// Highest power of `var` (coordinate 0) in any term.
    int degree(Variable var) const noexcept;

    double operator()(const SamplerState& s) const noexcept;

private:
    std::string name_;
    std::vector<Term> terms_;
};

std::vector<Observable> parse_observables(const std::vector<std::string>& names, double beta);

} // namespace adl
