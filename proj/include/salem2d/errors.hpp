#pragma once

#include <stdexcept>
#include <string>

namespace salem2d {

// Exit-code taxonomy used by the CLI: usage errors map to 2, numeric and
// verification failures to 3, search failures to 4.
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct arithmetic_overflow : numeric_error {
    using numeric_error::numeric_error;
};

struct truncation_insufficient : numeric_error {
    double tail_bound = 0.0;
    double tolerance  = 0.0;
    truncation_insufficient(const std::string& what, double tail, double tol)
        : numeric_error(what), tail_bound(tail), tolerance(tol) {}
};

struct verification_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct search_failure : std::runtime_error {
    double best_margin = 0.0;   // best (smallest) criterion ratio seen before giving up
    double best_candidate = 0.0;
    search_failure(const std::string& what, double margin, double candidate)
        : std::runtime_error(what), best_margin(margin), best_candidate(candidate) {}
};

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_numeric = 3,
    exit_search = 4,
};

} // namespace salem2d
