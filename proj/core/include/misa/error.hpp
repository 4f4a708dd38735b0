#pragma once

#include <stdexcept>
#include <string>

namespace misa {

// Shape disagreement between operands.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid user-facing configuration (rates, alpha, fold counts, ...).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Precondition of an internal API violated by the caller.
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Iterative procedure failed to converge or produced non-finite values.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset or schema could not be read.
class load_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wraps a failure inside one stage of an experiment run.
class stage_error : public std::runtime_error {
public:
    stage_error(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace misa
