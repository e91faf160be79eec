#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace railco2 {

enum class ErrorCode {
    Io,
    MalformedRow,
    DanglingReference,
    DuplicateKey,
    NegativeRate,
    InvalidConfig,
    EmptyStationSet,
    TooFewReadings,
    NonMonotone,
    EmptyPanel,
    NonPositiveWeight,
    MissingCurbWeight,
    NoFactorAvailable,
    NegativeVmt,
    EmptyInput,
    InsufficientSample,
    NonPositiveDf,
    DegenerateVariance,
    RankDeficient,
    TooFewRows,
    AllRowsDropped,
    EmptyGroup,
    NegativeInput,
    ZeroOperational,
    ScaleBelowOne,
    NegativeTrips,
    InfeasibleTarget,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the toolkit carries a machine-checkable code; the
// message is what the CLI prints verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    // Message without the code prefix.
    const std::string &detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace railco2
