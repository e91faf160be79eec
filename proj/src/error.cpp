#include "railco2/error.hpp"

namespace railco2 {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyStationSet: return "EmptyStationSet";
    case ErrorCode::TooFewReadings: return "TooFewReadings";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::MissingCurbWeight: return "MissingCurbWeight";
    case ErrorCode::NoFactorAvailable: return "NoFactorAvailable";
    case ErrorCode::NegativeVmt: return "NegativeVmt";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientSample: return "InsufficientSample";
    case ErrorCode::NonPositiveDf: return "NonPositiveDf";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::AllRowsDropped: return "AllRowsDropped";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::ZeroOperational: return "ZeroOperational";
    case ErrorCode::ScaleBelowOne: return "ScaleBelowOne";
    case ErrorCode::NegativeTrips: return "NegativeTrips";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    }
    return "Unknown";
}

} // namespace railco2
