#include "pdcadd/errors.hpp"

namespace pdcadd {

std::string_view stage_name(Stage s) {
    switch (s) {
    case Stage::dispersion: return "dispersion";
    case Stage::pm: return "pm";
    case Stage::jsa: return "jsa";
    case Stage::schmidt: return "schmidt";
    case Stage::fock: return "fock";
    case Stage::config: return "config";
    }
    return "?";
}

std::string_view code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::unknown_crystal: return "UnknownCrystal";
    case ErrorCode::out_of_validity_range: return "OutOfValidityRange";
    case ErrorCode::numerical_derivative_unstable: return "NumericalDerivativeUnstable";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::no_phase_matching: return "NoPhaseMatching";
    case ErrorCode::multiple_solutions: return "MultipleSolutions";
    case ErrorCode::no_gvm_angle: return "NoGvmAngle";
    case ErrorCode::grid_too_coarse: return "GridTooCoarse";
    case ErrorCode::empty_filter: return "EmptyFilter";
    case ErrorCode::degenerate_grid: return "DegenerateGrid";
    case ErrorCode::all_zero: return "AllZero";
    case ErrorCode::not_collinear: return "NotCollinear";
    case ErrorCode::degenerate_ratio: return "DegenerateRatio";
    case ErrorCode::axis_mismatch: return "AxisMismatch";
    case ErrorCode::truncation_too_small: return "TruncationTooSmall";
    case ErrorCode::truncation_overflow: return "TruncationOverflow";
    case ErrorCode::mode_count_mismatch: return "ModeCountMismatch";
    case ErrorCode::k_out_of_range: return "KOutOfRange";
    case ErrorCode::io: return "IoError";
    }
    return "?";
}

bool is_validation(ErrorCode c) {
    switch (c) {
    case ErrorCode::unknown_crystal:
    case ErrorCode::out_of_validity_range:
    case ErrorCode::invalid_model:
    case ErrorCode::invalid_config:
    case ErrorCode::not_collinear:
    case ErrorCode::axis_mismatch:
    case ErrorCode::mode_count_mismatch:
    case ErrorCode::k_out_of_range:
    case ErrorCode::empty_filter:
    case ErrorCode::io:
        return true;
    default:
        return false;
    }
}

Error::Error(Stage stage, ErrorCode code, const std::string& detail)
    : std::runtime_error("[" + std::string(stage_name(stage)) + "] " + std::string(code_name(code)) + ": " + detail),
      stage_(stage), code_(code), detail_(detail) {}

}  // namespace pdcadd
