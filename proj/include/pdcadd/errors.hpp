#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdcadd {

enum class Stage { dispersion, pm, jsa, schmidt, fock, config };

enum class ErrorCode {
    unknown_crystal,
    out_of_validity_range,
    numerical_derivative_unstable,
    invalid_model,
    invalid_config,
    no_phase_matching,
    multiple_solutions,
    no_gvm_angle,
    grid_too_coarse,
    empty_filter,
    degenerate_grid,
    all_zero,
    not_collinear,
    degenerate_ratio,
    axis_mismatch,
    truncation_too_small,
    truncation_overflow,
    mode_count_mismatch,
    k_out_of_range,
    io,
};

std::string_view stage_name(Stage s);
std::string_view code_name(ErrorCode c);

// Input problems map to CLI exit code 2, everything else to 3.
bool is_validation(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(Stage stage, ErrorCode code, const std::string& detail);

    Stage stage() const { return stage_; }
    ErrorCode code() const { return code_; }
    const std::string& detail() const { return detail_; }

private:
    Stage stage_;
    ErrorCode code_;
    std::string detail_;
};

}  // namespace pdcadd
