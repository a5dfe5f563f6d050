#pragma once

#include "pdcadd/scenario.hpp"

#include <string>

namespace test {

inline std::string config_path(const std::string& name) {
    return std::string(PDCADD_SOURCE_DIR) + "/configs/" + name + ".yaml";
}

inline pdcadd::ScenarioConfig reference_config(const std::string& name) {
    return pdcadd::load_scenario(config_path(name));
}

inline pdcadd::PdcConfig reference_pdc(const std::string& name) {
    return pdcadd::resolve_pdc(*reference_config(name).pdc);
}

inline pdcadd::JsaGrid reference_jsa(const std::string& name, pdcadd::PmModel model = pdcadd::PmModel::sinc,
                                     int n = 512) {
    const auto cfg = reference_config(name);
    const auto pc = pdcadd::resolve_pdc(*cfg.pdc);
    return pdcadd::build_jsa(pc, pdcadd::make_grid(pc, n, n, cfg.grid.span_sigma), model);
}

}  // namespace test
