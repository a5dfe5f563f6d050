#pragma once

#include "pdcadd/fock.hpp"
#include "pdcadd/jsa.hpp"
#include "pdcadd/phase_matching.hpp"
#include "pdcadd/schmidt.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdcadd {

struct GridSpec {
    int n_signal = 512;
    int n_idler = 512;
    double span_sigma = 5.0;

    bool operator==(const GridSpec&) const = default;
};

struct SweepSpec {
    double from = 0.0;
    double to = 0.0;
    int count = 0;

    std::vector<double> values() const;
    bool operator==(const SweepSpec&) const = default;
};

struct PuritySpec {
    SweepSpec k{1.0, 2.0, 20};
    SweepSpec nbar{0.0, 2.0, 20};
    int trials = 100;
    int modes = 2;
    int truncation = 10;

    bool operator==(const PuritySpec&) const = default;
};

struct ScenarioConfig {
    std::string name;
    std::optional<PdcParams> pdc;
    GridSpec grid;
    PmModel model = PmModel::sinc;
    std::optional<FilterSpec> filter;
    std::vector<double> filter_sweep_nm;
    std::optional<SweepSpec> gvm_scan_deg;
    std::optional<PuritySpec> purity;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_scenario(const std::string& yaml_text);
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& config);

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct ModelResult {
    PmModel model = PmModel::sinc;
    double K = 0.0;
    std::vector<double> eigenvalues;  // leading ten
    double overlap_first_mode = 0.0;  // |<phi_1|alpha_p>|^2
    std::optional<double> K_filtered;
    std::optional<double> retained_fraction;
    JsaMoments moments;
};

struct SweepRow {
    double width_nm = 0.0;
    double K = 0.0;
    double retained_fraction = 0.0;
};

struct ScenarioReport {
    std::string name;
    std::optional<PdcConfig> pdc;
    std::optional<GvmSolution> gvm;  // at the config's signal angle
    std::optional<RCoefficients> r;
    std::optional<double> K_analytic;
    std::optional<double> witness;
    std::vector<ModelResult> models;  // configured model first
    std::vector<SweepRow> filter_sweep;
    std::vector<GvmSolution> gvm_scan;
    std::optional<NonsaturationReport> nonsaturation;
    std::optional<double> purity_min_at_k11;
    std::vector<ManifestEntry> manifest;

    nlohmann::json to_json() const;
};

struct RunOptions {
    bool write_files = true;
    bool jsa_csv = true;  // the full grid dumps are large
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<PmModel> model;
};

ScenarioReport run_scenario(const ScenarioConfig& config, const CrystalCatalog& catalog = CrystalCatalog::builtin(),
                            const RunOptions& options = {});

enum class Table { table_i, table_ii };

struct TableRow {
    std::string crystal;
    GvmSolution solution;
};

std::vector<TableRow> run_table(Table which, const CrystalCatalog& catalog = CrystalCatalog::builtin());
std::string table_csv(const std::vector<TableRow>& rows);

// CSV writers shared by the CLI and run_scenario
std::string gvm_scan_csv(const std::vector<GvmSolution>& rows);
void write_jsa_csv(const std::string& path, const JsaGrid& jsa);
// phasematching function alone on the JSA grid, same columns as the JSA dump
void write_phasematching_csv(const std::string& path, const PdcConfig& config, const FrequencyGrid& grid, PmModel model);
void write_mode_csv(const std::string& path, const ModeFunction& mode);
std::string purity_csv(const PuritySurface& s);
nlohmann::json to_json(const NonsaturationReport& r);
nlohmann::json to_json(const GvmSolution& s);

std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& data);

}  // namespace pdcadd
