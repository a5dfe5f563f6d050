#include "pdcadd/errors.hpp"
#include "pdcadd/scenario.hpp"
#include "pdcadd/units.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pdcadd;

namespace {

struct Common {
    std::string config;
    std::string crystal_data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string model;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "scenario YAML");
    if (needs_config) opt->required();
    app->add_option("--crystal-data", c.crystal_data, "crystal coefficient YAML (default: built-in)");
    app->add_option("--out", c.out, "output directory (default: the config's output_dir)");
    app->add_option("--seed", c.seed, "RNG seed override");
    app->add_option("--model", c.model, "phasematching model")->check(CLI::IsMember({"sinc", "gaussian"}));
}

const CrystalCatalog& catalog_for(const Common& c) {
    static std::optional<CrystalCatalog> custom;
    if (c.crystal_data.empty()) return CrystalCatalog::builtin();
    if (!custom) custom = CrystalCatalog::from_file(c.crystal_data);
    return *custom;
}

ScenarioConfig config_for(const Common& c) {
    ScenarioConfig cfg = load_scenario(c.config);
    if (!c.model.empty()) cfg.model = parse_pm_model(c.model);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

PdcConfig pdc_for(const ScenarioConfig& cfg, const Common& c) {
    if (!cfg.pdc) throw Error(Stage::config, ErrorCode::invalid_config, "scenario '" + cfg.name + "' has no crystal section");
    return resolve_pdc(*cfg.pdc, catalog_for(c));
}

fs::path out_dir(const std::string& dir) {
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(Stage::config, ErrorCode::io, "cannot write '" + p.string() + "'");
    out << text;
    std::cerr << "wrote " << p.string() << '\n';
}

FrequencyGrid grid_for(const ScenarioConfig& cfg, const PdcConfig& pc) {
    return make_grid(pc, cfg.grid.n_signal, cfg.grid.n_idler, cfg.grid.span_sigma);
}

int cmd_gvm_scan(const Common& c, const std::string& crystal, const std::string& type, double from, double to, int count) {
    std::string name = crystal;
    PdcType t = parse_pdc_type(type);
    std::optional<PolarizationRoles> roles;
    SweepSpec sweep{from, to, count};
    std::string dir = c.out;
    if (!c.config.empty()) {
        const auto cfg = config_for(c);
        if (!cfg.pdc) throw Error(Stage::config, ErrorCode::invalid_config, "gvm-scan needs a crystal section");
        name = cfg.pdc->crystal;
        t = cfg.pdc->type;
        roles = cfg.pdc->roles;
        if (cfg.gvm_scan_deg) sweep = *cfg.gvm_scan_deg;
        dir = cfg.output_dir;
    }
    if (name.empty()) throw Error(Stage::config, ErrorCode::invalid_config, "gvm-scan needs --config or --crystal");
    if (sweep.count < 1) throw Error(Stage::config, ErrorCode::invalid_config, "--count must be >= 1");
    const CrystalModel& cm = catalog_for(c).get(name);
    std::vector<double> angles;
    for (double a : sweep.values()) angles.push_back(deg_to_rad(a));
    const auto rows = gvm_scan(cm, t, angles, roles.value_or(default_roles(cm, t)));
    const std::string csv = gvm_scan_csv(rows);
    if (dir.empty())
        std::cout << csv;
    else
        write_file(out_dir(dir) / "gvm_scan.csv", csv);
    return 0;
}

int cmd_table(const Common& c, const std::string& which) {
    const Table t = (which == "I" || which == "1") ? Table::table_i : Table::table_ii;
    const std::string csv = table_csv(run_table(t, catalog_for(c)));
    if (c.out.empty())
        std::cout << csv;
    else
        write_file(out_dir(c.out) / (t == Table::table_i ? "table_I.csv" : "table_II.csv"), csv);
    return 0;
}

int cmd_jsa(const Common& c) {
    const auto cfg = config_for(c);
    const auto pc = pdc_for(cfg, c);
    const auto grid = grid_for(cfg, pc);
    JsaGrid jsa = build_jsa(pc, grid, cfg.model);
    if (cfg.filter) jsa = apply_idler_filter(jsa, *cfg.filter);
    const auto dir = out_dir(cfg.output_dir);
    write_jsa_csv((dir / "jsa.csv").string(), jsa);
    write_phasematching_csv((dir / "phasematching.csv").string(), pc, grid, cfg.model);
    const nlohmann::json meta = {{"config", serialize_scenario(cfg)},
                                 {"model", std::string(to_string(cfg.model))},
                                 {"norm", jsa.norm()},
                                 {"retained_fraction", jsa.retained_fraction},
                                 {"n_signal", grid.n()},
                                 {"n_idler", grid.m()}};
    write_file(dir / "jsa_meta.json", meta.dump(2) + "\n");
    return 0;
}

int cmd_schmidt(const Common& c) {
    const auto cfg = config_for(c);
    const auto pc = pdc_for(cfg, c);
    const auto grid = grid_for(cfg, pc);
    JsaGrid jsa = build_jsa(pc, grid, cfg.model);
    if (cfg.filter) jsa = apply_idler_filter(jsa, *cfg.filter);
    const auto d = decompose(jsa);
    const auto dir = out_dir(cfg.output_dir);
    std::vector<double> ev(d.eigenvalues.begin(), d.eigenvalues.begin() + std::min<size_t>(10, d.eigenvalues.size()));
    const nlohmann::json j = {{"model", std::string(to_string(cfg.model))},
                              {"K", d.K},
                              {"eigenvalues", ev},
                              {"overlap_first_mode_vs_pump", mode_overlap(signal_mode(d, 0), pump_reference_mode(pc, grid))}};
    write_file(dir / "schmidt.json", j.dump(2) + "\n");
    for (int r = 0; r < std::min(4, d.rank()); ++r) {
        write_mode_csv((dir / ("signal_mode_" + std::to_string(r) + ".csv")).string(), signal_mode(d, r));
        write_mode_csv((dir / ("idler_mode_" + std::to_string(r) + ".csv")).string(), idler_mode(d, r));
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_filter_sweep(const Common& c, std::vector<double> widths) {
    const auto cfg = config_for(c);
    const auto pc = pdc_for(cfg, c);
    if (widths.empty()) widths = cfg.filter_sweep_nm;
    if (widths.empty() && cfg.filter) widths = {cfg.filter->width_nm};
    if (widths.empty()) throw Error(Stage::config, ErrorCode::invalid_config, "no filter widths given");
    const JsaGrid jsa = build_jsa(pc, grid_for(cfg, pc), cfg.model);
    std::ostringstream os;
    os.precision(12);
    os << "width_nm,K,retained_fraction\n";
    for (double w : widths) {
        FilterSpec f;
        f.width_nm = w;
        if (cfg.filter) f.center_nm = cfg.filter->center_nm;
        const JsaGrid g = apply_idler_filter(jsa, f);
        os << w << ',' << decompose(g, 1e-12, false).K << ',' << g.retained_fraction << '\n';
    }
    std::cout << os.str();
    write_file(out_dir(cfg.output_dir) / "filter_sweep.csv", os.str());
    return 0;
}

int cmd_purity(const Common& c) {
    ScenarioConfig cfg;
    if (!c.config.empty()) cfg = config_for(c);
    if (!cfg.purity) cfg.purity = PuritySpec{};
    if (c.config.empty()) {
        if (c.seed) cfg.seed = *c.seed;
        cfg.output_dir = c.out.empty() ? "out" : c.out;
    }
    const auto& ps = *cfg.purity;
    const auto ks = ps.k.values(), ns = ps.nbar.values();
    const auto dir = out_dir(cfg.output_dir);
    write_file(dir / "purity.csv", purity_csv(purity_surface(ks, ns)));
    const auto rep = verify_nonsaturation(ps.trials, ps.modes, ps.truncation, cfg.seed);
    write_file(dir / "nonsaturation.json", to_json(rep).dump(2) + "\n");
    std::cout << to_json(rep).dump(2) << '\n';
    return 0;
}

int cmd_run(const Common& c, bool no_jsa_csv) {
    const auto cfg = config_for(c);
    RunOptions opt;
    opt.jsa_csv = !no_jsa_csv;
    const auto rep = run_scenario(cfg, catalog_for(c), opt);
    std::cout << rep.to_json().dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pdcadd: spectral simulation of heralded photon addition"};
    app.require_subcommand(1);

    Common c;
    std::string crystal, type = "II", which = "I";
    double from = 0.0, to = 0.0;
    int count = 1;
    std::vector<double> widths;
    bool no_jsa_csv = false;

    auto* scan = app.add_subcommand("gvm-scan", "GVM wavelength and angle versus signal angle");
    add_common(scan, c, false);
    scan->add_option("--crystal", crystal, "crystal name (when no config is given)");
    scan->add_option("--type", type, "I or II");
    scan->add_option("--from", from, "first signal angle, deg");
    scan->add_option("--to", to, "last signal angle, deg");
    scan->add_option("--count", count, "number of angles");

    auto* table = app.add_subcommand("table", "collinear Type-II or degenerate Type-I GVM table");
    add_common(table, c, false);
    table->add_option("--which", which, "I (Type-II) or II (Type-I)")->check(CLI::IsMember({"I", "II", "1", "2"}));

    auto* jsa = app.add_subcommand("jsa", "joint spectral amplitude grid");
    add_common(jsa, c, true);
    auto* schmidt = app.add_subcommand("schmidt", "Schmidt decomposition and mode functions");
    add_common(schmidt, c, true);
    auto* sweep = app.add_subcommand("filter-sweep", "K versus idler filter width");
    add_common(sweep, c, true);
    sweep->add_option("--width", widths, "filter widths, nm");
    auto* purity = app.add_subcommand("purity", "two-mode purity surface and nonsaturation check");
    add_common(purity, c, false);
    auto* run = app.add_subcommand("run", "full scenario with report and manifest");
    add_common(run, c, true);
    run->add_flag("--no-jsa-csv", no_jsa_csv, "skip the full-grid CSV dumps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*scan) {
            if (c.config.empty() && (crystal.empty() || count < 1))
                throw Error(Stage::config, ErrorCode::invalid_config, "gvm-scan needs --config or --crystal/--from/--to/--count");
            return cmd_gvm_scan(c, crystal, type, from, to, count);
        }
        if (*table) return cmd_table(c, which);
        if (*jsa) return cmd_jsa(c);
        if (*schmidt) return cmd_schmidt(c);
        if (*sweep) return cmd_filter_sweep(c, widths);
        if (*purity) return cmd_purity(c);
        if (*run) return cmd_run(c, no_jsa_csv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_validation(e.code()) ? 2 : 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: [config] Io: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
