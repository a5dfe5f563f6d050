#include "pdcadd/scenario.hpp"

#include "pdcadd/errors.hpp"
#include "pdcadd/units.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace pdcadd {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(Stage::config, ErrorCode::invalid_config, what); }

void only_keys(const YAML::Node& n, std::initializer_list<const char*> keys, const std::string& where) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : n) {
        const auto k = kv.first.as<std::string>();
        if (!allowed.count(k)) config_error("unknown key '" + k + "' in " + where);
    }
}

template <class T>
T need(const YAML::Node& n, const char* key) {
    if (!n[key]) config_error(std::string("missing key '") + key + "'");
    try {
        return n[key].as<T>();
    } catch (const YAML::Exception&) {
        config_error(std::string("key '") + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const YAML::Node& n, const char* key, T fallback) {
    if (!n[key]) return fallback;
    return need<T>(n, key);
}

SweepSpec parse_sweep(const YAML::Node& n, const std::string& where) {
    only_keys(n, {"from", "to", "count"}, where);
    SweepSpec s{need<double>(n, "from"), need<double>(n, "to"), need<int>(n, "count")};
    if (s.count < 1) config_error(where + ".count must be >= 1");
    return s;
}

void emit_sweep(YAML::Emitter& e, const SweepSpec& s) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << s.from << YAML::Key << "to"
      << YAML::Value << s.to << YAML::Key << "count" << YAML::Value << s.count << YAML::EndMap;
}

std::string pol_letter(Polarization p) { return p == Polarization::ordinary ? "o" : "e"; }

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string status_name(const GvmSolution& s) { return s.found() ? "found" : "no_solution"; }

std::vector<double> leading(const std::vector<double>& v, size_t n) {
    return {v.begin(), v.begin() + static_cast<long>(std::min(n, v.size()))};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(Stage::config, ErrorCode::io, "cannot write '" + p.string() + "'");
    out << text;
}

}  // namespace

std::vector<double> SweepSpec::values() const {
    std::vector<double> out;
    for (int j = 0; j < count; ++j) out.push_back(count == 1 ? from : from + (to - from) * j / (count - 1));
    return out;
}

ScenarioConfig parse_scenario(const std::string& text) {
    YAML::Node n;
    try {
        n = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        config_error(std::string("config does not parse: ") + e.what());
    }
    if (!n.IsMap()) config_error("config must be a mapping");
    only_keys(n,
              {"name", "crystal", "pdc_type", "theta_s_deg", "pump_wavelength_nm", "pump_sigma_nm", "pump_order",
               "crystal_length_mm", "beam_waist_um", "cut_angle_deg", "transverse_scale", "roles", "grid", "model",
               "filter", "filter_sweep_nm", "gvm_scan_deg", "purity", "output_dir", "seed"},
              "scenario");
    ScenarioConfig c;
    c.name = need<std::string>(n, "name");
    if (n["crystal"]) {
        PdcParams p;
        p.crystal = need<std::string>(n, "crystal");
        p.type = parse_pdc_type(need<std::string>(n, "pdc_type"));
        p.theta_s_deg = get_or(n, "theta_s_deg", 0.0);
        p.pump_wavelength_nm = need<double>(n, "pump_wavelength_nm");
        p.pump_sigma_nm = need<double>(n, "pump_sigma_nm");
        p.pump_order = get_or(n, "pump_order", 0);
        p.crystal_length_mm = need<double>(n, "crystal_length_mm");
        if (n["beam_waist_um"]) p.beam_waist_um = need<double>(n, "beam_waist_um");
        if (n["cut_angle_deg"]) p.cut_angle_deg = need<double>(n, "cut_angle_deg");
        p.transverse_scale = get_or(n, "transverse_scale", 1.0);
        if (const auto r = n["roles"]) {
            only_keys(r, {"pump", "signal", "idler"}, "roles");
            p.roles = PolarizationRoles{parse_polarization(need<std::string>(r, "pump")),
                                        parse_polarization(need<std::string>(r, "signal")),
                                        parse_polarization(need<std::string>(r, "idler"))};
        }
        c.pdc = p;
    } else {
        for (const char* k : {"pdc_type", "pump_wavelength_nm", "pump_sigma_nm", "crystal_length_mm"})
            if (n[k]) config_error(std::string("'") + k + "' given without 'crystal'");
    }
    if (const auto g = n["grid"]) {
        only_keys(g, {"n_signal", "n_idler", "span_sigma"}, "grid");
        c.grid = {get_or(g, "n_signal", 512), get_or(g, "n_idler", 512), get_or(g, "span_sigma", 5.0)};
    }
    if (n["model"]) c.model = parse_pm_model(need<std::string>(n, "model"));
    if (const auto f = n["filter"]) {
        only_keys(f, {"width_nm", "center_nm"}, "filter");
        FilterSpec fs;
        fs.width_nm = need<double>(f, "width_nm");
        if (f["center_nm"]) fs.center_nm = need<double>(f, "center_nm");
        c.filter = fs;
    }
    if (n["filter_sweep_nm"]) c.filter_sweep_nm = need<std::vector<double>>(n, "filter_sweep_nm");
    if (n["gvm_scan_deg"]) c.gvm_scan_deg = parse_sweep(n["gvm_scan_deg"], "gvm_scan_deg");
    if (const auto p = n["purity"]) {
        only_keys(p, {"k", "nbar", "trials", "modes", "truncation"}, "purity");
        PuritySpec ps;
        if (p["k"]) ps.k = parse_sweep(p["k"], "purity.k");
        if (p["nbar"]) ps.nbar = parse_sweep(p["nbar"], "purity.nbar");
        ps.trials = get_or(p, "trials", ps.trials);
        ps.modes = get_or(p, "modes", ps.modes);
        ps.truncation = get_or(p, "truncation", ps.truncation);
        c.purity = ps;
    }
    c.output_dir = get_or<std::string>(n, "output_dir", c.output_dir);
    c.seed = get_or<std::uint64_t>(n, "seed", c.seed);
    if (!c.pdc && !c.purity) config_error("scenario '" + c.name + "' has neither a crystal nor a purity section");
    if (c.grid.n_signal < 16 || c.grid.n_idler < 16 || !(c.grid.span_sigma > 0.0))
        config_error("grid needs n_signal, n_idler >= 16 and span_sigma > 0");
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::config, ErrorCode::io, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << c.name;
    if (c.pdc) {
        const auto& p = *c.pdc;
        e << YAML::Key << "crystal" << YAML::Value << p.crystal;
        e << YAML::Key << "pdc_type" << YAML::Value << (p.type == PdcType::type_i ? "I" : "II");
        e << YAML::Key << "theta_s_deg" << YAML::Value << p.theta_s_deg;
        e << YAML::Key << "pump_wavelength_nm" << YAML::Value << p.pump_wavelength_nm;
        e << YAML::Key << "pump_sigma_nm" << YAML::Value << p.pump_sigma_nm;
        e << YAML::Key << "pump_order" << YAML::Value << p.pump_order;
        e << YAML::Key << "crystal_length_mm" << YAML::Value << p.crystal_length_mm;
        if (p.beam_waist_um) e << YAML::Key << "beam_waist_um" << YAML::Value << *p.beam_waist_um;
        if (p.cut_angle_deg) e << YAML::Key << "cut_angle_deg" << YAML::Value << *p.cut_angle_deg;
        e << YAML::Key << "transverse_scale" << YAML::Value << p.transverse_scale;
        if (p.roles) {
            e << YAML::Key << "roles" << YAML::Value << YAML::Flow << YAML::BeginMap;
            e << YAML::Key << "pump" << YAML::Value << pol_letter(p.roles->pump);
            e << YAML::Key << "signal" << YAML::Value << pol_letter(p.roles->signal);
            e << YAML::Key << "idler" << YAML::Value << pol_letter(p.roles->idler);
            e << YAML::EndMap;
        }
    }
    e << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "n_signal" << YAML::Value << c.grid.n_signal;
    e << YAML::Key << "n_idler" << YAML::Value << c.grid.n_idler;
    e << YAML::Key << "span_sigma" << YAML::Value << c.grid.span_sigma;
    e << YAML::EndMap;
    e << YAML::Key << "model" << YAML::Value << std::string(to_string(c.model));
    if (c.filter) {
        e << YAML::Key << "filter" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "width_nm" << YAML::Value << c.filter->width_nm;
        if (c.filter->center_nm) e << YAML::Key << "center_nm" << YAML::Value << *c.filter->center_nm;
        e << YAML::EndMap;
    }
    if (!c.filter_sweep_nm.empty())
        e << YAML::Key << "filter_sweep_nm" << YAML::Value << YAML::Flow << c.filter_sweep_nm;
    if (c.gvm_scan_deg) {
        e << YAML::Key << "gvm_scan_deg" << YAML::Value;
        emit_sweep(e, *c.gvm_scan_deg);
    }
    if (c.purity) {
        e << YAML::Key << "purity" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "k" << YAML::Value;
        emit_sweep(e, c.purity->k);
        e << YAML::Key << "nbar" << YAML::Value;
        emit_sweep(e, c.purity->nbar);
        e << YAML::Key << "trials" << YAML::Value << c.purity->trials;
        e << YAML::Key << "modes" << YAML::Value << c.purity->modes;
        e << YAML::Key << "truncation" << YAML::Value << c.purity->truncation;
        e << YAML::EndMap;
    }
    e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::config, ErrorCode::io, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

nlohmann::json to_json(const GvmSolution& s) {
    nlohmann::json j;
    j["status"] = status_name(s);
    j["theta_s_deg"] = rad_to_deg(s.theta_s);
    if (s.found()) {
        j["lambda_gvm_nm"] = s.lambda_gvm_nm;
        j["theta_gvm_deg"] = rad_to_deg(s.theta_gvm);
        j["theta_i_deg"] = rad_to_deg(s.theta_i);
        j["residual_pm"] = s.residual_pm;
        j["residual_gvm"] = s.residual_gvm;
    }
    return j;
}

nlohmann::json to_json(const NonsaturationReport& r) {
    return {{"trials", r.trials},
            {"modes", r.modes},
            {"truncation", r.truncation},
            {"seed", r.seed},
            {"min_purity_gap", r.min_purity_gap},
            {"max_purity", r.max_purity},
            {"min_cs_gap", r.min_cs_gap},
            {"min_cs_relative_gap", r.min_cs_relative_gap},
            {"max_formula_error", r.max_formula_error},
            {"all_mixed", r.all_mixed}};
}

std::string gvm_scan_csv(const std::vector<GvmSolution>& rows) {
    std::ostringstream os;
    os << "theta_s_deg,lambda_gvm_nm,theta_gvm_deg,residual_pm,residual_gvm,status\n";
    for (const auto& s : rows) {
        os << fmt(rad_to_deg(s.theta_s)) << ',';
        if (s.found())
            os << fmt(s.lambda_gvm_nm) << ',' << fmt(rad_to_deg(s.theta_gvm)) << ',' << fmt(s.residual_pm) << ','
               << fmt(s.residual_gvm);
        else
            os << ",,,";
        os << ',' << status_name(s) << '\n';
    }
    return os.str();
}

void write_jsa_csv(const std::string& path, const JsaGrid& jsa) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(Stage::jsa, ErrorCode::io, "cannot write '" + path + "'");
    std::fputs("omega_s_rad_s,omega_i_rad_s,re,im,abs2\n", f);
    for (int j = 0; j < jsa.grid.n(); ++j)
        for (int k = 0; k < jsa.grid.m(); ++k) {
            const auto z = jsa.amplitude(j, k);
            std::fprintf(f, "%.12e,%.12e,%.10e,%.10e,%.10e\n", jsa.grid.signal[j], jsa.grid.idler[k], z.real(), z.imag(),
                         std::norm(z));
        }
    std::fclose(f);
}

void write_phasematching_csv(const std::string& path, const PdcConfig& config, const FrequencyGrid& grid, PmModel model) {
    JsaGrid phi;
    phi.grid = grid;
    phi.amplitude.resize(grid.n(), grid.m());
    for (int j = 0; j < grid.n(); ++j)
        for (int k = 0; k < grid.m(); ++k)
            phi.amplitude(j, k) = phasematching_function(config, grid.signal[j], grid.idler[k], model);
    write_jsa_csv(path, phi);
}

void write_mode_csv(const std::string& path, const ModeFunction& mode) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(Stage::schmidt, ErrorCode::io, "cannot write '" + path + "'");
    std::fputs("omega_rad_s,re,im\n", f);
    for (size_t j = 0; j < mode.axis.size(); ++j)
        std::fprintf(f, "%.12e,%.10e,%.10e\n", mode.axis[j], mode.values[j].real(), mode.values[j].imag());
    std::fclose(f);
}

std::string purity_csv(const PuritySurface& s) {
    std::ostringstream os;
    os << "K,nbar,purity\n";
    for (size_t a = 0; a < s.k.size(); ++a)
        for (size_t b = 0; b < s.nbar.size(); ++b) os << fmt(s.k[a]) << ',' << fmt(s.nbar[b]) << ',' << fmt(s.at(a, b)) << '\n';
    return os.str();
}

std::vector<TableRow> run_table(Table which, const CrystalCatalog& catalog) {
    const std::vector<std::string> names = which == Table::table_i
                                               ? std::vector<std::string>{"KDP", "BBO", "LN", "BiBO", "KTP"}
                                               : std::vector<std::string>{"KDP", "BBO", "LN", "KTP"};
    const PdcType type = which == Table::table_i ? PdcType::type_ii : PdcType::type_i;
    std::vector<TableRow> rows(names.size());
    std::vector<CrystalModel> models;
    for (const auto& n : names) models.push_back(catalog.get(n));
    const long count = static_cast<long>(names.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < count; ++j) {
        try {
            rows[j] = {names[j], find_gvm_wavelength(models[j], type, 0.0)};
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string table_csv(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "crystal,lambda_gvm_nm,theta_gvm_deg,residual_pm,residual_gvm,status\n";
    for (const auto& r : rows) {
        os << r.crystal << ',';
        if (r.solution.found())
            os << fmt(r.solution.lambda_gvm_nm) << ',' << fmt(rad_to_deg(r.solution.theta_gvm)) << ','
               << fmt(r.solution.residual_pm) << ',' << fmt(r.solution.residual_gvm);
        else
            os << ",,,";
        os << ',' << status_name(r.solution) << '\n';
    }
    return os.str();
}

nlohmann::json ScenarioReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    if (pdc) {
        const auto& p = *pdc;
        j["pdc"] = {{"crystal", p.crystal.name},
                    {"pdc_type", std::string(pdcadd::to_string(p.type))},
                    {"theta_s_deg", rad_to_deg(p.geometry.theta_s)},
                    {"pump_wavelength_nm", p.pump_wavelength_nm},
                    {"signal_wavelength_nm", p.signal_wavelength_nm()},
                    {"idler_wavelength_nm", p.idler_wavelength_nm()},
                    {"pump_sigma_nm", sigma_nm_from_omega(p.pump_sigma, p.pump_wavelength_nm)},
                    {"pump_sigma_rad_s", p.pump_sigma},
                    {"pump_order", p.pump_order},
                    {"crystal_length_mm", p.crystal_length * 1e3},
                    {"cut_angle_deg", rad_to_deg(p.cut_angle)},
                    {"transverse_scale", p.transverse_scale},
                    {"roles",
                     {{"pump", pol_letter(p.roles.pump)},
                      {"signal", pol_letter(p.roles.signal)},
                      {"idler", pol_letter(p.roles.idler)}}}};
        if (p.beam_waist) j["pdc"]["beam_waist_um"] = *p.beam_waist * 1e6;
    }
    if (gvm) j["gvm"] = pdcadd::to_json(*gvm);
    if (r) {
        j["analytic"] = {{"r_s", r->signal}, {"r_i", r->idler}};
        if (K_analytic) j["analytic"]["K"] = *K_analytic;
        if (witness) j["analytic"]["bandwidth_witness"] = *witness;
    }
    for (const auto& m : models) {
        nlohmann::json mj = {{"model", std::string(pdcadd::to_string(m.model))},
                             {"K", m.K},
                             {"eigenvalues", m.eigenvalues},
                             {"overlap_first_mode_vs_pump", m.overlap_first_mode},
                             {"centroid_offset_signal_rad_s", m.moments.mean_s},
                             {"centroid_offset_idler_rad_s", m.moments.mean_i}};
        if (m.K_filtered) mj["K_filtered"] = *m.K_filtered;
        if (m.retained_fraction) mj["retained_fraction"] = *m.retained_fraction;
        j["models"].push_back(mj);
    }
    for (const auto& s : filter_sweep)
        j["filter_sweep"].push_back({{"width_nm", s.width_nm}, {"K", s.K}, {"retained_fraction", s.retained_fraction}});
    for (const auto& s : gvm_scan) j["gvm_scan"].push_back(pdcadd::to_json(s));
    if (nonsaturation) j["nonsaturation"] = pdcadd::to_json(*nonsaturation);
    if (purity_min_at_k11) j["purity_min_at_K_1_1"] = *purity_min_at_k11;
    for (const auto& e : manifest) j["manifest"].push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    return j;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const CrystalCatalog& catalog, const RunOptions& opt) {
    const PmModel primary = opt.model.value_or(config.model);
    const std::uint64_t seed = opt.seed.value_or(config.seed);
    const fs::path dir = opt.output_dir.value_or(config.output_dir);
    ScenarioReport rep;
    rep.name = config.name;

    std::vector<std::string> files;
    if (opt.write_files) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(Stage::config, ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
    }
    auto emit = [&](const std::string& file, const std::string& text) {
        write_text(dir / file, text);
        files.push_back(file);
    };

    if (config.pdc) {
        const PdcConfig pc = resolve_pdc(*config.pdc, catalog);
        rep.pdc = pc;
        rep.gvm = find_gvm_wavelength(pc.crystal, pc.type, pc.geometry.theta_s, pc.roles);
        if (pc.geometry.is_collinear()) {
            rep.r = r_coefficients(pc);
            rep.witness = bandwidth_witness(pc);
            try {
                rep.K_analytic = analytic_K(*rep.r);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::degenerate_ratio) throw;
            }
        }
        const FrequencyGrid grid = make_grid(pc, config.grid.n_signal, config.grid.n_idler, config.grid.span_sigma);
        const ModeFunction pump_mode = pump_reference_mode(pc, grid);
        for (PmModel model : {primary, primary == PmModel::sinc ? PmModel::gaussian : PmModel::sinc}) {
            const JsaGrid jsa = build_jsa(pc, grid, model);
            const SchmidtDecomposition d = decompose(jsa);
            ModelResult mr;
            mr.model = model;
            mr.K = d.K;
            mr.eigenvalues = leading(d.eigenvalues, 10);
            mr.overlap_first_mode = mode_overlap(signal_mode(d, 0), pump_mode);
            mr.moments = moments(jsa);
            if (config.filter) {
                const JsaGrid f = apply_idler_filter(jsa, *config.filter);
                mr.K_filtered = decompose(f, 1e-12, false).K;
                mr.retained_fraction = f.retained_fraction;
            }
            if (model == primary) {
                for (double w : config.filter_sweep_nm) {
                    FilterSpec fs;
                    fs.width_nm = w;
                    if (config.filter) fs.center_nm = config.filter->center_nm;
                    const JsaGrid f = apply_idler_filter(jsa, fs);
                    rep.filter_sweep.push_back({w, decompose(f, 1e-12, false).K, f.retained_fraction});
                }
                if (opt.write_files) {
                    if (opt.jsa_csv) {
                        write_jsa_csv((dir / "jsa.csv").string(), jsa);
                        files.push_back("jsa.csv");
                        write_phasematching_csv((dir / "phasematching.csv").string(), pc, grid, model);
                        files.push_back("phasematching.csv");
                    }
                    for (int r = 0; r < std::min(4, d.rank()); ++r) {
                        const std::string s = "signal_mode_" + std::to_string(r) + ".csv";
                        const std::string i = "idler_mode_" + std::to_string(r) + ".csv";
                        write_mode_csv((dir / s).string(), signal_mode(d, r));
                        write_mode_csv((dir / i).string(), idler_mode(d, r));
                        files.push_back(s);
                        files.push_back(i);
                    }
                    write_mode_csv((dir / "pump_mode.csv").string(), pump_mode);
                    files.push_back("pump_mode.csv");
                    nlohmann::json meta = {{"config", serialize_scenario(config)},
                                           {"model", std::string(to_string(model))},
                                           {"norm", jsa.norm()},
                                           {"retained_fraction", jsa.retained_fraction},
                                           {"n_signal", grid.n()},
                                           {"n_idler", grid.m()}};
                    emit("jsa_meta.json", meta.dump(2) + "\n");
                    nlohmann::json schmidt = {{"model", std::string(to_string(model))},
                                              {"K", d.K},
                                              {"eigenvalues", leading(d.eigenvalues, 10)},
                                              {"overlap_first_mode_vs_pump", mr.overlap_first_mode}};
                    emit("schmidt.json", schmidt.dump(2) + "\n");
                }
            }
            rep.models.push_back(mr);
        }
        if (config.gvm_scan_deg) {
            std::vector<double> angles;
            for (double a : config.gvm_scan_deg->values()) angles.push_back(deg_to_rad(a));
            rep.gvm_scan = gvm_scan(pc.crystal, pc.type, angles, pc.roles);
            if (opt.write_files) emit("gvm_scan.csv", gvm_scan_csv(rep.gvm_scan));
        }
        if (opt.write_files && !rep.filter_sweep.empty()) {
            std::ostringstream os;
            os << "width_nm,K,retained_fraction\n";
            for (const auto& s : rep.filter_sweep) os << fmt(s.width_nm) << ',' << fmt(s.K) << ',' << fmt(s.retained_fraction) << '\n';
            emit("filter_sweep.csv", os.str());
        }
    }

    if (config.purity) {
        const auto& ps = *config.purity;
        const auto ks = ps.k.values(), ns = ps.nbar.values();
        const PuritySurface surf = purity_surface(ks, ns);
        const double k11[] = {1.1};
        const PuritySurface row = purity_surface(k11, ns);
        rep.purity_min_at_k11 = *std::min_element(row.purity.begin(), row.purity.end());
        rep.nonsaturation = verify_nonsaturation(ps.trials, ps.modes, ps.truncation, seed);
        if (opt.write_files) {
            emit("purity.csv", purity_csv(surf));
            emit("nonsaturation.json", pdcadd::to_json(*rep.nonsaturation).dump(2) + "\n");
        }
    }

    if (opt.write_files) {
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const fs::path p = dir / f;
            rep.manifest.push_back({f, sha256_file(p.string()), fs::file_size(p)});
        }
        write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
    }
    return rep;
}

}  // namespace pdcadd
