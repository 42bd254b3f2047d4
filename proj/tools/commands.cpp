#include "commands.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iostream>

#include "gmrf/chaos.hpp"
#include "gmrf/error.hpp"
#include "gmrf/experiment.hpp"
#include "gmrf/fft.hpp"
#include "gmrf/io.hpp"
#include "gmrf/minimax.hpp"

namespace gmrf::cli {

namespace fs = std::filesystem;

namespace {

// Typed config access; schema violations are FormatErrors.

const Config& field(const Config& cfg, const char* key) {
  if (!cfg.contains(key)) throw FormatError(std::string("config is missing \"") + key + "\"");
  return cfg.at(key);
}

int get_int(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_number_integer()) throw FormatError(std::string("config \"") + key + "\" must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw FormatError(std::string("config \"") + key + "\" must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

double get_double(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_number()) throw FormatError(std::string("config \"") + key + "\" must be a number");
  return v.get<double>();
}

bool get_bool(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_boolean()) throw FormatError(std::string("config \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

std::string get_string(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_string()) throw FormatError(std::string("config \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const Config& cfg, const char* key) {
  const auto& v = field(cfg, key);
  if (!v.is_array()) throw FormatError(std::string("config \"") + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw FormatError(std::string("config \"") + key + "\" must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::optional<int> get_optional_int(const Config& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return get_int(cfg, key);
}

// Input files are pinned by digest so that a replay sees the same data.
void check_input_digest(const Config& cfg, const char* path_key, const char* digest_key) {
  const std::string actual = file_digest(get_string(cfg, path_key));
  if (cfg.contains(digest_key) && get_string(cfg, digest_key) != actual)
    throw FormatError(std::string("input ") + get_string(cfg, path_key) + " changed since the manifest was written");
}

ThetaField load_theta(const Config& cfg) {
  if (cfg.contains("theta") && !cfg.at("theta").is_null()) {
    check_input_digest(cfg, "theta", "theta_digest");
    return theta_from_json(read_text(get_string(cfg, "theta")));
  }
  const TorusGeometry geom(get_int(cfg, "p"));
  const double a = get_double(cfg, "alpha");
  return ThetaField::from_entries(geom, {{1, 0, a}, {0, 1, a}});
}

GmrfParams load_params(const Config& cfg) { return GmrfParams(load_theta(cfg), get_double(cfg, "sigma2")); }

SampleBatch load_batch(const Config& cfg) {
  check_input_digest(cfg, "batch", "batch_digest");
  return read_batch(get_string(cfg, "batch"));
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void text(const std::string& name, std::string_view content) { record(name, [&](const fs::path& p) { write_text(p, content); }); }
  void bytes(const std::string& name, std::span<const std::uint8_t> content) {
    record(name, [&](const fs::path& p) { write_bytes(p, content); });
  }
  void json(const std::string& name, const nlohmann::json& doc) { text(name, doc.dump(2) + "\n"); }

  const std::vector<OutputFile>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  template <class Write>
  void record(const std::string& name, Write&& write) {
    const fs::path p = dir_ / name;
    write(p);
    files_.push_back({name, file_digest(p)});
  }

  fs::path dir_;
  std::vector<OutputFile> files_;
};

nlohmann::json theta_doc(const ThetaField& t) { return nlohmann::json::parse(theta_to_json(t)); }

// ---------------------------------------------------------------------------

void cmd_sample(const Config& cfg, Outputs& out) {
  const GmrfParams params = load_params(cfg);
  const SampleBatch batch = sample(params, get_int(cfg, "n"), get_u64(cfg, "seed"));
  out.bytes("batch.bin", encode_batch(batch));
}

void cmd_estimate(const Config& cfg, Outputs& out) {
  const SampleBatch batch = load_batch(cfg);
  const auto coll = build_model_collection(TorusGeometry(batch.p));
  const bool iso = get_bool(cfg, "isotropic");
  const int model = get_int(cfg, "model");
  const double rho = get_double(cfg, "rho");
  const FitResult fit = fit_model(periodogram(batch), coll.by_index(model), rho, iso);
  nlohmann::json doc{{"model", model},
                     {"dimension", coll.by_index(model).dim(iso)},
                     {"isotropic", iso},
                     {"rho", rho},
                     {"n", batch.n},
                     {"contrast", fit.contrast_value},
                     {"l1_norm", fit.active_l1},
                     {"iterations", fit.iterations},
                     {"converged", fit.converged},
                     {"kkt_residual", fit.kkt_residual}};
  out.json("estimate.json", doc);
  out.text("theta_hat.json", theta_to_json(fit.theta));
}

void cmd_select(const Config& cfg, Outputs& out) {
  const SampleBatch batch = load_batch(cfg);
  const auto coll = build_model_collection(TorusGeometry(batch.p));
  PenaltySpec spec;
  spec.K = get_double(cfg, "K");
  spec.rho1 = get_double(cfg, "rho1");
  spec.rho2 = get_double(cfg, "rho2");
  spec.sigma_sq = get_double(cfg, "sigma2");
  spec.n = batch.n;
  spec.p = batch.p;
  const bool iso = get_bool(cfg, "isotropic");
  const auto sel = select_model(periodogram(batch), coll, spec, iso, 0, get_optional_int(cfg, "max_models"));
  CsvTable table({"index", "dim", "contrast", "penalty", "criterion", "converged"});
  for (const auto& r : sel.rows)
    table.add_row({std::to_string(r.index), std::to_string(r.dim), format_double(r.contrast), format_double(r.penalty),
                   format_double(r.criterion), r.converged ? "1" : "0"});
  out.text("selection.csv", table.str());
  const auto& fit = sel.chosen_fit();
  out.json("selected.json", {{"chosen", sel.chosen},
                             {"dimension", coll.by_index(sel.chosen).dim(iso)},
                             {"isotropic", iso},
                             {"contrast", fit.contrast_value},
                             {"theta", theta_doc(fit.theta)}});
  if (get_bool(cfg, "svg")) {
    SvgSeries crit{"criterion", {}, {}}, con{"contrast", {}, {}};
    for (const auto& r : sel.rows) {
      crit.x.push_back(r.dim);
      crit.y.push_back(r.criterion);
      con.x.push_back(r.dim);
      con.y.push_back(r.contrast);
    }
    const std::vector<SvgSeries> s{crit, con};
    out.text("selection.svg", svg_line_chart("penalized criterion", "d_m", "value", s));
  }
}

void cmd_risk(const Config& cfg, Outputs& out) {
  const GmrfParams params = load_params(cfg);
  const auto coll = build_model_collection(params.geometry());
  PenaltySpec spec;
  spec.K = get_double(cfg, "K");
  spec.rho1 = get_double(cfg, "rho1");
  spec.rho2 = cfg.contains("rho2") && !cfg.at("rho2").is_null() ? get_double(cfg, "rho2")
                                                                 : rho2_for(params, spec.rho1);
  spec.sigma_sq = params.sigma_sq();
  spec.n = get_int(cfg, "n");
  spec.p = params.side();
  const bool iso = get_bool(cfg, "isotropic");
  const auto table = run_risk_experiment(params, coll, spec, get_int(cfg, "reps"), get_u64(cfg, "seed"), iso,
                                         get_optional_int(cfg, "max_models"));
  CsvTable csv({"index", "dim", "risk", "risk_se", "bias", "penalty", "frequency"});
  for (const auto& r : table.rows)
    csv.add_row({std::to_string(r.index), std::to_string(r.dim), format_double(r.risk), format_double(r.risk_se),
                 format_double(r.bias), format_double(r.penalty), format_double(r.frequency)});
  out.text("risk.csv", csv.str());
  out.json("risk_summary.json", {{"selected_risk", table.selected_risk},
                                 {"selected_risk_se", table.selected_risk_se},
                                 {"best_fixed_risk", table.best_fixed_risk},
                                 {"best_fixed_index", table.best_fixed_index},
                                 {"oracle_ratio", table.oracle_ratio},
                                 {"replicates", table.replicates},
                                 {"n", table.n},
                                 {"p", table.p},
                                 {"rho2", spec.rho2},
                                 {"nonconverged_fits", table.nonconverged_fits}});
  if (get_bool(cfg, "svg")) {
    SvgSeries fixed{"fixed model", {}, {}}, sel{"selected", {}, {}};
    for (const auto& r : table.rows) {
      fixed.x.push_back(r.dim);
      fixed.y.push_back(r.risk);
      sel.x.push_back(r.dim);
      sel.y.push_back(table.selected_risk);
    }
    const std::vector<SvgSeries> s{fixed, sel};
    out.text("risk.svg", svg_line_chart("Monte Carlo risk", "d_m", "risk", s, true));
  }
}

void cmd_dims(const Config& cfg, Outputs& out) {
  const TorusGeometry geom(get_int(cfg, "p"));
  const auto coll = build_model_collection(geom);
  const auto growth = verify_growth(coll);
  CsvTable csv({"index", "radius_sq", "d_m", "d_m_iso", "dm2_upper", "growth_ratio"});
  SvgSeries dm{"d_m", {}, {}}, dmi{"d_m iso", {}, {}};
  for (std::size_t k = 0; k < coll.size(); ++k) {
    const auto& m = coll.models[k];
    const std::string ratio = k < growth.steps.size() ? format_double(growth.steps[k].ratio) : "";
    csv.add_row({std::to_string(m.index), std::to_string(m.radius_sq), std::to_string(m.dim()),
                 std::to_string(m.dim_iso()), std::to_string(dim_dm2_upper(geom, m)), ratio});
    dm.x.push_back(m.index);
    dm.y.push_back(m.dim());
    dmi.x.push_back(m.index);
    dmi.y.push_back(m.dim_iso());
  }
  out.text("dims.csv", csv.str());
  if (get_bool(cfg, "svg")) {
    const std::vector<SvgSeries> s{dm, dmi};
    out.text("dims.svg", svg_line_chart("model dimensions", "model index", "dimension", s));
  }
}

ChaosFamily load_family(const Config& cfg) {
  if (cfg.contains("family") && !cfg.at("family").is_null()) {
    check_input_digest(cfg, "family", "family_digest");
    return chaos_family_from_json(read_text(get_string(cfg, "family")));
  }
  const int n = get_int(cfg, "chi_square");
  if (n < 1) throw PreconditionError("chi_square block count must be positive");
  return ChaosFamily{n, {matrix_family_element(Eigen::MatrixXd::Identity(1, 1), n)}};
}

void cmd_tails(const Config& cfg, Outputs& out) {
  const ChaosFamily fam = load_family(cfg);
  const int n_mc = get_int(cfg, "n_mc");
  if (n_mc < 10000) throw PreconditionError("tail experiments need n_mc >= 10000");
  const std::string mode_name = get_string(cfg, "mode");
  if (mode_name != "gaussian" && mode_name != "rademacher") throw FormatError("mode must be gaussian or rademacher");
  const ChaosMode mode = mode_name == "gaussian" ? ChaosMode::gaussian : ChaosMode::rademacher;
  std::vector<double> xs = get_doubles(cfg, "x");
  if (xs.empty()) {
    validate_family(fam);
    const double E = operator_E(fam);
    for (double s : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) xs.push_back(s * E);
  }
  const auto rep = tail_experiment(fam, n_mc, xs, get_u64(cfg, "seed"), mode, get_int(cfg, "block"));
  CsvTable csv({"x", "empirical", "std_error", "censored", "bound"});
  SvgSeries emp{"empirical", {}, {}}, bound{"bound", {}, {}};
  for (const auto& pt : rep.points) {
    csv.add_row({format_double(pt.x), format_double(pt.empirical), format_double(pt.std_error),
                 pt.censored ? "1" : "0", format_double(pt.bound)});
    if (pt.empirical > 0.0) {
      emp.x.push_back(pt.x);
      emp.y.push_back(pt.empirical);
    }
    bound.x.push_back(pt.x);
    bound.y.push_back(pt.bound);
  }
  out.text("tails.csv", csv.str());
  out.json("tails.json", {{"mode", mode_name},
                          {"block", rep.block},
                          {"n_mc", rep.n_mc},
                          {"e_T", rep.e_T},
                          {"e_T_se", rep.e_T_se},
                          {"e_D", rep.e_D},
                          {"E", rep.E_const},
                          {"fitted", rep.fitted},
                          {"L1", rep.L1},
                          {"L2", rep.L2}});
  if (get_bool(cfg, "svg")) {
    const std::vector<SvgSeries> s{emp, bound};
    out.text("tails.svg", svg_line_chart("chaos supremum tail", "x", "P(T >= E[T] + x)", s, true));
  }
}

void cmd_minimax(const Config& cfg, Outputs& out) {
  const bool iso = get_bool(cfg, "isotropic");
  const ThetaField center = cfg.contains("theta") && !cfg.at("theta").is_null()
                                ? load_theta(cfg)
                                : ThetaField::zero(TorusGeometry(get_int(cfg, "p")));
  const auto coll = build_model_collection(center.geometry());
  const auto& m = coll.by_index(get_int(cfg, "model"));
  const double r = get_double(cfg, "r");
  const int n = get_int(cfg, "n");
  const double s2 = get_double(cfg, "sigma2"), kappa = get_double(cfg, "kappa");
  const auto bound = minimax_lower_bound(m, center, r, n, s2, kappa, iso);
  nlohmann::json doc{{"model", m.index},
                     {"dimension", bound.dimension},
                     {"isotropic", iso},
                     {"r", r},
                     {"n", n},
                     {"bound", bound.value},
                     {"r_fano", bound.r_fano},
                     {"r_used", bound.r_used},
                     {"branch", bound.branch},
                     {"l_form", bound.l_form},
                     {"small_dimension", bound.small_dimension}};
  const auto cube = make_hypercube(m, center, bound.r_used, iso);
  if (cube.margin() > 0.0) {
    doc["kl_bound"] = kl_bound_hypercube(cube, n);
    const auto kl = exact_max_pair_kl(cube, n, get_u64(cfg, "seed"));
    doc["max_pair_kl"] = kl.max_kl;
    doc["max_pair_kl_exhaustive"] = kl.exhaustive;
  }
  const auto code = build_vg_code(bound.dimension, get_u64(cfg, "seed"));
  const auto check = verify_vg_code(code);
  doc["vg_code_size"] = check.size;
  doc["vg_min_distance"] = check.min_distance;
  out.json("minimax.json", doc);

  CsvTable csv({"n", "r_fano", "bound", "branch"});
  SvgSeries curve{"lower bound", {}, {}};
  for (double nd : get_doubles(cfg, "n_grid")) {
    const int ng = static_cast<int>(nd);
    if (ng != nd) throw FormatError("n_grid entries must be integers");
    const auto b = minimax_lower_bound(m, center, r, ng, s2, kappa, iso);
    csv.add_row({std::to_string(ng), format_double(b.r_fano), format_double(b.value), b.branch});
    curve.x.push_back(std::log10(nd));
    curve.y.push_back(b.value);
  }
  out.text("minimax.csv", csv.str());
  if (get_bool(cfg, "svg") && !curve.x.empty()) {
    const std::vector<SvgSeries> s{curve};
    out.text("minimax.svg", svg_line_chart("minimax lower bound", "log10 n", "bound", s, true));
  }
}

void cmd_moran(const Config& cfg, Outputs& out) {
  const double a = get_double(cfg, "alpha"), s2 = get_double(cfg, "sigma2");
  const int p = get_int(cfg, "p");
  const GmrfParams params(ThetaField::from_entries(TorusGeometry(p), {{1, 0, a}, {0, 1, a}}), s2);
  const double lattice = covariance_lag(params, 1, 0);
  const double limit = s2 * moran_covariance_limit(a);
  out.json("moran.json", {{"alpha", a},
                          {"p", p},
                          {"sigma2", s2},
                          {"lattice_cov", lattice},
                          {"quadrature_cov", limit},
                          {"relative_gap", limit != 0.0 ? std::abs(lattice / limit - 1.0) : std::abs(lattice)},
                          {"green_integral", moran_green_integral(a)},
                          {"log_asymptote", a > 0.0 ? std::log(8.0 / (1.0 - 4.0 * a)) / std::acos(-1.0) : 0.0}});
}

using Handler = void (*)(const Config&, Outputs&);

Handler handler_for(const std::string& command) {
  if (command == "sample") return cmd_sample;
  if (command == "estimate") return cmd_estimate;
  if (command == "select") return cmd_select;
  if (command == "risk") return cmd_risk;
  if (command == "dims") return cmd_dims;
  if (command == "tails") return cmd_tails;
  if (command == "minimax") return cmd_minimax;
  if (command == "moran") return cmd_moran;
  throw FormatError("unknown command \"" + command + "\"");
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

std::vector<OutputFile> run_command(const std::string& command, const Config& config, const fs::path& out_dir) {
  if (!config.is_object()) throw FormatError("config must be a JSON object");
  const Handler h = handler_for(command);
  Outputs out(out_dir);
  h(config, out);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : out.files()) files.push_back({{"file", f.file}, {"digest", f.digest}});
  const nlohmann::json manifest{{"tool", "gmrf"},
                                {"version", kToolVersion},
                                {"command", command},
                                {"config", config},
                                {"outputs", files},
                                {"libraries", {{"eigen", eigen_version()}, {"fftw", fftw_library_version()}}}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return out.files();
}

int replay(const fs::path& manifest_path, const fs::path& out_dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("outputs") || !manifest["outputs"].is_array())
    throw FormatError("manifest needs an \"outputs\" array");
  const std::string command = get_string(manifest, "command");
  const auto produced = run_command(command, field(manifest, "config"), out_dir);

  int mismatches = 0;
  for (const auto& want : manifest["outputs"]) {
    const std::string file = get_string(want, "file"), digest = get_string(want, "digest");
    const auto it = std::find_if(produced.begin(), produced.end(), [&](const OutputFile& f) { return f.file == file; });
    const bool same = it != produced.end() && it->digest == digest;
    if (!same) ++mismatches;
    std::cout << (same ? "match    " : "MISMATCH ") << file << " " << digest << " "
              << (it != produced.end() ? it->digest : std::string("missing")) << "\n";
  }
  return mismatches;
}

}  // namespace gmrf::cli
