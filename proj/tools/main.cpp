#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"
#include "gmrf/error.hpp"
#include "gmrf/io.hpp"
#include "gmrf/parallel.hpp"

namespace {

using gmrf::cli::Config;

// Options shared by the subcommands that need field parameters.
struct ParamOptions {
  int p = 16;
  double alpha = 0.2;
  double sigma2 = 1.0;
  std::string theta;

  void add(CLI::App* sub) {
    sub->add_option("--p", p, "torus side (four-nearest-neighbour field)")->check(CLI::Range(2, 1 << 14));
    sub->add_option("--alpha", alpha, "theta[1,0] = theta[0,1] of the four-nearest-neighbour field");
    sub->add_option("--sigma2", sigma2, "conditional variance");
    sub->add_option("--theta", theta, "theta JSON file {p, entries: [[i, j, v], ...]} (overrides --p/--alpha)");
  }

  void fill(Config& cfg) const {
    cfg["p"] = p;
    cfg["alpha"] = alpha;
    cfg["sigma2"] = sigma2;
    if (!theta.empty()) {
      cfg["theta"] = theta;
      cfg["theta_digest"] = gmrf::file_digest(theta);
    } else {
      cfg["theta"] = nullptr;
    }
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Gaussian Markov random fields on the torus: sampling, estimation, selection and bounds"};
  app.require_subcommand(1);
  int threads = 0;
  bool svg = false;
  std::string out = "out";
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency); results do not depend on it");
  app.add_flag("--svg", svg, "also write SVG line charts");
  app.add_option("--out", out, "output directory");

  std::uint64_t seed = 1;
  int n = 100, reps = 200, model = 1, n_mc = 20000, block = 1, chi_square = 1;
  int max_models = -1;
  double rho = 2.0, K = 3.0, rho1 = 2.0, rho2 = -1.0, r = 0.01, kappa = 0.5;
  bool iso = false;
  std::string batch, family, mode = "gaussian", manifest;
  std::vector<double> xs, n_grid;
  ParamOptions params;

  auto* sample = app.add_subcommand("sample", "draw n independent fields");
  params.add(sample);
  sample->add_option("--n", n, "number of fields")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "master seed");

  auto* estimate = app.add_subcommand("estimate", "l1-constrained conditional least squares on one model");
  estimate->add_option("--batch", batch, "batch file written by `sample`")->required();
  estimate->add_option("--model", model, "model index (1-based)");
  estimate->add_option("--rho", rho, "l1 radius");
  estimate->add_flag("--iso", iso, "isotropic parametrization");

  auto* select = app.add_subcommand("select", "penalized model selection over the nested collection");
  select->add_option("--batch", batch, "batch file written by `sample`")->required();
  select->add_option("--K", K, "penalty constant");
  select->add_option("--rho1", rho1, "l1 radius");
  select->add_option("--rho2", rho2, "spectral cap: phi_max(Sigma) <= rho1^2 rho2 sigma^2")->required();
  select->add_option("--sigma2", params.sigma2, "conditional variance used in the penalty");
  select->add_option("--max-models", max_models, "only the first models of the collection");
  select->add_flag("--iso", iso, "isotropic parametrization");

  auto* risk = app.add_subcommand("risk", "Monte Carlo risk of fixed and selected estimators");
  params.add(risk);
  risk->add_option("--n", n, "fields per replicate")->check(CLI::PositiveNumber);
  risk->add_option("--reps", reps, "replicates")->check(CLI::PositiveNumber);
  risk->add_option("--seed", seed, "master seed");
  risk->add_option("--K", K, "penalty constant");
  risk->add_option("--rho1", rho1, "l1 radius");
  risk->add_option("--rho2", rho2, "spectral cap (default: phi_max(Sigma) / (rho1^2 sigma^2))");
  risk->add_option("--max-models", max_models, "only the first models of the collection");
  risk->add_flag("--iso", iso, "isotropic parametrization");

  auto* dims = app.add_subcommand("dims", "model dimensions of the nested disc collection");
  dims->add_option("--p", params.p, "torus side")->check(CLI::Range(2, 1 << 12));

  auto* tails = app.add_subcommand("tails", "Monte Carlo tail of an order-2 chaos supremum");
  auto* fam_opt = tails->add_option("--family", family, "chaos family JSON {N, elements: [{coeffs, constant}]}");
  tails->add_option("--chi-square", chi_square, "use chi^2_k / k - 1 as a k-variable chaos")->excludes(fam_opt);
  tails->add_option("--n-mc", n_mc, "Monte Carlo draws");
  tails->add_option("--x", xs, "deviation grid (default: multiples of E)");
  tails->add_option("--mode", mode, "gaussian or rademacher")->check(CLI::IsMember({"gaussian", "rademacher"}));
  tails->add_option("--block", block, "Rademacher sums per coordinate")->check(CLI::PositiveNumber);
  tails->add_option("--seed", seed, "master seed");

  auto* minimax = app.add_subcommand("minimax", "hypercube lower bound for one model");
  minimax->add_option("--p", params.p, "torus side (zero centre)");
  minimax->add_option("--theta", params.theta, "centre theta JSON file (overrides --p)");
  minimax->add_option("--model", model, "model index (1-based)");
  minimax->add_option("--r", r, "hypercube radius");
  minimax->add_option("--n", n, "number of fields")->check(CLI::PositiveNumber);
  minimax->add_option("--sigma2", params.sigma2, "conditional variance");
  minimax->add_option("--kappa", kappa, "Fano constant in (0, 1)");
  minimax->add_option("--n-grid", n_grid, "sample sizes for the scaling table");
  minimax->add_option("--seed", seed, "seed for code construction and pair sampling");
  minimax->add_flag("--iso", iso, "isotropic hypercube");

  auto* moran = app.add_subcommand("moran", "lattice covariance against the infinite-lattice integral");
  moran->add_option("--alpha", params.alpha, "theta[1,0] in [0, 1/4)");
  moran->add_option("--p", params.p, "torus side")->check(CLI::Range(2, 1 << 14));
  moran->add_option("--sigma2", params.sigma2, "conditional variance");

  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) gmrf::set_default_threads(threads);

  const auto opt_models = [&]() -> nlohmann::json { return max_models < 0 ? nlohmann::json() : nlohmann::json(max_models); };
  auto with_batch = [&](Config& cfg) {
    cfg["batch"] = batch;
    cfg["batch_digest"] = gmrf::file_digest(batch);
  };

  Config cfg = Config::object();
  std::string command;
  if (*sample) {
    command = "sample";
    params.fill(cfg);
    cfg["n"] = n;
    cfg["seed"] = seed;
  } else if (*estimate) {
    command = "estimate";
    with_batch(cfg);
    cfg["model"] = model;
    cfg["rho"] = rho;
    cfg["isotropic"] = iso;
  } else if (*select) {
    command = "select";
    with_batch(cfg);
    cfg["K"] = K;
    cfg["rho1"] = rho1;
    cfg["rho2"] = rho2;
    cfg["sigma2"] = params.sigma2;
    cfg["max_models"] = opt_models();
    cfg["isotropic"] = iso;
    cfg["svg"] = svg;
  } else if (*risk) {
    command = "risk";
    params.fill(cfg);
    cfg["n"] = n;
    cfg["reps"] = reps;
    cfg["seed"] = seed;
    cfg["K"] = K;
    cfg["rho1"] = rho1;
    cfg["rho2"] = rho2 < 0 ? nlohmann::json() : nlohmann::json(rho2);
    cfg["max_models"] = opt_models();
    cfg["isotropic"] = iso;
    cfg["svg"] = svg;
  } else if (*dims) {
    command = "dims";
    cfg["p"] = params.p;
    cfg["svg"] = svg;
  } else if (*tails) {
    command = "tails";
    if (!family.empty()) {
      cfg["family"] = family;
      cfg["family_digest"] = gmrf::file_digest(family);
    } else {
      cfg["family"] = nullptr;
      cfg["chi_square"] = chi_square;
    }
    cfg["n_mc"] = n_mc;
    cfg["x"] = xs;
    cfg["mode"] = mode;
    cfg["block"] = block;
    cfg["seed"] = seed;
    cfg["svg"] = svg;
  } else if (*minimax) {
    command = "minimax";
    params.fill(cfg);
    cfg.erase("alpha");
    cfg["model"] = model;
    cfg["r"] = r;
    cfg["n"] = n;
    cfg["kappa"] = kappa;
    cfg["n_grid"] = n_grid;
    cfg["seed"] = seed;
    cfg["isotropic"] = iso;
    cfg["svg"] = svg;
  } else if (*moran) {
    command = "moran";
    cfg["alpha"] = params.alpha;
    cfg["p"] = params.p;
    cfg["sigma2"] = params.sigma2;
  } else if (*replay) {
    const int bad = gmrf::cli::replay(manifest, out);
    std::cout << (bad == 0 ? "all outputs reproduced\n" : std::to_string(bad) + " output(s) differ\n");
    return bad == 0 ? 0 : 1;
  }

  for (const auto& f : gmrf::cli::run_command(command, cfg, out)) std::cout << f.digest << "  " << f.file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gmrf::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const gmrf::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const gmrf::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
