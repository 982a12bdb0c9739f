// heislab: batch experiment runner for the Heisenberg-group rigidity lab.
//
// Subcommands:
//   sharpness  dilation scaling study (CSV + log-log slopes)
//   suite      named verification suite, one pass/fail line per check
//   fit        best-isometry fit of an imported map file
//   distance   ad-hoc cc / koranyi / d^H queries
//   chain      dump a chain of balls for plotting
//
// Exit status: 0 all checks pass, 1 check failure, 2 usage or I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "heis/io.hpp"
#include "heis/suites.hpp"

namespace {

using namespace heis;

int g_seed = 1;
int g_workers = 4;
int g_grid = 17;
std::string g_out = ".";

SuiteConfig suite_config() {
  SuiteConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(g_seed);
  cfg.workers = g_workers;
  cfg.grid = g_grid;
  return cfg;
}

void write_file(const std::string& name, const std::string& content) {
  std::filesystem::create_directories(g_out);
  const std::string path = (std::filesystem::path(g_out) / name).string();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  os << content;
  std::printf("wrote %s\n", path.c_str());
}

int report_suite(const SuiteResult& result) {
  for (const auto& c : result.checks) {
    std::printf("[%s] %s", c.status.c_str(), c.name.c_str());
    if (c.status == "PASS" || c.status == "FAIL") std::printf(" margin=%.6g", c.margin);
    if (!c.detail.empty()) std::printf(" | %s", c.detail.c_str());
    std::printf("\n");
  }
  for (const auto& [name, table] : result.tables) write_file(name + ".csv", table.str());
  std::printf("suite %s: %zu checks, %zu failures\n", result.suite.c_str(),
              result.checks.size(), result.failures());
  return result.pass() ? 0 : 1;
}

struct DomainSpec {
  std::string kind = "ball";
  double radius = 1.0;
  std::vector<double> center = {0.0, 0.0, 0.0};
  std::vector<double> box = {-1.0, 1.0, -1.0, 1.0, -1.0, 1.0};

  JohnDomain build() const {
    if (kind == "ball")
      return make_cc_ball_domain({center[0], center[1], center[2]}, radius);
    if (kind == "box") {
      Box b;
      b.lo = {box[0], box[2], box[4]};
      b.hi = {box[1], box[3], box[5]};
      return make_box_domain(b);
    }
    throw CLI::ValidationError("--domain", "unknown domain kind '" + kind + "'");
  }
};

void add_domain_options(CLI::App* cmd, DomainSpec& spec) {
  cmd->add_option("--domain", spec.kind, "domain kind: ball or box")
      ->check(CLI::IsMember({"ball", "box"}))
      ->capture_default_str();
  cmd->add_option("--radius", spec.radius, "cc ball radius")->capture_default_str();
  cmd->add_option("--center", spec.center, "ball center x y t")->expected(3);
  cmd->add_option("--box", spec.box, "box ranges: xlo xhi ylo yhi tlo thi")->expected(6);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heislab: numerical rigidity experiments on the Heisenberg group"};
  app.set_config("--config", "", "configuration file (key=value, [subcommand] sections)");
  app.add_option("--seed", g_seed, "seed for randomized studies")->capture_default_str();
  app.add_option("--workers", g_workers, "worker threads")->capture_default_str();
  app.add_option("--grid", g_grid, "grid nodes per axis for quadrature studies")
      ->capture_default_str();
  app.add_option("--out", g_out, "output directory for CSV and record files")
      ->capture_default_str();
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();  // global options may follow the subcommand

  // sharpness
  auto* sharp = app.add_subcommand(
      "sharpness", "dilation scaling study: CSV columns epsilon,sup_d,sup_dH,sobolev_dev");
  SharpnessConfig scfg;
  sharp->add_option("--eps-lo", scfg.eps_lo, "smallest epsilon")->capture_default_str();
  sharp->add_option("--eps-hi", scfg.eps_hi, "largest epsilon")->capture_default_str();
  sharp->add_option("--n-eps", scfg.n_eps, "number of epsilon values")->capture_default_str();
  sharp->add_option("--fit-samples", scfg.fit_samples, "samples per fit")->capture_default_str();
  sharp->add_option("--sup-samples", scfg.sup_samples, "samples per sup")->capture_default_str();
  sharp->add_option("--quad-nodes", scfg.quad_nodes, "quadrature nodes per axis")
      ->capture_default_str();

  // suite
  auto* suite = app.add_subcommand("suite", "run a verification suite");
  std::string suite_name;
  suite->add_option("name", suite_name, "one of lemma1 lemma2 lemma8 prop1 coercive main_ineq bso")
      ->required()
      ->check(CLI::IsMember({"lemma1", "lemma2", "lemma8", "prop1", "coercive", "main_ineq",
                             "bso"}));
  SuiteConfig knobs;
  suite->add_option("--bso-sigma", knobs.bso_sigma, "oscillation level sigma")
      ->capture_default_str();
  suite->add_option("--bso-q", knobs.bso_q, "oscillation exponent q")->capture_default_str();
  suite->add_option("--bso-c2", knobs.bso_c2, "exponential-integrability constant c2")
      ->capture_default_str();
  suite->add_option("--eps-small", knobs.eps_small, "small-epsilon threshold")
      ->capture_default_str();

  // fit
  auto* fitc = app.add_subcommand("fit", "fit the best isometry to an imported map");
  std::string fit_input;
  DomainSpec fit_domain;
  double ball_ratio = 1.0;
  fitc->add_option("--input", fit_input, "map file (columnar 'x y t f1 f2 f3')")->required();
  add_domain_options(fitc, fit_domain);
  fitc->add_option("--ball-ratio", ball_ratio,
                   "reference-ball ratio: fit on B(x*, ratio*alpha) instead of the domain")
      ->capture_default_str();

  // distance
  auto* dist = app.add_subcommand("distance", "print cc, koranyi and d^H distances");
  std::vector<double> coords;
  dist->add_option("points", coords, "x1 y1 t1 [x2 y2 t2]")->expected(3, 6);
  int c0_samples = 0;
  dist->add_option("--estimate-c0", c0_samples,
                   "report the empirical d/rho equivalence constant over N random points");

  // chain
  auto* chainc = app.add_subcommand("chain", "dump a ball chain as 'i x y t radius' records");
  DomainSpec chain_domain;
  add_domain_options(chainc, chain_domain);
  std::vector<double> chain_x = {0.5, 0.0, 0.0};
  double chain_kappa = 2.0;
  chainc->add_option("--x", chain_x, "query point x y t")->expected(3);
  chainc->add_option("--kappa", chain_kappa, "enlargement factor kappa >= 1")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (dump_config) {
      std::cout << app.config_to_str(true, true);
      return 0;
    }
    if (sharp->parsed()) {
      scfg.workers = g_workers;
      scfg.seed = static_cast<std::uint64_t>(g_seed);
      const SharpnessResult r = run_sharpness(scfg);
      write_file("sharpness.csv", r.csv(scfg).str());
      std::printf("slope sup_d       = %.4f\n", r.slope_sup_d);
      std::printf("slope sup_dH      = %.4f\n", r.slope_sup_dh);
      std::printf("slope sobolev_dev = %.4f\n", r.slope_sobolev);
      return 0;
    }
    if (suite->parsed()) {
      SuiteConfig cfg = suite_config();
      cfg.bso_sigma = knobs.bso_sigma;
      cfg.bso_q = knobs.bso_q;
      cfg.bso_c2 = knobs.bso_c2;
      cfg.eps_small = knobs.eps_small;
      return report_suite(run_suite(suite_name, cfg));
    }
    if (fitc->parsed()) {
      const SampledMap map = load_map(fit_input);
      const JohnDomain domain = fit_domain.build();
      FullFitOptions opt;
      if (ball_ratio != 1.0) {
        // property-4 caveat: lambda over a sub-ball underestimates the
        // domain-level value by up to the 56 L gamma1/gamma2 inflation
        std::printf("# note: reference-ball ratio %.6g; sub-ball fit, inflation caveat applies\n",
                    ball_ratio);
        if (!(ball_ratio > 0.0) || ball_ratio > 1.0)
          throw CLI::ValidationError("--ball-ratio", "must lie in (0, 1]");
        std::vector<std::pair<Point, Point>> samples;
        const Ball sub{domain.x_star, ball_ratio * domain.alpha, Metric::CC};
        for (const auto& x : sample_ball(sub, opt.fit_samples))
          samples.emplace_back(x, map.eval(x));
        const DHFitResult sub_fit = fit_dh(samples);
        std::printf("lambda_hat_subball=%s\n", format_double(sub_fit.lambda_hat).c_str());
      }
      const FullFitResult r = full_fit(map, domain, opt);
      const std::string rec = fit_record(r);
      std::fputs(rec.c_str(), stdout);
      write_file("fit.txt", rec);
      return 0;
    }
    if (dist->parsed()) {
      if (c0_samples > 0) {
        Rng rng(static_cast<std::uint64_t>(g_seed));
        double c0 = 1.0;
        for (int i = 0; i < c0_samples; ++i) {
          const Point p = rng.point_in_box(3.0, 3.0);
          const double d = cc_norm(p), rho = koranyi_norm(p);
          if (d > 0.0 && rho > 0.0) c0 = std::max(c0, std::max(d / rho, rho / d));
        }
        std::printf("empirical_c0=%s over %d samples\n", format_double(c0).c_str(), c0_samples);
      }
      if (coords.size() == 3 || coords.size() == 6) {
        const Point a{coords[0], coords[1], coords[2]};
        const Point b = coords.size() == 6 ? Point{coords[3], coords[4], coords[5]} : Point{};
        std::printf("cc=%s\n", format_double(cc_dist(a, b)).c_str());
        std::printf("koranyi=%s\n", format_double(koranyi_dist(a, b)).c_str());
        std::printf("dH=%s\n", format_double(dh_dist(a, b)).c_str());
      } else if (c0_samples <= 0) {
        throw CLI::ValidationError("points", "need 3 or 6 coordinates, or --estimate-c0");
      }
      return 0;
    }
    if (chainc->parsed()) {
      const JohnDomain domain = chain_domain.build();
      const Point x{chain_x[0], chain_x[1], chain_x[2]};
      try {
        const BallChain chain = build_chain(domain, x, chain_kappa);
        std::ostringstream os;
        for (std::size_t i = 0; i < chain.balls.size(); ++i) {
          const auto& b = chain.balls[i];
          os << i << ' ' << format_double(b.center.x) << ' ' << format_double(b.center.y) << ' '
             << format_double(b.center.t) << ' ' << format_double(b.radius) << '\n';
        }
        for (std::size_t i = 0; i < chain.links.size(); ++i) {
          const auto& b = chain.links[i];
          os << "# link " << i << ' ' << format_double(b.center.x) << ' '
             << format_double(b.center.y) << ' ' << format_double(b.center.t) << ' '
             << format_double(b.radius) << '\n';
        }
        std::fputs(os.str().c_str(), stdout);
        write_file("chain.txt", os.str());
      } catch (const ChainClauseError& e) {
        std::printf("[FAIL] %s\n", e.what());
        return 1;
      }
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const ChainClauseError& e) {
    std::fprintf(stderr, "[FAIL] %s\n", e.what());
    return 1;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
