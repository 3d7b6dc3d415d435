#include "branchbayes/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "branchbayes/hitting.hpp"
#include "branchbayes/kernel.hpp"
#include "branchbayes/montecarlo.hpp"
#include "branchbayes/posterior.hpp"
#include "branchbayes/serialization.hpp"

namespace branchbayes {

namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

struct UR {
  double u = 0.0;
  double r = 0.0;
};

UR resolve_ur(const CLI::App* cmd, double u_in, double r_in) {
  const bool has_u = cmd->count("--u") > 0;
  const bool has_r = cmd->count("--r") > 0;
  if (has_u == has_r) throw std::invalid_argument("exactly one of --u and --r is required");
  if (has_r) {
    if (!(r_in >= 0.0)) throw std::invalid_argument("--r must be nonnegative");
    return {u_from_r(r_in), r_in};
  }
  if (!(u_in >= 0.0) || !(u_in <= 1.0)) throw std::invalid_argument("--u must lie in [0,1]");
  return {u_in, rho(u_in)};
}

void add_format_options(CLI::App* cmd, std::string* format, std::string* out_path) {
  cmd->add_option("--format", *format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", *out_path, "write output to this file instead of stdout");
}

void add_ur_options(CLI::App* cmd, double* u, double* r) {
  CLI::Option* ou = cmd->add_option("--u", *u, "offspring parameter in [0,1]");
  CLI::Option* orr = cmd->add_option("--r", *r, "renormalized parameter; alternative to --u");
  ou->excludes(orr);
  orr->excludes(ou);
}

class Emitter {
 public:
  Emitter(std::ostream& out) : out_(out) {}

  void write(const std::string& payload, const std::string& out_path) const {
    if (out_path.empty()) {
      out_ << payload;
      return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot open output file: " + out_path);
    file << payload;
  }

 private:
  std::ostream& out_;
};

std::string csv_distribution(const nlohmann::json& config, const DiscreteDist& dist,
                             const std::vector<std::string>& extra_comments) {
  std::string s = "# config: " + config.dump() + "\n";
  for (const std::string& c : extra_comments) s += "# " + c + "\n";
  s += "y,prob,log_weight\n";
  for (std::size_t i = 0; i < dist.size(); ++i) {
    s += std::to_string(dist.lo() + static_cast<std::int64_t>(i)) + "," + num(dist.probs()[i]) +
         "," + num(dist.log_weights()[i]) + "\n";
  }
  return s;
}

std::string render_reports(const std::vector<ExperimentReport>& reports,
                           const nlohmann::json& config, const std::string& format) {
  std::string s;
  if (format == "json") {
    for (const ExperimentReport& rep : reports) {
      nlohmann::json j = to_json(rep);
      j["config"] = config;
      s += j.dump() + "\n";
    }
    return s;
  }
  s = "# config: " + config.dump() + "\n";
  s += "name,statistic,threshold,n_samples,seed,passed,params\n";
  for (const ExperimentReport& rep : reports) {
    std::string params;
    for (const auto& [key, value] : rep.params) {
      if (!params.empty()) params += ';';
      params += key + "=" + num(value);
    }
    s += rep.name + "," + num(rep.statistic) + "," + num(rep.threshold) + "," +
         std::to_string(rep.n_samples) + "," + std::to_string(rep.seed) + "," +
         (rep.passed ? "true" : "false") + "," + params + "\n";
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian and hitting-time estimation for binary branching processes"};
  app.require_subcommand(1);
  const Emitter emit(out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one seeded path of the process");
  std::int64_t sim_x0 = 1, sim_n = 1;
  double sim_u = 0.0, sim_r = 0.0;
  std::uint64_t sim_seed = 0;
  std::string sim_fmt = "json", sim_out;
  sim->add_option("--x0", sim_x0, "initial population")->required()->check(CLI::PositiveNumber);
  sim->add_option("--n", sim_n, "number of generations")->required()->check(CLI::PositiveNumber);
  add_ur_options(sim, &sim_u, &sim_r);
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  add_format_options(sim, &sim_fmt, &sim_out);
  sim->callback([&] {
    const UR ur = resolve_ur(sim, sim_u, sim_r);
    const Path path = simulate_path(sim_x0, ur.u, sim_n, sim_seed);
    const nlohmann::json config{{"command", "simulate"}, {"x0", sim_x0},     {"u", ur.u},
                                {"r", ur.r},             {"n", sim_n},       {"seed", sim_seed},
                                {"format", sim_fmt}};
    if (sim_fmt == "json") {
      const nlohmann::json j{{"config", config}, {"path", to_json(path)}};
      emit.write(j.dump() + "\n", sim_out);
    } else {
      std::string s = "# config: " + config.dump() + "\n";
      for (std::int64_t v : path.values) s += std::to_string(v) + "\n";
      emit.write(s, sim_out);
    }
  });

  // posterior
  auto* post_cmd = app.add_subcommand("posterior", "finite-n joint posterior of (X0, U) from a path file");
  std::string post_file, post_fmt = "json", post_out;
  post_cmd->add_option("--path-file", post_file, "observations, one per line or a JSON array")
      ->required();
  add_format_options(post_cmd, &post_fmt, &post_out);
  post_cmd->callback([&] {
    std::ifstream in(post_file, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read path file: " + post_file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const Path path = parse_path_text(buffer.str());
    const JointPosterior post = joint_posterior(path);
    const nlohmann::json config{
        {"command", "posterior"}, {"path_file", post_file}, {"format", post_fmt}};
    if (post_fmt == "json") {
      const nlohmann::json j{{"config", config}, {"result", to_json(post)}};
      emit.write(j.dump() + "\n", post_out);
    } else {
      std::string s = "# config: " + config.dump() + "\n";
      s += "# u_mean," + num(post.u_mean) + "\n";
      s += "# u_sd," + num(post.u_sd) + "\n";
      s += "x0,prob\n";
      for (std::int64_t x0 = post.x0_marginal.lo(); x0 <= post.x0_marginal.hi(); ++x0) {
        s += std::to_string(x0) + "," + num(post.x0_marginal.prob(x0)) + "\n";
      }
      emit.write(s, post_out);
    }
  });

  // limit
  auto* lim = app.add_subcommand("limit", "limit posterior of the initial population");
  std::int64_t lim_x = 1;
  double lim_u = 0.0, lim_r = 0.0;
  std::string lim_fmt = "json", lim_out;
  lim->add_option("--x", lim_x, "first observed generation size")->required()->check(CLI::PositiveNumber);
  add_ur_options(lim, &lim_u, &lim_r);
  add_format_options(lim, &lim_fmt, &lim_out);
  lim->callback([&] {
    const UR ur = resolve_ur(lim, lim_u, lim_r);
    const DiscreteDist dist = limit_posterior(ur.r, lim_x);
    const nlohmann::json config{{"command", "limit"}, {"x", lim_x},        {"u", ur.u},
                                {"r", ur.r},          {"format", lim_fmt}};
    if (lim_fmt == "json") {
      const nlohmann::json j{{"config", config}, {"result", to_json(dist)}};
      emit.write(j.dump() + "\n", lim_out);
    } else {
      emit.write(csv_distribution(config, dist, {}), lim_out);
    }
  });

  // hitting
  auto* hit = app.add_subcommand("hitting", "hitting-time estimator of the initial population");
  std::int64_t hit_x = 1;
  double hit_u = 0.0, hit_r = 0.0;
  std::string hit_fmt = "json", hit_out;
  hit->add_option("--x", hit_x, "target population")->required()->check(CLI::PositiveNumber);
  add_ur_options(hit, &hit_u, &hit_r);
  add_format_options(hit, &hit_fmt, &hit_out);
  hit->callback([&] {
    const UR ur = resolve_ur(hit, hit_u, hit_r);
    const HittingDist hd = eta_dist(hit_x, ur.u);
    const double mean = eta_mean_exact(hit_x, ur.u);
    const nlohmann::json config{{"command", "hitting"}, {"x", hit_x},        {"u", ur.u},
                                {"r", ur.r},            {"format", hit_fmt}};
    if (hit_fmt == "json") {
      nlohmann::json result = to_json(hd);
      result["mean"] = mean;
      const nlohmann::json j{{"config", config}, {"result", std::move(result)}};
      emit.write(j.dump() + "\n", hit_out);
    } else {
      emit.write(csv_distribution(config, hd.dist,
                                  {"hitting_prob," + num(hd.hitting_prob), "mean," + num(mean)}),
                 hit_out);
    }
  });

  // clt
  auto* clt = app.add_subcommand("clt", "Gaussian-limit check for the chosen estimator");
  std::string clt_kind = "xi";
  std::int64_t clt_x = 4096, clt_samples = 100000;
  double clt_u = 0.0, clt_r = 0.0;
  std::uint64_t clt_seed = 0;
  std::string clt_fmt = "json", clt_out;
  clt->add_option("--kind", clt_kind, "estimator: xi (posterior) or eta (hitting)")
      ->check(CLI::IsMember({"xi", "eta"}))
      ->capture_default_str();
  clt->add_option("--x", clt_x, "generation size / target population")->capture_default_str();
  clt->add_option("--samples", clt_samples, "number of Monte Carlo samples")->capture_default_str();
  add_ur_options(clt, &clt_u, &clt_r);
  clt->add_option("--seed", clt_seed, "random seed")->capture_default_str();
  add_format_options(clt, &clt_fmt, &clt_out);
  clt->callback([&] {
    const UR ur = resolve_ur(clt, clt_u, clt_r);
    const CltKind kind = clt_kind == "xi" ? CltKind::xi : CltKind::eta;
    const ExperimentReport rep = clt_experiment(kind, ur.u, clt_x, clt_samples, clt_seed);
    const nlohmann::json config{{"command", "clt"},   {"kind", clt_kind},
                                {"u", ur.u},          {"r", ur.r},
                                {"x", clt_x},         {"samples", clt_samples},
                                {"seed", clt_seed},   {"format", clt_fmt}};
    emit.write(render_reports({rep}, config, clt_fmt), clt_out);
  });

  // consistency
  auto* con = app.add_subcommand("consistency", "finite-n posterior against the limit posterior");
  std::int64_t con_x0 = 5;
  std::vector<std::int64_t> con_n_list = {10, 20, 30};
  double con_u = 0.0, con_r = 0.0;
  std::uint64_t con_seed = 0;
  std::string con_fmt = "json", con_out;
  con->add_option("--x0", con_x0, "initial population of the simulated path")->capture_default_str();
  con->add_option("--n-list", con_n_list, "prefix lengths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  add_ur_options(con, &con_u, &con_r);
  con->add_option("--seed", con_seed, "random seed")->capture_default_str();
  add_format_options(con, &con_fmt, &con_out);
  con->callback([&] {
    const UR ur = resolve_ur(con, con_u, con_r);
    const std::vector<ExperimentReport> reps =
        posterior_consistency_experiment(ur.u, con_x0, con_n_list, con_seed);
    nlohmann::json n_list_json = nlohmann::json::array();
    for (std::int64_t n : con_n_list) n_list_json.push_back(n);
    const nlohmann::json config{{"command", "consistency"}, {"u", ur.u},
                                {"r", ur.r},                {"x0", con_x0},
                                {"n_list", n_list_json},    {"seed", con_seed},
                                {"format", con_fmt}};
    emit.write(render_reports(reps, config, con_fmt), con_out);
  });

  // fisher
  auto* fis = app.add_subcommand("fisher", "empirical Fisher information against the prior identity");
  std::int64_t fis_n = 5, fis_m = 100000;
  double fis_u = 0.0, fis_r = 0.0, fis_lambda0 = 3.0;
  std::uint64_t fis_seed = 0;
  std::string fis_fmt = "json", fis_out;
  add_ur_options(fis, &fis_u, &fis_r);
  fis->add_option("--n", fis_n, "generations per path")->capture_default_str();
  fis->add_option("--lambda0", fis_lambda0, "Poisson rate of the initial population")
      ->capture_default_str();
  fis->add_option("--m", fis_m, "number of simulated paths")->capture_default_str();
  fis->add_option("--seed", fis_seed, "random seed")->capture_default_str();
  add_format_options(fis, &fis_fmt, &fis_out);
  fis->callback([&] {
    const UR ur = resolve_ur(fis, fis_u, fis_r);
    const ExperimentReport rep =
        fisher_info_experiment(ur.u, fis_n, fis_lambda0, fis_m, fis_seed);
    const nlohmann::json config{{"command", "fisher"},     {"u", ur.u},
                                {"r", ur.r},               {"n", fis_n},
                                {"lambda0", fis_lambda0},  {"m", fis_m},
                                {"seed", fis_seed},        {"format", fis_fmt}};
    emit.write(render_reports({rep}, config, fis_fmt), fis_out);
  });

  // compare
  auto* cmp = app.add_subcommand("compare", "Bayesian mean against the naive prediction at x = 2");
  double cmp_u = 0.0;
  std::string cmp_fmt = "json", cmp_out;
  cmp->add_option("--u", cmp_u, "single parameter value; omit for the default grid");
  add_format_options(cmp, &cmp_fmt, &cmp_out);
  cmp->callback([&] {
    std::vector<double> us;
    if (cmp->count("--u") > 0) {
      us.push_back(cmp_u);
    } else {
      for (int i = 1; i <= 19; ++i) us.push_back(0.05 * i);
    }
    nlohmann::json config{{"command", "compare"}, {"format", cmp_fmt}};
    if (cmp->count("--u") > 0) config["u"] = cmp_u;
    if (cmp_fmt == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (double u : us) rows.push_back({{"u", u}, {"ratio", naive_ratio(u)}});
      const nlohmann::json j{{"config", config}, {"rows", std::move(rows)}};
      emit.write(j.dump() + "\n", cmp_out);
    } else {
      std::string s = "# config: " + config.dump() + "\n";
      s += "u,ratio\n";
      for (double u : us) s += num(u) + "," + num(naive_ratio(u)) + "\n";
      emit.write(s, cmp_out);
    }
  });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("branch_bayes");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // Fold CLI11's many parse-error codes into the documented contract:
    // 0 for --help and friends, 1 for every usage error.
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace branchbayes
