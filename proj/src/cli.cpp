#include "kaclab/cli.hpp"

#include "kaclab/common.hpp"
#include "kaclab/conditioned.hpp"
#include "kaclab/density.hpp"
#include "kaclab/kac_walk.hpp"
#include "kaclab/lclt.hpp"
#include "kaclab/quadrature.hpp"
#include "kaclab/wild.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace kaclab::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s)
{
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string unquote(std::string s)
{
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    std::string inner = s.substr(1, s.size() - 2);
    std::string out;
    for (char c : inner)
      if (c != ' ' && c != '"' && c != '\'')
        out += c;
    return out;
  }
  return s;
}

std::string json_scalar(const json& v)
{
  if (v.is_string())
    return v.get<std::string>();
  return v.dump();
}

// Config files: a JSON object, or "key = value" lines with '#' comments.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::pair<std::string, std::string>> out;
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(fmt::format("config {}: {}", path, e.what()));
    }
    for (const auto& [key, value] : j.items()) {
      if (value.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < value.size(); ++i)
          joined += (i ? "," : "") + json_scalar(value[i]);
        out.emplace_back(key, joined);
      } else if (value.is_object() || value.is_null()) {
        throw std::invalid_argument(fmt::format("config {}: value of '{}' must be a scalar or list", path, key));
      } else {
        out.emplace_back(key, json_scalar(value));
      }
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(fmt::format("config {}:{}: expected key = value", path, lineno));
    out.emplace_back(trim(line.substr(0, eq)), unquote(trim(line.substr(eq + 1))));
  }
  return out;
}

double parse_double(const std::string& name, const std::string& s)
{
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw std::invalid_argument(fmt::format("--{}: '{}' is not a number", name, s));
  return v;
}

std::int64_t parse_int(const std::string& name, const std::string& s)
{
  const double v = parse_double(name, s);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    throw std::invalid_argument(fmt::format("--{}: '{}' is not an integer", name, s));
  return static_cast<std::int64_t>(v);
}

std::vector<std::string> split(const std::string& s)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// String-valued options of one subcommand, converted after parsing so that
// config-file values and flags go through the same checks.
class Options
{
public:
  explicit Options(CLI::App* app)
    : app_(app)
  {
  }

  void add(const std::string& name, const std::string& def, const std::string& help)
  {
    values_[name] = def;
    app_->add_option("--" + name, values_[name], help)->capture_default_str();
  }

  std::string str(const std::string& name) const { return values_.at(name); }
  double real(const std::string& name) const { return parse_double(name, values_.at(name)); }
  std::int64_t integer(const std::string& name) const { return parse_int(name, values_.at(name)); }
  int small_int(const std::string& name) const
  {
    const auto v = integer(name);
    if (v < -2147483647 || v > 2147483647)
      throw std::invalid_argument("--" + name + " is out of range");
    return static_cast<int>(v);
  }
  std::vector<double> reals(const std::string& name) const
  {
    std::vector<double> out;
    for (const auto& s : split(values_.at(name)))
      out.push_back(parse_double(name, s));
    return out;
  }
  std::vector<int> ints(const std::string& name) const
  {
    std::vector<int> out;
    for (const auto& s : split(values_.at(name))) {
      const auto v = parse_int(name, s);
      if (v < -2147483647 || v > 2147483647)
        throw std::invalid_argument("--" + name + " is out of range");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

private:
  CLI::App* app_;
  std::map<std::string, std::string> values_;
};

struct Context
{
  std::uint64_t seed = 1;
  int workers = 1;
  json params = json::object();
  std::ostringstream body;
};

std::string num(double x)
{
  return fmt::format("{:.17g}", x);
}

// ---------------------------------------------------------------------------
// Commands

void cmd_walk(const Options& o, Context& ctx)
{
  const int n = o.small_int("n");
  const double time = o.real("time");
  const std::int64_t walks = o.integer("walks");
  const int bins = o.small_int("bins");
  if (n < 3)
    throw std::invalid_argument("--n must be >= 3");
  if (walks < 1 || bins < 2)
    throw std::invalid_argument("--walks must be >= 1 and --bins >= 2");
  walk::WalkConfig cfg;
  cfg.seed = ctx.seed;
  const auto mode = o.str("time-mode");
  if (mode == "poisson")
    cfg.time_mode = walk::TimeMode::PoissonContinuous;
  else if (mode == "discrete")
    cfg.time_mode = walk::TimeMode::DiscreteSteps;
  else
    throw std::invalid_argument("--time-mode must be 'poisson' or 'discrete'");
  cfg.validate();
  ctx.params.update({ { "n", n }, { "time", time }, { "walks", walks }, { "bins", bins }, { "time_mode", mode } });

  const double edge = std::min(std::sqrt(static_cast<double>(n)), 5.0);
  const double width = 2.0 * edge / bins;
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(ctx.workers),
                                                std::vector<std::int64_t>(static_cast<std::size_t>(bins), 0));
  run_workers(ctx.workers, [&](int w) {
    const auto [lo, hi] = chunk_range(walks, ctx.workers, w);
    for (std::int64_t i = lo; i < hi; ++i) {
      walk::KacWalk kw(walk::SphereState::concentrated(n), cfg, static_cast<std::uint64_t>(i));
      kw.advance_time(time);
      const double x = kw.state()[0];
      const auto b = static_cast<std::int64_t>(std::floor((x + edge) / width));
      if (b >= 0 && b < bins)
        ++counts[static_cast<std::size_t>(w)][static_cast<std::size_t>(b)];
    }
  });
  ctx.body << "bin_lo,bin_hi,count,empirical_density,marginal_sigma_density\n";
  for (int b = 0; b < bins; ++b) {
    std::int64_t c = 0;
    for (const auto& part : counts)
      c += part[static_cast<std::size_t>(b)];
    const double lo = -edge + b * width;
    const double hi = lo + width;
    const double expected =
      quad::integrate([&](double y) { return conditioned::marginal_sigma(n, std::span<const double>(&y, 1)); }, lo,
                      hi, 1e-12) /
      width;
    ctx.body << fmt::format("{},{},{},{},{}\n", num(lo), num(hi), c, num(c / (walks * width)), num(expected));
  }
}

void cmd_gap(const Options& o, Context& ctx)
{
  const int n = o.small_int("n");
  const std::int64_t samples = o.integer("samples");
  ctx.params.update({ { "n", n }, { "samples", samples } });
  const double fourth = walk::sphere_fourth_moment(n);
  const auto phi = [fourth](std::span<const double> v) {
    double acc = 0.0;
    for (double x : v)
      acc += x * x * x * x - fourth;
    return acc;
  };
  const auto est = walk::rayleigh_quotient(phi, n, samples, ctx.seed, ctx.workers);
  ctx.body << "n,samples,estimate,std_error,exact\n";
  ctx.body << fmt::format("{},{},{},{},{}\n", n, est.n_samples, num(est.value), num(est.std_error),
                          num(walk::spectral_gap_exact(n)));
}

void cmd_bk_evolve(const Options& o, Context& ctx)
{
  const double delta = o.real("delta");
  const density::GridSpec spec{ o.real("grid-min"), o.real("grid-max"), o.small_int("grid-points") };
  const double time = o.real("time");
  const double dt = o.real("dt");
  const int nodes = o.small_int("theta-nodes");
  const int every = o.small_int("record-every");
  ctx.params.update({ { "delta", delta },
                      { "grid_min", spec.v_min },
                      { "grid_max", spec.v_max },
                      { "grid_points", spec.n_points },
                      { "time", time },
                      { "dt", dt },
                      { "theta_nodes", nodes },
                      { "record_every", every } });
  const auto f0 = density::to_grid(density::bc_mixture(delta), spec);
  const auto ev = wild::evolve(f0, time, dt, wild::ThetaQuadrature::uniform(nodes), every);
  ev.trace.write_csv(ctx.body);
}

void cmd_dsmall(const Options& o, Context& ctx)
{
  const auto deltas = o.reals("deltas");
  ctx.params["deltas"] = deltas;
  ctx.body << "delta,H,D,ratio,stated_bound,corrected_bound\n";
  for (double d : deltas) {
    const auto r = wild::dsmall_report(d);
    ctx.body << fmt::format("{},{},{},{},{},{}\n", num(r.delta), num(r.entropy), num(r.production), num(r.ratio),
                            num(r.paper_upper_bound), num(r.corrected_upper_bound));
  }
}

void cmd_zprofile(const Options& o, Context& ctx)
{
  const double delta = o.real("delta");
  const int n = o.small_int("n");
  const double width = o.real("width");
  const int stride = o.small_int("stride");
  if (!(width > 0.0) || stride < 1)
    throw std::invalid_argument("--width must be positive and --stride >= 1");
  ctx.params.update({ { "delta", delta }, { "n", n }, { "width", width }, { "stride", stride } });
  const auto f = density::bc_mixture(delta);
  const auto t = conditioned::build_ztable(f, n);
  const double centre = n * t.energy;
  const double half = width * std::sqrt(static_cast<double>(n)) * t.sigma;
  ctx.body << "u,log_Z,log_Z_prime,asymptotic_log_Z,log_Z_error\n";
  for (std::size_t k = 0; k < t.u.size(); k += static_cast<std::size_t>(stride)) {
    const double u = t.u[k];
    if (u <= 0.0 || std::abs(u - centre) > half)
      continue;
    const double asym = conditioned::asymptotic_log_Z(t.energy, t.sigma, n, std::sqrt(u));
    ctx.body << fmt::format("{},{},{},{},{}\n", num(u), num(t.log_Z[k]), num(t.log_Z_prime[k]), num(asym),
                            num(t.log_Z[k] - asym));
  }
}

void cmd_chaos(const Options& o, Context& ctx)
{
  const double delta = o.real("delta");
  const auto ns = o.ints("ns");
  const std::int64_t samples = o.integer("samples");
  const int k = o.small_int("k");
  if (samples < 0)
    throw std::invalid_argument("--samples must be >= 0");
  ctx.params.update({ { "delta", delta }, { "ns", ns }, { "samples", samples }, { "k", k } });
  const auto f = density::bc_mixture(delta);
  const double h = density::relative_entropy_to_gaussian(f);
  const double d2 = 2.0 * wild::entropy_production_D(f);
  conditioned::SamplerConfig sc;
  sc.seed = ctx.seed;
  sc.workers = ctx.workers;
  ctx.body << "N,marginal_gap,H_f,epp_exact,epp,epp_se,production,production_se,two_D\n";
  for (int n : ns) {
    const conditioned::ConditionedProduct cp(f, n);
    const auto gap = conditioned::marginal_entropy_gap(cp, k);
    const double exact = conditioned::entropy_per_particle_exact(cp);
    EstimateReport epp{ std::nan(""), std::nan(""), 0 }, prod{ std::nan(""), std::nan(""), 0 };
    if (samples > 0) {
      epp = conditioned::entropy_per_particle(cp, samples, sc);
      prod = conditioned::entropy_production_per_particle(cp, samples, sc);
    }
    ctx.body << fmt::format("{},{},{},{},{},{},{},{},{}\n", n, num(gap.entropy), num(h), num(exact), num(epp.value),
                            num(epp.std_error), num(prod.value), num(prod.std_error), num(d2));
  }
}

void cmd_lclt(const Options& o, Context& ctx)
{
  const auto which = o.str("density");
  const auto ns = o.ints("ns");
  const double split_at = o.real("split");
  const double p = o.real("p");
  const double mix = o.real("mixture-delta");
  ctx.params.update({ { "density", which }, { "ns", ns }, { "split", split_at }, { "p", p } });
  density::GridDensity1D g = [&] {
    if (which == "uniform")
      return lclt::standardized_uniform();
    if (which == "gaussian")
      return density::to_grid(density::maxwellian(1.0));
    if (which == "bc") {
      ctx.params["mixture_delta"] = mix;
      return density::to_grid(density::bc_mixture(mix));
    }
    throw std::invalid_argument("--density must be uniform, gaussian or bc");
  }();
  ctx.body << "N,observed_sup_error,bound_total,term_high,term_gauss_tail,term_low,alpha,alpha0,eps_delta,"
              "log_observed_sup_error,log_bound_total,log_term_high,log_term_gauss_tail,log_term_low\n";
  for (int n : ns) {
    const auto r = lclt::lclt_error_bound(g, n, split_at, p);
    ctx.body << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", n, num(r.observed_sup_error),
                            num(r.bound_total), num(r.term_high), num(r.term_gauss_tail), num(r.term_low),
                            num(r.alpha), num(r.alpha0), num(r.eps_delta), num(r.log_observed_sup_error),
                            num(r.log_bound_total), num(r.log_term_high), num(r.log_term_gauss_tail),
                            num(r.log_term_low));
  }
}

} // namespace

int run(int argc, const char* const* argv)
{
  struct Command
  {
    std::string name;
    std::string help;
    std::function<void(Options&)> declare;
    std::function<void(const Options&, Context&)> body;
  };
  const std::vector<Command> commands = {
    { "walk", "Kac walk from a concentrated state; first-coordinate histogram vs the sphere marginal",
      [](Options& o) {
        o.add("n", "10", "number of particles");
        o.add("time", "5", "duration in collision-time units");
        o.add("walks", "2000", "independent walks");
        o.add("bins", "40", "histogram bins");
        o.add("time-mode", "poisson", "poisson or discrete");
      },
      cmd_walk },
    { "gap", "Rayleigh quotient of the quartic trial function vs the exact spectral gap",
      [](Options& o) {
        o.add("n", "10", "number of particles");
        o.add("samples", "1e6", "Monte Carlo samples");
      },
      cmd_gap },
    { "bk-evolve", "Boltzmann-Kac evolution of bc_mixture(delta) on a grid",
      [](Options& o) {
        o.add("delta", "0.3", "mixture parameter");
        o.add("time", "10", "final time");
        o.add("dt", "0.01", "time step");
        o.add("grid-min", "-12", "grid lower end");
        o.add("grid-max", "12", "grid upper end");
        o.add("grid-points", "4096", "grid nodes");
        o.add("theta-nodes", "64", "collision-angle nodes");
        o.add("record-every", "10", "record every k steps");
      },
      cmd_bk_evolve },
    { "dsmall", "Entropy production versus entropy for bc_mixture(delta)",
      [](Options& o) { o.add("deltas", "0.1,0.01,0.001,0.0001", "comma-separated delta values"); }, cmd_dsmall },
    { "zprofile", "Exact log Z_N table against its asymptotic main term",
      [](Options& o) {
        o.add("delta", "0.3", "mixture parameter");
        o.add("n", "1024", "number of particles");
        o.add("width", "3", "half-width of the u window in standard deviations");
        o.add("stride", "16", "table stride");
      },
      cmd_zprofile },
    { "chaos", "Marginal entropy gaps and per-particle entropy / production estimates",
      [](Options& o) {
        o.add("delta", "0.3", "mixture parameter");
        o.add("ns", "64,128,256,512,1024", "comma-separated particle numbers");
        o.add("samples", "0", "retained MCMC samples per N (0 skips sampling)");
        o.add("k", "1", "marginal dimension (1 or 2)");
      },
      cmd_chaos },
    { "lclt", "Local CLT sup errors and three-term bounds",
      [](Options& o) {
        o.add("density", "uniform", "uniform, gaussian or bc");
        o.add("mixture-delta", "0.3", "mixture parameter for --density bc");
        o.add("ns", "4,16,64,256", "comma-separated N");
        o.add("split", "0.25", "frequency split delta");
        o.add("p", "2", "Lebesgue exponent");
      },
      cmd_lclt },
  };

  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }

  try {
    if (!config_path.empty() && args.size() >= 2) {
      std::vector<std::string> merged(args.begin(), args.begin() + 2);
      for (const auto& [key, value] : read_config(config_path)) {
        merged.push_back("--" + key);
        merged.push_back(value);
      }
      merged.insert(merged.end(), args.begin() + 2, args.end());
      args = std::move(merged);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{ "Kac model numerical experiments", "kaclab" };
  app.option_defaults()->take_last();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::vector<std::unique_ptr<Options>> options;
  std::string seed_str = "1", workers_str = std::to_string(default_worker_count()), out_path, config_dummy;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--seed", seed_str, "master seed")->capture_default_str();
    sub->add_option("--workers", workers_str, "worker threads")->capture_default_str();
    sub->add_option("--out", out_path, "output CSV path");
    sub->add_option("--config", config_dummy, "JSON or key = value config file");
    options.push_back(std::make_unique<Options>(sub));
    c.declare(*options.back());
  }

  std::vector<const char*> cargs;
  for (const auto& a : args)
    cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::size_t which = 0;
  for (std::size_t i = 0; i < commands.size(); ++i)
    if (app.got_subcommand(commands[i].name))
      which = i;
  const auto& cmd = commands[which];

  try {
    Context ctx;
    const auto seed = parse_int("seed", seed_str);
    if (seed < 0)
      throw std::invalid_argument("--seed must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(seed);
    const auto workers = parse_int("workers", workers_str);
    if (workers < 1 || workers > 1024)
      throw std::invalid_argument("--workers must lie in [1, 1024]");
    ctx.workers = static_cast<int>(workers);

    cmd.body(*options[which], ctx);

    const json header = {
      { "command", cmd.name }, { "version", kVersion }, { "seed", ctx.seed }, { "workers", ctx.workers },
      { "params", ctx.params },
    };
    const std::string text = "# " + header.dump() + "\n" + ctx.body.str();

    std::filesystem::path target = out_path;
    if (target.empty()) {
      if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
        std::filesystem::create_directories(dir);
        target = std::filesystem::path(dir) / (cmd.name + ".csv");
      }
    }
    if (target.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(target, std::ios::binary);
      if (!out)
        throw std::invalid_argument("cannot open output file " + target.string());
      out << text;
      if (!out)
        throw NumericalError("failed writing " + target.string());
    }
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

} // namespace kaclab::cli
