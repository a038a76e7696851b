#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "harness.hpp"
#include "psifno/darcy.hpp"
#include "psifno/emulation/darcy_emulator.hpp"
#include "psifno/emulation/deeponet.hpp"
#include "psifno/emulation/fourier_emulator.hpp"
#include "psifno/emulation/ns_emulator.hpp"
#include "psifno/error.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/navier_stokes.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::harness {

using nlohmann::json;
using spectral::Grid;
using spectral::GridField;
using spectral::SpectralCoeffs;
using Complex = std::complex<double>;

namespace {

class Params {
 public:
  explicit Params(const ExperimentConfig& c) : c_(c) {}

  template <class T>
  T get(const char* key) const {
    try {
      return c_.params.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigInvalid(kind_name(c_.kind) + " parameter '" + key + "': " + e.what());
    }
  }
  bool is_null(const char* key) const { return c_.params.at(key).is_null(); }

  int positive_int(const char* key) const {
    const int v = get<int>(key);
    if (v < 1) throw ConfigInvalid(std::string("parameter '") + key + "' must be positive");
    return v;
  }
  double positive(const char* key) const {
    const double v = get<double>(key);
    if (!(v > 0.0)) throw ConfigInvalid(std::string("parameter '") + key + "' must be positive");
    return v;
  }

 private:
  const ExperimentConfig& c_;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Check check_le(std::string name, double value, double tol, std::string detail = "") {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

std::string num(double x) { return format_number(x); }

// Random grid values rescaled to the given L2 norm.
GridField random_field(const Grid& g, double norm, std::uint64_t seed, int channels = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridField f(g, channels);
  for (double& x : f.values()) x = u(rng);
  f *= norm / spectral::l2_norm(f);
  return f;
}

// (1/|J|) sum_j f(x_j) e^{-i<k, x_j>} by direct summation.
std::vector<Complex> naive_dft(const GridField& f) {
  const Grid& g = f.grid();
  std::vector<Complex> out(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto k = g.wavenumber(m);
    Complex s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto x = g.coordinate(j);
      double phase = 0.0;
      for (int i = 0; i < g.dim(); ++i) phase += k[i] * x[i];
      s += f(0, j) * std::polar(1.0, -phase);
    }
    out[m] = s / static_cast<double>(g.size());
  }
  return out;
}

template <class T>
double spread(const std::vector<T>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// ---------------------------------------------------------------- spectral-check

Report spectral_check(const ExperimentConfig& c) {
  const Params p(c);
  const auto dims = p.get<std::vector<int>>("dims");
  const int max_N = p.positive_int("max_N");
  const auto leray_dims = p.get<std::vector<int>>("leray_dims");
  const int leray_max_N = p.positive_int("leray_max_N");

  struct Task {
    std::string check;
    int d;
    int N;
  };
  std::vector<Task> tasks;
  for (int d : dims) {
    for (int N = 1; N <= max_N; ++N) {
      for (const char* name : {"roundtrip", "parseval", "naive-dft", "dealias-convolution"}) tasks.push_back({name, d, N});
    }
  }
  for (int d : leray_dims) {
    for (int N = 1; N <= leray_max_N; ++N) {
      tasks.push_back({"leray-idempotence", d, N});
      tasks.push_back({"leray-divergence", d, N});
    }
  }
  std::vector<double> value(tasks.size());
  std::vector<double> tol(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), c.jobs, [&](int i) {
    const Task& t = tasks[i];
    const Grid g(t.d, t.N);
    const std::uint64_t seed = task_seed(c.seed, i);
    if (t.check == "roundtrip") {
      const GridField f = random_field(g, 1.0, seed);
      value[i] = spectral::sup_norm(spectral::idft(spectral::dft(f)) - f) / spectral::sup_norm(f);
      tol[i] = 1e-12;
    } else if (t.check == "parseval") {
      const GridField f = random_field(g, 1.0, seed);
      const double l2 = spectral::l2_norm(f);
      value[i] = std::abs(spectral::sobolev_norm(f, {0.0, false}) - l2) / l2;
      tol[i] = 1e-10;
    } else if (t.check == "naive-dft") {
      const GridField f = random_field(g, 1.0, seed);
      const auto ref = naive_dft(f);
      const SpectralCoeffs got = spectral::dft(f);
      double e = 0.0;
      double s = 0.0;
      for (std::size_t m = 0; m < g.size(); ++m) {
        e = std::max(e, std::abs(got(0, m) - ref[m]));
        s = std::max(s, std::abs(ref[m]));
      }
      value[i] = e / s;
      tol[i] = 1e-12;
    } else if (t.check == "dealias-convolution") {
      const GridField a = random_field(g, 1.0, seed);
      const GridField b = random_field(g, 1.0, seed + 1);
      const auto ah = naive_dft(a);
      const auto bh = naive_dft(b);
      const SpectralCoeffs got = spectral::dft(spectral::dealiased_product(a, b));
      double e = 0.0;
      double s = 0.0;
      for (std::size_t m = 0; m < g.size(); ++m) {
        const auto k = g.wavenumber(m);
        Complex conv = 0.0;
        for (std::size_t q = 0; q < g.size(); ++q) {
          spectral::Index r = k;
          const auto kq = g.wavenumber(q);
          for (int ax = 0; ax < t.d; ++ax) r[ax] -= kq[ax];
          if (g.contains_mode(r)) conv += ah[q] * bh[g.mode_index(r)];
        }
        e = std::max(e, std::abs(got(0, m) - conv));
        s = std::max(s, std::abs(conv));
      }
      value[i] = e / s;
      tol[i] = 1e-12;
    } else {
      const GridField u = random_field(g, 1.0, seed, t.d);
      const GridField pu = spectral::leray_project(u);
      if (t.check == "leray-idempotence") {
        value[i] = spectral::sup_norm(spectral::leray_project(pu) - pu);
      } else {
        value[i] = spectral::max_divergence(pu);
      }
      tol[i] = 1e-10;
    }
  });

  Report r;
  r.kind = c.kind;
  r.table.header = {"check", "d", "N", "value", "tolerance", "pass"};
  std::map<std::string, std::pair<double, double>> worst;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const bool ok = value[i] <= tol[i];
    r.table.rows.push_back({tasks[i].check, std::to_string(tasks[i].d), std::to_string(tasks[i].N), num(value[i]),
                            num(tol[i]), ok ? "1" : "0"});
    auto& w = worst[tasks[i].check];
    w.first = std::max(w.first, value[i]);
    w.second = tol[i];
  }
  for (const auto& [name, w] : worst) r.checks.push_back(check_le(name, w.first, w.second, "worst over d and N"));
  return r;
}

// ---------------------------------------------------------------- darcy-converge

Report darcy_converge(const ExperimentConfig& c) {
  const Params p(c);
  const int d = p.positive_int("d");
  const double lambda = p.positive("lambda");
  const int k = p.positive_int("k");
  const auto Ns = p.get<std::vector<int>>("Ns");
  const double amp = p.get<double>("amplitude");
  const int pairs = p.positive_int("lipschitz_pairs");
  const double margin = p.get<double>("slope_margin");
  if (Ns.size() < 2) throw ConfigInvalid("darcy-converge needs at least two resolutions");

  struct Row {
    int K = 0;
    double l2 = 0.0;
    double h1 = 0.0;
    double lip = 0.0;
    double sup = 0.0;
    double seconds = 0.0;
  };
  std::vector<Row> rows(Ns.size());
  parallel_for(static_cast<int>(Ns.size()), c.jobs, [&](int i) {
    const int N = Ns[i];
    const Stopwatch sw;
    const GridField a = darcy::trig_coefficient(Grid(d, 2 * N), amp);
    const GridField f = darcy::manufactured_source(a);
    const darcy::DarcySolution sol = darcy::solve({a, f, lambda, k, N});
    const GridField exact = darcy::manufactured_solution(Grid(d, N));
    rows[i].K = sol.iterations;
    rows[i].l2 = darcy::l2_error(sol.u, exact);
    rows[i].h1 = darcy::h1_error(sol.u, exact);
    rows[i].seconds = sw.seconds();
    const darcy::PreparedCoefficients pc = darcy::prepare_coefficients(a, f, N);
    rows[i].lip = darcy::lipschitz_estimate(pc, pairs, task_seed(c.seed, i));
    rows[i].sup = pc.a_tilde_sup();
  });

  Report r;
  r.kind = c.kind;
  r.table.header = {"N", "K", "err_L2", "err_H1", "lipschitz_est", "seconds"};
  std::vector<double> n;
  std::vector<double> h1;
  std::vector<double> l2;
  double lip_excess = -INFINITY;
  double sup_max = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const Row& w = rows[i];
    r.table.rows.push_back({std::to_string(Ns[i]), std::to_string(w.K), num(w.l2), num(w.h1), num(w.lip),
                            format_seconds(w.seconds, c.timing)});
    n.push_back(Ns[i]);
    h1.push_back(w.h1);
    l2.push_back(w.l2);
    lip_excess = std::max(lip_excess, w.lip - w.sup);
    sup_max = std::max(sup_max, w.sup);
  }
  const double slope = fit_rate(n, h1, RateSense::resolution);
  r.slopes["H1"] = slope;
  r.slopes["L2"] = fit_rate(n, l2, RateSense::resolution);
  const auto local = local_rates(n, h1, RateSense::resolution);
  for (std::size_t i = 0; i < local.size(); ++i) r.metrics["local_rate_H1_" + std::to_string(i)] = local[i];
  r.checks.push_back({"h1-slope", slope >= k - margin, slope, k - margin, "fitted H1 slope >= k - margin"});
  r.checks.push_back(check_le("contraction", lip_excess, 1e-8, "max over N of lipschitz_est - sup|a_tilde|"));
  r.checks.push_back(check_le("coercivity", sup_max, 1.0 - lambda / 2.0, "sup|a_tilde| <= 1 - lambda/2"));
  return r;
}

// ---------------------------------------------------------------- ns-converge

Report ns_converge(const ExperimentConfig& c) {
  const Params p(c);
  const std::string scheme_name = p.get<std::string>("scheme");
  if (scheme_name != "first" && scheme_name != "second") throw ConfigInvalid("scheme must be 'first' or 'second'");
  const ns::Scheme scheme = scheme_name == "first" ? ns::Scheme::first : ns::Scheme::second;
  const int N = p.positive_int("N");
  const double nu = p.get<double>("nu");
  const double T = p.positive("T");
  const auto taus = p.get<std::vector<double>>("taus");
  const bool cfl = p.get<bool>("enforce_cfl");
  const double lo = p.is_null("slope_min") ? (scheme == ns::Scheme::first ? 0.8 : 1.7) : p.get<double>("slope_min");
  const double hi = p.is_null("slope_max") ? (scheme == ns::Scheme::first ? 1.2 : 2.3) : p.get<double>("slope_max");
  if (taus.size() < 2) throw ConfigInvalid("ns-converge needs at least two time steps");

  const GridField u0 = ns::taylor_green(2, nu, 0.0, N);
  const GridField exact = ns::taylor_green(2, nu, T, N);
  std::vector<ns::NsConfig> configs;
  for (double tau : taus) {
    ns::NsConfig nc;
    nc.d = 2;
    nc.N = N;
    nc.nu = nu;
    nc.T = T;
    nc.tau = tau;
    nc.U = spectral::l2_norm(u0);
    nc.u0 = u0;
    nc.enforce_cfl = cfl;
    configs.push_back(ns::with_integral_steps(nc));
    ns::validate(configs.back());
  }
  struct Row {
    int kappa = 0;
    double err = 0.0;
    double ratio = 0.0;
    double seconds = 0.0;
  };
  std::vector<Row> rows(taus.size());
  parallel_for(static_cast<int>(taus.size()), c.jobs, [&](int i) {
    const Stopwatch sw;
    const ns::Trajectory tr = ns::run(configs[i], scheme);
    rows[i] = {tr.kappa, spectral::l2_norm(tr.states.back().u - exact), tr.max_energy_ratio, sw.seconds()};
  });

  Report r;
  r.kind = c.kind;
  r.table.header = {"tau", "N", "kappa0", "err_L2_final", "energy_max_ratio", "seconds"};
  std::vector<double> t;
  std::vector<double> e;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    r.table.rows.push_back({num(configs[i].tau), std::to_string(N), std::to_string(rows[i].kappa), num(rows[i].err),
                            num(rows[i].ratio), format_seconds(rows[i].seconds, c.timing)});
    t.push_back(configs[i].tau);
    e.push_back(rows[i].err);
  }
  const double slope = fit_rate(t, e, RateSense::step);
  r.slopes["L2"] = slope;
  if (scheme == ns::Scheme::second) {
    // same scheme started from the exact u^1, isolating the startup error
    std::vector<double> e_exact(taus.size());
    parallel_for(static_cast<int>(taus.size()), c.jobs, [&](int i) {
      const ns::NsConfig& nc = configs[i];
      ns::NsState prev = ns::make_state(u0);
      ns::NsState cur = ns::make_state(ns::taylor_green(2, nu, nc.tau, N), 1, nc.tau);
      for (int n = 1; n < ns::step_count(nc.T, nc.tau); ++n) {
        ns::NsState next = ns::step_second_order(prev, cur, nc);
        prev = std::move(cur);
        cur = std::move(next);
      }
      e_exact[i] = spectral::l2_norm(cur.u - exact);
    });
    r.slopes["L2_exact_startup"] = fit_rate(t, e_exact, RateSense::step);
  }
  r.checks.push_back({"l2-slope", slope >= lo && slope <= hi, slope, hi,
                      "fitted slope in [" + num(lo) + ", " + num(hi) + "]"});
  return r;
}

// ---------------------------------------------------------------- darcy-emulate

Report darcy_emulate(const ExperimentConfig& c) {
  const Params p(c);
  const int d = p.positive_int("d");
  const double lambda = p.positive("lambda");
  const int k = p.positive_int("k");
  const auto Ns = p.get<std::vector<int>>("Ns");
  const double eps = p.positive("epsilon");
  const int probes = p.positive_int("probes");
  const bool strict = p.get<bool>("strict");
  const double amp = p.get<double>("amplitude");
  const double max_spread = p.positive("max_spread");

  struct Row {
    fno::SizeReport size;
    double err = 0.0;
    double build = 0.0;
    double eval = 0.0;
    double h = 0.0;
  };
  std::vector<Row> rows(Ns.size());
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const int N = Ns[i];
    const GridField f = darcy::manufactured_source(darcy::trig_coefficient(Grid(d, 2 * N), amp));
    emulation::DarcyEmulatorSpec s;
    s.f = f;
    s.lambda = lambda;
    s.N = N;
    s.k = k;
    s.options.epsilon = eps;
    s.options.strict = strict;
    s.seed = task_seed(c.seed, 1000 + i);
    const Stopwatch sw;
    const fno::PsiFno net = emulation::build_darcy_emulator(s);
    rows[i].build = sw.seconds();
    rows[i].size = fno::size_report(net);
    rows[i].h = net.metadata().at("product_h");
    std::vector<double> errs(probes);
    const Stopwatch ev;
    parallel_for(probes, c.jobs, [&](int q) {
      const GridField a =
          darcy::random_decay_coefficient(Grid(d, 2 * N), 1.0 - lambda, 0.5, 6, task_seed(c.seed, 100 * i + q));
      const darcy::DarcySolution sol = darcy::solve({a, f, lambda, k, N});
      errs[q] = darcy::h1_error(fno::fno_forward(net, a), sol.u);
    });
    rows[i].eval = ev.seconds();
    rows[i].err = *std::max_element(errs.begin(), errs.end());
  }

  Report r;
  r.kind = c.kind;
  r.table.header = {"N", "depth", "lift", "width", "size", "product_h", "max_err_H1", "build_seconds", "eval_seconds"};
  std::vector<double> depth_ratio;
  std::vector<double> width_ratio;
  double worst = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const Row& w = rows[i];
    r.table.rows.push_back({std::to_string(Ns[i]), std::to_string(w.size.depth), std::to_string(w.size.lift),
                            std::to_string(w.size.width), std::to_string(w.size.size), num(w.h), num(w.err),
                            format_seconds(w.build, c.timing), format_seconds(w.eval, c.timing)});
    depth_ratio.push_back(w.size.depth / std::log(static_cast<double>(Ns[i])));
    width_ratio.push_back(w.size.width / std::pow(static_cast<double>(Ns[i]), d));
    worst = std::max(worst, w.err);
    r.metrics["depth_over_logN_" + std::to_string(Ns[i])] = depth_ratio.back();
    r.metrics["width_over_Nd_" + std::to_string(Ns[i])] = width_ratio.back();
  }
  r.checks.push_back(check_le("emulator-h1-error", worst, eps, "max over N and probes"));
  if (Ns.size() > 1) {
    r.checks.push_back(check_le("depth-log-scaling", spread(depth_ratio), max_spread, "max/min of depth/log N"));
    r.checks.push_back(check_le("width-volume-scaling", spread(width_ratio), max_spread, "max/min of width/N^d"));
  }
  return r;
}

// ---------------------------------------------------------------- ns-emulate

Report ns_emulate(const ExperimentConfig& c) {
  const Params p(c);
  const int N = p.positive_int("N");
  const int steps = p.positive_int("steps");
  const double nu = p.get<double>("nu");
  const double eps = p.positive("epsilon");
  const int randoms = p.get<int>("random_probes");
  const double frac = p.positive("cfl_fraction");
  const bool strict = p.get<bool>("strict");

  ns::NsConfig nc;
  nc.d = 2;
  nc.N = N;
  nc.nu = nu;
  nc.u0 = ns::taylor_green(2, nu, 0.0, N);
  nc.U = spectral::l2_norm(nc.u0);
  nc.tau = frac * ns::max_cfl_timestep(nc.U, N, 2);
  nc.T = steps * nc.tau;
  ns::validate(nc);

  std::vector<GridField> inits{nc.u0};
  for (int q = 0; q < randoms; ++q) {
    inits.push_back(ns::random_divergence_free(Grid(2, N), nc.U, 1.0, task_seed(c.seed, q)));
  }
  emulation::NsEmulatorSpec s;
  s.config = nc;
  s.options.epsilon = eps;
  s.options.strict = strict;
  s.seed = task_seed(c.seed, 999);
  const Stopwatch sw;
  const fno::PsiFno net = emulation::build_ns_emulator(s);
  const double build = sw.seconds();

  std::vector<double> errs(inits.size());
  parallel_for(static_cast<int>(inits.size()), c.jobs, [&](int q) {
    ns::NsConfig cq = nc;
    cq.u0 = inits[q];
    const ns::Trajectory tr = ns::run(cq, ns::Scheme::first);
    errs[q] = spectral::l2_norm(fno::fno_forward(net, inits[q]) - spectral::resample(tr.states.back().u, 2 * N));
  });

  Report r;
  r.kind = c.kind;
  r.table.header = {"probe", "initial", "err_L2"};
  for (std::size_t q = 0; q < inits.size(); ++q) {
    r.table.rows.push_back({std::to_string(q), q == 0 ? "taylor-green" : "random", num(errs[q])});
  }
  const auto size = fno::size_report(net);
  r.metrics["depth"] = size.depth;
  r.metrics["width"] = static_cast<double>(size.width);
  r.metrics["tau"] = nc.tau;
  r.metrics["kappa"] = net.metadata().at("kappa");
  r.metrics["step_lipschitz"] = net.metadata().at("step_lipschitz");
  r.metrics["block_epsilon"] = net.metadata().at("block_epsilon");
  r.metrics["product_h"] = net.metadata().at("product_h");
  if (c.timing) r.metrics["build_seconds"] = build;
  r.checks.push_back(check_le("trajectory-end-error", *std::max_element(errs.begin(), errs.end()), eps,
                              "Taylor-Green and random initial fields"));
  const int expected = 1 + 3 * steps * static_cast<int>(net.metadata().at("kappa"));
  r.checks.push_back({"depth-bookkeeping", size.depth == expected, static_cast<double>(size.depth),
                      static_cast<double>(expected), "1 + 3 n_T kappa0"});
  return r;
}

// ---------------------------------------------------------------- ft-emulate

Report ft_emulate(const ExperimentConfig& c) {
  const Params p(c);
  const auto dims = p.get<std::vector<int>>("dims");
  const auto Ns = p.get<std::vector<int>>("Ns");
  const double B = p.positive("B");
  const double eps = p.positive("epsilon");
  const int probes = p.positive_int("probes");
  const bool strict = p.get<bool>("strict");

  emulation::EmulatorOptions o;
  o.epsilon = eps;
  o.strict = strict;
  Report r;
  r.kind = c.kind;
  r.table.header = {"d", "N", "probe", "ft_sup_err", "roundtrip_sup_err"};
  double worst_ft = 0.0;
  double worst_rt = 0.0;
  for (int d : dims) {
    for (int N : Ns) {
      const fno::PsiFno ft = emulation::build_ft_emulator(d, N, B, o);
      const fno::PsiFno ift = emulation::build_ift_emulator(d, N, B, o);
      const fno::PsiFno both = fno::compose(ift, ft);
      std::vector<std::pair<double, double>> errs(probes);
      parallel_for(probes, c.jobs, [&](int q) {
        const GridField v = random_field(Grid(d, N), B, task_seed(c.seed, 1000 * d + 100 * N + q));
        const SpectralCoeffs ref = spectral::dft(v);
        const SpectralCoeffs got = emulation::coefficients_from_channels(fno::fno_forward(ft, v), d, N);
        const SpectralCoeffs rt = spectral::dft(fno::fno_forward(both, v));
        for (std::size_t m = 0; m < ref.grid().size(); ++m) {
          errs[q].first = std::max(errs[q].first, std::abs(got(0, m) - ref(0, m)));
          errs[q].second = std::max(errs[q].second, std::abs(rt(0, m) - ref(0, m)));
        }
      });
      for (int q = 0; q < probes; ++q) {
        r.table.rows.push_back(
            {std::to_string(d), std::to_string(N), std::to_string(q), num(errs[q].first), num(errs[q].second)});
        worst_ft = std::max(worst_ft, errs[q].first);
        worst_rt = std::max(worst_rt, errs[q].second);
      }
    }
  }
  r.checks.push_back(check_le("ft-sup-coefficient-error", worst_ft, eps));
  r.checks.push_back(check_le("ift-ft-sup-coefficient-error", worst_rt, eps));
  return r;
}

// ---------------------------------------------------------------- deeponet-export

fno::PsiFno random_net(int d, int N, int da, int dv, int du, int layers, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  auto mat = [&](int rows, int cols) {
    fno::Matrix m(rows, cols);
    for (double& x : m.data) x = g(rng);
    return m;
  };
  const Grid grid(d, N);
  std::vector<fno::FnoLayer> ls;
  for (int l = 0; l < layers; ++l) {
    fno::FnoLayer L;
    L.W = mat(dv, dv);
    for (int i = 0; i < dv; ++i) L.b.constant.push_back(g(rng));
    std::vector<double> field(grid.size());
    for (double& x : field) x = g(rng);
    L.b.fields.push_back({0, field});
    L.P = fno::FourierMultiplier(d, width);
    for (int o = 0; o < dv; ++o) {
      for (int i = 0; i < dv; ++i) {
        const double a = g(rng);
        const double b = g(rng);
        const double s = g(rng);
        // even real part, odd imaginary part
        L.P.add_symbol(o, i, [=](const spectral::Index& k) {
          const double t = k[0] + 2.0 * k[1] + 3.0 * k[2];
          return Complex(a * std::cos(t) + s, b * std::sin(t));
        });
      }
    }
    ls.push_back(std::move(L));
  }
  return fno::PsiFno(grid, fno::Activation(), mat(dv, da), std::move(ls), mat(du, dv));
}

Report deeponet_export(const ExperimentConfig& c) {
  const Params p(c);
  const int d = p.positive_int("d");
  const int N = p.positive_int("N");
  const int dv = p.positive_int("d_v");
  const int da = p.positive_int("d_a");
  const int du = p.positive_int("d_u");
  const int layers = p.get<int>("layers");
  const int width = p.get<int>("multiplier_width");
  const int probes = p.positive_int("probes");
  const double tol = p.positive("tolerance");

  const fno::PsiFno net = random_net(d, N, da, dv, du, layers, width, task_seed(c.seed, 0));
  emulation::DeepOnetExport ex = emulation::to_deeponet(net, 1.0);
  if (p.get<bool>("approximate_trunk")) {
    std::vector<GridField> inputs;
    for (int q = 0; q < 4; ++q) inputs.push_back(random_field(net.grid(), 1.0, task_seed(c.seed, 5000 + q), da));
    emulation::attach_approximate_trunk(ex, p.positive("trunk_epsilon"), inputs, task_seed(c.seed, 1));
  }

  std::filesystem::create_directories(c.out);
  const std::string base = (std::filesystem::path(c.out) / "deeponet").string();
  emulation::write_deeponet(ex, base);
  const emulation::DeepOnetExport back = emulation::read_deeponet(base + ".json");

  std::mt19937_64 rng(task_seed(c.seed, 2));
  std::uniform_real_distribution<double> angle(0.0, spectral::kTwoPi);
  Report r;
  r.kind = c.kind;
  r.table.header = {"probe", "abs_diff", "scale", "reload_diff"};
  double worst = 0.0;
  double reload = 0.0;
  for (int q = 0; q < probes; ++q) {
    const GridField a = random_field(net.grid(), 1.0, task_seed(c.seed, 100 + q), da);
    spectral::Point y{};
    for (int i = 0; i < d; ++i) y[i] = angle(rng);
    const auto ref = fno::fno_evaluate_at(net, a, y);
    const auto got = ex.evaluate(a, y);
    const auto again = back.evaluate(a, y);
    double diff = 0.0;
    double scale = 0.0;
    double rd = 0.0;
    for (int ch = 0; ch < du; ++ch) {
      diff = std::max(diff, std::abs(ref[ch] - got[ch]));
      scale = std::max(scale, std::abs(ref[ch]));
      rd = std::max(rd, std::abs(again[ch] - got[ch]));
    }
    r.table.rows.push_back({std::to_string(q), num(diff), num(scale), num(rd)});
    worst = std::max(worst, diff / std::max(scale, 1.0));
    reload = std::max(reload, rd);
  }
  const auto size = fno::size_report(net);
  r.checks.push_back(check_le("off-grid-agreement", worst, tol, "|sum beta e - net(a)(y)| / max(1, scale)"));
  r.checks.push_back({"width-equality", ex.width() == size.width, static_cast<double>(ex.width()),
                      static_cast<double>(size.width), "width(beta) = width(net)"});
  r.checks.push_back({"depth-equality", ex.depth() == size.depth, static_cast<double>(ex.depth()),
                      static_cast<double>(size.depth), "depth(beta) = depth(net)"});
  r.checks.push_back(check_le("gram-defect", emulation::gram_defect(ex.trunk, d, N), 1e-10));
  r.checks.push_back(check_le("reload-agreement", reload, 0.0, "export read back from disk"));
  r.metrics["p"] = ex.p();
  if (ex.approx_trunk) {
    r.metrics["trunk_target"] = ex.approx_trunk->target;
    r.metrics["trunk_achieved"] = ex.approx_trunk->achieved;
    r.metrics["trunk_b_bar"] = ex.approx_trunk->b_bar;
  }
  return r;
}

// ---------------------------------------------------------------- property-suite

Report property_suite(const ExperimentConfig& c) {
  const Params p(c);
  const int N = p.positive_int("N");
  const double nu = p.get<double>("nu");
  const int steps = p.positive_int("steps");
  const double U = p.positive("U");
  const double frac = p.positive("cfl_fraction");
  const int kref = p.positive_int("reference_kappa");

  ns::NsConfig nc;
  nc.d = 2;
  nc.N = N;
  nc.nu = nu;
  nc.U = U;
  nc.u0 = ns::random_divergence_free(Grid(2, N), U, 1.0, task_seed(c.seed, 0));
  nc.tau = frac * ns::max_cfl_timestep(U, N, 2);
  nc.T = steps * nc.tau;
  ns::validate(nc);

  Report r;
  r.kind = c.kind;
  std::vector<Check> checks;

  // energy non-increasing with converged inner iterations
  ns::NsConfig conv = nc;
  conv.inner_iterations = kref;
  const ns::Trajectory ref = ns::run(conv, ns::Scheme::first, true);
  double rise = -INFINITY;
  for (std::size_t n = 1; n < ref.states.size(); ++n) {
    rise = std::max(rise, (ref.states[n].energy - ref.states[n - 1].energy) / ref.states[0].energy);
  }
  checks.push_back(check_le("ns-energy-nonincreasing", rise, 1e-12, "max relative energy increase per step"));

  // a-priori bound with kappa0 iterations
  const ns::Trajectory tr = ns::run(nc, ns::Scheme::first, true);
  const double u0n = spectral::l2_norm(nc.u0);
  double growth = 0.0;
  for (const auto& s : tr.states) growth = std::max(growth, spectral::l2_norm(s.u) / u0n);
  checks.push_back(check_le("ns-norm-bound", growth, std::numbers::e, "max_n |u^n| / |u^0|"));

  // inner iterates approach the implicit step at rate 1/2
  double decay = 0.0;
  for (std::size_t n = 0; n + 1 < tr.states.size(); ++n) {
    const GridField& un = tr.states[n].u;
    const auto it = ns::picard_iterates_first(un, nu, nc.tau, kref);
    const GridField& star = it.back();
    const double base = spectral::l2_norm(un);
    for (int k = 1; k <= tr.kappa; ++k) {
      decay = std::max(decay, spectral::l2_norm(star - it[k]) / (std::ldexp(base, -k)));
    }
  }
  checks.push_back(check_le("ns-inner-decay", decay, 1.0 + 1e-6, "max |u* - w^k| / (2^-k |u^n|)"));

  // rate fitting sanity
  const std::vector<double> Ns{1.0, 2.0, 4.0};
  const std::vector<double> halves{1.0, 0.5, 0.25};
  checks.push_back(check_le("fit-rate-exact", std::abs(fit_rate(Ns, halves, RateSense::resolution) - 1.0), 1e-12));

  // product network on [-4, 4]^2
  emulation::ProductNetSpec ps;
  ps.B = 4.0;
  ps.epsilon = 1e-4;
  const emulation::ProductNet prod = emulation::build_product_net(fno::Activation(), ps);
  checks.push_back(check_le("product-net", std::abs(prod(2.0, 3.0) - 6.0), 1e-4, "|N(2,3) - 6|"));

  r.table.header = {"check", "value", "tolerance", "pass"};
  for (const auto& ch : checks) r.table.rows.push_back({ch.name, num(ch.value), num(ch.tolerance), ch.pass ? "1" : "0"});
  r.checks = std::move(checks);
  r.metrics["tau"] = nc.tau;
  r.metrics["kappa0"] = tr.kappa;
  return r;
}

}  // namespace

Report execute(const ExperimentConfig& c) {
  switch (c.kind) {
    case Kind::spectral_check: return spectral_check(c);
    case Kind::darcy_converge: return darcy_converge(c);
    case Kind::ns_converge: return ns_converge(c);
    case Kind::darcy_emulate: return darcy_emulate(c);
    case Kind::ns_emulate: return ns_emulate(c);
    case Kind::ft_emulate: return ft_emulate(c);
    case Kind::deeponet_export: return deeponet_export(c);
    case Kind::property_suite: return property_suite(c);
  }
  throw ConfigInvalid("unhandled experiment kind");
}

}  // namespace psifno::harness
