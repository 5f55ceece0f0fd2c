// Command line front end: growth runs, wave and flashing realizations,
// potential-theory queries, tail bound evaluation, and the Monte Carlo
// probe suite, all seeded and reproducible byte for byte.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "idla/experiments.hpp"
#include "idla/flashing.hpp"
#include "idla/greens.hpp"
#include "idla/growth.hpp"
#include "idla/io.hpp"
#include "idla/parallel.hpp"
#include "idla/stats.hpp"
#include "idla/tails.hpp"
#include "idla/waves.hpp"

namespace {

using idla::io::fmt;
using ordered_json = nlohmann::ordered_json;

struct GlobalOptions {
  int threads = 0;
  std::string out_dir;
  std::string command;
};

GlobalOptions g_opts;

std::string out_path(const std::string& file) {
  if (file.empty() || g_opts.out_dir.empty() || file.front() == '/') return file;
  return g_opts.out_dir + "/" + file;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) idla::throw_usage("empty list: '" + text + "'");
  return out;
}

template <int D>
idla::Site<D> parse_site(const std::string& text) {
  const auto vals = parse_list(text);
  if (vals.size() != static_cast<std::size_t>(D))
    idla::throw_usage("site '" + text + "' must have " + std::to_string(D) + " coordinates");
  idla::Site<D> s;
  for (int i = 0; i < D; ++i) s[i] = static_cast<std::int32_t>(vals[static_cast<std::size_t>(i)]);
  return s;
}

template <class Fn>
int with_dim(int dim, Fn&& fn) {
  switch (dim) {
    case 2: return fn(std::integral_constant<int, 2>{});
    case 3: return fn(std::integral_constant<int, 3>{});
    case 4: return fn(std::integral_constant<int, 4>{});
    default:
      idla::throw_usage("unsupported dimension " + std::to_string(dim) +
                        " (the model needs d >= 2; this build dispatches d = 2, 3, 4)");
  }
}

idla::io::Manifest make_manifest(const std::string& schema, std::uint64_t seed) {
  idla::io::Manifest m;
  m.schema = schema;
  m.seed = seed;
  m.command = g_opts.command;
  return m;
}

ordered_json manifest_json(const idla::io::Manifest& m) {
  ordered_json meta;
  meta["schema"] = m.schema;
  meta["version"] = idla::kVersion;
  meta["generator"] = idla::kGeneratorId;
  meta["seed"] = m.seed;
  meta["command"] = m.command;
  for (const auto& [k, v] : m.params) meta[k] = v;
  return meta;
}

// ---------------------------------------------------------------- grow ----

struct GrowArgs {
  int dim = 2;
  double n = -1.0;
  std::int64_t count = -1;
  double stopped = -1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
};

template <int D>
int run_grow(const GrowArgs& a) {
  using namespace idla;
  std::int64_t count = a.count;
  if (count < 0) {
    if (a.n < 0) throw_usage("grow needs --n or --count");
    count = ball_site_count<D>(a.n);
  }
  const auto eta = Configuration<D>::point_mass(Site<D>{}, count);
  Cluster<D> cluster = a.stopped > 0 ? grow_stopped<D>(eta, a.stopped, a.seed)
                                     : grow<D>(eta, a.seed);
  auto manifest = make_manifest("idla.cluster/1", a.seed);
  manifest.add_value("dim", D);
  if (a.n >= 0) manifest.add_value("n", a.n);
  manifest.add_value("explorers", count);
  if (a.stopped > 0) manifest.add_value("stop_radius", a.stopped);

  const std::string path = out_path(a.out);
  if (a.format == "json") {
    ordered_json doc;
    doc["meta"] = manifest_json(manifest);
    ordered_json settles = ordered_json::array();
    for (const auto& s : cluster.settle_order) {
      ordered_json row;
      row["explorer"] = s.explorer;
      row["site"] = s.site.c;
      row["tau"] = s.tau;
      settles.push_back(row);
    }
    doc["settle_order"] = settles;
    ordered_json stops = ordered_json::array();
    for (const auto& [site, n_stopped] : cluster.stopped_on_boundary) {
      ordered_json row;
      row["site"] = site.c;
      row["count"] = n_stopped;
      stops.push_back(row);
    }
    doc["stopped_on_boundary"] = stops;
    io::write_text(path, doc.dump(1) + "\n");
  } else if (a.format == "csv") {
    std::vector<std::string> cols = {"record", "explorer"};
    for (int i = 0; i < D; ++i) cols.push_back("c" + std::to_string(i));
    cols.push_back("value");
    io::CsvWriter csv(path, manifest, cols);
    for (const auto& s : cluster.settle_order) {
      std::vector<std::string> row = {"settle", fmt(s.explorer)};
      for (int i = 0; i < D; ++i) row.push_back(fmt(std::int64_t(s.site[i])));
      row.push_back(fmt(s.tau));
      csv.row(row);
    }
    for (const auto& [site, n_stopped] : cluster.stopped_on_boundary) {
      std::vector<std::string> row = {"stopped", "-1"};
      for (int i = 0; i < D; ++i) row.push_back(fmt(std::int64_t(site[i])));
      row.push_back(fmt(n_stopped));
      csv.row(row);
    }
  } else {
    throw_usage("unknown format '" + a.format + "'");
  }
  std::cerr << "grow: settled " << cluster.settled_total() << ", stopped "
            << cluster.stopped_total << " -> " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------- scan ----

struct ScanArgs {
  int dim = 3;
  std::string n_list = "10,15,20";
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out;
};

template <int D>
int run_scan(const ScanArgs& a) {
  using namespace idla;
  experiments::ScanOptions opt;
  opt.threads = g_opts.threads;
  const auto scan = experiments::scan_fluctuations<D>(parse_list(a.n_list), a.trials, a.seed, opt);
  auto manifest = make_manifest("idla.scan/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("trials", a.trials);
  io::CsvWriter csv(out_path(a.out), manifest,
                    {"n", "trial", "delta_i", "delta_o", "ratio_i", "ratio_o", "normalizer",
                     "degenerate_normalizer"});
  for (const auto& row : scan.rows) {
    for (std::size_t t = 0; t < row.samples.size(); ++t) {
      const auto& s = row.samples[t];
      const double ri = row.degenerate_normalizer ? s.delta_i : s.delta_i / row.normalizer;
      const double ro = row.degenerate_normalizer ? s.delta_o : s.delta_o / row.normalizer;
      csv.row({fmt(row.n), fmt(std::int64_t(t)), fmt(s.delta_i), fmt(s.delta_o), fmt(ri), fmt(ro),
               fmt(row.normalizer), row.degenerate_normalizer ? "1" : "0"});
    }
  }
  ordered_json summary;
  summary["alpha_hat"] = scan.alpha_hat;
  summary["beta_hat"] = scan.beta_hat;
  for (const auto& row : scan.rows) {
    std::vector<double> di, dout;
    for (const auto& s : row.samples) {
      di.push_back(s.delta_i);
      dout.push_back(s.delta_o);
    }
    ordered_json r;
    r["n"] = row.n;
    r["mean_delta_i"] = row.mean_inner();
    r["median_delta_i"] = stats::median(di);
    r["max_delta_i"] = stats::max_value(di);
    r["q90_delta_i"] = stats::quantile(di, 0.9);
    r["mean_delta_o"] = row.mean_outer();
    r["median_delta_o"] = stats::median(dout);
    r["max_delta_o"] = stats::max_value(dout);
    r["q90_delta_o"] = stats::quantile(dout, 0.9);
    r["inner_ratio"] = row.inner_ratio();
    r["outer_ratio"] = row.outer_ratio();
    summary["rows"].push_back(r);
  }
  std::cout << summary.dump(1) << "\n";
  return 0;
}

// --------------------------------------------------------------- probe ----

struct ProbeArgs {
  int dim = 2;
  double radius = 6.0;
  std::string radii;
  std::string amplitudes = "1,2,3";
  double beta = 8.0;  // desk-scale observability threshold for the origin hit
  std::string densities = "0.2,0.5,0.8";
  double height = 2.0;
  double alpha = 4.0;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

template <int D>
int run_probe_covering(const ProbeArgs& a) {
  using namespace idla;
  experiments::CoveringOptions opt;
  opt.alpha = a.alpha;
  opt.threads = g_opts.threads;
  auto manifest = make_manifest("idla.probe.covering/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("radius", a.radius);
  manifest.add_value("alpha", a.alpha);
  manifest.add_value("trials", a.trials);
  io::CsvWriter csv(out_path(a.out), manifest,
                    {"amplitude", "trials", "noncover_count", "freq", "wilson_halfwidth",
                     "log_freq_adjusted"});
  std::vector<double> xs;
  std::vector<experiments::ProbeResult> cells;
  for (double A : parse_list(a.amplitudes)) {
    const auto r =
        experiments::probe_covering<D>(a.radius, A, a.trials, derive_seed(a.seed, std::llround(A * 1000)), opt);
    csv.row({fmt(A), fmt(r.trials), fmt(r.successes), fmt(r.frequency), fmt(r.wilson_halfwidth),
             fmt(experiments::log_freq_adjusted(r.successes, r.trials))});
    xs.push_back(A);
    cells.push_back(r);
  }
  const auto decay = experiments::fit_decay(xs, cells);
  ordered_json summary;
  summary["decay_slope_vs_A"] = decay.fit.slope;
  summary["fit_r2"] = decay.fit.r2;
  summary["zero_cells_adjusted"] = decay.adjusted;
  std::cout << summary.dump(1) << "\n";
  return 0;
}

template <int D>
int run_probe_origin(const ProbeArgs& a) {
  using namespace idla;
  experiments::OriginHitOptions opt;
  opt.threads = g_opts.threads;
  auto manifest = make_manifest("idla.probe.origin/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("beta", a.beta);
  manifest.add_value("trials", a.trials);
  io::CsvWriter csv(out_path(a.out), manifest,
                    {"radius", "trials", "hit_count", "freq", "wilson_halfwidth",
                     "log_freq_adjusted"});
  std::vector<double> xs;
  std::vector<experiments::ProbeResult> cells;
  const std::string radii = a.radii.empty() ? fmt(a.radius) : a.radii;
  for (double R : parse_list(radii)) {
    const auto r = experiments::probe_origin_hit<D>(R, a.beta, a.trials,
                                                    derive_seed(a.seed, std::llround(R * 1000)), opt);
    csv.row({fmt(R), fmt(r.trials), fmt(r.successes), fmt(r.frequency), fmt(r.wilson_halfwidth),
             fmt(experiments::log_freq_adjusted(r.successes, r.trials))});
    xs.push_back(D == 2 ? R * R / std::log(R) : R * R);
    cells.push_back(r);
  }
  const auto decay = experiments::fit_decay(xs, cells);
  ordered_json summary;
  summary[D == 2 ? "decay_slope_vs_R2_over_logR" : "decay_slope_vs_R2"] = decay.fit.slope;
  summary["fit_r2"] = decay.fit.r2;
  summary["zero_cells_adjusted"] = decay.adjusted;
  std::cout << summary.dump(1) << "\n";
  return 0;
}

template <int D>
int run_probe_traps(const ProbeArgs& a) {
  using namespace idla;
  experiments::TrapProbeOptions opt;
  opt.height_request = a.height;
  opt.threads = g_opts.threads;
  auto manifest = make_manifest("idla.probe.traps/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("radius", a.radius);
  manifest.add_value("height_request", a.height);
  manifest.add_value("trials", a.trials);
  io::CsvWriter csv(out_path(a.out), manifest,
                    {"radius", "density", "trials", "crossed_count", "freq", "wilson_halfwidth",
                     "plain_crossed", "plain_freq", "containment_violations", "height", "shells"});
  for (double density : parse_list(a.densities)) {
    const auto r = experiments::probe_traps<D>(
        a.radius, density, a.trials, derive_seed(a.seed, std::llround(density * 1000)), opt);
    csv.row({fmt(a.radius), fmt(density), fmt(r.flashing.trials), fmt(r.flashing.successes),
             fmt(r.flashing.frequency), fmt(r.flashing.wilson_halfwidth), fmt(r.plain.successes),
             fmt(r.plain.frequency), fmt(r.containment_violations), fmt(r.adjusted_height),
             fmt(r.shell_count)});
  }
  return 0;
}

// --------------------------------------------------------------- waves ----

struct WavesArgs {
  int dim = 2;
  double n = 10.0;
  double height = -1.0;
  bool with_mu = false;
  double L = 2.0;
  bool all_centers = false;
  std::uint64_t seed = 1;
  std::string out;
};

template <int D>
int run_waves(const WavesArgs& a) {
  using namespace idla;
  std::optional<double> h;
  if (a.height > 0) h = a.height;
  const auto run = grow_by_waves<D>(a.n, a.seed, h);
  auto manifest = make_manifest("idla.waves/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("n", a.n);
  manifest.add_value("height", run.height);
  manifest.add_value("explorers", run.explorer_total);
  std::vector<std::string> cols = {"k"};
  for (int i = 0; i < D; ++i) cols.push_back("tile_c" + std::to_string(i));
  cols.push_back("W");
  cols.push_back("mu_estimate");
  cols.push_back("mu_halfwidth");
  io::CsvWriter csv(out_path(a.out), manifest, cols);
  for (const auto& wave : run.waves) {
    auto centers = sphere_sites<D>(Site<D>{}, wave.sphere_radius);
    if (!a.all_centers) centers = thin_centers<D>(centers, run.height / 2.0);
    std::vector<std::vector<Site<D>>> tiles;
    ShellPartition<D> part = ShellPartition<D>::inner(a.n, run.height, wave.k + 1);
    for (const auto& z : centers) tiles.push_back(part.tile(wave.k, z));
    const auto counts = tile_W_counts(wave, tiles);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      std::vector<std::string> row = {fmt(wave.k)};
      for (int c = 0; c < D; ++c) row.push_back(fmt(std::int64_t(centers[i][c])));
      row.push_back(fmt(counts[i]));
      if (a.with_mu) {
        try {
          const auto mu = mu_tile<D>(a.n, run.height, wave.k, tiles[i], a.L);
          row.push_back(fmt(mu.value));
          row.push_back(fmt(mu.halfwidth));
        } catch (const Error&) {
          row.push_back("");
          row.push_back("");
        }
      } else {
        row.push_back("");
        row.push_back("");
      }
      csv.row(row);
    }
  }
  std::cerr << "waves: " << run.waves.size() << " recorded waves, "
            << run.cluster.settled_total() << " settled\n";
  return 0;
}

// ------------------------------------------------------------ flashing ----

struct FlashingArgs {
  int dim = 2;
  double n = 10.0;
  double height = -1.0;
  std::uint64_t seed = 1;
  std::string out;
};

template <int D>
int run_flashing(const FlashingArgs& a) {
  using namespace idla;
  const double h = a.height > 0 ? a.height : wave_height(D, a.n);
  const auto run = flashing_grow<D>(a.n, h, a.seed);
  auto manifest = make_manifest("idla.flashing/1", a.seed);
  manifest.add_value("dim", D);
  manifest.add_value("n", a.n);
  manifest.add_value("height", h);
  std::vector<std::string> cols = {"explorer", "plain_tau", "flash_tau", "flash_stopped"};
  for (int i = 0; i < D; ++i) cols.push_back("plain_c" + std::to_string(i));
  for (int i = 0; i < D; ++i) cols.push_back("flash_c" + std::to_string(i));
  io::CsvWriter csv(out_path(a.out), manifest, cols);
  for (std::size_t i = 0; i < run.explorers.size(); ++i) {
    const auto& e = run.explorers[i];
    std::vector<std::string> row = {fmt(std::int64_t(i)), fmt(e.plain_tau),
                                    e.flash_stopped ? "-1" : fmt(e.flash_tau),
                                    e.flash_stopped ? "1" : "0"};
    for (int c = 0; c < D; ++c) row.push_back(fmt(std::int64_t(e.plain_site[c])));
    for (int c = 0; c < D; ++c) row.push_back(fmt(std::int64_t(e.flash_site[c])));
    csv.row(row);
  }
  std::cerr << "flashing: min settling gap " << run.min_settling_gap() << ", stopped "
            << run.flash_stopped_total << "\n";
  return 0;
}

// -------------------------------------------------------------- greens ----

struct GreensArgs {
  int dim = 2;
  double n = 10.0;
  double radius = 10.0;
  std::string source = "0,0";
  std::string target = "0,0";
  std::string n_list;
  std::string z = "5,0";
  std::string cache = "cache";
  std::string out;
  std::int64_t budget = idla::greens::kDefaultSolveBudget;
};

template <int D>
int run_greens_green(const GreensArgs& a) {
  const double g = idla::greens::green_function<D>(a.n, parse_site<D>(a.source),
                                                   parse_site<D>(a.target), a.budget);
  std::cout << fmt(g) << "\n";
  return 0;
}

template <int D>
int run_greens_hitting(const GreensArgs& a) {
  const double p = idla::greens::hitting_probability<D>(
      parse_site<D>(a.source), parse_site<D>(a.target), a.radius, a.budget);
  std::cout << fmt(p) << "\n";
  return 0;
}

int run_greens_kernel(const GreensArgs& a) {
  const std::string path = out_path(a.cache) + "/potential_kernel_d2_box401.txt";
  const auto kernel = idla::greens::PotentialKernel2D::cached(path);
  const auto z = parse_site<2>(a.z);
  std::cout << fmt(kernel.value(z)) << "\n";
  return 0;
}

template <int D>
int run_greens_gap(const GreensArgs& a) {
  using namespace idla;
  auto manifest = make_manifest("idla.greens.gap/1", 0);
  manifest.add_value("dim", D);
  io::CsvWriter csv(out_path(a.out.empty() ? "gap.csv" : a.out), manifest,
                    {"n", "R", "z_norm", "gap"});
  for (double n : parse_list(a.n_list.empty() ? "5,10,15,20" : a.n_list)) {
    // z: largest-norm site strictly inside B(0,n)
    Site<D> best{};
    std::int64_t best_q = -1;
    visit_ball<D>(Site<D>{}, n, [&](const Site<D>& s, std::int64_t q) {
      if (q > best_q) {
        best_q = q;
        best = s;
      }
    });
    const double gap = greens::mean_value_gap<D>(n, n, best, a.budget);
    csv.row({fmt(n), fmt(n), fmt(norm<D>(best)), fmt(gap)});
  }
  return 0;
}

template <int D>
int run_greens_harmonic(const GreensArgs& a) {
  using namespace idla;
  const auto absorbing = sphere_sites<D>(Site<D>{}, a.radius);
  const auto hm = greens::harmonic_measure<D>(parse_site<D>(a.source), absorbing, a.budget);
  auto manifest = make_manifest("idla.greens.harmonic/1", 0);
  manifest.add_value("dim", D);
  manifest.add_value("radius", a.radius);
  std::vector<std::string> cols;
  for (int i = 0; i < D; ++i) cols.push_back("c" + std::to_string(i));
  cols.push_back("probability");
  io::CsvWriter csv(out_path(a.out.empty() ? "harmonic.csv" : a.out), manifest, cols);
  for (const auto& [site, p] : hm) {
    std::vector<std::string> row;
    for (int i = 0; i < D; ++i) row.push_back(fmt(std::int64_t(site[i])));
    row.push_back(fmt(p));
    csv.row(row);
  }
  return 0;
}

// --------------------------------------------------------------- tails ----

struct TailsArgs {
  double mu = 0.0, xi = 0.0, c = 0.0, kappa = 2.0, s2 = 0.0;
  double lambda = -1.0;
  bool optimize = false;
  std::int64_t grid = 50;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::string out;
};

int run_tails_eval(const TailsArgs& a, idla::tails::Tail which) {
  using namespace idla::tails;
  TailBoundInput in{a.mu, a.xi, a.c, a.kappa, a.s2};
  ordered_json doc;
  if (a.optimize || a.lambda < 0) {
    const auto opt = optimize_lambda(in, which);
    doc["lambda_star"] = opt.lambda;
    doc["log_bound"] = opt.log_bound;
    doc["bound"] = opt.bound;
  } else {
    const double lb = which == Tail::lower ? lower_tail_log_bound(in, a.lambda)
                                           : upper_tail_log_bound(in, a.lambda);
    doc["lambda"] = a.lambda;
    doc["log_bound"] = lb;
    doc["bound"] = std::exp(std::min(0.0, lb));
  }
  std::cout << doc.dump(1) << "\n";
  return 0;
}

int run_tails_validate(const TailsArgs& a) {
  using namespace idla;
  using namespace idla::tails;
  auto manifest = make_manifest("idla.tails.validate/1", a.seed);
  manifest.add_value("trials", a.trials);
  io::CsvWriter csv(out_path(a.out.empty() ? "tails_validate.csv" : a.out), manifest,
                    {"cell", "which", "m_count", "p", "l_count", "q", "xi", "c", "freq", "bound",
                     "holds"});
  std::int64_t failures = 0;
  for (std::int64_t cell = 0; cell < a.grid; ++cell) {
    RandomSource rng(derive_seed(a.seed, 7000 + cell), 0);
    BernoulliSpec spec;
    const int m_count = 50 + static_cast<int>(rng.below(400));
    const int l_count = 20 + static_cast<int>(rng.below(200));
    const double p = 0.05 + 0.5 * rng.real01();
    const double q = 0.05 + 0.4 * rng.real01();
    spec.m_probs.assign(static_cast<std::size_t>(m_count), p);
    spec.l_probs.assign(static_cast<std::size_t>(l_count), q);
    double mu = spec.mu();
    if (mu < 0) {  // keep (H2): shrink L until the means order correctly
      spec.l_probs.resize(static_cast<std::size_t>(m_count * p / (2 * q)));
      mu = spec.mu();
    }
    const bool lower = (cell % 2) == 0;
    const double xi = lower ? mu * (0.2 + 0.4 * rng.real01()) : mu + (1.0 + mu) * rng.real01();
    const double c = lower ? std::floor(rng.real01() * 3.0) : 0.0;
    const auto res = validate_bound(spec, xi, c, a.kappa, lower ? Tail::lower : Tail::upper,
                                    a.trials, derive_seed(a.seed, 9000 + cell));
    if (!res.holds) ++failures;
    csv.row({fmt(cell), lower ? "lower" : "upper", fmt(std::int64_t(spec.m_probs.size())), fmt(p),
             fmt(std::int64_t(spec.l_probs.size())), fmt(q), fmt(xi), fmt(c),
             fmt(res.empirical_freq), fmt(res.analytic_bound), res.holds ? "1" : "0"});
  }
  std::cout << "{\"cells\": " << a.grid << ", \"violations\": " << failures << "}\n";
  return failures == 0 ? 0 : 1;
}

// -------------------------------------------------------------- report ----

struct ReportArgs {
  std::string scan;
  std::string out;
};

int run_report(const ReportArgs& a) {
  using namespace idla;
  std::ifstream in(a.scan);
  if (!in) throw_usage("cannot open scan file " + a.scan);
  std::string line;
  std::vector<std::string> header;
  std::map<double, std::vector<std::array<double, 4>>> by_n;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) header.push_back(cell);
      continue;
    }
    std::stringstream ss(line);
    std::vector<double> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::atof(cell.c_str()));
    if (cells.size() < 6) continue;
    by_n[cells[0]].push_back({cells[2], cells[3], cells[4], cells[5]});
  }
  auto manifest = make_manifest("idla.report/1", 0);
  manifest.add("source", a.scan);
  io::CsvWriter csv(out_path(a.out.empty() ? "report.csv" : a.out), manifest,
                    {"n", "trials", "mean_delta_i", "mean_delta_o", "mean_ratio_i",
                     "mean_ratio_o", "max_delta_i", "max_delta_o"});
  std::printf("%8s %8s %12s %12s %12s %12s\n", "n", "trials", "mean dI", "mean dO", "ratio dI",
              "ratio dO");
  for (const auto& [n, rows] : by_n) {
    std::array<double, 4> sums{};
    std::array<double, 2> maxima{};
    for (const auto& r : rows) {
      for (int i = 0; i < 4; ++i) sums[static_cast<std::size_t>(i)] += r[static_cast<std::size_t>(i)];
      maxima[0] = std::max(maxima[0], r[0]);
      maxima[1] = std::max(maxima[1], r[1]);
    }
    const double m = static_cast<double>(rows.size());
    csv.row({fmt(n), fmt(std::int64_t(rows.size())), fmt(sums[0] / m), fmt(sums[1] / m),
             fmt(sums[2] / m), fmt(sums[3] / m), fmt(maxima[0]), fmt(maxima[1])});
    std::printf("%8g %8zu %12.5g %12.5g %12.5g %12.5g\n", n, rows.size(), sums[0] / m, sums[1] / m,
                sums[2] / m, sums[3] / m);
  }
  return 0;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += " ";
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  g_opts.command = join_args(argc, argv);
  CLI::App app{"internal DLA lattice simulator and experiment harness"};
  app.set_version_flag("--version", std::string(idla::kVersion));
  app.set_config("--config");
  app.add_option("--threads", g_opts.threads, "trial parallelism width (0 = hardware)")
      ->envname("IDLA_THREADS");
  app.add_option("--out-dir", g_opts.out_dir, "directory for relative output paths")
      ->envname("IDLA_OUT_DIR");
  app.require_subcommand(1);

  GrowArgs grow_args;
  auto* grow_cmd = app.add_subcommand("grow", "run one internal DLA growth");
  grow_cmd->add_option("--dim", grow_args.dim, "lattice dimension (2-4)");
  grow_cmd->add_option("--n", grow_args.n, "ball radius; explorers = |B(0,n)|");
  grow_cmd->add_option("--count", grow_args.count, "explicit explorer count");
  grow_cmd->add_option("--stopped", grow_args.stopped, "stop explorers on ∂B(0,R)");
  grow_cmd->add_option("--seed", grow_args.seed, "base seed");
  grow_cmd->add_option("--out", grow_args.out, "output file")->required();
  grow_cmd->add_option("--format", grow_args.format, "json|csv");

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "fluctuation scaling scan");
  scan_cmd->add_option("--dim", scan_args.dim);
  scan_cmd->add_option("--n-list", scan_args.n_list);
  scan_cmd->add_option("--trials", scan_args.trials);
  scan_cmd->add_option("--seed", scan_args.seed);
  scan_cmd->add_option("--out", scan_args.out)->required();

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "Monte Carlo probes");
  probe_cmd->require_subcommand(1);
  auto* cover_cmd = probe_cmd->add_subcommand("covering", "ball covering probe");
  auto* origin_cmd = probe_cmd->add_subcommand("origin", "origin hit probe");
  auto* traps_cmd = probe_cmd->add_subcommand("traps", "trap crossing probe");
  for (auto* cmd : {cover_cmd, origin_cmd, traps_cmd}) {
    cmd->add_option("--dim", probe_args.dim);
    cmd->add_option("--radius", probe_args.radius);
    cmd->add_option("--trials", probe_args.trials);
    cmd->add_option("--seed", probe_args.seed);
    cmd->add_option("--out", probe_args.out)->required();
  }
  cover_cmd->add_option("--amplitudes", probe_args.amplitudes, "comma list of A values");
  cover_cmd->add_option("--alpha", probe_args.alpha, "stopping radius multiplier");
  origin_cmd->add_option("--radii", probe_args.radii, "comma list of R values");
  origin_cmd->add_option("--beta", probe_args.beta, "explorer density");
  traps_cmd->add_option("--densities", probe_args.densities, "comma list of trap-free densities");
  traps_cmd->add_option("--height", probe_args.height, "requested shell height");

  WavesArgs waves_args;
  auto* waves_cmd = app.add_subcommand("waves", "wave realization with per-tile W counts");
  waves_cmd->add_option("--dim", waves_args.dim);
  waves_cmd->add_option("--n", waves_args.n);
  waves_cmd->add_option("--height", waves_args.height, "override h(n)");
  waves_cmd->add_flag("--mu", waves_args.with_mu, "also solve per-tile mu exactly");
  waves_cmd->add_option("--L", waves_args.L, "excluded neighborhood multiplier");
  waves_cmd->add_flag("--all-centers", waves_args.all_centers,
                      "use every sphere site as a tile center (default: thinned)");
  waves_cmd->add_option("--seed", waves_args.seed);
  waves_cmd->add_option("--out", waves_args.out)->required();

  FlashingArgs flashing_args;
  auto* flashing_cmd = app.add_subcommand("flashing", "coupled plain/flashing run");
  flashing_cmd->add_option("--dim", flashing_args.dim);
  flashing_cmd->add_option("--n", flashing_args.n);
  flashing_cmd->add_option("--height", flashing_args.height);
  flashing_cmd->add_option("--seed", flashing_args.seed);
  flashing_cmd->add_option("--out", flashing_args.out)->required();

  GreensArgs greens_args;
  auto* greens_cmd = app.add_subcommand("greens", "potential theory queries");
  greens_cmd->require_subcommand(1);
  auto* gg = greens_cmd->add_subcommand("green", "Green function value");
  auto* gh = greens_cmd->add_subcommand("hitting", "hitting probability");
  auto* gk = greens_cmd->add_subcommand("kernel", "d=2 potential kernel value");
  auto* gp = greens_cmd->add_subcommand("gap", "mean value gap scan");
  auto* gm = greens_cmd->add_subcommand("harmonic", "exit distribution");
  for (auto* cmd : {gg, gh, gp, gm}) {
    cmd->add_option("--dim", greens_args.dim);
    cmd->add_option("--budget", greens_args.budget);
  }
  gg->add_option("--n", greens_args.n);
  gg->add_option("--source", greens_args.source);
  gg->add_option("--target", greens_args.target);
  gh->add_option("--radius", greens_args.radius);
  gh->add_option("--source", greens_args.source);
  gh->add_option("--target", greens_args.target);
  gk->add_option("--z", greens_args.z);
  gk->add_option("--cache", greens_args.cache);
  gp->add_option("--n-list", greens_args.n_list);
  gp->add_option("--out", greens_args.out);
  gm->add_option("--radius", greens_args.radius);
  gm->add_option("--source", greens_args.source);
  gm->add_option("--out", greens_args.out);

  TailsArgs tails_args;
  auto* tails_cmd = app.add_subcommand("tails", "Bernoulli difference tail bounds");
  tails_cmd->require_subcommand(1);
  auto* tl = tails_cmd->add_subcommand("lower", "lower tail bound");
  auto* tu = tails_cmd->add_subcommand("upper", "upper tail bound");
  auto* tv = tails_cmd->add_subcommand("validate", "Monte Carlo dominance grid");
  for (auto* cmd : {tl, tu}) {
    cmd->add_option("--mu", tails_args.mu);
    cmd->add_option("--xi", tails_args.xi);
    cmd->add_option("--s2", tails_args.s2);
    cmd->add_option("--lambda", tails_args.lambda);
    cmd->add_flag("--optimize", tails_args.optimize);
  }
  tl->add_option("--c", tails_args.c);
  tl->add_option("--kappa", tails_args.kappa);
  tv->add_option("--grid", tails_args.grid);
  tv->add_option("--trials", tails_args.trials);
  tv->add_option("--seed", tails_args.seed);
  tv->add_option("--kappa", tails_args.kappa);
  tv->add_option("--out", tails_args.out);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "summarize scan output");
  report_cmd->add_option("--scan", report_args.scan)->required();
  report_cmd->add_option("--out", report_args.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*grow_cmd) return with_dim(grow_args.dim, [&](auto d) { return run_grow<d()>(grow_args); });
    if (*scan_cmd) return with_dim(scan_args.dim, [&](auto d) { return run_scan<d()>(scan_args); });
    if (*cover_cmd)
      return with_dim(probe_args.dim, [&](auto d) { return run_probe_covering<d()>(probe_args); });
    if (*origin_cmd)
      return with_dim(probe_args.dim, [&](auto d) { return run_probe_origin<d()>(probe_args); });
    if (*traps_cmd)
      return with_dim(probe_args.dim, [&](auto d) { return run_probe_traps<d()>(probe_args); });
    if (*waves_cmd)
      return with_dim(waves_args.dim, [&](auto d) { return run_waves<d()>(waves_args); });
    if (*flashing_cmd)
      return with_dim(flashing_args.dim,
                      [&](auto d) { return run_flashing<d()>(flashing_args); });
    if (*gg) return with_dim(greens_args.dim, [&](auto d) { return run_greens_green<d()>(greens_args); });
    if (*gh)
      return with_dim(greens_args.dim, [&](auto d) { return run_greens_hitting<d()>(greens_args); });
    if (*gk) return run_greens_kernel(greens_args);
    if (*gp) return with_dim(greens_args.dim, [&](auto d) { return run_greens_gap<d()>(greens_args); });
    if (*gm)
      return with_dim(greens_args.dim,
                      [&](auto d) { return run_greens_harmonic<d()>(greens_args); });
    if (*tl) return run_tails_eval(tails_args, idla::tails::Tail::lower);
    if (*tu) return run_tails_eval(tails_args, idla::tails::Tail::upper);
    if (*tv) return run_tails_validate(tails_args);
    if (*report_cmd) return run_report(report_args);
  } catch (const idla::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
