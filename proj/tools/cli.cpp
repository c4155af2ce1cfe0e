#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "gilbert/analytic_recurrence.hpp"
#include "gilbert/exact_moments.hpp"
#include "gilbert/meanfield.hpp"
#include "gilbert/numeric_error.hpp"
#include "gilbert/parallel.hpp"
#include "gilbert/sim_full.hpp"
#include "gilbert/sim_half.hpp"
#include "gilbert/tessellation.hpp"

#ifndef GILBERT_VERSION
#define GILBERT_VERSION "0.0.0"
#endif

namespace gilbert::cli {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "gilbert-csv v1";

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const double d = std::get<double>(c);
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", d);
}

json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  const double d = std::get<double>(c);
  if (!std::isfinite(d)) return cell_text(c);
  return d;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out = fmt::format("# {}\n", kSchema);
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& t) {
  json j;
  j["schema"] = kSchema;
  j["columns"] = t.columns;
  j["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    j["rows"].push_back(std::move(r));
  }
  return j.dump(1) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw std::invalid_argument(fmt::format("invalid grid value '{}'", s));
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("grid must be start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), h = number(parts[2]);
    if (!(h > 0.0) || b < a) throw std::invalid_argument("grid needs step > 0 and stop >= start");
    const double n = std::floor((b - a) / h + 1e-9);
    if (n > 1e6) throw std::invalid_argument("grid has more than 1e6 points");
    for (long long i = 0; i <= static_cast<long long>(n); ++i)
      out.push_back(a + static_cast<double>(i) * h);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  for (double x : out)
    if (x < 0.0) throw std::invalid_argument("grid values must be >= 0");
  return out;
}

namespace {

struct Options {
  std::string q = "1/2";
  double lambda = 1.0;
  std::uint64_t reps = 0;  // 0: the subcommand's default
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  std::string format = "csv";
  // subcommand specific
  int n_max = 20;
  int n_terms = 200;
  int n_cap = 2048;
  std::string model;
  std::string grid;
  int symbolic = 0;
  double width = 10.0, height = 10.0, margin = -1.0;
  bool show_seeds = false;
};

struct Artifact {
  std::string suffix;  // appended to the --out stem; empty means --out itself
  std::string content;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  json parameters;
  std::vector<std::string> flags;  // numerical problems worth a nonzero exit
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

mpq_class q_of(const Options& o) {
  const mpq_class q = parse_rational(o.q);
  if (q < 0 || q > 1) throw UsageError("--q must lie in [0, 1]");
  return q;
}

void check_lambda(const Options& o) {
  if (!(o.lambda > 0.0) || !std::isfinite(o.lambda)) throw UsageError("--lambda must be > 0");
}

json base_parameters(const Options& o) {
  return {{"q", to_string(q_of(o))}, {"lambda", o.lambda}};
}

Artifact table_artifact(const Table& t, const Options& o) {
  if (o.format == "json") return {"", to_json(t)};
  if (o.format == "csv") return {"", to_csv(t)};
  throw UsageError(fmt::format("--format {} is not available for this subcommand", o.format));
}

// Summary tables share one layout.
Table summary_table() {
  return {{"quantity", "source", "at", "value", "uncertainty", "uncertainty_kind"}, {}};
}

void add_row(Table& t, std::string quantity, std::string source, Cell at, double value,
             double uncertainty, std::string kind) {
  t.rows.push_back({std::move(quantity), std::move(source), std::move(at), value, uncertainty,
                    std::move(kind)});
}

Outcome cmd_coeffs(const Options& o) {
  if (o.n_max < 0 || o.n_max > 2000) throw UsageError("--n-max must lie in [0, 2000]");
  const mpq_class q = q_of(o);
  const auto h = compute_h(q, o.n_max);
  Table t{{"n", "h", "h_decimal", "decimal_error"}, {}};
  for (std::size_t n = 0; n < h.size(); ++n) {
    // get_d truncates; pick the nearest double instead
    double d = h[n].get_d();
    mpq_class diff = abs(mpq_class(d) - h[n]);
    for (double cand : {std::nextafter(d, -1.0), std::nextafter(d, 2.0)}) {
      const mpq_class e = abs(mpq_class(cand) - h[n]);
      if (e < diff) {
        d = cand;
        diff = e;
      }
    }
    t.rows.push_back({static_cast<long long>(n), to_string(h[n]), d, diff.get_d()});
  }
  Outcome r;
  r.parameters = {{"q", to_string(q)}, {"n_max", o.n_max}};
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_dist(const Options& o) {
  check_lambda(o);
  const mpq_class q = q_of(o);
  const auto grid = parse_grid(o.grid.empty() ? "0:6:0.05" : o.grid);
  Table t{{"ell", "pdf", "pdf_uncertainty", "cdf", "cdf_uncertainty", "uncertainty_kind"}, {}};
  Outcome r;
  r.parameters = base_parameters(o);
  r.parameters["model"] = o.model;
  r.parameters["grid"] = grid;
  bool truncated = false;
  if (o.model == "half-exact") {
    if (o.n_terms < 1) throw UsageError("--n-terms must be >= 1");
    const auto h = compute_h(q, o.n_terms - 1);
    SeriesEvalConfig cfg;
    cfg.lambda = o.lambda;
    cfg.n_terms = o.n_terms;
    for (double ell : grid) {
      const auto f = pdf(h, cfg, ell);
      const auto F = cdf(h, cfg, ell);
      truncated = truncated || f.truncated || F.truncated;
      t.rows.push_back({ell, f.value, f.tail_bound, F.value, F.tail_bound, "truncation_bound"});
    }
    r.parameters["n_terms"] = o.n_terms;
  } else if (o.model == "full-sim") {
    FullSimConfig cfg;
    cfg.q = q;
    cfg.lambda = o.lambda;
    cfg.episodes = o.reps ? o.reps : 1'000'000;
    cfg.n_cap = o.n_cap;
    cfg.master_seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();
    const auto est = estimate(cfg);
    const FullLengthLaw law(est, o.lambda);
    for (double ell : grid) {
      const auto f = law.pdf(ell);
      const auto F = law.cdf(ell);
      truncated = truncated || f.truncated || F.truncated;
      t.rows.push_back({ell, f.value, law.pdf_se(ell) + f.tail_bound, F.value,
                        law.cdf_se(ell) + F.tail_bound, "standard_error"});
    }
    if (est.capped > 0) r.flags.push_back(fmt::format("{} episodes reached the cap", est.capped));
    r.parameters["reps"] = cfg.episodes;
    r.parameters["n_cap"] = cfg.n_cap;
    r.parameters["seed"] = cfg.master_seed;
  } else if (o.model == "meanfield-half" || o.model == "meanfield-full") {
    const Model m = o.model == "meanfield-half" ? Model::half : Model::full;
    for (double ell : grid) {
      const auto f = meanfield_pdf(q, o.lambda, ell, m);
      const auto S = meanfield_survival(q, o.lambda, ell, m);
      t.rows.push_back({ell, f.value, f.truncation, 1.0 - S.value, S.truncation,
                        "truncation_estimate"});
    }
  } else {
    throw UsageError(
        "--model must be one of half-exact, full-sim, meanfield-half, meanfield-full");
  }
  if (truncated) r.flags.push_back("series truncation exceeds the tail limit on part of the grid");
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_simulate_full(const Options& o) {
  check_lambda(o);
  FullSimConfig cfg;
  cfg.q = q_of(o);
  cfg.lambda = o.lambda;
  cfg.episodes = o.reps ? o.reps : 1'000'000;
  cfg.n_cap = o.n_cap;
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  cfg.validate();
  const auto est = estimate(cfg);
  const auto m = mean_length(est, o.lambda);
  Table t = summary_table();
  add_row(t, "episodes", "sim-full", "", static_cast<double>(est.episodes), 0.0, "count");
  add_row(t, "capped_episodes", "sim-full", "", static_cast<double>(est.capped), 0.0, "count");
  add_row(t, "mean_length", "sim-full", "", m.value, m.standard_error, "standard_error");
  add_row(t, "mean_squares", "sim-full", "", est.mean_squares(), est.mean_squares_se(),
          "standard_error");
  add_row(t, "max_squares", "sim-full", "", est.max_squares, 0.0, "count");
  int last = 0;
  for (int n = 1; n <= est.n_cap; ++n)
    if (est.blocked_at[n] > 0) last = n;
  last = std::min(est.n_cap, est.capped > 0 ? est.n_cap : last);
  for (int n = 0; n <= last; ++n)
    add_row(t, "h_hat", "sim-full", static_cast<long long>(n), est.h_hat(n), est.h_hat_se(n),
            "standard_error");
  Outcome r;
  r.parameters = base_parameters(o);
  r.parameters["reps"] = cfg.episodes;
  r.parameters["n_cap"] = cfg.n_cap;
  r.parameters["seed"] = cfg.master_seed;
  if (m.truncated) r.flags.push_back(fmt::format("{} episodes reached the cap", est.capped));
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_simulate_half(const Options& o) {
  check_lambda(o);
  HalfSimConfig cfg;
  cfg.q = q_of(o);
  if (cfg.q == 1) throw UsageError("--q must be < 1 for the half-model simulator");
  cfg.lambda = o.lambda;
  cfg.samples = o.reps ? o.reps : 1'000'000;
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  cfg.survival_grid = parse_grid(o.grid.empty() ? "0:6:0.5" : o.grid);
  cfg.validate();
  const auto rep = monte_carlo_report(cfg);
  Table t = summary_table();
  add_row(t, "samples", "sim-half", "", static_cast<double>(rep.samples), 0.0, "count");
  add_row(t, "mean_length", "sim-half", "", rep.mean, rep.mean_se, "standard_error");
  add_row(t, "second_moment", "sim-half", "", rep.second_moment, rep.second_moment_se,
          "standard_error");
  add_row(t, "mean_steps", "sim-half", "", rep.mean_steps, rep.steps_se, "standard_error");
  for (std::size_t i = 0; i < rep.grid.size(); ++i)
    add_row(t, "survival", "sim-half", rep.grid[i], rep.survival[i], rep.survival_se[i],
            "standard_error");
  Outcome r;
  r.parameters = base_parameters(o);
  r.parameters["reps"] = cfg.samples;
  r.parameters["seed"] = cfg.master_seed;
  r.parameters["grid"] = cfg.survival_grid;
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_moments(const Options& o) {
  check_lambda(o);
  const mpq_class q = q_of(o);
  Table t = summary_table();
  Outcome r;
  r.parameters = base_parameters(o);
  r.parameters["n_terms"] = o.n_terms;
  const bool half_q = q == mpq_class(1, 2);
  if (half_q) {
    const auto rep = half_model_moments(o.lambda);
    add_row(t, "mean_length", "exact-closed-form", "", rep.mean, 0.0, "closed_form");
    add_row(t, "second_moment", "exact-closed-form", "", *rep.second_moment,
            rep.diagnostics.quad_error, "quadrature_error_K");
  } else if (q > 0 && q < 1) {
    const auto rep = general_q_mean(q, o.lambda);
    add_row(t, "mean_length", "exact-integral-equation", "", rep.mean,
            rep.diagnostics.refinement_delta + rep.diagnostics.tail_bound, "discretisation");
  }
  if (q < 1) {
    if (o.n_terms < 2) throw UsageError("--n-terms must be >= 2");
    const auto h = compute_h(q, o.n_terms - 1);
    SeriesEvalConfig cfg;
    cfg.lambda = o.lambda;
    cfg.n_terms = o.n_terms;
    const auto m1 = mean_series(h, cfg);
    const auto m2 = second_moment_series(h, cfg);
    const std::string src = fmt::format("series-{}", o.n_terms);
    add_row(t, "mean_length", src, "", m1.value, m1.tail_estimate, "series_tail_estimate");
    add_row(t, "second_moment", src, "", m2.value, m2.tail_estimate, "series_tail_estimate");
    if (!m1.converged || !m2.converged) r.flags.push_back("moment series did not converge");
  }
  if (half_q) {
    add_row(t, "mean_length", "meanfield-half", "", meanfield_mean(q, o.lambda, Model::half), 0.0,
            "closed_form");
    add_row(t, "mean_length", "meanfield-full", "", meanfield_mean(q, o.lambda, Model::full), 0.0,
            "closed_form");
  }
  if (t.rows.empty()) r.flags.push_back("no finite moments at this q");
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_meanfield(const Options& o) {
  Outcome r;
  if (o.symbolic > 0) {
    if (o.symbolic > 30) throw UsageError("--symbolic must be <= 30");
    const auto polys = symbolic_series(o.symbolic);
    Table t{{"n", "coefficient", "uncertainty"}, {}};
    for (std::size_t n = 0; n < polys.size(); ++n)
      t.rows.push_back({static_cast<long long>(n), polys[n].to_string(), 0.0});
    r.parameters = {{"symbolic", o.symbolic}};
    r.artifacts.push_back(table_artifact(t, o));
    return r;
  }
  check_lambda(o);
  const mpq_class q = q_of(o);
  const Model m = parse_model(o.model.empty() ? "half" : o.model);
  const auto grid = parse_grid(o.grid.empty() ? "0:4:0.1" : o.grid);
  Table t{{"t", "R_h", "G_h", "R_v", "G_v", "truncation"}, {}};
  for (double x : grid) {
    const auto s = meanfield_state(q, o.lambda, x, m);
    t.rows.push_back({x, s.R_h, s.G_h, s.R_v, s.G_v, s.truncation});
  }
  r.parameters = base_parameters(o);
  r.parameters["model"] = to_string(m);
  r.parameters["grid"] = grid;
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

Outcome cmd_tessellate(const Options& o) {
  check_lambda(o);
  const mpq_class q = q_of(o);
  const Model m = parse_model(o.model.empty() ? "half" : o.model);
  if (o.out.empty()) throw UsageError("tessellate needs --out (it writes an SVG and a CSV)");
  if (o.format != "svg" && o.format != "csv")
    throw UsageError("tessellate supports --format svg (default) or csv");
  Window w{o.width, o.height, o.margin};
  RandomStream rng(o.seed, 0);
  const auto tess = generate(m, q.get_d(), o.lambda, w, rng);
  SvgStyle style;
  style.show_seeds = o.show_seeds;
  std::ostringstream csv;
  write_segments_csv(csv, tess.rays);
  Outcome r;
  r.parameters = base_parameters(o);
  r.parameters["model"] = to_string(m);
  r.parameters["width"] = w.width;
  r.parameters["height"] = w.height;
  r.parameters["margin"] = tess.window.margin;
  r.parameters["seed"] = o.seed;
  r.parameters["seeds_drawn"] = tess.seeds.size();
  r.artifacts.push_back({".svg", render_svg(tess.rays, tess.window, style)});
  r.artifacts.push_back({".csv", csv.str()});
  return r;
}

Outcome cmd_taylor(const Options& o) {
  const auto tc = taylor_check();
  Table t{{"model", "lambda", "power", "coefficient", "times_720", "decimal", "uncertainty"}, {}};
  auto rows = [&](const char* model, double lambda, const std::vector<mpq_class>& c) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      const mpq_class scaled = c[k] * 720;
      t.rows.push_back({model, lambda, static_cast<long long>(2 * k), to_string(c[k]),
                        to_string(scaled), c[k].get_d(), 0.0});
    }
  };
  rows("half", 2.0, tc.half);
  rows("full", 1.0, tc.full);
  Outcome r;
  r.parameters = json::object();
  r.artifacts.push_back(table_artifact(t, o));
  return r;
}

std::string artifact_path(const Options& o, const Artifact& a) {
  if (a.suffix.empty()) return o.out;
  std::filesystem::path p(o.out);
  p.replace_extension(a.suffix);
  return p.string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  f << content;
  if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rectangular Gilbert tessellations: exact series, simulation, mean field"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GILBERT_VERSION);
  Options o;

  auto common = [&](CLI::App* s, bool sim) {
    s->add_option("--q", o.q, "probability a seed is V-type, as a rational (1/2, 3/10, 0.25)");
    s->add_option("--lambda", o.lambda, "seed intensity");
    s->add_option("--out", o.out, "output file; a manifest is written next to it");
    s->add_option("--format", o.format, "csv, json or svg")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    if (sim) {
      s->add_option("--reps", o.reps, "episodes or samples");
      s->add_option("--seed", o.seed, "master seed");
      s->add_option("--threads", o.threads, "worker threads (0: GILBERT_THREADS or hardware)");
    }
  };

  std::function<Outcome(const Options&)> handler;
  auto sub = [&](const char* name, const char* help, bool sim, auto fn) {
    auto* s = app.add_subcommand(name, help);
    common(s, sim);
    s->callback([&handler, fn] { handler = fn; });
    return s;
  };

  auto* coeffs = sub("coeffs", "exact h_n coefficients of the half model", false, cmd_coeffs);
  coeffs->add_option("--n-max", o.n_max, "largest n");

  auto* dist = sub("dist", "ray-length pdf and cdf on a grid", true, cmd_dist);
  dist->add_option("--model", o.model, "half-exact, full-sim, meanfield-half or meanfield-full")
      ->required();
  dist->add_option("--grid", o.grid, "start:stop:step or a comma list");
  dist->add_option("--n-terms", o.n_terms, "series terms for half-exact");
  dist->add_option("--n-cap", o.n_cap, "square cap for full-sim");

  auto* sf = sub("simulate-full", "stopping-set simulation of the full model", true,
                 cmd_simulate_full);
  sf->add_option("--n-cap", o.n_cap, "square cap per episode");

  auto* sh = sub("simulate-half", "direct simulation of half-model rays", true, cmd_simulate_half);
  sh->add_option("--grid", o.grid, "survival grid");

  auto* mo = sub("moments", "first and second moments from every route", false, cmd_moments);
  mo->add_option("--n-terms", o.n_terms, "series terms");

  auto* mf = sub("meanfield", "mean-field R and G, or the symbolic series", false, cmd_meanfield);
  mf->add_option("--model", o.model, "half or full");
  mf->add_option("--grid", o.grid, "t grid");
  mf->add_option("--symbolic", o.symbolic, "print the first N series coefficients in P, Q");

  auto* te = sub("tessellate", "draw a realisation (SVG plus CSV segment list)", false,
                 cmd_tessellate);
  te->add_option("--seed", o.seed, "master seed");
  te->add_option("--model", o.model, "half or full");
  te->add_option("--width", o.width);
  te->add_option("--height", o.height);
  te->add_option("--margin", o.margin, "buffer width (default 8/sqrt(lambda))");
  te->add_flag("--show-seeds", o.show_seeds);

  sub("taylor", "exact small-length Taylor coefficients of both survival functions", false,
      cmd_taylor);

  const auto start = std::chrono::steady_clock::now();
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  if (subcommand == "tessellate" && !app.get_subcommands().front()->count("--format"))
    o.format = "svg";

  Outcome result;
  try {
    result = handler(o);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["tool"] = "gilbert";
  manifest["version"] = GILBERT_VERSION;
  manifest["subcommand"] = subcommand;
  manifest["arguments"] = args;
  manifest["parameters"] = result.parameters;
  manifest["format"] = o.format;
  manifest["threads"] = resolve_threads(o.threads);
  manifest["wall_clock_seconds"] = seconds;
  manifest["flags"] = result.flags;
  manifest["artifacts"] = json::array();
  try {
    for (const auto& a : result.artifacts) {
      json entry{{"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}};
      if (o.out.empty()) {
        out << a.content;
        entry["path"] = "-";
      } else {
        const auto path = artifact_path(o, a);
        write_file(path, a.content);
        entry["path"] = path;
      }
      manifest["artifacts"].push_back(entry);
    }
    if (o.out.empty())
      err << manifest.dump() << "\n";
    else
      write_file(o.out + ".manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  for (const auto& f : result.flags) err << "warning: " << f << "\n";
  return result.flags.empty() ? kOk : kNumerical;
}

}  // namespace gilbert::cli
