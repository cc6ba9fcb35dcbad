#include "conical/cli.hpp"

#include "conical/corona.hpp"
#include "conical/diagnostics.hpp"
#include "conical/energy.hpp"
#include "conical/error.hpp"
#include "conical/io.hpp"
#include "conical/lattice.hpp"
#include "conical/parallel.hpp"
#include "conical/sio.hpp"
#include "conical/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace conical::cli {
namespace {

using nlohmann::json;

struct Loaded {
  DiscreteMeasure measure;
  std::string hash;
};

Loaded load(const std::string& path, int n) {
  const std::string bytes = io::read_file(path);
  std::istringstream in(bytes);
  return {io::parse_points_csv(in, n, path), io::content_hash(bytes)};
}

void emit(const json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty())
    std::cout << text;
  else
    io::write_file(path, text);
}

double parse_number(const std::string& s, const char* what) {
  if (s == "inf" || s == "infinity") return kInf;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(!s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size(), Errc::invalid_params,
          std::string("bad number for ") + what + ": '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t c = s.find(',', pos);
    out.push_back(parse_number(s.substr(pos, c == std::string::npos ? std::string::npos : c - pos), what));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

Vec to_original(const Lattice& lat, const Vec& normalized) { return normalized / lat.scale() + lat.shift(); }

// ---- gen ----

struct GenOptions {
  std::string spec_file, type, shape = "zero", ratios, out, meta, report;
  std::size_t count = 256;
  int ambient = 2, generation = 1;
  double lipschitz = 0.0, frequency = 1.0, gap = 0.1, jitter = 0.0, mass = 1.0;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
};

int run_gen(const GenOptions& o) {
  synth::GeneratorSpec spec;
  if (!o.spec_file.empty()) {
    json j;
    try {
      j = json::parse(io::read_file(o.spec_file));
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_spec, o.spec_file + ": " + e.what());
    }
    spec = synth::spec_from_json(j);
  } else {
    require(!o.type.empty(), Errc::invalid_spec, "--type or --spec is required");
    spec.kind = synth::parse_kind(o.type);
    spec.count = o.count;
    spec.ambient = o.ambient;
    spec.lipschitz = o.lipschitz;
    spec.shape = synth::parse_shape(o.shape);
    spec.frequency = o.frequency;
    spec.gap = o.gap;
    spec.jitter = o.jitter;
    spec.generation = o.generation;
    spec.mass = o.mass;
    if (!o.ratios.empty()) spec.ratios = parse_list(o.ratios, "--ratios");
    if (o.p) spec.ratios = synth::variable_cantor_profile(*o.p, std::max(1, o.generation));
    require(spec.kind != synth::Kind::mixture, Errc::invalid_spec, "mixtures need --spec");
    if (o.seed) spec.seed = *o.seed;
  }
  require(spec.jitter == 0.0 || o.seed || !o.spec_file.empty(), Errc::invalid_spec,
          "jittered samples need an explicit --seed");
  const DiscreteMeasure m = synth::generate(spec);
  const std::string csv = io::format_points_csv(m);
  io::write_file(o.out, csv);
  json meta = synth::metadata(spec, m);
  if (!o.meta.empty()) io::write_file(o.meta, meta.dump(2) + "\n");
  emit({{"command", "gen"}, {"points_hash", io::content_hash(csv)}, {"out", o.out}, {"meta", meta}}, o.report);
  return kOk;
}

// ---- energy ----

struct EnergyOptions {
  std::string points, plane, outer = "inf", per_point, report;
  int n = 1;
  double p = 1.0, alpha = 0.5, eta = 0.1;
};

int run_energy(const EnergyOptions& o) {
  const Loaded in = load(o.points, o.n);
  const auto& m = in.measure;
  EnergySpec spec{parse_plane(o.plane), o.alpha, o.p, parse_number(o.outer, "--R"), o.eta};
  validate(spec, m);
  std::vector<double> e(m.size());
  std::vector<std::size_t> counts(m.size());
  parallel_for(m.size(), [&](std::size_t i) {
    const auto b = pointwise_energy(m, m.point_vec(i), spec);
    e[i] = b.total;
    counts[i] = b.in_cone;
  });
  std::vector<double> weighted(m.size());
  double mx = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    weighted[i] = m.weight(i) * e[i];
    mx = std::max(mx, e[i]);
  }
  const double total = pairwise_sum(weighted.data(), weighted.size());
  if (!o.per_point.empty()) {
    std::string csv = "index,energy,in_cone\n";
    for (std::size_t i = 0; i < m.size(); ++i)
      csv += std::to_string(i) + "," + io::format_double(e[i]) + "," + std::to_string(counts[i]) + "\n";
    io::write_file(o.per_point, csv);
  }
  json params{{"n", o.n}, {"p", o.p}, {"alpha", o.alpha}, {"plane", format_plane(spec.direction)},
              {"R", std::isinf(spec.outer) ? json("inf") : json(spec.outer)}, {"eta", o.eta}};
  emit({{"command", "energy"},
        {"points_hash", in.hash},
        {"params", params},
        {"atoms", m.size()},
        {"total", total},
        {"mean", total / m.total_mass()},
        {"max", mx}},
       o.report);
  return kOk;
}

// ---- scan-bpbe ----

struct BpbeOptions {
  std::string points, balls = "lattice:1", report;
  std::vector<std::string> pinned;
  int n = 1, directions = 32;
  double alpha = 0.5, p = 1.0, m0 = 1.0, kappa = 0.5;
  std::optional<std::uint64_t> seed;
};

std::vector<Ball> lattice_balls(const DiscreteMeasure& m, int level) {
  const Lattice lat = build_lattice(m, LatticeParams{});
  require(level >= 0 && level <= lat.depth(), Errc::invalid_params,
          "lattice level out of range [0, " + std::to_string(lat.depth()) + "]");
  std::vector<Ball> out;
  for (std::size_t q : lat.levels()[static_cast<std::size_t>(level)])
    out.push_back({to_original(lat, lat.center(q)), lat.cube(q).big_radius() / lat.scale()});
  return out;
}

std::vector<Ball> read_balls(const std::string& path, int d) {
  std::vector<Ball> out;
  try {
    for (const auto& b : json::parse(io::read_file(path))) {
      const auto c = b.at("center").get<std::vector<double>>();
      require(static_cast<int>(c.size()) == d, Errc::dimension_mismatch, path + ": ball center dimension");
      out.push_back({Eigen::Map<const Vec>(c.data(), d), b.at("radius").get<double>()});
      require(out.back().radius > 0.0, Errc::invalid_params, path + ": radii must be positive");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_params, path + ": " + e.what());
  }
  return out;
}

int run_bpbe(const BpbeOptions& o) {
  require(o.seed.has_value(), Errc::invalid_params, "scan-bpbe samples directions and needs --seed");
  const Loaded in = load(o.points, o.n);
  const auto& m = in.measure;
  std::vector<Ball> balls;
  std::string family;
  if (o.balls.rfind("lattice:", 0) == 0) {
    balls = lattice_balls(m, static_cast<int>(parse_number(o.balls.substr(8), "--balls")));
    family = "lattice level " + o.balls.substr(8) + " balls B_Q";
  } else {
    balls = read_balls(o.balls, m.ambient_dim());
    family = "user file " + o.balls;
  }
  std::vector<Plane> pinned;
  for (const auto& s : o.pinned) pinned.push_back(parse_plane(s));
  const auto rep = bpbe_scan(m, balls, o.alpha, o.p, o.m0, o.kappa, o.directions, *o.seed, pinned);
  json j = to_json(rep);
  j["command"] = "scan-bpbe";
  j["points_hash"] = in.hash;
  j["params"] = {{"n", o.n}, {"alpha", o.alpha}, {"p", o.p}, {"M0", o.m0}, {"kappa", o.kappa},
                 {"directions", o.directions}, {"seed", *o.seed}, {"balls", o.balls}};
  j["ball_family"] = family + " (finite family; the definition quantifies over all balls)";
  emit(j, o.report);
  return kOk;
}

// ---- corona ----

struct CoronaOptions {
  std::string points, config, out, dump;
  int n = 1;
};

int run_corona(const CoronaOptions& o) {
  const Loaded in = load(o.points, o.n);
  json cfg;
  try {
    cfg = json::parse(io::read_file(o.config));
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_params, o.config + ": " + e.what());
  }
  const CoronaParams params = corona_params_from_json(cfg);
  const Lattice lat = build_lattice(in.measure, params.lattice);
  const Corona corona(lat, params);
  const CoronaResult res = corona.build_top();
  const CoronaVerification ver = corona.verify(res);
  json j = to_json(res, false);
  j["command"] = "corona";
  j["points_hash"] = in.hash;
  j["lattice"] = to_json(check_lattice(lat));
  j["lattice"]["cubes"] = lat.cubes().size();
  j["lattice"]["depth"] = lat.depth();
  j["verification"] = to_json(ver);
  j["rows"] = j["trees"];
  emit(j, o.out);
  if (!o.dump.empty()) {
    json d = to_json(res, true);
    d["points_hash"] = in.hash;
    d["lattice"] = lattice_to_json(lat, false);
    io::write_file(o.dump, d.dump() + "\n");
  }
  return kOk;
}

// ---- sio-norm ----

struct SioOptions {
  std::string points, kernel = "cauchy", grid = "auto", method = "lanczos", out, report;
  int n = 1;
  std::size_t max_grid = 64;
  double tol = 1e-6;
  int max_iterations = 2000;
};

int run_sio(const SioOptions& o) {
  const Loaded in = load(o.points, o.n);
  const auto& m = in.measure;
  Kernel k;
  if (o.kernel == "cauchy") {
    require(m.ambient_dim() == 2 && o.n == 1, Errc::invalid_params, "the Cauchy kernel needs n = 1 in the plane");
    k = cauchy_kernel();
  } else if (o.kernel == "riesz") {
    k = riesz_kernel(o.n, m.ambient_dim());
  } else {
    throw Error(Errc::invalid_params, "unknown kernel '" + o.kernel + "'");
  }
  const std::vector<double> grid = o.grid == "auto" ? default_grid(m, o.max_grid) : parse_list(o.grid, "--eps-grid");
  for (std::size_t i = 0; i < grid.size(); ++i)
    require(grid[i] > 0.0 && (i == 0 || grid[i] > grid[i - 1]), Errc::invalid_params,
            "--eps-grid must be positive and strictly increasing");
  NormOptions opts;
  opts.tol = o.tol;
  opts.max_iterations = o.max_iterations;
  if (o.method == "power")
    opts.method = NormMethod::power;
  else
    require(o.method == "lanczos", Errc::invalid_params, "--method must be lanczos or power");
  const auto est = operator_norms(m, k, grid, opts);

  std::string csv = "eps,norm,iterations,flag\n";
  json rows = json::array();
  bool stalled = false;
  double sup = 0.0;
  for (const auto& e : est) {
    const char* flag = e.converged ? "ok" : "PowerIterationStalled";
    stalled |= !e.converged;
    sup = std::max(sup, e.norm);
    csv += io::format_double(e.eps) + "," + io::format_double(e.norm) + "," + std::to_string(e.iterations) + "," +
           flag + "\n";
    rows.push_back({{"eps", e.eps}, {"norm", e.norm}, {"iterations", e.iterations}, {"flag", flag}});
  }
  if (!o.out.empty()) io::write_file(o.out, csv);
  emit({{"command", "sio-norm"},
        {"points_hash", in.hash},
        {"params",
         {{"kernel", k.name}, {"n", o.n}, {"C_k", k.ck}, {"grid", o.grid}, {"max_grid", o.max_grid},
          {"tol", o.tol}, {"method", o.method}, {"max_iterations", o.max_iterations}}},
        {"sup_norm", sup},
        {"rows", rows}},
       o.report);
  if (stalled) {
    std::cerr << "sio-norm: iteration stalled for at least one eps; best estimates written\n";
    return kNumerical;
  }
  return kOk;
}

// ---- beta ----

struct BetaOptions {
  std::string points, center, scales = "dyadic:6", out, report;
  int n = 1;
  double r0 = 1.0;
};

std::vector<double> parse_scales(const std::string& s, double r0) {
  require(s.rfind("dyadic:", 0) == 0, Errc::invalid_params, "--scales must look like dyadic:K");
  const double kd = parse_number(s.substr(7), "--scales");
  const int k = static_cast<int>(kd);
  require(k >= 1 && k == kd && k <= 60, Errc::invalid_params, "dyadic:K needs 1 <= K <= 60");
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(std::ldexp(r0, -i));
  return out;
}

int run_beta(const BetaOptions& o) {
  const Loaded in = load(o.points, o.n);
  const auto& m = in.measure;
  Vec x;
  if (o.center.find(',') == std::string::npos && !o.center.empty() &&
      o.center.find_first_not_of("0123456789") == std::string::npos) {
    const auto idx = static_cast<std::size_t>(std::stoull(o.center));
    require(idx < m.size(), Errc::invalid_params, "--center index out of range");
    x = m.point_vec(idx);
  } else {
    x = parse_vector(o.center);
    require(x.size() == m.ambient_dim(), Errc::dimension_mismatch, "--center has the wrong dimension");
  }
  const auto scales = parse_scales(o.scales, o.r0);
  const BetaProfile prof = beta_square_function(m, x, scales);

  std::string csv = "r,beta,degenerate\n";
  json rows = json::array();
  for (double r : scales) {
    const auto b = beta2(m, x, r);
    csv += io::format_double(r) + "," + io::format_double(b.beta) + "," + (b.degenerate_spectrum ? "1" : "0") + "\n";
    rows.push_back({{"r", r}, {"beta", b.beta}, {"degenerate", b.degenerate_spectrum}});
  }
  if (!o.out.empty()) io::write_file(o.out, csv);

  json tangent;
  if (scales.size() >= 3 && m.dim_param() <= 2) {
    const auto t = tangent_convergence(m, x, scales);
    tangent = {{"surrogate_scale", t.reference_scale}, {"scales", t.scales}, {"values", t.values},
               {"trend", t.trend}};
  } else {
    tangent = "not computed (needs >= 3 scales and n <= 2)";
  }
  emit({{"command", "beta"},
        {"points_hash", in.hash},
        {"params", {{"n", o.n}, {"center", std::vector<double>(x.data(), x.data() + x.size())}, {"scales", o.scales},
                    {"r0", o.r0}}},
        {"square_sum", prof.square_sum},
        {"tangent", tangent},
        {"rows", rows}},
       o.report);
  return kOk;
}

// ---- bplg ----

struct BplgOptions {
  std::string points, graph, check, plane, report;
  int n = 1;
  std::optional<double> theta, alpha, eps;
  std::size_t samples = 2000;
  bool per_point = false;
};

int run_bplg(const BplgOptions& o) {
  const Loaded in = load(o.points, o.n);
  const auto& m = in.measure;
  std::optional<LipschitzGraph> graph;
  if (!o.graph.empty()) {
    try {
      graph = graph_from_json(json::parse(io::read_file(o.graph)));
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_params, o.graph + ": " + e.what());
    }
  }
  json j{{"command", "bplg"}, {"points_hash", in.hash}, {"check", o.check}};
  if (o.check == "cover") {
    require(graph.has_value(), Errc::invalid_params, "--check cover needs --graph");
    const auto rep = necessary_bplg_cover(m, *graph, !o.alpha.has_value(), o.alpha.value_or(0.1), o.samples);
    j["result"] = to_json(rep);
  } else if (o.check == "thetaM") {
    std::optional<Plane> v;
    if (!o.plane.empty()) v = parse_plane(o.plane);
    else if (graph) v = graph->value_plane();
    require(v.has_value(), Errc::invalid_params, "--check thetaM needs --plane or --graph");
    double th = 0.5;
    if (o.theta) th = *o.theta;
    else if (graph) th = 1.0 / std::sqrt(1.0 + graph->lipschitz() * graph->lipschitz());
    const auto rep = theta_M_property(m.points(), *v, th, o.per_point);
    j["result"] = {{"theta", th}, {"plane", format_plane(*v)}, {"max_count", rep.max_count}};
    if (o.per_point) j["result"]["counts"] = rep.counts;
  } else if (o.check == "feps") {
    require(o.eps.has_value(), Errc::invalid_params, "--check feps needs --eps");
    const auto set = f_epsilon_set(m, *o.eps);
    j["result"] = {{"eps", *o.eps}, {"size", set.size()}, {"atoms", set}};
  } else {
    throw Error(Errc::invalid_params, "--check must be cover, thetaM or feps");
  }
  emit(j, o.report);
  return kOk;
}

// ---- report ----

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out, csv_dir;
};

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int run_report(const ReportOptions& o) {
  if (o.inputs.empty()) {
    emit(json::object(), o.out);
    return kOk;
  }
  json merged{{"sections", json::object()}};
  std::optional<std::string> hash;
  for (const auto& path : o.inputs) {
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw Error(Errc::schema_mismatch, path + ": " + e.what());
    }
    require(j.is_object() && j.contains("command") && j.contains("points_hash"), Errc::schema_mismatch,
            path + ": not a conical report (needs command and points_hash)");
    const auto h = j.at("points_hash").get<std::string>();
    if (!hash) hash = h;
    require(*hash == h, Errc::schema_mismatch, path + ": points_hash " + h + " differs from " + *hash);
    const auto cmd = j.at("command").get<std::string>();
    merged["sections"][cmd] = j;
    if (!o.csv_dir.empty() && j.contains("rows") && j["rows"].is_array() && !j["rows"].empty()) {
      std::filesystem::create_directories(o.csv_dir);
      std::vector<std::string> cols;
      std::string csv;
      for (const auto& [key, val] : j["rows"].front().items()) {
        if (val.is_structured()) continue;
        csv += (cols.empty() ? "" : ",") + key;
        cols.push_back(key);
      }
      csv += "\n";
      for (const auto& row : j["rows"]) {
        for (std::size_t c = 0; c < cols.size(); ++c) csv += (c ? "," : "") + csv_cell(row.value(cols[c], json()));
        csv += "\n";
      }
      io::write_file((std::filesystem::path(o.csv_dir) / (cmd + ".csv")).string(), csv);
    }
  }
  merged["points_hash"] = *hash;
  emit(merged, o.out);
  return kOk;
}

int exit_code(const Error& e) { return e.code() == Errc::numerical ? kNumerical : kInvalidInput; }

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Conical energies, lattices and rectifiability diagnostics for weighted point clouds"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: CONICAL_GMT_THREADS or all cores)");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic measure");
  g->add_option("--spec", gen.spec_file, "generator spec JSON (needed for mixtures)");
  g->add_option("--type", gen.type, "segment|circle|lipschitz_graph|four_corner_cantor|variable_cantor");
  g->add_option("--count", gen.count, "samples for segment/circle/graph");
  g->add_option("--ambient", gen.ambient, "ambient dimension of a segment");
  g->add_option("--L", gen.lipschitz, "graph Lipschitz constant");
  g->add_option("--shape", gen.shape, "zero|sine|ramp");
  g->add_option("--frequency", gen.frequency);
  g->add_option("--gap", gen.gap, "width of the ramp gap");
  g->add_option("--jitter", gen.jitter, "fraction of the spacing; needs --seed");
  g->add_option("--generation", gen.generation);
  g->add_option("--ratios", gen.ratios, "comma-separated variable_cantor ratios");
  g->add_option("--p", gen.p, "variable_cantor ratios from the p-profile");
  g->add_option("--mass", gen.mass);
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "points CSV")->required();
  g->add_option("--meta", gen.meta, "metadata JSON");
  g->add_option("--report", gen.report);

  EnergyOptions en;
  auto* e = app.add_subcommand("energy", "pointwise conical energies");
  e->add_option("--points", en.points)->required();
  e->add_option("--n", en.n);
  e->add_option("--p", en.p);
  e->add_option("--alpha", en.alpha);
  e->add_option("--plane", en.plane, "direction V, e.g. \"0,1\"")->required();
  e->add_option("--R", en.outer, "outer radius or inf");
  e->add_option("--eta", en.eta);
  e->add_option("--per-point", en.per_point, "CSV: index,energy,in_cone");
  e->add_option("--report", en.report);

  BpbeOptions bp;
  auto* b = app.add_subcommand("scan-bpbe", "big-pieces-of-bounded-energy scan");
  b->add_option("--points", bp.points)->required();
  b->add_option("--n", bp.n);
  b->add_option("--alpha", bp.alpha);
  b->add_option("--p", bp.p);
  b->add_option("--M0", bp.m0);
  b->add_option("--kappa", bp.kappa);
  b->add_option("--directions", bp.directions);
  b->add_option("--seed", bp.seed);
  b->add_option("--balls", bp.balls, "lattice:K or a JSON file of {center, radius}");
  b->add_option("--plane", bp.pinned, "pinned candidate directions");
  b->add_option("--report", bp.report);

  CoronaOptions co;
  auto* c = app.add_subcommand("corona", "stopping-time decomposition and packing ledger");
  c->add_option("--points", co.points)->required();
  c->add_option("--n", co.n);
  c->add_option("--config", co.config)->required();
  c->add_option("--out", co.out);
  c->add_option("--dump-trees", co.dump);

  SioOptions so;
  auto* s = app.add_subcommand("sio-norm", "operator norms of truncated singular integrals");
  s->add_option("--points", so.points)->required();
  s->add_option("--kernel", so.kernel, "cauchy|riesz");
  s->add_option("--n", so.n);
  s->add_option("--eps-grid", so.grid, "auto or comma-separated increasing list");
  s->add_option("--max-grid", so.max_grid);
  s->add_option("--tol", so.tol);
  s->add_option("--max-iterations", so.max_iterations);
  s->add_option("--method", so.method, "lanczos|power");
  s->add_option("--out", so.out, "CSV: eps,norm,iterations,flag");
  s->add_option("--report", so.report);

  BetaOptions be;
  auto* bt = app.add_subcommand("beta", "beta_2 profile at a point");
  bt->add_option("--points", be.points)->required();
  bt->add_option("--n", be.n);
  bt->add_option("--center", be.center, "atom index or coordinates")->required();
  bt->add_option("--scales", be.scales, "dyadic:K");
  bt->add_option("--r0", be.r0, "largest scale");
  bt->add_option("--out", be.out, "CSV: r,beta,degenerate");
  bt->add_option("--report", be.report);

  BplgOptions bl;
  auto* l = app.add_subcommand("bplg", "Lipschitz-graph criteria");
  l->add_option("--points", bl.points)->required();
  l->add_option("--n", bl.n);
  l->add_option("--graph", bl.graph, "graph JSON");
  l->add_option("--check", bl.check, "cover|thetaM|feps")->required();
  l->add_option("--plane", bl.plane);
  l->add_option("--theta", bl.theta);
  l->add_option("--alpha", bl.alpha, "fixed aperture (default: derived from L)");
  l->add_option("--eps", bl.eps);
  l->add_option("--samples", bl.samples, "graph samples for the K_j check");
  l->add_flag("--per-point", bl.per_point);
  l->add_option("--report", bl.report);

  ReportOptions re;
  auto* r = app.add_subcommand("report", "merge reports on the same points file");
  r->add_option("inputs", re.inputs);
  r->add_option("--out", re.out);
  r->add_option("--csv-dir", re.csv_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (*g) return run_gen(gen);
    if (*e) return run_energy(en);
    if (*b) return run_bpbe(bp);
    if (*c) return run_corona(co);
    if (*s) return run_sio(so);
    if (*bt) return run_beta(be);
    if (*l) return run_bplg(bl);
    if (*r) return run_report(re);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace conical::cli
