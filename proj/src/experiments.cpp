#include "indexlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "indexlab/bott.hpp"
#include "indexlab/csvio.hpp"
#include "indexlab/elliptic.hpp"

namespace indexlab::experiments {

namespace {

namespace fs = std::filesystem;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    require(ok, ErrorCode::config, "unknown key '" + it.key() + "' in " + where);
  }
}

double num(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  require(p[key].is_number(), ErrorCode::config,
          std::string("parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

std::size_t idx(const json& p, const char* key, std::size_t fallback) {
  if (!p.contains(key)) return fallback;
  require(p[key].is_number_unsigned() || p[key].is_number_integer(),
          ErrorCode::config, std::string("parameter '") + key + "' must be an integer");
  const long long v = p[key].get<long long>();
  require(v >= 0, ErrorCode::config, std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

bool flag(const json& p, const char* key, bool fallback) {
  if (!p.contains(key)) return fallback;
  require(p[key].is_boolean(), ErrorCode::config,
          std::string("parameter '") + key + "' must be a boolean");
  return p[key].get<bool>();
}

std::vector<double> num_list(const json& p, const char* key,
                             std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  require(p[key].is_array(), ErrorCode::config,
          std::string("parameter '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : p[key]) out.push_back(v.get<double>());
  return out;
}

std::vector<int> int_list(const json& p, const char* key,
                          std::vector<int> fallback) {
  if (!p.contains(key)) return fallback;
  require(p[key].is_array(), ErrorCode::config,
          std::string("parameter '") + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& v : p[key]) out.push_back(v.get<int>());
  return out;
}

void write_record(const ResultRecord& rec, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream f(out_dir + "/" + rec.experiment + "-result.json");
  require(static_cast<bool>(f), ErrorCode::io,
          "cannot write result record in " + out_dir);
  f << rec.to_json().dump(2) << "\n";
}

// the canonical variable-coefficient circle operator D = -i(h d/dx + h'/2),
// h = 2 + sin x
elliptic::FirstOrderOp h_sine_circle_op(std::size_t N, const Tolerances& tol) {
  auto grid = quantize::QuantizationGrid::circle(N);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(N, ComplexMatrix(1, 1)), b(N, ComplexMatrix(1, 1));
  for (std::size_t j = 0; j < N; ++j) {
    const double x = grid.coord(j);
    a1[j](0, 0) = cplx(0.0, -(2.0 + std::sin(x)));
    b[j](0, 0) = cplx(0.0, -0.5 * std::cos(x));
  }
  return elliptic::make_first_order_op(grid, alg, 1, {{a1}}, {b}, tol);
}

elliptic::FirstOrderOp const_circle_op(std::size_t N, const Tolerances& tol) {
  auto grid = quantize::QuantizationGrid::circle(N);
  cstar::Algebra alg({1});
  std::vector<ComplexMatrix> a1(N, ComplexMatrix(1, 1)), b(N, ComplexMatrix(1, 1));
  for (std::size_t j = 0; j < N; ++j) a1[j](0, 0) = cplx(0.0, -1.0);
  return elliptic::make_first_order_op(grid, alg, 1, {{a1}}, {b}, tol);
}

cplx resolvent_sq(double y) { return 1.0 / (1.0 + y * y); }

// Operator definitions from JSON: either {"preset": "h-sine"|"constant",
// "N": 128} or the inline form {"grid": {"n","N","L","topology"},
// "algebra": [k_1,...], "k": 1, "coefficients": {"a": [axis][block][point]
// [re,im], "b": [block][point][re,im]}}.
elliptic::FirstOrderOp op_from_json(const json& spec, std::size_t default_N,
                                    const Tolerances& tol) {
  require(spec.is_object(), ErrorCode::config,
          "operator spec must be a JSON object");
  if (spec.contains("preset")) {
    reject_unknown(spec, {"preset", "N"}, "operator spec");
    const std::string name = spec["preset"].get<std::string>();
    const std::size_t N = idx(spec, "N", default_N);
    if (name == "h-sine") return h_sine_circle_op(N, tol);
    if (name == "constant") return const_circle_op(N, tol);
    fail(ErrorCode::config, "unknown operator preset '" + name + "'");
  }
  reject_unknown(spec, {"grid", "algebra", "k", "coefficients"},
                 "operator spec");
  require(spec.contains("grid") && spec.contains("algebra") &&
              spec.contains("coefficients"),
          ErrorCode::config,
          "inline operator spec needs grid, algebra and coefficients");
  const json& g = spec["grid"];
  reject_unknown(g, {"n", "N", "L", "topology"}, "grid spec");
  const int n = static_cast<int>(idx(g, "n", 1));
  const std::size_t N = idx(g, "N", default_N);
  const std::string topo = g.contains("topology")
                               ? g["topology"].get<std::string>()
                               : "circle";
  quantize::QuantizationGrid grid;
  if (topo == "circle")
    grid = quantize::QuantizationGrid::circle(N);
  else if (topo == "torus")
    grid = quantize::QuantizationGrid::torus(N);
  else if (topo == "periodized-line")
    grid = quantize::QuantizationGrid(n, N, num(g, "L", 10.0),
                                      quantize::Topology::periodized_line);
  else
    fail(ErrorCode::config, "unknown grid topology '" + topo + "'");

  std::vector<int> blocks;
  for (const auto& v : spec["algebra"]) blocks.push_back(v.get<int>());
  cstar::Algebra alg(blocks);
  const int k = static_cast<int>(idx(spec, "k", 1));

  const json& co = spec["coefficients"];
  reject_unknown(co, {"a", "b"}, "coefficients");
  auto parse_field = [&](const json& arr, std::size_t fib) {
    std::vector<ComplexMatrix> field;
    require(arr.is_array() && arr.size() == grid.points(), ErrorCode::config,
            "coefficient sample count must match the grid");
    for (const auto& cell : arr) {
      ComplexMatrix m(fib, fib);
      if (fib == 1) {
        require(cell.is_array() && cell.size() == 2, ErrorCode::config,
                "scalar coefficient samples are [re, im] pairs");
        m(0, 0) = cplx(cell[0].get<double>(), cell[1].get<double>());
      } else {
        require(cell.is_array() && cell.size() == fib, ErrorCode::config,
                "matrix coefficient samples are row arrays");
        for (std::size_t r = 0; r < fib; ++r)
          for (std::size_t cc = 0; cc < fib; ++cc)
            m(r, cc) = cplx(cell[r][cc][0].get<double>(),
                            cell[r][cc][1].get<double>());
      }
      field.push_back(std::move(m));
    }
    return field;
  };
  std::vector<std::vector<std::vector<ComplexMatrix>>> a;
  std::vector<std::vector<ComplexMatrix>> b;
  require(co["a"].is_array() &&
              co["a"].size() == static_cast<std::size_t>(grid.n),
          ErrorCode::config, "coefficients.a must have one entry per axis");
  for (const auto& per_axis : co["a"]) {
    std::vector<std::vector<ComplexMatrix>> ax;
    require(per_axis.is_array() && per_axis.size() == alg.block_count(),
            ErrorCode::config, "coefficients.a axis needs one field per block");
    for (std::size_t i = 0; i < alg.block_count(); ++i)
      ax.push_back(parse_field(
          per_axis[i], static_cast<std::size_t>(k) * alg.blocks[i]));
    a.push_back(std::move(ax));
  }
  require(co.contains("b") && co["b"].is_array() &&
              co["b"].size() == alg.block_count(),
          ErrorCode::config, "coefficients.b needs one field per block");
  for (std::size_t i = 0; i < alg.block_count(); ++i)
    b.push_back(parse_field(co["b"][i],
                            static_cast<std::size_t>(k) * alg.blocks[i]));
  return elliptic::make_first_order_op(grid, alg, k, std::move(a),
                                       std::move(b), tol);
}


double smooth_bump(double u) {
  const double u2 = u * u;
  if (u2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u2));
}

using Runner = ResultRecord (*)(const ExperimentConfig&);

// --------------------------------------------------------------------------

ResultRecord run_bott_spectrum(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"n", "t", "N", "L", "count", "negate"}, "bott-spectrum");
  bott::OscillatorConfig oc;
  oc.n = static_cast<int>(idx(p, "n", 1));
  oc.t = num(p, "t", 1.0);
  oc.N = idx(p, "N", 256);
  oc.L = num(p, "L", 10.0);
  oc.potential_sign = flag(p, "negate", false) ? -1.0 : 1.0;
  const std::size_t count = idx(p, "count", 21);

  ResultRecord rec;
  rec.experiment = "bott-spectrum";
  rec.anchor = "Thm B.4(2)";
  rec.parameters = p;

  auto op = bott::build_bott(oc, cfg.tolerances);
  auto spec = bott::bott_spectrum(op, count, cfg.tolerances);

  csvio::CsvWriter csv({"t", "k", "lambda_measured", "lambda_exact", "abs_err"});
  std::vector<double> positive;
  for (double v : spec)
    if (v > 0.25 * op.theoretical_gap()) positive.push_back(v);
  std::sort(positive.begin(), positive.end());
  double max_err = 0.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(positive.size(), 10); ++k) {
    const double exact = std::sqrt(2.0 * static_cast<double>(k + 1) / oc.t);
    const double err = std::abs(positive[k] - exact);
    max_err = std::max(max_err, err);
    csv.add_row(std::vector<double>{oc.t, static_cast<double>(k + 1),
                                    positive[k], exact, err});
  }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/bott-spectrum.csv");

  std::size_t near_zero = 0;
  const double half_gap = 0.5 * op.theoretical_gap();
  for (double v : spec)
    if (std::abs(v) < half_gap) ++near_zero;

  rec.metrics["max_abs_err"] = max_err;
  rec.metrics["near_zero_count"] = static_cast<double>(near_zero);
  if (oc.n == 1) {
    auto kr = bott::bott_kernel_report(op, cfg.tolerances);
    rec.metrics["kernel_gamma"] = kr.gaussian_gamma;
    rec.metrics["kernel_fit_r2"] = kr.gaussian_fit_r2;
    rec.metrics["kernel_zero_form_weight"] = kr.zero_form_weight;
    rec.metrics["kernel_eigenvalue"] = kr.eigenvalue;
  }
  rec.pass = max_err <= cfg.tolerances.bott_eig_abs && near_zero == 1;
  return rec;
}

ResultRecord run_bott_index(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"n", "t", "N", "L", "negate", "gap_tol"}, "bott-index");
  bott::OscillatorConfig oc;
  oc.n = static_cast<int>(idx(p, "n", 1));
  oc.t = num(p, "t", 1.0);
  oc.N = idx(p, "N", 256);
  oc.L = num(p, "L", oc.n == 1 ? 10.0 : 6.0);
  const bool negate = flag(p, "negate", false);
  oc.potential_sign = negate ? -1.0 : 1.0;

  ResultRecord rec;
  rec.experiment = "bott-index";
  rec.anchor = "Thm B.4(7)";
  rec.parameters = p;

  auto op = bott::build_bott(oc, cfg.tolerances);
  const double gap_tol = num(p, "gap_tol", op.theoretical_gap() / 20.0);
  const long long index = bott::bott_index(op, gap_tol, cfg.tolerances);
  rec.metrics["index"] = static_cast<double>(index);
  rec.metrics["gap_tol"] = gap_tol;
  rec.pass = index == (negate ? -1 : +1);
  return rec;
}

ResultRecord run_b20_homotopy(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "L", "t", "a", "s_list", "x_count", "x_max", "wide_a"},
                 "b20-homotopy");
  bott::OscillatorConfig oc;
  oc.n = 1;
  oc.t = num(p, "t", 1.0);
  oc.N = idx(p, "N", 128);
  oc.L = num(p, "L", 8.0);
  const double a = num(p, "a", 1.0);
  const double wide_a = num(p, "wide_a", 10.0);
  auto s_list = num_list(p, "s_list", {1.0, 0.7, 0.4, 0.2});
  const std::size_t x_count = idx(p, "x_count", 7);
  const double x_max = num(p, "x_max", 3.0);

  std::vector<double> xs;
  for (std::size_t i = 0; i < x_count; ++i)
    xs.push_back(-x_max + 2.0 * x_max * static_cast<double>(i) /
                              static_cast<double>(x_count - 1));

  ResultRecord rec;
  rec.experiment = "b20-homotopy";
  rec.anchor = "Lemma B.20";
  rec.parameters = p;

  auto op = bott::build_bott(oc, cfg.tolerances);
  auto narrow = [a](double y) { return cplx(smooth_bump(y / a), 0.0); };
  auto table = bott::homotopy_b20(op, narrow, a, xs, s_list, cfg.tolerances);

  csvio::CsvWriter csv({"s", "sup_norm"});
  double sup = 0.0;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    csv.add_row(std::vector<double>{table.t[i], table.value[i]});
    sup = std::max(sup, table.value[i]);
  }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/b20-homotopy.csv");

  auto wide = [wide_a](double y) { return cplx(smooth_bump(y / wide_a), 0.0); };
  auto wide_table =
      bott::homotopy_b20(op, wide, wide_a, xs, {1.0}, cfg.tolerances);

  rec.metrics["sup_norm_narrow"] = sup;
  rec.metrics["wide_norm_s1"] = wide_table.value[0];
  rec.metrics["monotone"] =
      table.nonincreasing(1e-12) || std::is_sorted(table.value.begin(),
                                                   table.value.end())
          ? 1.0
          : 0.0;
  rec.pass = sup <= cfg.tolerances.b20_norm && wide_table.value[0] > 0.5;
  return rec;
}

ResultRecord run_alpha_isometry(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"t_list", "n_list", "quad_points"}, "alpha-isometry");
  auto t_list = num_list(p, "t_list", {0.5, 1.0, 4.0});
  auto n_list = int_list(p, "n_list", {1, 2});
  const std::size_t base_points = idx(p, "quad_points", 4096);

  ResultRecord rec;
  rec.experiment = "alpha-isometry";
  rec.anchor = "Def 2.5";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "n", "norm", "abs_err"});
  double worst = 0.0;
  for (int n : n_list)
    for (double t : t_list) {
      const double quad_L = 8.0 / std::sqrt(t);
      const std::size_t pts = (n == 1) ? base_points : base_points / 2;
      const double nrm = bott::alpha_isometry(t, n, pts, quad_L);
      const double err = std::abs(nrm - 1.0);
      worst = std::max(worst, err);
      csv.add_row(std::vector<double>{t, static_cast<double>(n), nrm, err});
    }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/alpha-isometry.csv");
  rec.metrics["max_abs_err"] = worst;
  rec.pass = worst <= cfg.tolerances.alpha_norm;
  return rec;
}

ResultRecord run_commutator_decay(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "L", "t_min", "t_max", "t_step"}, "commutator-decay");
  const std::size_t N = idx(p, "N", 256);
  const double L = num(p, "L", 10.0);
  const double t_min = num(p, "t_min", 1.0);
  const double t_max = num(p, "t_max", 128.0);
  const double t_step = num(p, "t_step", 1.0);

  auto grid = quantize::QuantizationGrid::line(N, L);
  std::vector<cplx> f(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double x = grid.coord(j);
    f[j] = 1.0 / (1.0 + x * x);
  }
  std::vector<double> ts;
  for (double t = t_min; t <= t_max + 1e-12; t += t_step) ts.push_back(t);

  auto res = quantize::commutator_decay(
      grid, f,
      [](const std::vector<double>& xi) { return resolvent_sq(xi[0]); }, ts);

  ResultRecord rec;
  rec.experiment = "commutator-decay";
  rec.anchor = "Prop A.2";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "norm", "bound"});
  for (std::size_t i = 0; i < res.table.t.size(); ++i)
    csv.add_row(std::vector<double>{res.table.t[i], res.table.value[i],
                                    res.table.bound[i]});
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/commutator-decay.csv");

  const bool slope_ok = res.slope >= cfg.tolerances.slope_lo &&
                        res.slope <= cfg.tolerances.slope_hi;
  rec.metrics["slope"] = res.slope;
  rec.metrics["intercept"] = res.intercept;
  rec.metrics["r2"] = res.r2;
  rec.metrics["bound_margin"] = res.worst_bound_margin;
  rec.metrics["bound_ok"] = res.resolvent_bound_ok ? 1.0 : 0.0;
  rec.pass = slope_ok && res.resolvent_bound_ok;

  json summary;
  summary["slope"] = res.slope;
  summary["intercept"] = res.intercept;
  summary["r2"] = res.r2;
  summary["threshold_pass"] = rec.pass;
  std::ofstream sf(cfg.out_dir + "/commutator-decay-summary.json");
  sf << summary.dump(2) << "\n";

  return rec;
}

ResultRecord run_diffeo_covariance(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "amplitude", "t_list"}, "diffeo-covariance");
  const std::size_t N = idx(p, "N", 256);
  const double amp = num(p, "amplitude", 0.3);
  auto t_list = num_list(p, "t_list", {4.0, 8.0, 16.0, 32.0, 64.0});

  auto grid = quantize::QuantizationGrid::line(N, kPi);
  auto f = quantize::PhaseFunction::scalar(
      grid,
      [](const std::vector<double>& x, const std::vector<double>& xi) {
        return std::exp(-2.0 * x[0] * x[0]) * resolvent_sq(xi[0]);
      },
      true);
  auto res = quantize::diffeo_covariance(
      grid, f, [amp](double x) { return x + amp * std::sin(x); },
      [amp](double x) { return 1.0 + amp * std::cos(x); }, t_list);

  ResultRecord rec;
  rec.experiment = "diffeo-covariance";
  rec.anchor = "Prop A.7";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "norm"});
  for (std::size_t i = 0; i < res.table.t.size(); ++i)
    csv.add_row(std::vector<double>{res.table.t[i], res.table.value[i]});
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/diffeo-covariance.csv");

  rec.metrics["final_norm"] = res.table.final_value();
  rec.metrics["first_norm"] = res.table.value.front();
  rec.metrics["jacobian_min"] = res.jacobian_min;
  rec.pass = res.table.final_value() < cfg.tolerances.freeze_threshold &&
             res.table.final_value() < 0.5 * res.table.value.front();
  return rec;
}

ResultRecord run_glue_independence(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "t_list"}, "glue-independence");
  const std::size_t N = idx(p, "N", 256);
  auto t_list = num_list(p, "t_list", {4.0, 8.0, 16.0, 32.0, 64.0});

  auto grid = quantize::QuantizationGrid::circle(N);
  auto f = quantize::PhaseFunction::scalar(
      grid,
      [](const std::vector<double>& x, const std::vector<double>& xi) {
        // smooth circle bump times a resolvent
        return std::exp(-2.0 * (1.0 - std::cos(x[0]))) * resolvent_sq(xi[0]);
      },
      true);
  quantize::CircleCover coverA{0.0, -kPi, 2.2};
  quantize::CircleCover coverB{kPi / 2.0, -kPi / 2.0, 2.2};

  ResultRecord rec;
  rec.experiment = "glue-independence";
  rec.anchor = "Thm A.9";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "cover_diff", "vs_global"});
  double first_diff = 0.0, last_diff = 0.0, last_global = 0.0;
  for (double t : t_list) {
    ComplexMatrix ga = quantize::glued_phi(grid, coverA, f, t);
    ComplexMatrix gb = quantize::glued_phi(grid, coverB, f, t);
    ComplexMatrix global = quantize::phi_t(f, t);
    const double diff = linalg::operator_norm(ga - gb);
    const double vs_global = linalg::operator_norm(ga - global);
    if (t == t_list.front()) first_diff = diff;
    last_diff = diff;
    last_global = vs_global;
    csv.add_row(std::vector<double>{t, diff, vs_global});
  }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/glue-independence.csv");

  // exact module property Phi_t(rho F) = M_rho Phi_t(F)
  auto rho = quantize::partition_of_unity(grid, coverA);
  auto fr = f;
  auto base = f.values;
  const auto& r0 = rho[0];
  fr.values = [base, r0, grid](const std::vector<double>& x,
                               const std::vector<double>& xi) {
    const std::size_t j = static_cast<std::size_t>(
        std::llround((x[0] + grid.L) / grid.dx())) % grid.N;
    ComplexMatrix v = base(x, xi);
    v *= cplx(r0[j], 0.0);
    return v;
  };
  std::vector<cplx> rho_c(grid.N);
  for (std::size_t j = 0; j < grid.N; ++j) rho_c[j] = r0[j];
  ComplexMatrix lhs = quantize::phi_t(fr, 16.0);
  ComplexMatrix rhs =
      matmul(quantize::mult_op(grid, rho_c, 1), quantize::phi_t(f, 16.0));
  const double module_resid = (lhs - rhs).max_abs();

  rec.metrics["cover_diff_first"] = first_diff;
  rec.metrics["cover_diff_final"] = last_diff;
  rec.metrics["vs_global_final"] = last_global;
  rec.metrics["module_residual"] = module_resid;
  rec.pass = last_diff < cfg.tolerances.decay_threshold &&
             last_diff < 0.5 * first_diff &&
             module_resid <= cfg.tolerances.module_exact;
  return rec;
}

ResultRecord run_lemma45(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "t_list", "operator"}, "lemma45");
  const std::size_t N = idx(p, "N", 128);
  auto t_list = num_list(p, "t_list", {1, 2, 4, 8, 16, 32, 64, 128});

  auto op1 = p.contains("operator")
                 ? op_from_json(p["operator"], N, cfg.tolerances)
                 : h_sine_circle_op(N, cfg.tolerances);
  // op2 = op1 + Hermitian zeroth-order bump supported away from supp(phi)
  auto op2 = op1;
  auto grid = op1.grid;
  for (std::size_t j = 0; j < N; ++j) {
    const double x = grid.coord(j);
    double d = std::abs(x - kPi);
    d = std::min(d, 2.0 * kPi - d);
    op2.b[0][j](0, 0) += cplx(1.5 * smooth_bump(d / (kPi / 3.0)), 0.0);
  }
  std::vector<double> phi(N);
  for (std::size_t j = 0; j < N; ++j)
    phi[j] = smooth_bump(grid.coord(j) / (kPi / 3.0));

  auto res = elliptic::lemma45_decay(
      op1, op2, phi, [](double y) { return resolvent_sq(y); }, t_list,
      cfg.tolerances);

  ResultRecord rec;
  rec.experiment = "lemma45";
  rec.anchor = "Lemma 4.5";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "part1", "part2", "part3"});
  for (std::size_t i = 0; i < t_list.size(); ++i)
    csv.add_row(std::vector<double>{t_list[i], res.part1.value[i],
                                    res.part2.value[i], res.part3.value[i]});
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/lemma45.csv");

  rec.metrics["part1_final"] = res.part1.final_value();
  rec.metrics["part2_final"] = res.part2.final_value();
  rec.metrics["part3_final"] = res.part3.final_value();
  rec.metrics["resolvent_bound_ok"] = res.resolvent_bound_ok ? 1.0 : 0.0;
  rec.pass = res.resolvent_bound_ok &&
             res.part1.final_value() < cfg.tolerances.decay_threshold &&
             res.part2.final_value() < cfg.tolerances.decay_threshold &&
             res.part3.final_value() < cfg.tolerances.decay_threshold;
  return rec;
}

ResultRecord run_freeze(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "t", "halfwidths", "operator"}, "freeze");
  const std::size_t N = idx(p, "N", 128);
  const double t = num(p, "t", 64.0);
  auto widths = num_list(p, "halfwidths", {kPi / 2, kPi / 4, kPi / 8, kPi / 16});

  auto op = p.contains("operator")
                ? op_from_json(p["operator"], N, cfg.tolerances)
                : h_sine_circle_op(N, cfg.tolerances);
  auto rows = elliptic::freeze_compare(op, N / 2, widths,
                                       [](double y) { return resolvent_sq(y); },
                                       t, cfg.tolerances);

  ResultRecord rec;
  rec.experiment = "freeze";
  rec.anchor = "Lemma 4.9";
  rec.parameters = p;

  csvio::CsvWriter csv({"halfwidth", "delta", "norm"});
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.add_row(std::vector<double>{rows[i].halfwidth, rows[i].delta,
                                    rows[i].norm});
    if (i > 0 && rows[i].norm >= rows[i - 1].norm) decreasing = false;
  }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/freeze.csv");

  rec.metrics["final_norm"] = rows.back().norm;
  rec.metrics["final_delta"] = rows.back().delta;
  rec.metrics["strictly_decreasing"] = decreasing ? 1.0 : 0.0;
  rec.pass = decreasing && rows.back().norm < cfg.tolerances.freeze_threshold;
  return rec;
}

ResultRecord run_quantization_convergence(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "t_list", "operator"}, "quantization-convergence");
  const std::size_t N = idx(p, "N", 256);
  auto t_list = num_list(p, "t_list", {8.0, 16.0, 32.0, 64.0});

  auto op = p.contains("operator")
                ? op_from_json(p["operator"], N, cfg.tolerances)
                : h_sine_circle_op(N, cfg.tolerances);
  std::vector<double> phi(N, 1.0);
  auto table = elliptic::quantization_convergence(
      op, phi, [](double y) { return resolvent_sq(y); }, t_list,
      cfg.tolerances);

  auto ctrl_op = const_circle_op(N, cfg.tolerances);
  auto ctrl = elliptic::quantization_convergence(
      ctrl_op, phi, [](double y) { return resolvent_sq(y); }, t_list,
      cfg.tolerances);

  ResultRecord rec;
  rec.experiment = "quantization-convergence";
  rec.anchor = "Thm 4.10";
  rec.parameters = p;

  csvio::CsvWriter csv({"t", "defect", "control_defect"});
  double ctrl_max = 0.0;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    csv.add_row(std::vector<double>{t_list[i], table.value[i], ctrl.value[i]});
    ctrl_max = std::max(ctrl_max, ctrl.value[i]);
  }
  fs::create_directories(cfg.out_dir);
  csv.write_file(cfg.out_dir + "/quantization-convergence.csv");

  rec.metrics["defect_final"] = table.final_value();
  rec.metrics["nonincreasing"] = table.nonincreasing(1e-12) ? 1.0 : 0.0;
  rec.metrics["control_max"] = ctrl_max;
  rec.pass = table.final_value() < cfg.tolerances.decay_threshold &&
             table.nonincreasing(1e-12) && ctrl_max <= 1e-8;
  return rec;
}

ResultRecord run_index_check(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "flux", "algebra", "t_small_factor"}, "index-check");
  const std::size_t N = idx(p, "N", 24);
  auto flux = int_list(p, "flux", {1});
  auto blocks = int_list(p, "algebra", {1});
  const double tf = num(p, "t_small_factor", 0.1);

  cstar::Algebra alg(blocks);
  auto dop = elliptic::twisted_dirac_torus(flux, N, alg, cfg.tolerances);

  double gap_min = 1e300;
  for (const auto& b : dop.blocks) gap_min = std::min(gap_min, b->gap);
  const double t_small = tf * gap_min;

  auto ia = elliptic::analytic_index(dop, cfg.tolerances.gap_fraction,
                                     cfg.tolerances);
  auto it = elliptic::topological_index_torus(flux, alg);
  auto im = elliptic::morphism_index(dop, t_small, cfg.tolerances.rank_tol,
                                     cfg.tolerances);

  ResultRecord rec;
  rec.experiment = "index-check";
  rec.anchor = "Prop 5.6";
  rec.parameters = p;
  rec.details["index_analytic"] = ia.ranks;
  rec.details["index_topological"] = it.ranks;
  rec.details["index_morphism"] = im.ranks;
  rec.pass = (ia == it) && (ia == im);
  rec.metrics["agree"] = rec.pass ? 1.0 : 0.0;
  rec.metrics["t_small"] = t_small;

  json indices;
  indices["index_analytic"] = ia.ranks;
  indices["index_topological"] = it.ranks;
  indices["index_morphism"] = im.ranks;
  indices["pass"] = rec.pass;
  fs::create_directories(cfg.out_dir);
  std::ofstream f(cfg.out_dir + "/indices.json");
  f << indices.dump(2) << "\n";

  return rec;
}

ResultRecord run_cayley_index(const ExperimentConfig& cfg) {
  const json& p = cfg.parameters;
  reject_unknown(p, {"N", "flux", "algebra", "t_small_factor"}, "cayley-index");
  const std::size_t N = idx(p, "N", 24);
  auto flux = int_list(p, "flux", {1});
  auto blocks = int_list(p, "algebra", {1});
  const double tf = num(p, "t_small_factor", 0.1);

  cstar::Algebra alg(blocks);
  auto dop = elliptic::twisted_dirac_torus(flux, N, alg, cfg.tolerances);
  double gap_min = 1e300;
  for (const auto& b : dop.blocks) gap_min = std::min(gap_min, b->gap);
  const double t_small = tf * gap_min;

  auto ia = elliptic::analytic_index(dop, cfg.tolerances.gap_fraction,
                                     cfg.tolerances);
  auto im = elliptic::morphism_index(dop, t_small, cfg.tolerances.rank_tol,
                                     cfg.tolerances);

  ResultRecord rec;
  rec.experiment = "cayley-index";
  rec.anchor = "Prop 5.6";
  rec.parameters = p;
  rec.details["index_analytic"] = ia.ranks;
  rec.details["index_morphism"] = im.ranks;
  rec.metrics["t_small"] = t_small;

  // unitarity and involution residuals of the Cayley transform, checked on
  // the smallest block
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < dop.blocks.size(); ++i)
    if (dop.blocks[i]->op.rows() < dop.blocks[smallest]->op.rows())
      smallest = i;
  if (dop.blocks[smallest]->reduced(cfg.tolerances).op.rows() <= 1600) {
    ComplexMatrix u = elliptic::cayley(dop, smallest, t_small, cfg.tolerances);
    ComplexMatrix uu = gram(u);
    uu -= ComplexMatrix::identity(uu.rows());
    rec.metrics["unitarity_residual"] = uu.frobenius();
    const auto& red = dop.blocks[smallest]->reduced(cfg.tolerances);
    ComplexMatrix eps(u.rows(), u.rows());
    for (std::size_t i = 0; i < u.rows(); ++i) eps(i, i) = red.eps_signs[i];
    ComplexMatrix eu = matmul(eps, u);
    ComplexMatrix eu2 = matmul(eu, eu);
    eu2 -= ComplexMatrix::identity(eu2.rows());
    rec.metrics["involution_residual"] = linalg::operator_norm(eu2);
  }
  rec.pass = ia == im;
  rec.metrics["agree"] = rec.pass ? 1.0 : 0.0;
  return rec;
}

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r = {
      {"bott-spectrum", run_bott_spectrum},
      {"bott-index", run_bott_index},
      {"b20-homotopy", run_b20_homotopy},
      {"alpha-isometry", run_alpha_isometry},
      {"commutator-decay", run_commutator_decay},
      {"diffeo-covariance", run_diffeo_covariance},
      {"glue-independence", run_glue_independence},
      {"lemma45", run_lemma45},
      {"freeze", run_freeze},
      {"quantization-convergence", run_quantization_convergence},
      {"index-check", run_index_check},
      {"cayley-index", run_cayley_index},
  };
  return r;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  require(j.is_object(), ErrorCode::config, "config must be a JSON object");
  reject_unknown(j, {"experiment", "parameters", "out_dir", "seed", "tolerances"},
                 "config");
  require(j.contains("experiment") && j["experiment"].is_string(),
          ErrorCode::config, "config needs an 'experiment' string");
  ExperimentConfig cfg;
  cfg.experiment = j["experiment"].get<std::string>();
  require(registry().count(cfg.experiment) == 1, ErrorCode::config,
          "unknown experiment '" + cfg.experiment + "'");
  if (j.contains("parameters")) {
    require(j["parameters"].is_object(), ErrorCode::config,
            "'parameters' must be an object");
    cfg.parameters = j["parameters"];
  }
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tolerances")) {
    require(j["tolerances"].is_object(), ErrorCode::config,
            "'tolerances' must be an object");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
      require(cfg.tolerances.set(it.key(), it.value().get<double>()),
              ErrorCode::config, "unknown tolerance key '" + it.key() + "'");
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::io, "cannot open config " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::config, std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

json ResultRecord::to_json() const {
  json j;
  j["schema"] = "indexlab/1";
  j["experiment"] = experiment;
  j["parameters"] = parameters;
  j["metrics"] = metrics;
  if (!details.empty()) j["details"] = details;
  j["pass"] = pass;
  j["anchor"] = anchor;
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

ResultRecord run(const ExperimentConfig& config) {
  auto it = registry().find(config.experiment);
  require(it != registry().end(), ErrorCode::config,
          "unknown experiment '" + config.experiment + "'");
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec = it->second(config);
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  write_record(rec, config.out_dir);
  return rec;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
  }();
  return names;
}

void apply_tolerance_overrides(Tolerances& tol, const std::string& spec) {
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t end = spec.find_first_of(",;", pos);
    if (end == std::string::npos) end = spec.size();
    const std::string item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    require(eq != std::string::npos, ErrorCode::config,
            "tolerance override must look like key=value: " + item);
    const std::string key = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    require(tol.set(key, value), ErrorCode::config,
            "unknown tolerance key '" + key + "'");
  }
}

}  // namespace indexlab::experiments
