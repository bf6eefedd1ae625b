#include "indexlab/suite.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "indexlab/bott.hpp"
#include "indexlab/elliptic.hpp"

namespace indexlab::suite {

namespace {

namespace fs = std::filesystem;
using experiments::ExperimentConfig;
using experiments::json;
using experiments::ResultRecord;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ExperimentConfig make_cfg(const std::string& experiment, const json& params,
                          const std::string& out_dir, const Tolerances& tol) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.parameters = params;
  cfg.out_dir = out_dir;
  cfg.tolerances = tol;
  return cfg;
}

// ---- criterion 11 property batteries --------------------------------------

std::string clifford_properties(bool& pass, const Tolerances& tol,
                                std::uint64_t seed) {
  Rng rng(seed ^ 0xc11ff0d5u);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    auto rep = clifford::build_clifford(n);
    std::vector<double> v(n), xi(n);
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
      v[j] = rng.normal();
      xi[j] = rng.normal();
      norm2 += v[j] * v[j] + xi[j] * xi[j];
    }
    ComplexMatrix c = clifford::clifford_c(rep, v, xi);
    worst = std::max(worst, (c - c.adjoint()).max_abs());
    ComplexMatrix anti = matmul(c, rep.epsilon) + matmul(rep.epsilon, c);
    worst = std::max(worst, anti.max_abs());
    ComplexMatrix sq = matmul(c, c);
    sq -= norm2 * ComplexMatrix::identity(sq.rows());
    worst = std::max(worst, sq.max_abs());
  }
  pass = worst <= tol.clifford_exact;
  return "worst clifford residual " + fmt(worst);
}

std::string k0_properties(bool& pass, const Tolerances& tol,
                          std::uint64_t seed) {
  Rng rng(seed ^ 0x6b30c1a5u);
  pass = true;
  std::string note;
  cstar::Algebra alg({1, 2});
  for (int trial = 0; trial < 100 && pass; ++trial) {
    // random projection per block: a scalar spectral cut tensored with the
    // block identity (an A-linear projection), then a random rotation
    cstar::AMatrix proj = cstar::AMatrix::zero(alg, 2);
    for (std::size_t b = 0; b < proj.block.size(); ++b) {
      const std::size_t m = proj.amplification;
      const std::size_t kb = static_cast<std::size_t>(alg.blocks[b]);
      ComplexMatrix h(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) h(i, j) = rng.normal_cplx();
      h.hermitize();
      auto sq = linalg::hermitian_eig(h);
      ComplexMatrix q = linalg::apply_function(
          sq, [](double lam) { return lam > 0 ? 1.0 : 0.0; });
      ComplexMatrix p = kron(q, ComplexMatrix::identity(kb));
      const std::size_t n = p.rows();
      ComplexMatrix k(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k(i, j) = rng.normal_cplx();
      k.hermitize();
      auto ks = linalg::hermitian_eig(k);
      ComplexMatrix u = linalg::apply_function(ks, [](double lam) {
        return std::exp(cplx(0.0, lam));
      });
      proj.block[b] = matmul(u, matmul(p, u.adjoint()));
      proj.block[b].hermitize();
    }
    auto base = cstar::k0_of_projection(proj, tol.rank_tol);

    // unitary conjugation invariance
    cstar::AMatrix conj = proj;
    for (auto& blk : conj.block) {
      const std::size_t n = blk.rows();
      ComplexMatrix k(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k(i, j) = rng.normal_cplx();
      k.hermitize();
      auto s = linalg::hermitian_eig(k);
      ComplexMatrix u = linalg::apply_function(s, [](double lam) {
        return std::exp(cplx(0.0, lam));
      });
      blk = matmul(u, matmul(blk, u.adjoint()));
      blk.hermitize();
    }
    if (!(cstar::k0_of_projection(conj, tol.rank_tol) == base)) {
      pass = false;
      note = "unitary invariance failed at trial " + std::to_string(trial);
    }

    // homotopy constancy along a norm-continuous projection path
    if (trial < 20) {
      cstar::AMatrix prev = proj;
      for (int step = 1; step <= 10 && pass; ++step) {
        const double s = static_cast<double>(step) / 10.0;
        cstar::AMatrix cur = proj;
        for (std::size_t b = 0; b < cur.block.size(); ++b) {
          const std::size_t n = cur.block[b].rows();
          ComplexMatrix k(n, n);
          Rng prng(seed ^ (0x9000u + 31u * trial + b));
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) k(i, j) = prng.normal_cplx();
          k.hermitize();
          auto ks = linalg::hermitian_eig(k);
          ComplexMatrix u = linalg::apply_function(ks, [s](double lam) {
            return std::exp(cplx(0.0, 0.2 * s * lam));
          });
          cur.block[b] = matmul(u, matmul(proj.block[b], u.adjoint()));
          cur.block[b].hermitize();
        }
        double gap = 0.0;
        for (std::size_t b = 0; b < cur.block.size(); ++b)
          gap = std::max(gap, linalg::operator_norm(cur.block[b] -
                                                    prev.block[b]));
        if (gap >= 0.5) {
          pass = false;
          note = "homotopy step too large: " + fmt(gap);
          break;
        }
        if (!(cstar::k0_of_projection(cur, tol.rank_tol) == base)) {
          pass = false;
          note = "homotopy constancy failed at trial " + std::to_string(trial);
        }
        prev = cur;
      }
    }
  }
  if (pass) note = "100 unitary trials + homotopy paths integer-exact";
  return note;
}

std::string eig_properties(bool& pass, const Tolerances& tol,
                           std::uint64_t seed) {
  Rng rng(seed ^ 0xe16e50f7u);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.normal_cplx();
    m.hermitize();
    auto s = linalg::hermitian_eig(m);
    const double resid = s.reconstruction_residual(m);
    const double scale = 1.0 + m.frobenius();
    worst_rel = std::max(worst_rel, resid / scale);
  }
  pass = worst_rel <= tol.eig_reconstruct;
  return "worst reconstruction residual " + fmt(worst_rel) + " (relative)";
}

}  // namespace

json SuiteReport::to_json() const {
  json j;
  j["schema"] = "indexlab/1";
  j["suite"] = suite;
  j["pass"] = pass;
  j["total_wall_ms"] = total_wall_ms;
  j["criteria"] = json::array();
  for (const auto& c : criteria) {
    json cj;
    cj["number"] = c.number;
    cj["name"] = c.name;
    cj["anchor"] = c.anchor;
    cj["pass"] = c.pass;
    cj["detail"] = c.detail;
    cj["wall_ms"] = c.wall_ms;
    j["criteria"].push_back(cj);
  }
  return j;
}

std::string SuiteReport::to_markdown() const {
  std::ostringstream os;
  os << "# Acceptance report: " << suite << "\n\n";
  os << "Overall: " << (pass ? "PASS" : "FAIL") << "  (total "
     << fmt(total_wall_ms / 1000.0) << " s)\n\n";
  os << "| # | criterion | anchor | result | detail | wall (s) |\n";
  os << "|---|-----------|--------|--------|--------|----------|\n";
  for (const auto& c : criteria)
    os << "| " << c.number << " | " << c.name << " | " << c.anchor << " | "
       << (c.pass ? "PASS" : "FAIL") << " | " << c.detail << " | "
       << fmt(c.wall_ms / 1000.0) << " |\n";
  return os.str();
}

std::string SuiteReport::summary_lines() const {
  std::ostringstream os;
  for (const auto& c : criteria)
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.number << ". " << c.name
       << " (" << c.anchor << "): " << c.detail << "\n";
  os << (pass ? "[PASS]" : "[FAIL]") << " suite " << suite << " ("
     << fmt(total_wall_ms / 1000.0) << " s)\n";
  return os.str();
}

SuiteReport run_paper_acceptance(const std::string& out_dir, int jobs,
                                 const Tolerances& tol) {
  fs::create_directories(out_dir);
  SuiteReport report;
  report.suite = "paper-acceptance";

  using Task = std::function<CriterionResult()>;
  std::vector<Task> tasks;

  // shared state between criteria 1/3 and 8/9
  auto spectrum_t1 = std::make_shared<ResultRecord>();
  struct IndexCase {
    std::string label;
    bool agree = false;
    bool morphism_ok = false;
    std::string detail;
  };
  auto index_cases = std::make_shared<std::vector<IndexCase>>();
  auto c8_wall = std::make_shared<double>(0.0);

  // 1. oscillator spectrum
  tasks.push_back([&, spectrum_t1]() -> CriterionResult {
    CriterionResult c{1, "bott-spectrum", "Thm B.4(2)", false, "", 0.0};
    double max_err = 0.0;
    for (double t : {1.0, 4.0}) {
      json params = {{"n", 1}, {"t", t}, {"N", 1024}, {"L", 10.0}};
      auto rec = experiments::run(make_cfg(
          "bott-spectrum", params, out_dir + "/c1-t" + fmt(t), tol));
      max_err = std::max(max_err, rec.metrics.at("max_abs_err"));
      c.wall_ms += rec.wall_time_ms;
      if (t == 1.0) *spectrum_t1 = rec;
    }
    c.pass = max_err <= 1e-6 && c.wall_ms <= 60.0 * 1000.0;
    c.detail = "max |lambda_k - sqrt(2k/t)| = " + fmt(max_err);
    return c;
  });

  // 2. oscillator index
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{2, "bott-index", "Thm B.4(7)", false, "", 0.0};
    bool ok = true;
    std::string detail;
    {
      json params = {{"n", 1}, {"t", 1.0}, {"N", 1024}, {"L", 10.0}};
      auto rec =
          experiments::run(make_cfg("bott-index", params, out_dir + "/c2-n1", tol));
      ok &= rec.pass;
      detail += "n=1: " + fmt(rec.metrics.at("index"));
      c.wall_ms += rec.wall_time_ms;
    }
    {
      json params = {{"n", 2}, {"t", 1.0}, {"N", 32}, {"L", 6.0}};
      auto rec =
          experiments::run(make_cfg("bott-index", params, out_dir + "/c2-n2", tol));
      ok &= rec.pass;
      detail += ", n=2: " + fmt(rec.metrics.at("index"));
      c.wall_ms += rec.wall_time_ms;
    }
    c.pass = ok && c.wall_ms <= 300.0 * 1000.0;
    c.detail = detail;
    return c;
  });

  // 3. kernel uniqueness (reuses the criterion-1 t=1 record)
  tasks.push_back([&, spectrum_t1]() -> CriterionResult {
    CriterionResult c{3, "kernel-uniqueness", "Thm B.4(4)", false, "", 0.0};
    if (spectrum_t1->experiment.empty()) {
      json params = {{"n", 1}, {"t", 1.0}, {"N", 1024}, {"L", 10.0}};
      *spectrum_t1 = experiments::run(
          make_cfg("bott-spectrum", params, out_dir + "/c3", tol));
      c.wall_ms = spectrum_t1->wall_time_ms;
    }
    const auto& m = spectrum_t1->metrics;
    const bool unique = m.at("near_zero_count") == 1.0;
    const bool weight = m.at("kernel_zero_form_weight") >= 1.0 - 1e-8;
    c.pass = unique && weight;
    c.detail = "near-zero count " + fmt(m.at("near_zero_count")) +
               ", 0-form weight " + fmt(m.at("kernel_zero_form_weight")) +
               ", fitted gamma " + fmt(m.at("kernel_gamma"));
    return c;
  });

  // 4. alpha isometry
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{4, "alpha-isometry", "Def 2.5", false, "", 0.0};
    json params = {{"t_list", {0.5, 1.0, 4.0}}, {"n_list", {1, 2}}};
    auto rec =
        experiments::run(make_cfg("alpha-isometry", params, out_dir + "/c4", tol));
    c.wall_ms = rec.wall_time_ms;
    c.pass = rec.metrics.at("max_abs_err") <= 1e-8;
    c.detail = "max |norm - 1| = " + fmt(rec.metrics.at("max_abs_err"));
    return c;
  });

  // 5. Lemma B.20 homotopy
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{5, "b20-homotopy", "Lemma B.20", false, "", 0.0};
    json params = {{"N", 128},
                   {"L", 8.0},
                   {"t", 1.0},
                   {"a", 1.0},
                   {"s_list", {1.0, 0.7, 0.5, 0.3, 0.2}},
                   {"wide_a", 10.0}};
    auto rec =
        experiments::run(make_cfg("b20-homotopy", params, out_dir + "/c5", tol));
    c.wall_ms = rec.wall_time_ms;
    c.pass = rec.metrics.at("sup_norm_narrow") <= 1e-8 &&
             rec.metrics.at("wide_norm_s1") > 0.5;
    c.detail = "sup over s<=1: " + fmt(rec.metrics.at("sup_norm_narrow")) +
               ", wide-support norm " + fmt(rec.metrics.at("wide_norm_s1"));
    return c;
  });

  // 6. commutator decay
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{6, "commutator-decay", "Prop A.2", false, "", 0.0};
    json params = {{"N", 256}, {"L", 10.0}, {"t_min", 1.0}, {"t_max", 128.0},
                   {"t_step", 1.0}};
    auto rec = experiments::run(
        make_cfg("commutator-decay", params, out_dir + "/c6", tol));
    c.wall_ms = rec.wall_time_ms;
    const double slope = rec.metrics.at("slope");
    c.pass = rec.metrics.at("bound_ok") == 1.0 && slope >= -1.15 &&
             slope <= -0.85;
    c.detail = "slope " + fmt(slope) + ", bound margin " +
               fmt(rec.metrics.at("bound_margin"));
    return c;
  });

  // 7. quantization convergence
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{7, "quantization-convergence", "Thm 4.10 / Lemma 5.5",
                      false, "", 0.0};
    json params = {{"N", 256}, {"t_list", {8.0, 16.0, 32.0, 64.0}}};
    auto rec = experiments::run(
        make_cfg("quantization-convergence", params, out_dir + "/c7", tol));
    c.wall_ms = rec.wall_time_ms;
    c.pass = rec.pass;
    c.detail = "defect@64 = " + fmt(rec.metrics.at("defect_final")) +
               (rec.metrics.at("nonincreasing") == 1.0 ? ", monotone"
                                                       : ", NOT monotone") +
               ", control " + fmt(rec.metrics.at("control_max"));
    return c;
  });

  // 8. index theorem battery (shared with criterion 9)
  tasks.push_back([&, index_cases, c8_wall]() -> CriterionResult {
    CriterionResult c{8, "index-theorem", "Index_a = Index_t (Sec 1)", false,
                      "", 0.0};
    bool all = true;
    int count = 0;
    for (int d = -3; d <= 3; ++d) {
      struct Combo {
        std::string label;
        std::vector<int> alg;
        std::vector<int> flux;
      };
      const std::vector<Combo> combos = {
          {"C", {1}, {d}},
          {"C+C", {1, 1}, {d, -d}},
          {"M2", {2}, {d}},
      };
      for (const auto& combo : combos) {
        json params = {{"N", 24},
                       {"flux", combo.flux},
                       {"algebra", combo.alg}};
        const std::string label =
            combo.label + "-d" + std::to_string(d);
        auto rec = experiments::run(make_cfg("index-check", params,
                                             out_dir + "/c8/" + label, tol));
        c.wall_ms += rec.wall_time_ms;
        IndexCase ic;
        ic.label = label;
        ic.agree = rec.pass;
        // morphism equality is part of the same record
        ic.morphism_ok =
            rec.details["index_morphism"] == rec.details["index_analytic"];
        ic.detail = rec.details.dump();
        index_cases->push_back(ic);
        all &= rec.pass;
        ++count;
      }
    }
    *c8_wall = c.wall_ms;
    c.pass = all && c.wall_ms <= 600.0 * 1000.0;
    c.detail = std::to_string(count) + " operator cases, all three indices " +
               (all ? "agree" : "DISAGREE") + ", " +
               fmt(c.wall_ms / 1000.0) + " s";
    return c;
  });

  // 9. Cayley limit (evaluated on the criterion-8 battery)
  tasks.push_back([&, index_cases]() -> CriterionResult {
    CriterionResult c{9, "cayley-limit", "Prop 5.6", false, "", 0.0};
    if (index_cases->empty()) {
      c.detail = "criterion 8 did not run";
      return c;
    }
    bool all = true;
    for (const auto& ic : *index_cases) all &= ic.morphism_ok;
    // residual diagnostics on one representative operator
    json params = {{"N", 24}, {"flux", {1}}, {"algebra", {1}}};
    auto rec =
        experiments::run(make_cfg("cayley-index", params, out_dir + "/c9", tol));
    c.wall_ms = rec.wall_time_ms;
    c.pass = all && rec.pass;
    c.detail = "morphism == analytic on " +
               std::to_string(index_cases->size()) + " cases; unitarity " +
               fmt(rec.metrics.count("unitarity_residual")
                       ? rec.metrics.at("unitarity_residual")
                       : 0.0);
    return c;
  });

  // 10. gluing independence
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{10, "glue-independence", "Thm A.9", false, "", 0.0};
    json params = {{"N", 256}, {"t_list", {4.0, 8.0, 16.0, 32.0, 64.0}}};
    auto rec = experiments::run(
        make_cfg("glue-independence", params, out_dir + "/c10", tol));
    c.wall_ms = rec.wall_time_ms;
    c.pass = rec.pass;
    c.detail = "cover diff@64 = " + fmt(rec.metrics.at("cover_diff_final")) +
               " (t=4: " + fmt(rec.metrics.at("cover_diff_first")) +
               "), module residual " + fmt(rec.metrics.at("module_residual"));
    return c;
  });

  // 11. property suites
  tasks.push_back([&]() -> CriterionResult {
    CriterionResult c{11, "property-suites", "Def B.8 / K0 / Thm 4.1", false,
                      "", 0.0};
    const auto start = std::chrono::steady_clock::now();
    bool p1 = false, p2 = false, p3 = false;
    const std::string d1 = clifford_properties(p1, tol, 7);
    const std::string d2 = k0_properties(p2, tol, 7);
    const std::string d3 = eig_properties(p3, tol, 7);
    c.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    c.pass = p1 && p2 && p3;
    c.detail = d1 + "; " + d2 + "; " + d3;
    return c;
  });

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CriterionResult> results(tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
  } else {
    // criteria 8 and 9 share state; run everything else in a small pool
    // first, then the dependent pair in order
    std::vector<std::size_t> independent, ordered;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (i == 7 || i == 8 || i == 0 || i == 2)
        ordered.push_back(i);
      else
        independent.push_back(i);
    }
    std::vector<std::future<void>> futs;
    std::size_t next = 0;
    const std::size_t cap = static_cast<std::size_t>(jobs);
    while (next < independent.size()) {
      while (futs.size() < cap && next < independent.size()) {
        const std::size_t i = independent[next++];
        futs.push_back(std::async(std::launch::async,
                                  [&results, &tasks, i] { results[i] = tasks[i](); }));
      }
      futs.front().wait();
      futs.erase(futs.begin());
    }
    for (auto& f : futs) f.wait();
    for (std::size_t i : ordered) results[i] = tasks[i]();
  }
  report.criteria = std::move(results);
  report.total_wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
  report.pass = true;
  for (const auto& c : report.criteria) report.pass &= c.pass;

  std::ofstream jf(out_dir + "/report.json");
  jf << report.to_json().dump(2) << "\n";
  std::ofstream mf(out_dir + "/report.md");
  mf << report.to_markdown();
  return report;
}

SuiteReport run_suite(const std::string& name, const std::string& out_dir,
                      int jobs, const Tolerances& tol) {
  require(!name.empty(), ErrorCode::config, "empty suite name");
  require(name == "paper-acceptance", ErrorCode::config,
          "unknown suite '" + name + "'");
  return run_paper_acceptance(out_dir, jobs, tol);
}

}  // namespace indexlab::suite
