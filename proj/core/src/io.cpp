#include "uotlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uotlab/divergence.hpp"
#include "uotlab/error.hpp"
#include "uotlab/marginal.hpp"

namespace uotlab {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json rows_json(const Mat& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    a.push_back(std::move(r));
  }
  return a;
}

json plan_json(const PlanMatrix& m) { return rows_json(Mat(m)); }

Vec json_vec(const json& a, const char* what) {
  if (!a.is_array()) throw_invalid(std::string(what) + " must be an array");
  Vec v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw_invalid(std::string(what) + " must hold numbers");
    v[static_cast<Index>(i)] = a[i].get<double>();
  }
  return v;
}

Mat json_rows(const json& a, const char* what) {
  if (!a.is_array()) throw_invalid(std::string(what) + " must be an array of rows");
  if (a.empty()) return Mat(0, 0);
  const std::size_t cols = a[0].is_array() ? a[0].size() : 0;
  Mat m(static_cast<Index>(a.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_array() || a[i].size() != cols) {
      throw_invalid(std::string(what) + " rows must be arrays of equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!a[i][j].is_number()) throw_invalid(std::string(what) + " must hold numbers");
      m(static_cast<Index>(i), static_cast<Index>(j)) = a[i][j].get<double>();
    }
  }
  return m;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw_invalid(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

std::string problem_to_json(const Problem& p) {
  json j;
  j["points_x"] = rows_json(p.points_x);
  j["points_y"] = rows_json(p.points_y);
  j["mu"] = vec_json(p.mu);
  j["nu"] = vec_json(p.nu);
  json cost;
  cost["kind"] = to_string(p.cost_kind);
  if (p.cost_kind == CostKind::kExplicit) cost["matrix"] = plan_json(p.cost);
  j["cost"] = cost;
  if (p.divergence.kind == DivergenceKind::kCustom) {
    throw_invalid("custom divergences cannot be serialized");
  }
  json div;
  div["kind"] = to_string(p.divergence.kind);
  if (p.divergence.normalized) div["normalized"] = true;
  if (p.divergence.q_mu || p.divergence.q_nu) {
    const Vec q = p.reference();
    div["q"] = {{"mu_ref", vec_json(q.head(p.nx()))}, {"nu_ref", vec_json(q.tail(p.ny()))}};
  }
  j["divergence"] = div;
  return j.dump(2) + "\n";
}

Problem problem_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_invalid(std::string("problem JSON does not parse: ") + e.what());
  }
  if (!j.is_object()) throw_invalid("problem JSON must be an object");
  try {
    Mat px = json_rows(field(j, "points_x"), "points_x");
    Mat py = json_rows(field(j, "points_y"), "points_y");
    Vec mu = json_vec(field(j, "mu"), "mu");
    Vec nu = json_vec(field(j, "nu"), "nu");

    DivergenceSpec div;
    if (j.contains("divergence")) {
      const json& d = j.at("divergence");
      if (!d.is_object()) throw_invalid("divergence must be an object");
      div.kind = parse_divergence_kind(field(d, "kind").get<std::string>());
      if (d.contains("normalized")) div.normalized = d.at("normalized").get<bool>();
      if (d.contains("q")) {
        const json& q = d.at("q");
        div.q_mu = json_vec(field(q, "mu_ref"), "q.mu_ref");
        div.q_nu = json_vec(field(q, "nu_ref"), "q.nu_ref");
      }
    }

    CostKind kind = CostKind::kSqEuclidean;
    const json* matrix = nullptr;
    if (j.contains("cost")) {
      const json& c = j.at("cost");
      if (!c.is_object()) throw_invalid("cost must be an object");
      kind = parse_cost_kind(field(c, "kind").get<std::string>());
      if (c.contains("matrix")) matrix = &c.at("matrix");
    }
    if (kind == CostKind::kExplicit) {
      if (!matrix) throw_invalid("explicit cost needs a matrix");
      const Mat cm = json_rows(*matrix, "cost.matrix");
      Problem p = make_problem_from_cost(PlanMatrix(cm), std::move(mu), std::move(nu), div);
      p.points_x = std::move(px);
      p.points_y = std::move(py);
      return p;
    }
    return make_problem(std::move(px), std::move(py), std::move(mu), std::move(nu), kind, div);
  } catch (const json::exception& e) {
    throw_invalid(std::string("problem JSON has a wrong type: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

Problem read_problem(const std::string& path) { return problem_from_json(read_file(path)); }

void write_problem(const std::string& path, const Problem& problem) {
  write_file(path, problem_to_json(problem));
}

std::string solution_to_json(const RegSolution& s) {
  json j;
  j["t"] = s.t;
  j["phi"] = vec_json(s.xi.phi);
  j["psi"] = vec_json(s.xi.psi);
  j["gamma"] = plan_json(s.gamma.gamma);
  j["iters"] = s.iters;
  j["grad_norm"] = s.grad_norm;
  j["converged"] = s.converged;
  j["kan_value"] = s.kan_value;
  j["overflow"] = s.diagnostics.overflow;
  j["ridge"] = s.diagnostics.ridge;
  return j.dump(2) + "\n";
}

std::string exact_to_json(const ExactSolution& e) {
  json j;
  j["xi_star"] = {{"phi", vec_json(e.xi_star.phi)}, {"psi", vec_json(e.xi_star.psi)}};
  j["kappa"] = plan_json(e.kappa);
  json i0 = json::array();
  for (const auto& [x, y] : e.I0.pairs) i0.push_back({x, y});
  j["I0"] = i0;
  j["m_star"] = {{"row", vec_json(e.m_star.row)}, {"col", vec_json(e.m_star.col)}};
  j["gamma_star"] = plan_json(e.gamma_star.gamma);
  // JSON has no infinity; null stands for "I0 covers every pair".
  if (std::isfinite(e.kappa_star_min)) {
    j["kappa_star_min"] = e.kappa_star_min;
  } else {
    j["kappa_star_min"] = nullptr;
  }
  j["sat_tol"] = e.sat_tol;
  j["converged"] = e.converged();
  j["barrier"] = {{"outer_iters", e.barrier.outer_iters},
                  {"inner_iters", e.barrier.inner_iters},
                  {"final_tau", e.barrier.final_tau},
                  {"barrier_converged", e.barrier.barrier_converged},
                  {"polished", e.barrier.polished},
                  {"polish_iters", e.barrier.polish_iters},
                  {"degenerate", e.barrier.degenerate},
                  {"kkt_residual", e.barrier.kkt_residual},
                  {"min_slack", e.barrier.min_slack}};
  j["plan"] = {{"converged", e.plan.converged},
               {"residual", e.plan.residual},
               {"iters", e.plan.iters},
               {"used_fallback", e.plan.used_fallback}};
  return j.dump(2) + "\n";
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvRow to_csv_row(const TrajectoryPoint& p) {
  return CsvRow{p.t, p.dual_err, p.primal_err, p.ode_residual, p.entropy_val, p.iters, p.flags};
}

std::string csv_string(const std::vector<CsvRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const CsvRow& r : rows) {
    out += format_double(r.t) + "," + format_double(r.dual_err) + "," +
           format_double(r.primal_err) + "," + format_double(r.ode_residual) + "," +
           format_double(r.entropy) + "," + std::to_string(r.iters) + "," +
           std::to_string(r.flags) + "\n";
  }
  return out;
}

std::string csv_string(const std::vector<TrajectoryPoint>& points) {
  std::vector<CsvRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) rows.push_back(to_csv_row(p));
  return csv_string(rows);
}

void emit_csv(const std::vector<TrajectoryPoint>& points, const std::string& path) {
  if (points.empty()) throw_invalid("emit_csv: empty series");
  write_file(path, csv_string(points));
}

namespace {

template <class T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw_invalid("csv line " + std::to_string(line) + ": bad field '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw_invalid("csv: unexpected header");
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw_invalid("csv line " + std::to_string(lineno) + ": expected 7 fields");
    CsvRow r;
    r.t = parse_field<double>(f[0], lineno);
    r.dual_err = parse_field<double>(f[1], lineno);
    r.primal_err = parse_field<double>(f[2], lineno);
    r.ode_residual = parse_field<double>(f[3], lineno);
    r.entropy = parse_field<double>(f[4], lineno);
    r.iters = parse_field<int>(f[5], lineno);
    r.flags = parse_field<std::uint32_t>(f[6], lineno);
    rows.push_back(r);
  }
  return rows;
}

namespace {

json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope},     {"intercept", f->intercept}, {"r2", f->r2},
          {"t_min", f->t_min_fit}, {"t_max", f->t_max_fit},     {"n_used", f->n_used}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string diagnostics_to_json(const SweepResult& r, const Problem& problem) {
  const ExactSolution& e = r.exact;
  json j;
  j["dual_fit"] = fit_json(r.dual_fit);
  j["primal_fit"] = fit_json(r.primal_fit);
  j["decay_fit"] = fit_json(r.decay_fit);
  j["kappa_star_min"] = finite_or_null(e.kappa_star_min);
  j["dim_E0"] = r.e0.dim;
  j["E0_residual"] = r.e0.residual;
  j["I0_size"] = e.I0.pairs.size();
  j["d_star"] = r.d_star ? vec_json(*r.d_star) : json(nullptr);
  if (r.d_star && !r.points.empty()) {
    j["d_tmax_minus_d_star"] = (r.points.back().d - *r.d_star).norm();
  }

  const SweepSummary s = summarize_sweep(r, problem);
  j["ode_max_relative_residual_t_ge_10"] =
      s.ode_max_ratio ? json(*s.ode_max_ratio) : json(nullptr);
  j["ode_missing_rows_t_ge_10"] = s.ode_missing_rows;
  j["max_d_norm"] = s.max_d_norm;
  j["entropy_star"] = r.exact_entropy;
  j["max_entropy_excess"] = finite_or_null(s.max_entropy_excess);
  j["primal_value"] = s.primal_value;
  j["duality_gap"] = s.duality_gap;
  j["max_complementarity"] = s.max_complementarity;
  j["min_slack"] = s.min_slack;
  j["exact_converged"] = e.converged();
  j["degenerate"] = e.barrier.degenerate;
  j["nonconverged_rows"] = s.nonconverged_rows;
  return j.dump(2) + "\n";
}

}  // namespace uotlab
