#include "cboc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cboc {

namespace {

using nlohmann::json;

json stats_to_json(const SolveStats& s) {
  return json{{"outer_iters", s.outer_iters}, {"inner_iters", s.inner_iters},
              {"final_feas", s.final_feas},   {"final_kkt", s.final_kkt},
              {"wall_time", s.wall_time},     {"converged", s.converged},
              {"warnings", s.warnings}};
}

SolveStats stats_from_json(const json& j) {
  SolveStats s;
  s.outer_iters = j.value("outer_iters", 0);
  s.inner_iters = j.value("inner_iters", 0);
  s.final_feas = j.value("final_feas", 0.0);
  s.final_kkt = j.value("final_kkt", 0.0);
  s.wall_time = j.value("wall_time", 0.0);
  s.converged = j.value("converged", false);
  s.warnings = j.value("warnings", std::vector<std::string>{});
  return s;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) throw std::runtime_error("solution_from_json: empty coefficient matrix");
  const auto nc = static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index c = 0; c < nc; ++c) m(i, c) = rows.at(i).at(c).get<double>();
  }
  return m;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string solution_to_json(const Solution& sol, const std::string& problem_name) {
  json j;
  j["problem"] = problem_name;
  j["K"] = sol.knots().segment_count();
  j["N"] = sol.state.order();
  j["knots"] = sol.knots().times;
  j["state_coeffs"] = matrix_rows(sol.state.stacked_coefficients());
  j["control_coeffs"] = matrix_rows(sol.control.stacked_coefficients());
  j["cost"] = sol.cost;
  j["final_time"] = sol.final_time;
  j["stats"] = stats_to_json(sol.stats);
  j["units"] = json{{"angles", "deg"}};
  return j.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int N = j.at("N").get<int>();
  KnotVector kv(j.at("knots").get<std::vector<double>>());
  Solution sol{CompositeCurve::from_coefficients(kv, matrix_from_rows(j.at("state_coeffs")), N),
               CompositeCurve::from_coefficients(kv, matrix_from_rows(j.at("control_coeffs")), N),
               j.at("cost").get<double>(), j.at("final_time").get<double>(),
               stats_from_json(j.at("stats"))};
  return sol;
}

std::string solution_problem_name(const std::string& text) {
  return json::parse(text).at("problem").get<std::string>();
}

std::string solution_csv(const Solution& sol, int samples) {
  const auto xs = sample_curve(sol.state, samples);
  const auto us = sample_curve(sol.control, samples);
  if (xs.size() != us.size()) {
    throw std::runtime_error("solution_csv: state/control sample row mismatch");
  }
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= sol.state.dim(); ++i) out << ",x" << i;
  for (int i = 1; i <= sol.control.dim(); ++i) out << ",u" << i;
  out << ",side\n";
  for (std::size_t r = 0; r < xs.size(); ++r) {
    out << format_number(xs[r].t);
    for (Eigen::Index i = 0; i < xs[r].value.size(); ++i) {
      out << "," << format_number(xs[r].value[i]);
    }
    for (Eigen::Index i = 0; i < us[r].value.size(); ++i) {
      out << "," << format_number(us[r].value[i]);
    }
    out << "," << (xs[r].left_limit ? "left" : "") << "\n";
  }
  return out.str();
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "K,N,supError,bound\n";
  for (const auto& row : report.rows) {
    out << row.K << "," << row.N << "," << format_number(row.supError) << ","
        << format_number(row.bound) << "\n";
  }
  return out.str();
}

std::string knot_report_json(const KnotReport& rep, const std::string& problem_name) {
  json j;
  j["problem"] = problem_name;
  j["detected_K"] = rep.detected_K;
  j["knot_guesses"] = rep.knot_guesses;
  json viols = json::array();
  for (const auto& v : rep.violating_nodes) {
    viols.push_back(json{{"time", v.time}, {"magnitude", v.magnitude}});
  }
  j["violating_nodes"] = std::move(viols);
  j["optimized_knots"] = rep.optimized_knots;
  j["probe_stats"] = stats_to_json(rep.probe_stats);
  if (rep.final_solution) {
    j["solution"] = json::parse(solution_to_json(*rep.final_solution, problem_name));
    j["converged"] = rep.final_solution->stats.converged;
  } else {
    j["solution"] = nullptr;
    j["converged"] = false;
  }
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open '" + path + "'");
  out << contents;
  if (!out) throw std::runtime_error("write_file: write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cboc
