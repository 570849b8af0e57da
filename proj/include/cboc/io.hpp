#pragma once

#include <string>

#include "cboc/bounds.hpp"
#include "cboc/knotting.hpp"
#include "cboc/transcribe.hpp"

namespace cboc {

/// Solution files carry coefficients, not samples, so consumers can
/// re-evaluate the curves exactly:
/// {problem, K, N, knots, state_coeffs, control_coeffs, cost, final_time,
///  stats, units}. Angle-valued coordinates are already in degrees.
std::string solution_to_json(const Solution& sol, const std::string& problem_name);
Solution solution_from_json(const std::string& text);
std::string solution_problem_name(const std::string& text);

/// Plot-ready samples: header t,x1..xn,u1..um,side; interior-knot left-limit
/// rows carry "left" in the side column.
std::string solution_csv(const Solution& sol, int samples);

std::string convergence_csv(const ConvergenceReport& report);

std::string knot_report_json(const KnotReport& rep, const std::string& problem_name);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace cboc
