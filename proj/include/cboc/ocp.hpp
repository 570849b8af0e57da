#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cboc {

/// Per-coordinate box bound; +-infinity marks an unbounded side.
struct Bounds1 {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
};

struct FinalTime {
  enum class Mode { Fixed, Free };
  Mode mode = Mode::Fixed;
  double value = 1.0;  // the fixed final time, or the guess when free
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  static FinalTime fixed(double tf);
  static FinalTime free_time(double guess, double lo, double hi);
};

using DynamicsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
using RunningCostFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
using EndpointCostFn =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;
using BoundaryFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;
// Path inequality takes the node time as well: collision constraints against
// moving obstacles depend on t, not only on (x, u).
using PathIneqFn =
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Bolza optimal control problem:
/// minimize E(x(0), x(tf), tf) + integral of F(x, u)
/// subject to xdot = f(x, u), e(x(0), x(tf), tf) = 0, h(t, x, u) <= 0,
/// and per-coordinate boxes on states and controls.
struct OcProblem {
  std::string name;
  int nx = 0;
  int nu = 0;
  int ne = 0;
  int nh = 0;

  DynamicsFn dynamics;
  RunningCostFn running_cost;
  EndpointCostFn endpoint_cost;
  BoundaryFn equality;    // may be empty when ne == 0
  PathIneqFn path_ineq;   // may be empty when nh == 0

  std::vector<Bounds1> state_bounds;
  std::vector<Bounds1> control_bounds;
  FinalTime final_time;

  /// Declarative boundary values (NaN = unconstrained coordinate); used to
  /// build the default equality callable and to seed initial guesses.
  Eigen::VectorXd x0_target;
  Eigen::VectorXd xf_target;

  /// Characteristic magnitudes for residual scaling (default all ones).
  Eigen::VectorXd equality_scales;
  Eigen::VectorXd path_ineq_scales;
};

/// Installs e as the stacked residuals of all finite x0/xf targets and fills
/// equality_scales with the target magnitudes.
void install_boundary_targets(OcProblem& p, Eigen::VectorXd x0t, Eigen::VectorXd xft);

/// Scalar bang-bang benchmark: minimize integral of (3u - 2y) subject to
/// ydot = y + u, y(0) = 4, y(2) = 39.392, 0 <= u <= 2 on [0, 2].
OcProblem bangbang_problem();

/// Constant-velocity intruding aircraft. Defaults cross the midpoint of the
/// nominal straight-line path about halfway through the flight.
struct IntruderSpec {
  Eigen::Vector3d p0{-1555.0, 875.0, 630.0};   // ft
  Eigen::Vector3d v{0.0, -25.0, 0.0};          // ft/s
  double separation = 500.0;                   // ft

  Eigen::Vector3d position(double t) const { return p0 + v * t; }
};

struct MotionPlanningOptions {
  /// Replace the published velocity kinematics (cos(x4)sin(x5) / sin(x4)cos(x5)
  /// in the horizontal channels) with the conventional cos(x4)cos(x5) /
  /// sin(x4)cos(x5) form. Off by default.
  bool conventional_kinematics = false;
};

/// Minimum-time traffic-pattern replanning with collision avoidance.
/// States: position x1..x3 (ft), heading x4 (deg), flight-path angle x5 (deg).
/// Controls: speed u1 (ft/s), yaw rate u2 (deg/s), pitch rate u3 (deg/s).
OcProblem motion_planning_problem(const IntruderSpec& intruder = {},
                                  const MotionPlanningOptions& opts = {});

/// Smooth regulator demo with no discontinuities: minimize the integral of
/// u^2 + (y - 1)^2 subject to ydot = -y + u, y(0) = 0, |u| <= 5 on [0, 1].
/// Knot detection should always leave this at K = 1.
OcProblem smooth_demo_problem();

/// Named problems usable from the CLI: "bangbang", "traffic_pattern", plus
/// anything registered by a library user.
OcProblem registry_get(const std::string& name);
void registry_add(const std::string& name, std::function<OcProblem()> factory);
std::vector<std::string> registry_names();

/// Structural checks: callable output dimensions at random interior points,
/// bound ordering, boundary target sanity. Empty result means valid.
std::vector<std::string> validate(const OcProblem& p);

}  // namespace cboc
