#include "cboc/ocp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cboc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

FinalTime FinalTime::fixed(double tf) {
  if (!(tf > 0.0) || !std::isfinite(tf)) {
    throw std::invalid_argument("FinalTime::fixed: tf must be positive and finite");
  }
  FinalTime ft;
  ft.mode = Mode::Fixed;
  ft.value = tf;
  ft.lo = tf;
  ft.hi = tf;
  return ft;
}

FinalTime FinalTime::free_time(double guess, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo) || !(guess >= lo) || !(guess <= hi)) {
    throw std::invalid_argument("FinalTime::free_time: need 0 < lo <= guess <= hi");
  }
  FinalTime ft;
  ft.mode = Mode::Free;
  ft.value = guess;
  ft.lo = lo;
  ft.hi = hi;
  return ft;
}

void install_boundary_targets(OcProblem& p, Eigen::VectorXd x0t, Eigen::VectorXd xft) {
  if (x0t.size() != p.nx || xft.size() != p.nx) {
    throw std::invalid_argument("install_boundary_targets: target size mismatch");
  }
  p.x0_target = x0t;
  p.xf_target = xft;

  std::vector<std::pair<bool, int>> terms;  // (is_initial, coordinate)
  std::vector<double> scales;
  for (int i = 0; i < p.nx; ++i) {
    if (std::isfinite(x0t[i])) {
      terms.emplace_back(true, i);
      scales.push_back(std::max(1.0, std::abs(x0t[i])));
    }
  }
  for (int i = 0; i < p.nx; ++i) {
    if (std::isfinite(xft[i])) {
      terms.emplace_back(false, i);
      scales.push_back(std::max(1.0, std::abs(xft[i])));
    }
  }
  p.ne = static_cast<int>(terms.size());
  p.equality_scales = Eigen::Map<Eigen::VectorXd>(scales.data(), scales.size());
  p.equality = [terms, x0t, xft](const Eigen::VectorXd& x0, const Eigen::VectorXd& xf,
                                 double) {
    Eigen::VectorXd e(terms.size());
    for (std::size_t m = 0; m < terms.size(); ++m) {
      const auto [initial, i] = terms[m];
      e[m] = initial ? x0[i] - x0t[i] : xf[i] - xft[i];
    }
    return e;
  };
}

OcProblem bangbang_problem() {
  OcProblem p;
  p.name = "bangbang";
  p.nx = 1;
  p.nu = 1;
  p.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(1);
    dx[0] = x[0] + u[0];
    return dx;
  };
  p.running_cost = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return 3.0 * u[0] - 2.0 * x[0];
  };
  p.endpoint_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) { return 0.0; };
  p.state_bounds = {Bounds1{}};
  p.control_bounds = {Bounds1{0.0, 2.0}};
  p.final_time = FinalTime::fixed(2.0);
  Eigen::VectorXd x0t(1), xft(1);
  x0t << 4.0;
  xft << 39.392;
  install_boundary_targets(p, x0t, xft);
  p.nh = 0;
  p.path_ineq_scales = Eigen::VectorXd();
  return p;
}

OcProblem motion_planning_problem(const IntruderSpec& intruder,
                                  const MotionPlanningOptions& opts) {
  if (!(intruder.separation > 0.0)) {
    throw std::invalid_argument("motion_planning_problem: separation must be positive");
  }
  OcProblem p;
  p.name = "traffic_pattern";
  p.nx = 5;
  p.nu = 3;

  const bool conv = opts.conventional_kinematics;
  p.dynamics = [conv](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const double heading = deg2rad(x[3]);
    const double gamma = deg2rad(x[4]);
    Eigen::VectorXd dx(5);
    dx[0] = conv ? u[0] * std::cos(heading) * std::cos(gamma)
                 : u[0] * std::cos(heading) * std::sin(gamma);
    dx[1] = u[0] * std::sin(heading) * std::cos(gamma);
    dx[2] = u[0] * std::sin(gamma);
    dx[3] = u[1];
    dx[4] = u[2];
    return dx;
  };
  p.running_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
  p.endpoint_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double tf) { return tf; };

  p.state_bounds = {Bounds1{}, Bounds1{}, Bounds1{0.0, 25000.0}, Bounds1{}, Bounds1{-3.0, 3.5}};
  p.control_bounds = {Bounds1{100.0, 295.0}, Bounds1{-3.0, 3.0}, Bounds1{}};
  p.final_time = FinalTime::free_time(250.0, 30.0, 600.0);

  Eigen::VectorXd x0t(5), xft(5);
  x0t << 0.0, -4000.0, 1000.0, 180.0, 0.0;
  xft << -3110.9, 0.0, 259.2395, 0.0, 0.0;
  install_boundary_targets(p, x0t, xft);

  // keep at least `separation` from the straight-line intruder at all nodes;
  // squared distances keep the residual smooth through the closest approach
  const double sep2 = intruder.separation * intruder.separation;
  p.nh = 1;
  p.path_ineq = [intruder, sep2](double t, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    const Eigen::Vector3d rel = x.head<3>() - intruder.position(t);
    Eigen::VectorXd h(1);
    h[0] = sep2 - rel.squaredNorm();
    return h;
  };
  p.path_ineq_scales = Eigen::VectorXd::Constant(1, sep2);
  return p;
}

OcProblem smooth_demo_problem() {
  OcProblem p;
  p.name = "smooth";
  p.nx = 1;
  p.nu = 1;
  p.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(1);
    dx[0] = -x[0] + u[0];
    return dx;
  };
  p.running_cost = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return u[0] * u[0] + (x[0] - 1.0) * (x[0] - 1.0);
  };
  p.endpoint_cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) { return 0.0; };
  p.state_bounds = {Bounds1{}};
  p.control_bounds = {Bounds1{-5.0, 5.0}};
  p.final_time = FinalTime::fixed(1.0);
  Eigen::VectorXd x0t(1), xft(1);
  x0t << 0.0;
  xft << kNaN;
  install_boundary_targets(p, x0t, xft);
  return p;
}

namespace {

std::map<std::string, std::function<OcProblem()>>& registry() {
  static std::map<std::string, std::function<OcProblem()>> reg = {
      {"bangbang", [] { return bangbang_problem(); }},
      {"traffic_pattern", [] { return motion_planning_problem(); }},
      {"smooth", [] { return smooth_demo_problem(); }},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

OcProblem registry_get(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const auto& [k, v] : registry()) known += (known.empty() ? "" : ", ") + k;
    throw std::invalid_argument("registry_get: unknown problem '" + name + "'; known: " + known);
  }
  return it->second();
}

void registry_add(const std::string& name, std::function<OcProblem()> factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::vector<std::string> registry_names() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

std::vector<std::string> validate(const OcProblem& p) {
  std::vector<std::string> findings;
  auto flag = [&findings](const std::string& msg) { findings.push_back(msg); };

  if (p.nx < 1) flag("nx must be >= 1");
  if (p.nu < 1) flag("nu must be >= 1");
  if (static_cast<int>(p.state_bounds.size()) != p.nx) flag("state_bounds size != nx");
  if (static_cast<int>(p.control_bounds.size()) != p.nu) flag("control_bounds size != nu");
  for (std::size_t i = 0; i < p.state_bounds.size(); ++i) {
    if (!(p.state_bounds[i].lo <= p.state_bounds[i].hi)) {
      flag("state bound " + std::to_string(i) + " has lo > hi");
    }
  }
  for (std::size_t i = 0; i < p.control_bounds.size(); ++i) {
    if (!(p.control_bounds[i].lo <= p.control_bounds[i].hi)) {
      flag("control bound " + std::to_string(i) + " has lo > hi");
    }
  }
  if (p.final_time.mode == FinalTime::Mode::Fixed) {
    if (!(p.final_time.value > 0.0)) flag("fixed final time must be positive");
  } else {
    if (!(p.final_time.lo > 0.0) || !(p.final_time.hi > p.final_time.lo)) {
      flag("free final time needs 0 < lo < hi");
    }
    if (p.final_time.value < p.final_time.lo || p.final_time.value > p.final_time.hi) {
      flag("free final time guess outside [lo, hi]");
    }
  }
  for (const auto* t : {&p.x0_target, &p.xf_target}) {
    for (Eigen::Index i = 0; i < t->size(); ++i) {
      const double v = (*t)[i];
      if (!std::isnan(v) && !std::isfinite(v)) flag("boundary target is infinite");
    }
  }
  if (findings.empty()) {
    // dimension probes at deterministic random interior points
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int probe = 0; probe < 3; ++probe) {
      Eigen::VectorXd x(p.nx), u(p.nu);
      for (int i = 0; i < p.nx; ++i) x[i] = unit(rng);
      for (int i = 0; i < p.nu; ++i) u[i] = unit(rng);
      const double t = 0.5 * p.final_time.value * (1.0 + 0.5 * unit(rng));
      if (!p.dynamics) {
        flag("dynamics callable missing");
        break;
      }
      if (p.dynamics(x, u).size() != p.nx) flag("dynamics output size != nx");
      if (p.running_cost && !std::isfinite(p.running_cost(Eigen::VectorXd::Zero(p.nx),
                                                          Eigen::VectorXd::Zero(p.nu)))) {
        flag("running cost non-finite at origin");
      }
      if (p.ne > 0) {
        if (!p.equality) {
          flag("equality callable missing with ne > 0");
        } else if (p.equality(x, x, p.final_time.value).size() != p.ne) {
          flag("equality output size != ne");
        }
      }
      if (p.nh > 0) {
        if (!p.path_ineq) {
          flag("path inequality callable missing with nh > 0");
        } else if (p.path_ineq(t, x, u).size() != p.nh) {
          flag("path inequality output size != nh");
        }
      }
      if (!findings.empty()) break;
    }
  }
  return findings;
}

}  // namespace cboc
