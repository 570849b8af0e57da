#include "cboc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace cboc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Persistent pool running index jobs 0..jobs-1; the calling thread
/// participates. Each job writes its own output slot, so results are
/// bit-identical regardless of scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(int threads) {
    for (int i = 0; i < threads - 1; ++i) {
      workers_.emplace_back([this] { worker(); });
    }
  }
  WorkerPool(const WorkerPool&) = delete;
  ~WorkerPool() {
    {
      std::lock_guard lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  void run(int jobs, const std::function<void(int)>& fn) {
    if (workers_.empty() || jobs <= 1) {
      for (int i = 0; i < jobs; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lk(m_);
      job_ = &fn;
      jobs_ = jobs;
      next_ = 0;
      done_ = 0;
    }
    cv_.notify_all();
    work();
    std::unique_lock lk(m_);
    cv_done_.wait(lk, [this] { return done_ == jobs_; });
    job_ = nullptr;
  }

 private:
  void work() {
    for (;;) {
      int i;
      {
        std::lock_guard lk(m_);
        if (job_ == nullptr || next_ >= jobs_) return;
        i = next_++;
      }
      (*job_)(i);
      {
        std::lock_guard lk(m_);
        if (++done_ == jobs_) cv_done_.notify_all();
      }
    }
  }
  void worker() {
    for (;;) {
      {
        std::unique_lock lk(m_);
        cv_.wait(lk, [this] { return stop_ || (job_ != nullptr && next_ < jobs_); });
        if (stop_) return;
      }
      work();
    }
  }

  std::vector<std::thread> workers_;
  std::mutex m_;
  std::condition_variable cv_, cv_done_;
  const std::function<void(int)>* job_ = nullptr;
  int jobs_ = 0, next_ = 0, done_ = 0;
  bool stop_ = false;
};

int auto_threads(int requested, int n) {
  if (requested > 0) return requested;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(std::min(hw, n / 16), 1, 8);
}

/// Merit value guarded against evaluation failures: exceptions and NaNs map
/// to +inf so line searches back away from bad regions.
double guarded(const std::function<double(const Eigen::VectorXd&)>& fn,
               const Eigen::VectorXd& z) {
  try {
    const double v = fn(z);
    return std::isnan(v) ? kInf : v;
  } catch (const std::exception&) {
    return kInf;
  }
}

Eigen::VectorXd fd_gradient_parallel(const std::function<double(const Eigen::VectorXd&)>& fn,
                                     const Eigen::VectorXd& z, double rel_step,
                                     WorkerPool& pool) {
  Eigen::VectorXd g(z.size());
  pool.run(static_cast<int>(z.size()), [&](int i) {
    double h = rel_step * std::max(1.0, std::abs(z[i]));
    for (int attempt = 0; attempt < 3; ++attempt) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fp = guarded(fn, zp);
      const double fm = guarded(fn, zm);
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[i] = (fp - fm) / (2.0 * h);
        return;
      }
      h /= 16.0;
    }
    g[i] = 0.0;  // merit is infinite on both sides; the line search recovers
  });
  return g;
}

struct AugmentedLagrangian {
  const NlpFunctions* fns;
  Eigen::VectorXd lambda;  // equality multipliers
  Eigen::VectorXd sigma;   // inequality multipliers, >= 0
  double mu = 10.0;
  double f_scale = 1.0;

  double operator()(const Eigen::VectorXd& z) const {
    double m = fns->objective(z) / f_scale;
    if (fns->n_eq > 0) {
      const Eigen::VectorXd c = fns->eq(z);
      m += lambda.dot(c) + 0.5 * mu * c.squaredNorm();
    }
    if (fns->n_ineq > 0) {
      const Eigen::VectorXd g = fns->ineq(z);
      for (int i = 0; i < fns->n_ineq; ++i) {
        const double s = sigma[i] + mu * g[i];
        if (s > 0.0) m += (s * s - sigma[i] * sigma[i]) / (2.0 * mu);
        else m -= sigma[i] * sigma[i] / (2.0 * mu);
      }
    }
    return m;
  }
};

struct InnerResult {
  Eigen::VectorXd z;
  double merit = kInf;
  double pg_norm = kInf;
  int iters = 0;
};

/// Projected L-BFGS with Armijo backtracking along the projected arc. The
/// quasi-Newton model lives on the free variables only: coordinates pinned
/// at a bound with the gradient pushing outward are frozen for the step, so
/// projection does not poison the curvature pairs.
InnerResult inner_minimize(const AugmentedLagrangian& al, Eigen::VectorXd z, double tol,
                           int max_iter, double fd_step, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, WorkerPool& pool) {
  auto project = [&](Eigen::VectorXd v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };
  auto merit = [&](const Eigen::VectorXd& v) {
    return guarded([&al](const Eigen::VectorXd& w) { return al(w); }, v);
  };
  auto grad = [&](const Eigen::VectorXd& v) {
    return fd_gradient_parallel([&al](const Eigen::VectorXd& w) { return al(w); }, v, fd_step,
                                pool);
  };
  auto free_mask = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& gv) {
    Eigen::VectorXd m(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const bool at_lo = v[i] - lo[i] <= 1e-12 * (1.0 + std::abs(lo[i])) && gv[i] > 0.0;
      const bool at_hi = hi[i] - v[i] <= 1e-12 * (1.0 + std::abs(hi[i])) && gv[i] < 0.0;
      m[i] = (at_lo || at_hi) ? 0.0 : 1.0;
    }
    return m;
  };

  z = project(z);
  double f = merit(z);
  Eigen::VectorXd g = grad(z);

  constexpr int kMemory = 10;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;  // masked (s, y)

  InnerResult res;
  res.z = z;
  res.merit = f;
  res.pg_norm = (z - project(z - g)).lpNorm<Eigen::Infinity>();

  double stall_ref = f;
  int stall_count = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double pg = (z - project(z - g)).lpNorm<Eigen::Infinity>();
    res.pg_norm = pg;
    res.iters = iter;
    if (pg <= tol) break;

    const Eigen::VectorXd mask = free_mask(z, g);
    Eigen::VectorXd d = -g.cwiseProduct(mask);
    const double free_gnorm2 = d.squaredNorm();

    // two-loop recursion over the free subspace
    if (!hist.empty()) {
      std::vector<double> alpha(hist.size());
      for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
        const auto& [s, y] = hist[i];
        alpha[i] = s.dot(d) / y.dot(s);
        d -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = hist.back();
      d *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t i = 0; i < hist.size(); ++i) {
        const auto& [s, y] = hist[i];
        const double beta = y.dot(d) / y.dot(s);
        d += (alpha[i] - beta) * s;
      }
      d = d.cwiseProduct(mask);
    }
    const double dg = d.dot(g);
    if (!d.allFinite() || dg > -1e-12 * d.norm() * g.norm() || free_gnorm2 == 0.0) {
      d = -g.cwiseProduct(mask);
    }

    auto try_direction = [&](const Eigen::VectorXd& dir, Eigen::VectorXd& z_out,
                             double& f_out) {
      double alpha = 1.0;
      for (int ls = 0; ls < 45; ++ls) {
        const Eigen::VectorXd zt = project(z + alpha * dir);
        if ((zt - z).lpNorm<Eigen::Infinity>() == 0.0) return false;
        const double ft = merit(zt);
        const double slope = g.dot(zt - z);
        if (std::isfinite(ft) && ft <= f + 1e-4 * std::min(slope, 0.0)) {
          z_out = zt;
          f_out = ft;
          return true;
        }
        alpha *= 0.5;
      }
      return false;
    };

    Eigen::VectorXd z_next;
    double f_next;
    bool is_sd = hist.empty();
    bool ok = try_direction(d, z_next, f_next);
    if (!ok && !is_sd) {
      hist.clear();
      ok = try_direction(Eigen::VectorXd(-g.cwiseProduct(mask)), z_next, f_next);
    }
    if (!ok) break;  // no descent at line-search resolution

    const Eigen::VectorXd g_next = grad(z_next);
    const Eigen::VectorXd mask_next = free_mask(z_next, g_next);
    const Eigen::VectorXd s = (z_next - z).cwiseProduct(mask_next);
    const Eigen::VectorXd y = (g_next - g).cwiseProduct(mask_next);
    const double sy = s.dot(y);
    const bool same_set = (mask_next - mask).lpNorm<Eigen::Infinity>() == 0.0;
    if (same_set && sy > 1e-10 * s.norm() * y.norm()) {
      hist.emplace_back(s, y);
      if (static_cast<int>(hist.size()) > kMemory) hist.pop_front();
    } else if (!same_set) {
      hist.clear();
    }
    z = z_next;
    f = f_next;
    g = g_next;
    res.z = z;
    res.merit = f;
    res.iters = iter + 1;

    // hand control back to the outer loop once progress sits below the
    // finite-difference noise floor; a multiplier refresh usually unsticks it
    if (stall_ref - f <= 1e-15 * (1.0 + std::abs(f)) && pg > 10.0 * tol) {
      if (++stall_count >= 60) break;
    } else if (stall_ref - f > 1e-15 * (1.0 + std::abs(f))) {
      stall_ref = f;
      stall_count = 0;
    }
  }
  res.z = z;
  res.merit = f;
  res.pg_norm = (z - project(z - g)).lpNorm<Eigen::Infinity>();
  return res;
}

struct AlmOutcome {
  Eigen::VectorXd z;
  SolveStats stats;
  double objective = kInf;
};

bool trace_enabled() {
  static const bool on = std::getenv("CBOC_TRACE") != nullptr;
  return on;
}

AlmOutcome run_alm(const NlpFunctions& fns, const Eigen::VectorXd& z0,
                   const SolverConfig& cfg, WorkerPool& pool) {
  AugmentedLagrangian al;
  al.fns = &fns;
  al.lambda = Eigen::VectorXd::Zero(fns.n_eq);
  al.sigma = Eigen::VectorXd::Zero(fns.n_ineq);
  al.mu = cfg.penalty_init;
  const double f0 = guarded(fns.objective, z0);
  al.f_scale = std::isfinite(f0) ? std::max(1.0, std::abs(f0)) : 1.0;

  auto violation = [&](const Eigen::VectorXd& z) {
    double v = 0.0;
    if (fns.n_eq > 0) v = fns.eq(z).lpNorm<Eigen::Infinity>();
    if (fns.n_ineq > 0) v = std::max(v, fns.ineq(z).maxCoeff());
    return std::max(v, 0.0);
  };

  AlmOutcome out;
  out.z = z0;
  Eigen::VectorXd z = z0;
  double omega = 1e-1;                       // inner stationarity target
  double eta = 1e-1;                         // feasibility gate
  double best_v = kInf, best_f = kInf;

  for (int outer = 0; outer < cfg.outer_max_iter; ++outer) {
    const InnerResult inner = inner_minimize(al, z, std::max(omega, cfg.opt_tol),
                                             cfg.inner_max_iter, cfg.fd_step, fns.lo,
                                             fns.hi, pool);
    z = inner.z;
    out.stats.inner_iters += inner.iters;
    out.stats.outer_iters = outer + 1;
    out.stats.final_kkt = inner.pg_norm;

    const double v = violation(z);
    const double fz = guarded(fns.objective, z);
    if (trace_enabled()) {
      std::fprintf(stderr,
                   "[alm] outer %2d mu %.1e viol %.3e pg %.3e obj %.8f inner %d\n",
                   outer + 1, al.mu, v, inner.pg_norm, fz, inner.iters);
    }
    if (v < best_v || (v <= best_v * 1.001 && fz < best_f)) {
      best_v = v;
      best_f = fz;
      out.z = z;
      out.objective = fz;
      out.stats.final_feas = v;
    }

    if (v <= std::max(eta, cfg.feas_tol)) {
      if (v <= cfg.feas_tol && inner.pg_norm <= cfg.opt_tol) {
        out.z = z;
        out.objective = fz;
        out.stats.final_feas = v;
        out.stats.converged = true;
        break;
      }
      if (fns.n_eq > 0) al.lambda += al.mu * fns.eq(z);
      if (fns.n_ineq > 0) {
        al.sigma = (al.sigma + al.mu * fns.ineq(z)).cwiseMax(0.0);
      }
      omega = std::max(0.2 * omega, 0.9 * cfg.opt_tol);
      eta = std::max(0.2 * eta, 0.9 * cfg.feas_tol);
    } else {
      if (al.mu >= cfg.penalty_max) {
        out.stats.warnings.push_back("penalty reached cap with violation " + std::to_string(v));
        break;
      }
      al.mu = std::min(al.mu * cfg.penalty_growth, cfg.penalty_max);
      omega = std::max(omega, 1e-2);
    }
  }
  return out;
}

class ReferenceBackend final : public NlpBackend {
 public:
  std::string name() const override { return "reference"; }

  std::pair<Eigen::VectorXd, SolveStats> minimize(const NlpFunctions& fns,
                                                  const Eigen::VectorXd& z0,
                                                  const SolverConfig& cfg) const override {
    const auto start = std::chrono::steady_clock::now();
    WorkerPool pool(auto_threads(cfg.threads, fns.n));

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 0.1);

    AlmOutcome best;
    bool have = false;
    for (int s = 0; s <= cfg.restarts; ++s) {
      Eigen::VectorXd start_z = z0;
      if (s > 0) {
        for (int i = 0; i < fns.n; ++i) {
          start_z[i] += noise(rng) * std::max(1.0, std::abs(z0[i]));
        }
        start_z = start_z.cwiseMax(fns.lo).cwiseMin(fns.hi);
      }
      AlmOutcome o = run_alm(fns, start_z, cfg, pool);
      const bool better =
          !have ||
          (o.stats.converged && !best.stats.converged) ||
          (o.stats.converged == best.stats.converged &&
           (o.stats.final_feas < best.stats.final_feas * 0.999 ||
            (o.stats.final_feas <= best.stats.final_feas * 1.001 &&
             o.objective < best.objective)));
      if (better) {
        const int ii = best.stats.inner_iters, oi = best.stats.outer_iters;
        best = std::move(o);
        if (have) {
          best.stats.inner_iters += ii;
          best.stats.outer_iters += oi;
        }
      } else {
        best.stats.inner_iters += o.stats.inner_iters;
        best.stats.outer_iters += o.stats.outer_iters;
      }
      have = true;
    }
    best.stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {best.z, best.stats};
  }
};

std::map<std::string, std::shared_ptr<const NlpBackend>>& backend_registry() {
  static std::map<std::string, std::shared_ptr<const NlpBackend>> reg = {
      {"reference", std::make_shared<ReferenceBackend>()}};
  return reg;
}

std::mutex& backend_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_backend(std::shared_ptr<const NlpBackend> b) {
  std::lock_guard lk(backend_mutex());
  backend_registry()[b->name()] = std::move(b);
}

std::shared_ptr<const NlpBackend> backend(const std::string& name) {
  std::lock_guard lk(backend_mutex());
  auto it = backend_registry().find(name);
  if (it == backend_registry().end()) {
    throw std::invalid_argument("backend: unknown solver backend '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> backend_names() {
  std::lock_guard lk(backend_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : backend_registry()) names.push_back(k);
  return names;
}

std::pair<Eigen::VectorXd, SolveStats> solve(const TranscribedNlp& nlp,
                                             const Eigen::VectorXd& z0,
                                             const SolverConfig& cfg,
                                             const std::string& backend_name) {
  if (z0.size() != nlp.layout().total) {
    throw std::invalid_argument("solve: start point has wrong length");
  }
  std::vector<std::string> warnings;
  Eigen::VectorXd z_start = z0.cwiseMax(nlp.var_lo()).cwiseMin(nlp.var_hi());
  if ((z_start - z0).lpNorm<Eigen::Infinity>() > 0.0) {
    warnings.push_back("start point clipped into variable bounds");
  }
  const double f0 = nlp.objective(z_start);  // throws on non-finite
  (void)f0;

  // variable scaling: bound widths when finite, start magnitude otherwise
  const int n = nlp.layout().total;
  Eigen::VectorXd scale(n);
  for (int i = 0; i < n; ++i) {
    const double lo = nlp.var_lo()[i], hi = nlp.var_hi()[i];
    if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) {
      scale[i] = std::clamp(hi - lo, 1e-8, 1e8);
    } else {
      scale[i] = std::max(1.0, std::abs(z_start[i]));
    }
  }

  NlpFunctions fns;
  fns.n = n;
  fns.n_eq = nlp.n_eq();
  fns.n_ineq = nlp.n_ineq();
  fns.objective = [&nlp, scale](const Eigen::VectorXd& zh) {
    return nlp.objective(scale.cwiseProduct(zh));
  };
  fns.eq = [&nlp, scale](const Eigen::VectorXd& zh) {
    return nlp.eq(scale.cwiseProduct(zh)).cwiseQuotient(nlp.eq_scales()).eval();
  };
  fns.ineq = [&nlp, scale](const Eigen::VectorXd& zh) {
    return nlp.ineq(scale.cwiseProduct(zh)).cwiseQuotient(nlp.ineq_scales()).eval();
  };
  fns.lo = nlp.var_lo().cwiseQuotient(scale);
  fns.hi = nlp.var_hi().cwiseQuotient(scale);

  auto be = backend(backend_name);
  auto [zh, stats] = be->minimize(fns, z_start.cwiseQuotient(scale), cfg);
  Eigen::VectorXd z = scale.cwiseProduct(zh);

  // never trust backend-reported feasibility
  stats.final_feas = nlp.max_violation(z);
  stats.converged = stats.converged && stats.final_feas <= cfg.feas_tol * (1.0 + 1e-9);
  for (auto& w : warnings) stats.warnings.push_back(w);
  return {z, stats};
}

Eigen::VectorXd initial_guess(const OcProblem& p, const DecisionLayout& layout) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.total);
  const double tf = p.final_time.value;
  const int K = layout.K, N = layout.N;

  for (int k = 0; k < K; ++k) {
    const double ta = tf * static_cast<double>(k) / K;
    const double tb = tf * static_cast<double>(k + 1) / K;
    for (int j = 0; j <= N; ++j) {
      const double t = ta + (tb - ta) * static_cast<double>(j) / N;
      for (int i = 0; i < layout.nx; ++i) {
        const double a = p.x0_target.size() == layout.nx ? p.x0_target[i]
                                                         : std::numeric_limits<double>::quiet_NaN();
        const double b = p.xf_target.size() == layout.nx ? p.xf_target[i]
                                                         : std::numeric_limits<double>::quiet_NaN();
        double v = 0.0;
        if (std::isfinite(a) && std::isfinite(b)) v = a + (b - a) * t / tf;
        else if (std::isfinite(a)) v = a;
        else if (std::isfinite(b)) v = b;
        z[layout.state_index(k, j, i)] =
            std::clamp(v, p.state_bounds[i].lo, p.state_bounds[i].hi);
      }
      for (int i = 0; i < layout.nu; ++i) {
        const auto& bd = p.control_bounds[i];
        double v = bd.finite() ? 0.5 * (bd.lo + bd.hi) : 0.0;
        z[layout.control_index(k, j, i)] = std::clamp(v, bd.lo, bd.hi);
      }
    }
  }
  for (int m = 0; m < layout.n_interior_knot_vars(); ++m) {
    z[layout.knot_offset + m] = tf * static_cast<double>(m + 1) / K;
  }
  if (layout.free_final_time) z[layout.total - 1] = tf;
  return z;
}

Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                         const Eigen::VectorXd& z, const SolverConfig& cfg) {
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = cfg.fd_step * std::max(1.0, std::abs(z[i]));
    Eigen::VectorXd zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    const double fp = fn(zp), fm = fn(zm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("gradient: non-finite probe at coordinate " + std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace cboc
