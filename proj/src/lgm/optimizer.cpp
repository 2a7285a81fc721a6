#include "firecast/lgm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace firecast::lgm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ975 = 1.959963984540054;

double finite_or_inf(double v) { return std::isfinite(v) ? v : kInf; }

// Evaluates f at every point, splitting the index range over threads.
std::vector<double> evaluate_all(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const std::vector<Eigen::VectorXd>& points, int threads) {
  std::vector<double> values(points.size());
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = f(points[i]);
    return values;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < points.size(); i += workers) values[i] = f(points[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return values;
}

double user_derivative(double internal, HyperScale scale) {
  switch (scale) {
    case HyperScale::Identity:
      return 1.0;
    case HyperScale::Log:
      return std::exp(internal);
    case HyperScale::Correlation: {
      const double rho = rho_from_internal(internal);
      return 0.5 * (1.0 - rho * rho);
    }
  }
  return 1.0;
}

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h, int threads) {
  std::vector<Eigen::VectorXd> points;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x;
    p[i] += h;
    points.push_back(p);
    p[i] -= 2.0 * h;
    points.push_back(p);
  }
  const std::vector<double> v = evaluate_all(f, points, threads);
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = (v[2 * i] - v[2 * i + 1]) / (2.0 * h);
  return g;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& start, const OptimizerSettings& settings) {
  const Eigen::Index n = start.size();
  SimplexResult result;
  if (n == 0) {
    result.x = start;
    result.value = finite_or_inf(f(start));
    result.evaluations = 1;
    result.converged = true;
    return result;
  }
  // Dimension-adapted coefficients keep the simplex from collapsing in
  // higher dimensions.
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 0.5 / dn, delta = 1.0 - 1.0 / dn;

  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return finite_or_inf(f(x));
  };
  vals[0] = eval(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[i + 1][i] += settings.initial_step;
    vals[i + 1] = eval(pts[i + 1]);
  }
  if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == kInf; })) {
    throw Error(ErrorKind::UnusableStart,
                "objective is not finite anywhere on the initial simplex");
  }
  std::vector<int> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  while (true) {
    sort_simplex();
    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      diameter = std::max(diameter, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
    }
    if (diameter < settings.tolerance) {
      result.converged = true;
      break;
    }
    if (evals >= settings.max_evaluations) break;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) c += pts[i];
    c /= dn;
    const Eigen::VectorXd& worst = pts[n];
    const Eigen::VectorXd xr = c + alpha * (c - worst);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = c + beta * (xr - c);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
      continue;
    }
    bool shrink = false;
    if (fr < vals[n]) {
      const Eigen::VectorXd xc = c + gamma * (xr - c);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd xc = c + gamma * (worst - c);
      const double fc = eval(xc);
      if (fc < vals[n]) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (Eigen::Index i = 1; i <= n; ++i) {
        pts[i] = pts[0] + delta * (pts[i] - pts[0]);
        vals[i] = eval(pts[i]);
      }
    }
  }
  result.x = pts[0];
  result.value = vals[0];
  result.evaluations = evals;
  return result;
}

void numerical_derivatives(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h, int threads,
                           Eigen::VectorXd& gradient, Eigen::MatrixXd& hessian) {
  const Eigen::Index n = x.size();
  // Stencil: x, x +- h e_i, and x + h(e_i + e_j), x - h(e_i + e_j) for i < j.
  std::vector<Eigen::VectorXd> points;
  points.push_back(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = x;
    p[i] += h;
    points.push_back(p);
    p[i] -= 2.0 * h;
    points.push_back(p);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::VectorXd p = x;
      p[i] += h;
      p[j] += h;
      points.push_back(p);
      p[i] -= 2.0 * h;
      p[j] -= 2.0 * h;
      points.push_back(p);
    }
  }
  const std::vector<double> v = evaluate_all(f, points, threads);
  const double f0 = v[0];
  auto fp = [&](Eigen::Index i) { return v[1 + 2 * i]; };
  auto fm = [&](Eigen::Index i) { return v[2 + 2 * i]; };
  gradient.resize(n);
  hessian.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gradient[i] = (fp(i) - fm(i)) / (2.0 * h);
    hessian(i, i) = (fp(i) - 2.0 * f0 + fm(i)) / (h * h);
  }
  std::size_t k = 1 + 2 * static_cast<std::size_t>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double fpp = v[k++];
      const double fmm = v[k++];
      const double hij =
          (fpp - fp(i) - fp(j) + 2.0 * f0 - fm(i) - fm(j) + fmm) / (2.0 * h * h);
      hessian(i, j) = hij;
      hessian(j, i) = hij;
    }
  }
}

FitResult optimize_hyper(const CompiledModel& model, const Eigen::VectorXd& start,
                         const OptimizerSettings& settings) {
  const int nh = model.num_hyper();
  if (start.size() != nh) {
    throw Error(ErrorKind::DimensionMismatch, "start has length " +
                                                  std::to_string(start.size()) +
                                                  ", layout expects " + std::to_string(nh));
  }
  FitResult fit;
  fit.hyper_names = model.graph().hyper.names;
  fit.hyper_scales = model.graph().hyper.scales;

  Eigen::VectorXd warm;
  double best = kInf;
  auto objective = [&](const Eigen::VectorXd& theta) {
    LatentMode m;
    double la;
    try {
      la = laplace_log_posterior(model, {theta.data(), static_cast<std::size_t>(theta.size())},
                                 warm.size() ? &warm : nullptr, &m, settings.newton);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Convergence) throw;
      return kInf;
    }
    const double v = finite_or_inf(-la);
    if (v < best) {
      best = v;
      warm = m.mode;
    }
    return v;
  };

  Eigen::VectorXd theta = start;
  double value = kInf;
  int evaluations = 0;
  bool converged = true;
  if (nh > 0) {
    const SimplexResult s = minimize_simplex(objective, start, settings);
    theta = s.x;
    value = s.value;
    evaluations = s.evaluations;
    converged = s.converged;
  }

  // Pure objective around a fixed warm start, safe for concurrent use.
  auto fixed_objective = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd anchor = warm;
    try {
      return finite_or_inf(-laplace_log_posterior(
          model, {t.data(), static_cast<std::size_t>(t.size())},
          anchor.size() ? &anchor : nullptr, nullptr, settings.newton));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Convergence) throw;
      return kInf;
    }
  };

  Eigen::MatrixXd hessian(nh, nh);
  if (nh > 0) {
    Eigen::VectorXd grad;
    numerical_derivatives(fixed_objective, theta, settings.hessian_step, settings.threads, grad,
                          hessian);
    evaluations += 1 + nh * (nh + 1);
    // Quasi-Newton polish: the Hessian is kept, only the gradient is
    // refreshed, and the curvature is recomputed once if theta moved.
    bool moved = false;
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    for (int step = 0; step < settings.polish_steps; ++step) {
      if (llt.info() != Eigen::Success || !grad.allFinite()) break;
      Eigen::VectorXd delta = -llt.solve(grad);
      const double size = delta.lpNorm<Eigen::Infinity>();
      if (!(size > settings.tolerance)) break;
      if (size > 1.0) delta /= size;
      const Eigen::VectorXd trial = theta + delta;
      const double v = objective(trial);
      ++evaluations;
      if (!(v < value)) break;
      theta = trial;
      value = v;
      moved = true;
      if (step + 1 < settings.polish_steps) {
        grad = central_gradient(fixed_objective, theta, settings.hessian_step, settings.threads);
        evaluations += 2 * nh;
      }
    }
    if (moved) {
      numerical_derivatives(fixed_objective, theta, settings.hessian_step, settings.threads,
                            grad, hessian);
      evaluations += 1 + nh * (nh + 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hessian + hessian.transpose()));
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double top = std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
    const double floor = 1e-8 * top;
    if (!lambda.allFinite() || lambda.minCoeff() <= floor) {
      fit.hessian_adjusted = true;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        lambda[i] = std::isfinite(lambda[i]) ? std::max(lambda[i], floor) : top;
      }
    }
    fit.theta_cov =
        eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  } else {
    fit.theta_cov.resize(0, 0);
  }

  LatentMode m;
  const double la = laplace_log_posterior(
      model, {theta.data(), static_cast<std::size_t>(theta.size())},
      warm.size() ? &warm : nullptr, &m, settings.newton);
  ++evaluations;
  if (!std::isfinite(la)) {
    throw Error(ErrorKind::UnusableStart, "log posterior is not finite at the optimum");
  }
  fit.theta = theta;
  fit.log_posterior = la;
  fit.evaluations = evaluations;
  fit.converged = converged;
  fit.mode = std::move(m.mode);
  fit.factor = posterior_factor(model, m);
  fit.latent_sd = fit.factor->marginal_variances().cwiseSqrt();
  summarize(model, fit);
  return fit;
}

void summarize(const CompiledModel& model, FitResult& fit) {
  fit.hyper.clear();
  for (Eigen::Index i = 0; i < fit.theta.size(); ++i) {
    const HyperScale scale = fit.hyper_scales[i];
    const double t = fit.theta[i];
    const double sd = std::sqrt(std::max(fit.theta_cov(i, i), 0.0));
    double lo = to_user_scale(t - kZ975 * sd, scale);
    double hi = to_user_scale(t + kZ975 * sd, scale);
    if (lo > hi) std::swap(lo, hi);
    fit.hyper.push_back({fit.hyper_names[i], to_user_scale(t, scale),
                         user_derivative(t, scale) * sd, lo, hi});
  }
  fit.fixed.clear();
  const ModelGraph& graph = model.graph();
  const auto& offsets = model.block_offsets();
  for (std::size_t b = 0; b < graph.blocks.size(); ++b) {
    const EffectBlock& block = graph.blocks[b];
    if (block.kind != BlockKind::Fixed) continue;
    for (Eigen::Index j = 0; j < block.dimension; ++j) {
      const Eigen::Index k = offsets[b] + j;
      const std::string name = block.labels.empty()
                                   ? block.name + "[" + std::to_string(j) + "]"
                                   : block.labels[static_cast<std::size_t>(j)];
      const double est = fit.mode[k];
      const double sd = fit.latent_sd[k];
      fit.fixed.push_back({name, est, sd, est - kZ975 * sd, est + kZ975 * sd});
    }
  }
}

Eigen::MatrixXd sample_latent_posterior(const FitResult& fit, std::uint64_t seed, int k) {
  return fit.factor->sample(fit.mode, seed, k);
}

void write_fit_table(std::ostream& os, const FitResult& fit) {
  os << "name estimate sd q025 q975\n";
  auto row = [&](const Summary& s) {
    os << s.name << ' ' << format_number(s.estimate) << ' ' << format_number(s.sd) << ' '
       << format_number(s.q025) << ' ' << format_number(s.q975) << '\n';
  };
  for (const Summary& s : fit.hyper) row(s);
  for (const Summary& s : fit.fixed) row(s);
}

void write_theta(std::ostream& os, const FitResult& fit) {
  char buf[64];
  for (Eigen::Index i = 0; i < fit.theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", fit.theta[i]);
    os << fit.hyper_names[i] << ' ' << buf << '\n';
  }
}

Eigen::VectorXd read_theta(std::istream& is, const std::vector<std::string>& names) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(names.size()));
  std::string line;
  std::size_t i = 0;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    double value = 0.0;
    if (!(ss >> name >> value)) {
      throw Error(ErrorKind::Parse, "theta file line " + std::to_string(lineno) + ": malformed");
    }
    if (i >= names.size() || name != names[i]) {
      throw Error(ErrorKind::Parse, "theta file line " + std::to_string(lineno) +
                                        ": unexpected hyperparameter '" + name + "'");
    }
    theta[static_cast<Eigen::Index>(i++)] = value;
  }
  if (i != names.size()) {
    throw Error(ErrorKind::Parse, "theta file has " + std::to_string(i) + " entries, expected " +
                                      std::to_string(names.size()));
  }
  return theta;
}

}  // namespace firecast::lgm
