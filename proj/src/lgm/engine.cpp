#include "firecast/lgm/engine.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/CholmodSupport>

namespace firecast::lgm {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_design(Triplets& out, const SpMat& design, Eigen::Index row0, Eigen::Index col0) {
  for (Eigen::Index k = 0; k < design.outerSize(); ++k) {
    for (SpMat::InnerIterator it(design, k); it; ++it) {
      out.emplace_back(static_cast<int>(row0 + it.row()), static_cast<int>(col0 + it.col()),
                       it.value());
    }
  }
}

struct RowTerms {
  Eigen::VectorXd gradient;
  Eigen::VectorXd weight;
};

// Supernodal LLT from CHOLMOD. The symbolic analysis is redone only when
// the pattern changes.
class Solver : public Eigen::CholmodSupernodalLLT<SpMat> {
 public:
  Solver() { cholmod().print = 0; }

  void factor(const SpMat& h) {
    const bool same = analyzed_ && h.nonZeros() == static_cast<Eigen::Index>(inner_.size()) &&
                      std::equal(outer_.begin(), outer_.end(), h.outerIndexPtr()) &&
                      std::equal(inner_.begin(), inner_.end(), h.innerIndexPtr());
    if (!same) {
      analyzePattern(h);
      outer_.assign(h.outerIndexPtr(), h.outerIndexPtr() + h.outerSize() + 1);
      inner_.assign(h.innerIndexPtr(), h.innerIndexPtr() + h.nonZeros());
      analyzed_ = true;
    }
    factorize(h);
    if (info() != Eigen::Success) {
      std::ptrdiff_t pivot = -1;
      if (m_cholmodFactor && m_cholmodFactor->minor < m_cholmodFactor->n) {
        const int* perm = static_cast<const int*>(m_cholmodFactor->Perm);
        pivot = perm ? perm[m_cholmodFactor->minor] : static_cast<std::ptrdiff_t>(m_cholmodFactor->minor);
      }
      throw NotPositiveDefinite(pivot, std::numeric_limits<double>::quiet_NaN());
    }
  }

 private:
  bool analyzed_ = false;
  std::vector<int> outer_, inner_;
};

}  // namespace

class SolverPool {
 public:
  std::unique_ptr<Solver> acquire() {
    std::lock_guard lock(mutex_);
    if (free_.empty()) return std::make_unique<Solver>();
    auto s = std::move(free_.back());
    free_.pop_back();
    return s;
  }
  void release(std::unique_ptr<Solver> s) {
    std::lock_guard lock(mutex_);
    free_.push_back(std::move(s));
  }

 private:
  std::mutex mutex_;
  std::vector<std::unique_ptr<Solver>> free_;
};

namespace {

struct Lease {
  SolverPool& pool;
  std::unique_ptr<Solver> solver;
  explicit Lease(SolverPool& p) : pool(p), solver(p.acquire()) {}
  ~Lease() { pool.release(std::move(solver)); }
  Lease(const Lease&) = delete;
  Lease& operator=(const Lease&) = delete;
};

}  // namespace

CompiledModel::CompiledModel(ModelGraph model)
    : model_(std::move(model)),
      post_cache_(std::make_shared<AnalysisCache<double>>()),
      solvers_(std::make_shared<SolverPool>()) {
  model_.validate();
  n_ = model_.latent_dimension();
  offsets_ = model_.block_offsets();
  const Eigen::Index m = model_.num_observations();
  y_.resize(m);
  group_rows_.assign(1, 0);
  Triplets fixed;
  std::map<int, Triplets> scaled;
  for (const ObservationGroup& g : model_.groups) {
    const Eigen::Index row0 = group_rows_.back();
    y_.segment(row0, g.y.size()) = g.y;
    for (const PredictorTerm& t : g.terms) {
      const EffectBlock& block = model_.blocks[t.block];
      if (block.kind == BlockKind::SharedCopy) {
        append_design(scaled[block.scale_hyper], t.design, row0, offsets_[t.block]);
      } else {
        append_design(fixed, t.design, row0, offsets_[t.block]);
      }
    }
    group_rows_.push_back(row0 + g.y.size());
  }
  fixed_design_.resize(m, n_);
  fixed_design_.setFromTriplets(fixed.begin(), fixed.end());
  for (auto& [hyper, entries] : scaled) {
    SpMat a(m, n_);
    a.setFromTriplets(entries.begin(), entries.end());
    scaled_designs_.emplace_back(hyper, std::move(a));
  }
}

SpMat CompiledModel::design(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != num_hyper()) {
    throw Error(ErrorKind::DimensionMismatch, "theta length does not match the layout");
  }
  SpMat a = fixed_design_;
  for (const auto& [hyper, part] : scaled_designs_) a += theta[hyper] * part;
  a.makeCompressed();
  return a;
}

Eigen::VectorXd CompiledModel::group_precisions(std::span<const double> theta) const {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(model_.groups.size()));
  for (std::size_t g = 0; g < model_.groups.size(); ++g) {
    const ObservationGroup& group = model_.groups[g];
    if (group.family != Family::Gaussian) continue;
    const double log_prec = theta[group.precision_hyper];
    if (!std::isfinite(log_prec) || std::abs(log_prec) > kMaxLogScale) {
      throw Error(ErrorKind::ParameterRange,
                  "noise precision of group '" + group.name + "' out of range");
    }
    out[static_cast<Eigen::Index>(g)] = std::exp(log_prec);
  }
  return out;
}

namespace {

// Log-likelihood at eta; optionally the per-row derivatives. Returns NaN
// (without throwing) if any term is non-finite and `bad_row` is given.
double evaluate_rows(const CompiledModel& model, const Eigen::VectorXd& precision,
                     const Eigen::VectorXd& eta, RowTerms* terms, Eigen::Index* bad_row) {
  const auto& groups = model.graph().groups;
  const auto& rows = model.group_rows();
  const Eigen::VectorXd& y = model.observations();
  if (terms) {
    terms->gradient.resize(y.size());
    terms->weight.resize(y.size());
  }
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Family family = groups[g].family;
    const double prec = precision[static_cast<Eigen::Index>(g)];
    for (Eigen::Index i = rows[g]; i < rows[g + 1]; ++i) {
      const LikelihoodTerms t = evaluate(family, y[i], eta[i], prec);
      if (!std::isfinite(t.log_density) || !std::isfinite(t.gradient) ||
          !std::isfinite(t.neg_hessian)) {
        if (bad_row) *bad_row = i;
        return std::numeric_limits<double>::quiet_NaN();
      }
      total += t.log_density;
      if (terms) {
        terms->gradient[i] = t.gradient;
        terms->weight[i] = t.neg_hessian;
      }
    }
  }
  return total;
}

[[noreturn]] void throw_bad_row(const CompiledModel& model, Eigen::Index row) {
  const auto& rows = model.group_rows();
  std::size_t g = 0;
  while (g + 1 < rows.size() && rows[g + 1] <= row) ++g;
  throw Error(ErrorKind::Data, "non-finite likelihood derivative for observation " +
                                   std::to_string(row - rows[g]) + " of group '" +
                                   model.graph().groups[g].name + "'");
}

}  // namespace

double log_likelihood(const CompiledModel& model, std::span<const double> theta,
                      const Eigen::VectorXd& x) {
  const Eigen::VectorXd eta = model.design(theta) * x;
  return evaluate_rows(model, model.group_precisions(theta), eta, nullptr, nullptr);
}

LatentMode latent_mode(const CompiledModel& model, std::span<const double> theta,
                       const Eigen::VectorXd* start, const NewtonSettings& settings) {
  const Eigen::Index n = model.latent_dimension();
  LatentMode out;
  const SpMat q = assemble_prior_precision(model.graph(), theta, &out.prior_log_det);
  const SpMat a = model.design(theta);
  const SpMat at = a.transpose();
  const Eigen::VectorXd precision = model.group_precisions(theta);

  Eigen::VectorXd x = (start && start->size() == n) ? *start : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd eta = a * x;
  RowTerms terms;
  Eigen::Index bad = -1;
  double ll = evaluate_rows(model, precision, eta, &terms, &bad);
  if (std::isnan(ll)) {
    if (start) {
      x.setZero();
      eta.setZero();
      ll = evaluate_rows(model, precision, eta, &terms, &bad);
    }
    if (std::isnan(ll)) throw_bad_row(model, bad);
  }
  double quad = x.dot(q * x);
  double objective = ll - 0.5 * quad;
  Lease lease(model.solver_pool());
  Solver& solver = *lease.solver;

  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd grad = at * terms.gradient - q * x;
    const Eigen::VectorXd w = terms.weight.cwiseMax(settings.weight_floor);
    const SpMat aw = w.asDiagonal() * a;
    SpMat h = q + SpMat(at * aw);
    h.makeCompressed();
    solver.factor(h);
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    const double xnorm = n > 0 ? x.lpNorm<Eigen::Infinity>() : 0.0;
    if (gnorm <= settings.tolerance * (1.0 + xnorm)) {
      out.mode = std::move(x);
      out.posterior_log_det = solver.logDeterminant();
      out.q_post = std::move(h);
      out.log_likelihood = ll;
      out.prior_quadratic = quad;
      out.iterations = iter;
      out.gradient_norm = gnorm;
      return out;
    }
    if (iter >= settings.max_iterations) {
      throw Error(ErrorKind::Convergence,
                  "latent mode did not converge in " + std::to_string(iter) +
                      " iterations; gradient norm " + std::to_string(gnorm));
    }
    const Eigen::VectorXd dx = solver.solve(grad);
    const double slack = 1e-10 * (1.0 + std::abs(objective));
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= settings.max_halvings; ++k, step *= 0.5) {
      const Eigen::VectorXd xn = x + step * dx;
      const Eigen::VectorXd etan = a * xn;
      RowTerms tn;
      Eigen::Index badn = -1;
      const double lln = evaluate_rows(model, precision, etan, &tn, &badn);
      if (std::isnan(lln)) continue;
      const double quadn = xn.dot(q * xn);
      const double objn = lln - 0.5 * quadn;
      if (objn >= objective - slack) {
        x = xn;
        terms = std::move(tn);
        ll = lln;
        quad = quadn;
        objective = objn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorKind::Convergence,
                  "line search failed in the latent mode search; gradient norm " +
                      std::to_string(gnorm));
    }
  }
}

std::shared_ptr<const CholeskyFactor<double>> posterior_factor(const CompiledModel& model,
                                                               const LatentMode& mode) {
  return std::make_shared<const CholeskyFactor<double>>(
      model.posterior_cache().factorize(mode.q_post));
}

double laplace_log_posterior(const CompiledModel& model, std::span<const double> theta,
                             const Eigen::VectorXd* start, LatentMode* mode_out,
                             const NewtonSettings& settings) {
  constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
  const double log_prior = hyper_prior_logdensity(theta, model.graph().hyper);
  if (!std::isfinite(log_prior)) return kMinusInf;
  LatentMode m;
  try {
    m = latent_mode(model, theta, start, settings);
  } catch (const NotPositiveDefinite&) {
    return kMinusInf;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParameterRange) return kMinusInf;
    throw;
  }
  const double value = m.log_likelihood - 0.5 * m.prior_quadratic + 0.5 * m.prior_log_det -
                       0.5 * m.posterior_log_det + log_prior;
  if (mode_out) *mode_out = std::move(m);
  return value;
}

}  // namespace firecast::lgm
