// Copyright 2026 The hyperent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hyperent/tomography.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include <ceres/ceres.h>

#include "hyperent/errors.hpp"

namespace hyperent {

namespace {

constexpr double kEffectTol = 1e-9;

// Effects as E_k = W_k W_k^dag, all factors stacked column-wise so that
// probabilities and R reduce to two dense products.
struct Compiled {
  ComplexMatrix w;
  std::vector<std::size_t> owner;  // entry index of each column
  std::vector<double> trials;
  Eigen::Index dim = 0;
};

Compiled compile(const TomographyDataset& data) {
  Compiled c;
  c.dim = data.dim;
  std::vector<ComplexVector> cols;
  for (std::size_t k = 0; k < data.entries.size(); ++k) {
    const auto& e = data.entries[k];
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (e.effect + e.effect.adjoint()));
    for (Eigen::Index j = 0; j < data.dim; ++j) {
      const double lambda = es.eigenvalues()(j);
      if (lambda <= 1e-14) continue;
      cols.push_back(std::sqrt(lambda) * es.eigenvectors().col(j));
      c.owner.push_back(k);
    }
    c.trials.push_back(e.trials);
  }
  c.w.resize(data.dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) c.w.col(static_cast<Eigen::Index>(j)) = cols[j];
  return c;
}

std::vector<double> probabilities(const Compiled& c, const ComplexMatrix& rho) {
  const ComplexMatrix m = rho * c.w;
  std::vector<double> p(c.trials.size(), 0.0);
  for (Eigen::Index j = 0; j < c.w.cols(); ++j)
    p[c.owner[static_cast<std::size_t>(j)]] += c.w.col(j).dot(m.col(j)).real();
  return p;
}

double loglik(const Compiled& c, const std::vector<double>& counts, const std::vector<double>& p) {
  double l = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (counts[k] > 0.0) l += counts[k] * std::log(std::max(p[k], kProbabilityFloor));
    l -= c.trials[k] * p[k];
  }
  return l;
}

// L(rho + delta) - L(rho) from the probability differences, so that gains
// far below the rounding level of L itself are still resolved.
double loglik_gain(const Compiled& c, const std::vector<double>& counts, const std::vector<double>& p,
                   const std::vector<double>& p_new, const std::vector<double>& delta) {
  double gain = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (counts[k] > 0.0) {
      if (p[k] > kProbabilityFloor && p_new[k] > kProbabilityFloor)
        gain += counts[k] * std::log1p(delta[k] / p[k]);
      else
        gain += counts[k] * (std::log(std::max(p_new[k], kProbabilityFloor)) -
                             std::log(std::max(p[k], kProbabilityFloor)));
    }
    gain -= c.trials[k] * delta[k];
  }
  return gain;
}

// R = sum_k (n_k / p_k - t_k) E_k.
ComplexMatrix r_operator(const Compiled& c, const std::vector<double>& counts, const std::vector<double>& p) {
  Eigen::VectorXd weight(c.w.cols());
  for (Eigen::Index j = 0; j < c.w.cols(); ++j) {
    const std::size_t k = c.owner[static_cast<std::size_t>(j)];
    weight(j) = counts[k] / std::max(p[k], kProbabilityFloor) - c.trials[k];
  }
  ComplexMatrix r = (c.w * weight.asDiagonal()) * c.w.adjoint();
  return 0.5 * (r + r.adjoint());
}

ComplexMatrix rho_of(const ComplexMatrix& g) {
  ComplexMatrix rho = g.adjoint() * g;
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

// Square-root factor of a density matrix, mixed slightly towards I/d so the
// ascent can still move into directions the start assigns no weight.
ComplexMatrix factor_of(const ComplexMatrix& rho, double mix) {
  const auto d = rho.rows();
  const ComplexMatrix r = (1.0 - mix) * rho + mix * ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (r + r.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return s.asDiagonal() * es.eigenvectors().adjoint();
}

struct Fit {
  ComplexMatrix rho;
  double l = 0.0;
  long iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

double fixed_point_residual(const Compiled& c, const std::vector<double>& counts, const ComplexMatrix& rho,
                            const std::vector<double>& p, double total, ComplexMatrix* a_out = nullptr) {
  const ComplexMatrix r = r_operator(c, counts, p);
  const double lambda = (r * rho).trace().real();
  ComplexMatrix a = (r - lambda * ComplexMatrix::Identity(c.dim, c.dim)) / total;
  const double res = (a * rho).norm();
  if (a_out != nullptr) *a_out = std::move(a);
  return res;
}

// -(L(rho) - L(rho_ref)) / sum(n) as a function of the real and imaginary
// parts of G.  Measuring from a nearby reference keeps the cost resolvable
// long after L itself has stopped changing in double precision.
class NegativeGain final : public ceres::FirstOrderFunction {
 public:
  NegativeGain(const Compiled& c, const std::vector<double>& counts, double total, const ComplexMatrix& rho_ref)
      : c_(c), counts_(counts), total_(total), rho_ref_(rho_ref), p_ref_(probabilities(c, rho_ref)) {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const auto d = c_.dim;
    const ComplexMatrix g = unpack(x, d);
    const double s = g.squaredNorm();
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    const ComplexMatrix rho = rho_of(g);
    const auto p = probabilities(c_, rho);
    *cost = -loglik_gain(c_, counts_, p_ref_, p, probabilities(c_, rho - rho_ref_)) / total_;
    if (gradient != nullptr) {
      const ComplexMatrix r = r_operator(c_, counts_, p);
      const ComplexMatrix grad =
          2.0 * g * (r - (r * rho).trace().real() * ComplexMatrix::Identity(d, d)) / (s * total_);
      const auto n = d * d;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
          gradient[i * d + j] = -grad(i, j).real();
          gradient[n + i * d + j] = -grad(i, j).imag();
        }
    }
    return std::isfinite(*cost);
  }
  int NumParameters() const override { return static_cast<int>(2 * c_.dim * c_.dim); }

  static ComplexMatrix unpack(const double* x, Eigen::Index d) {
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(x[i * d + j], x[d * d + i * d + j]);
    return g;
  }
  static std::vector<double> pack(const ComplexMatrix& g) {
    const auto d = g.rows();
    std::vector<double> x(static_cast<std::size_t>(2 * d * d));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        x[static_cast<std::size_t>(i * d + j)] = g(i, j).real();
        x[static_cast<std::size_t>(d * d + i * d + j)] = g(i, j).imag();
      }
    return x;
  }

 private:
  const Compiled& c_;
  const std::vector<double>& counts_;
  double total_;
  ComplexMatrix rho_ref_;
  std::vector<double> p_ref_;
};

// Stops L-BFGS once an iteration gains less than `tol` in log-likelihood.
class GainStop final : public ceres::IterationCallback {
 public:
  GainStop(double tol, double total) : tol_(tol), total_(total) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary& it) override {
    if (it.iteration > 0 && it.step_is_successful && it.cost_change * total_ < tol_) {
      small_gain = true;
      return ceres::SOLVER_TERMINATE_SUCCESSFULLY;
    }
    return ceres::SOLVER_CONTINUE;
  }
  bool small_gain = false;

 private:
  double tol_, total_;
};

// Rounds of quasi-Newton (L-BFGS) ascent on G, each measured from the point
// where it started.  A round that ends without progress hands over to
// diluted R rho R steps G <- G (I + eps A), which only accept steps that do
// not lower the likelihood.
Fit ascend(const Compiled& c, const std::vector<double>& counts, ComplexMatrix g, const MleOptions& opt) {
  const auto d = c.dim;
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  double total = 0.0;
  for (double n : counts) total += n;
  if (total <= 0.0) throw InvalidParameter("mle_reconstruct: dataset has no counts");

  g /= std::sqrt(g.squaredNorm());
  Fit f;
  f.rho = rho_of(g);
  auto p = probabilities(c, f.rho);
  f.l = loglik(c, counts, p);
  double eps = 1.0;
  bool quasi_newton = true;
  while (f.iterations < opt.max_iter) {
    ComplexMatrix a;
    f.residual = fixed_point_residual(c, counts, f.rho, p, total, &a);
    if (f.residual < opt.tol) {
      f.converged = true;
      break;
    }
    if (quasi_newton) {
      auto x = NegativeGain::pack(g);
      ceres::GradientProblem problem(new NegativeGain(c, counts, total, f.rho));
      ceres::GradientProblemSolver::Options so;
      so.line_search_direction_type = ceres::LBFGS;
      so.max_num_iterations = static_cast<int>(std::min<long>(opt.max_iter - f.iterations, 100000));
      so.function_tolerance = 0.0;
      so.gradient_tolerance = 0.0;
      so.parameter_tolerance = 1e-16;
      so.logging_type = ceres::SILENT;
      GainStop stop(opt.tol, total);
      so.callbacks.push_back(&stop);
      ceres::GradientProblemSolver::Summary summary;
      ceres::Solve(so, problem, x.data(), &summary);
      f.iterations += std::max<long>(1, static_cast<long>(summary.iterations.size()) - 1);
      const double gain = -summary.final_cost * total;
      if (gain > 0.0) {
        g = NegativeGain::unpack(x.data(), d);
        g /= std::sqrt(g.squaredNorm());
        f.rho = rho_of(g);
        p = probabilities(c, f.rho);
        f.l += gain;
        if (stop.small_gain || gain < opt.tol) {
          f.converged = true;
          f.residual = fixed_point_residual(c, counts, f.rho, p, total);
          break;
        }
      } else {
        quasi_newton = false;
      }
      continue;
    }
    ++f.iterations;
    bool accepted = false;
    while (eps > 1e-12) {
      ComplexMatrix g_new = g * (id + eps * a);
      g_new /= std::sqrt(g_new.squaredNorm());
      const ComplexMatrix rho_new = rho_of(g_new);
      auto p_new = probabilities(c, rho_new);
      const double gain = loglik_gain(c, counts, p, p_new, probabilities(c, rho_new - f.rho));
      if (gain >= 0.0) {
        g = std::move(g_new);
        f.rho = rho_new;
        p = std::move(p_new);
        f.l += gain;
        eps = std::min(2.0 * eps, 1e4);
        accepted = true;
        if (gain < opt.tol) f.converged = true;
        break;
      }
      eps *= 0.5;
    }
    if (!accepted || f.converged) {
      f.residual = fixed_point_residual(c, counts, f.rho, p, total);
      break;
    }
  }
  // Report L itself rather than the accumulated gains.
  f.l = loglik(c, counts, p);
  return f;
}

std::vector<double> counts_of(const TomographyDataset& data) {
  std::vector<double> n;
  n.reserve(data.entries.size());
  for (const auto& e : data.entries) n.push_back(e.count);
  return n;
}

void append_number(std::string& s, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  s.append(buf, res.ptr);
}

double parse_number(std::string_view s, std::size_t line) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidParameter("read_matrix: line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return x;
}

}  // namespace

void TomographyDataset::validate() const {
  if (entries.empty()) throw InvalidParameter("tomography dataset is empty");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const std::string where = "tomography entry " + std::to_string(k) + ": ";
    if (e.effect.rows() != dim || e.effect.cols() != dim)
      throw DimensionMismatch(where + "effect is not " + std::to_string(dim) + "x" + std::to_string(dim));
    if (!std::isfinite(e.count) || e.count < 0.0) throw InvalidParameter(where + "count must be >= 0");
    if (!(e.trials > 0.0)) throw InvalidParameter(where + "trials must be positive");
    if (e.count > e.trials) throw InvalidParameter(where + "count exceeds trials");
    if (!std::isfinite(e.background) || e.background < 0.0) throw InvalidParameter(where + "background must be >= 0");
    if ((e.effect - e.effect.adjoint()).norm() > kEffectTol) throw InvalidParameter(where + "effect is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(e.effect, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEffectTol || es.eigenvalues().maxCoeff() > 1.0 + kEffectTol)
      throw InvalidParameter(where + "effect eigenvalues outside [0, 1]");
  }
}

double TomographyDataset::total_count() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.count;
  return s;
}

bool informationally_complete(const TomographyDataset& data) {
  const auto d = data.dim;
  // Real coordinates of each Hermitian effect: d^2 numbers.
  Eigen::MatrixXd span(static_cast<Eigen::Index>(data.entries.size()), d * d);
  for (std::size_t k = 0; k < data.entries.size(); ++k) {
    const auto& e = data.entries[k].effect;
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j) {
        span(static_cast<Eigen::Index>(k), col++) = e(i, j).real();
        if (j > i) span(static_cast<Eigen::Index>(k), col++) = e(i, j).imag();
      }
  }
  if (span.rows() < span.cols()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > 1e-9 * sv(0);
}

namespace {

std::vector<double> direct_probabilities(const ComplexMatrix& rho, const TomographyDataset& data) {
  std::vector<double> p;
  p.reserve(data.entries.size());
  // Tr(rho E) = sum_ij rho_ij E_ji
  for (const auto& e : data.entries) p.push_back((rho.array() * e.effect.transpose().array()).sum().real());
  return p;
}

}  // namespace

double loglikelihood(const ComplexMatrix& rho, const TomographyDataset& data) {
  if (rho.rows() != data.dim || rho.cols() != data.dim) throw DimensionMismatch("loglikelihood: dimension mismatch");
  const auto p = direct_probabilities(rho, data);
  double l = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& e = data.entries[k];
    if (e.count > 0.0) l += e.count * std::log(std::max(p[k], kProbabilityFloor));
    l -= e.trials * p[k];
  }
  return l;
}

ComplexMatrix loglikelihood_gradient(const ComplexMatrix& g, const TomographyDataset& data) {
  if (g.rows() != data.dim || g.cols() != data.dim)
    throw DimensionMismatch("loglikelihood_gradient: dimension mismatch");
  const ComplexMatrix rho = rho_of(g);
  const auto p = direct_probabilities(rho, data);
  ComplexMatrix r = ComplexMatrix::Zero(data.dim, data.dim);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& e = data.entries[k];
    r += (e.count / std::max(p[k], kProbabilityFloor) - e.trials) * e.effect;
  }
  const double s = g.squaredNorm();
  const ComplexMatrix r_tilde =
      (r - (r * rho).trace().real() * ComplexMatrix::Identity(data.dim, data.dim)) / s;
  return 2.0 * g * r_tilde;
}

MleResult mle_reconstruct(const TomographyDataset& data, const MleOptions& options, const ComplexMatrix* start) {
  data.validate();
  if (!(options.tol > 0.0) || options.max_iter < 1) throw InvalidParameter("mle_reconstruct: bad tol or max_iter");
  MleResult out;
  out.informationally_complete = informationally_complete(data);
  if (!out.informationally_complete && !options.allow_reduced_rank)
    throw InvalidParameter("mle_reconstruct: effects do not span the operator space; set allow_reduced_rank to "
                           "accept a reduced-rank reconstruction");
  const auto d = data.dim;
  ComplexMatrix g = ComplexMatrix::Identity(d, d);
  if (start != nullptr) {
    if (start->rows() != d || start->cols() != d) throw DimensionMismatch("mle_reconstruct: start has wrong size");
    g = factor_of(*start, 1e-3);
  }
  const auto fit = ascend(compile(data), counts_of(data), g, options);
  out.rho_hat = DensityOperator(fit.rho);
  out.log_likelihood = fit.l;
  out.iterations = fit.iterations;
  out.converged = fit.converged;
  out.residual = fit.residual;
  return out;
}

BootstrapResult bootstrap_fidelity(const TomographyDataset& data, const MleResult& fit, const StateVector& target,
                                   const BootstrapOptions& options) {
  data.validate();
  if (options.resamples < 100) throw InvalidParameter("bootstrap_fidelity: resamples must be >= 100");
  if (!(options.confidence > 0.0 && options.confidence < 1.0))
    throw InvalidParameter("bootstrap_fidelity: confidence must lie in (0, 1)");
  if (target.dim() != static_cast<std::size_t>(data.dim)) throw DimensionMismatch("bootstrap_fidelity: target size");

  const auto c = compile(data);
  const ComplexMatrix& rho_hat = fit.rho_hat.matrix();
  const auto mean = probabilities(c, rho_hat);
  const ComplexMatrix g0 = factor_of(rho_hat, 1e-3);

  BootstrapResult out;
  out.point = fidelity(fit.rho_hat, target);
  std::vector<double> counts(mean.size());
  for (int b = 0; b < options.resamples; ++b) {
    std::mt19937_64 rng(substream_seed(options.seed, static_cast<std::uint64_t>(b)));
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double b_k = data.entries[k].background;
      const double mu = c.trials[k] * std::max(mean[k], 0.0) + b_k;
      const double raw = mu > 0.0 ? static_cast<double>(std::poisson_distribution<std::uint64_t>(mu)(rng)) : 0.0;
      counts[k] = std::max(0.0, raw - b_k);
    }
    const auto f = ascend(c, counts, g0, options.mle);
    if (!f.converged) {
      ++out.failed;
      continue;
    }
    out.fidelities.push_back(fidelity(DensityOperator(f.rho), target));
  }
  if (out.fidelities.empty()) throw NonConvergence("bootstrap_fidelity: no resample converged");

  auto sorted = out.fidelities;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  // Basic interval: refits of resampled data sit below rho_hat by about as
  // much as rho_hat sits below the truth, so the quantiles are reflected
  // about the point estimate.
  const double tail = 0.5 * (1.0 - options.confidence);
  out.low = std::clamp(2.0 * out.point - quantile(1.0 - tail), 0.0, 1.0);
  out.high = std::clamp(2.0 * out.point - quantile(tail), 0.0, 1.0);
  return out;
}

std::vector<PlannedMeasurement> pauli_tomography_plan(double integration_time_s) {
  if (!(integration_time_s > 0.0)) throw InvalidParameter("pauli_tomography_plan: integration time must be positive");
  std::vector<LocalSetting> local;
  for (int pol = 0; pol < 3; ++pol)
    for (int et = 0; et < 3; ++et) {
      LocalSetting s;
      s.alpha_deg = pol == 1 ? 45.0 : 0.0;
      s.pol_mode = pol == 2 ? PolMode::Circular : PolMode::Linear;
      s.et_mode = et == 0 ? EtMode::TimeBin : EtMode::CentralSlot;
      s.phi = et == 2 ? std::numbers::pi / 2 : 0.0;
      local.push_back(s);
    }
  std::vector<PlannedMeasurement> plan;
  for (const auto& s : local)
    for (const auto& i : local)
      for (const auto& o : all_outcome_tuples()) plan.push_back({JointSetting{s, i}, o, integration_time_s});
  return plan;
}

TomographyDataset dataset_from_records(const std::vector<CountRecord>& records, double coincidence_rate_cps,
                                       bool dark_subtracted, const AnalyzerConfig& analyzer) {
  if (!(coincidence_rate_cps > 0.0)) throw InvalidParameter("dataset_from_records: rate must be positive");
  TomographyDataset data;
  for (const auto& r : records) {
    const double n = dark_subtracted ? subtract_dark(r) : static_cast<double>(r.raw);
    data.entries.push_back({joint_effect(r.setting, r.outcomes, analyzer), n, coincidence_rate_cps * r.integration_time_s,
                            dark_subtracted ? r.expected_dark : 0.0});
  }
  return data;
}

TomographyDataset dataset_from_probabilities(const DensityOperator& rho, const std::vector<PlannedMeasurement>& plan,
                                             double scale, const AnalyzerConfig& analyzer) {
  if (!(scale > 0.0)) throw InvalidParameter("dataset_from_probabilities: scale must be positive");
  TomographyDataset data;
  data.dim = static_cast<Eigen::Index>(rho.dim());
  for (const auto& m : plan) {
    ComplexMatrix e = joint_effect(m.setting, m.outcomes, analyzer);
    const double p = std::max(0.0, (rho.matrix() * e).trace().real());
    data.entries.push_back({std::move(e), scale * p, scale});
  }
  return data;
}

void write_matrix(std::ostream& out, const ComplexMatrix& m) {
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) line += ' ';
      append_number(line, m(i, j).real());
      line += ',';
      append_number(line, m(i, j).imag());
    }
    out << line << '\n';
  }
}

ComplexMatrix read_matrix(std::istream& in) {
  std::vector<std::vector<Complex>> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<Complex> row;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const auto comma = tok.find(',');
      if (comma == std::string::npos)
        throw InvalidParameter("read_matrix: line " + std::to_string(n) + ": expected re,im");
      const std::string_view sv(tok);
      row.emplace_back(parse_number(sv.substr(0, comma), n), parse_number(sv.substr(comma + 1), n));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidParameter("read_matrix: line " + std::to_string(n) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidParameter("read_matrix: empty input");
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace hyperent
