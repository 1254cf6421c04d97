#include "nodalot/sinkhorn.hpp"

#include <cmath>
#include <stdexcept>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

// Row-wise log-sum-exp of (shift_cols + base) / eps where base is -cost with
// one potential folded in; written with explicit max subtraction for safety.
Eigen::ArrayXd lse_rows(const Eigen::MatrixXd& a) {
  Eigen::ArrayXd m = a.rowwise().maxCoeff();
  Eigen::ArrayXd out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    out[i] = m[i] + std::log((a.row(i).array() - m[i]).exp().sum());
  return out;
}

}  // namespace

SinkhornResult sinkhorn_transport(const Eigen::MatrixXd& cost, const Eigen::ArrayXd& mu,
                                  const Eigen::ArrayXd& nu, const SinkhornOptions& opts) {
  const Eigen::Index ns = mu.size(), nt = nu.size();
  if (cost.rows() != ns || cost.cols() != nt)
    throw std::invalid_argument("sinkhorn: cost matrix shape mismatch");
  if ((mu <= 0.0).any() || (nu <= 0.0).any())
    throw std::invalid_argument("sinkhorn: masses must be positive");
  if (!(opts.eps_start >= opts.eps_final) || !(opts.eps_final > 0.0) || opts.stages < 1)
    throw std::invalid_argument("sinkhorn: bad annealing schedule");

  const Eigen::ArrayXd log_mu = mu.log(), log_nu = nu.log();
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(ns), g = Eigen::ArrayXd::Zero(nt);
  Eigen::MatrixXd work(ns, nt);

  SinkhornResult res;
  const double ratio = opts.stages > 1
                           ? std::pow(opts.eps_final / opts.eps_start,
                                      1.0 / (opts.stages - 1))
                           : 1.0;
  for (int stage = 0; stage < opts.stages; ++stage) {
    const double eps = opts.stages > 1 ? opts.eps_start * std::pow(ratio, stage)
                                       : opts.eps_final;
    for (int it = 0; it < opts.iters_per_stage; ++it) {
      work = ((-cost).colwise() + f.matrix()) / eps;  // (f_i - C_ij)/eps
      const Eigen::ArrayXd g_new = eps * (log_nu - lse_rows(work.transpose()));
      work = ((-cost).rowwise() + g_new.matrix().transpose()) / eps;
      const Eigen::ArrayXd f_new = eps * (log_mu - lse_rows(work));
      const double delta = (f_new - f).abs().maxCoeff() + (g_new - g).abs().maxCoeff();
      f = f_new;
      g = g_new;
      ++res.iterations;
      if (delta < 1e-10 * (1.0 + eps)) break;
    }
    res.eps = eps;
  }

  // Plan, cost and marginal defect at the final temperature.
  work = (((-cost).colwise() + f.matrix()).rowwise() + g.matrix().transpose()) / res.eps;
  const Eigen::MatrixXd plan = work.array().exp().matrix();
  res.value = (plan.array() * cost.array()).sum();
  const double defect = (plan.rowwise().sum().array() - mu).abs().sum() +
                        (plan.colwise().sum().transpose().array() - nu).abs().sum();
  res.marginal_err = defect / (mu.sum() + nu.sum());
  if (res.marginal_err > opts.marginal_tol)
    throw NotConverged("sinkhorn: marginal defect " + std::to_string(res.marginal_err) +
                       " above tolerance");
  return res;
}

}  // namespace nodalot
