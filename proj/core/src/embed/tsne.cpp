#include "advprobe/embed/tsne.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "advprobe/common/parallel.hpp"
#include "advprobe/common/rng.hpp"

namespace advprobe::embed {

namespace {

// Fills p with the normalized kernel at beta and returns the perplexity.
double row_distribution(std::span<const double> d, double d_min, double beta,
                        std::vector<double>& p) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double shifted = d[j] - d_min;
    p[j] = std::exp(-beta * shifted);
    sum += p[j];
    weighted += p[j] * shifted;
  }
  for (double& v : p) v /= sum;
  // H = log(sum) + beta * E[d - d_min]
  const double entropy = std::log(sum) + beta * weighted / sum;
  return std::exp(entropy);
}

}  // namespace

RowCalibration calibrate_row(std::span<const double> d, double perplexity, double tolerance,
                             int max_steps) {
  if (d.empty()) throw std::invalid_argument("calibrate_row needs at least one neighbour");
  if (!(perplexity >= 1.0)) throw std::invalid_argument("perplexity must be >= 1");
  double d_min = std::numeric_limits<double>::infinity();
  for (double v : d) d_min = std::min(d_min, v);

  RowCalibration c;
  c.p.resize(d.size());
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  c.beta = 1.0;
  for (c.steps = 0; c.steps < max_steps; ++c.steps) {
    c.perplexity = row_distribution(d, d_min, c.beta, c.p);
    const double diff = c.perplexity - perplexity;
    if (std::abs(diff) < tolerance) break;
    if (diff > 0.0) {
      lo = c.beta;
      c.beta = std::isinf(hi) ? c.beta * 2.0 : 0.5 * (c.beta + hi);
    } else {
      hi = c.beta;
      c.beta = 0.5 * (c.beta + lo);
    }
  }
  return c;
}

Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& x, const TsneOptions& opt,
                                 std::vector<double>* row_perplexity) {
  const Eigen::Index n = x.rows();
  // One point per column keeps the distance loop contiguous.
  const Eigen::MatrixXd xt = x.transpose();
  Eigen::MatrixXd cond(n, n);
  std::vector<double> perp(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), opt.workers, [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      d.push_back((xt.col(i) - xt.col(j)).squaredNorm());
    }
    const auto c = calibrate_row(d, opt.perplexity, opt.perplexity_tolerance,
                                 opt.max_bisection_steps);
    perp[ui] = c.perplexity;
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < n; ++j) cond(j, i) = j == i ? 0.0 : c.p[k++];
  });
  if (row_perplexity) *row_perplexity = std::move(perp);
  // cond is stored column-per-row (cond(j, i) = p_{j|i}); symmetrize.
  Eigen::MatrixXd p(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (cond(j, i) + cond(i, j)) * scale;
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

TsneResult tsne_embed(const Eigen::MatrixXd& x, const TsneOptions& opt) {
  const Eigen::Index n = x.rows();
  if (!(static_cast<double>(n) > 3.0 * opt.perplexity))
    throw std::invalid_argument("t-SNE needs more than 3 * perplexity points");
  if (opt.iterations < 1) throw std::invalid_argument("t-SNE needs at least one iteration");

  TsneResult result;
  const Eigen::MatrixXd p = joint_affinities(x, opt, &result.row_perplexity);

  double p_log_p = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (p(i, j) > 0.0) p_log_p += p(i, j) * std::log(p(i, j));

  // Small Gaussian initialization via Box-Muller on a counter stream.
  CounterRng rng(derive_seed({opt.seed, 0x7453}));
  std::vector<double> yx(static_cast<std::size_t>(n)), yy(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double r = 1e-2 * std::sqrt(-2.0 * std::log(u1));
    yx[static_cast<std::size_t>(i)] = r * std::cos(2.0 * std::numbers::pi * u2);
    yy[static_cast<std::size_t>(i)] = r * std::sin(2.0 * std::numbers::pi * u2);
  }

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> ax(un), ay(un), rx(un), ry(un);
  std::vector<double> vx(un, 0.0), vy(un, 0.0), gx(un, 1.0), gy(un, 1.0);
  result.kl.reserve(static_cast<std::size_t>(opt.iterations));

  for (int it = 0; it < opt.iterations; ++it) {
    const double exag = it < opt.exaggeration_iterations ? opt.exaggeration : 1.0;
    const double momentum = it < opt.momentum_switch ? opt.momentum_initial : opt.momentum_final;
    std::fill(ax.begin(), ax.end(), 0.0);
    std::fill(ay.begin(), ay.end(), 0.0);
    std::fill(rx.begin(), rx.end(), 0.0);
    std::fill(ry.begin(), ry.end(), 0.0);
    double z = 0.0;
    double p_log_num = 0.0;
    // Each unordered pair is visited once; p is symmetric.
    for (std::size_t i = 0; i < un; ++i) {
      const double* prow = p.data() + static_cast<Eigen::Index>(i) * n;
      const double xi = yx[i], yi = yy[i];
      double axi = 0.0, ayi = 0.0, rxi = 0.0, ryi = 0.0, zi = 0.0, pl = 0.0;
      for (std::size_t j = i + 1; j < un; ++j) {
        const double dx = xi - yx[j];
        const double dy = yi - yy[j];
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        const double pn = prow[j] * num;
        const double nn = num * num;
        axi += pn * dx;
        ayi += pn * dy;
        rxi += nn * dx;
        ryi += nn * dy;
        ax[j] -= pn * dx;
        ay[j] -= pn * dy;
        rx[j] -= nn * dx;
        ry[j] -= nn * dy;
        zi += num;
        if (prow[j] > 0.0) pl += prow[j] * std::log(num);
      }
      ax[i] += axi;
      ay[i] += ayi;
      rx[i] += rxi;
      ry[i] += ryi;
      z += 2.0 * zi;
      p_log_num += 2.0 * pl;
    }

    for (std::size_t i = 0; i < un; ++i) {
      const double grad_x = 4.0 * (exag * ax[i] - rx[i] / z);
      const double grad_y = 4.0 * (exag * ay[i] - ry[i] / z);
      // Per-coordinate adaptive gains.
      gx[i] = (grad_x > 0.0) != (vx[i] > 0.0) ? gx[i] + 0.2 : std::max(gx[i] * 0.8, 0.01);
      gy[i] = (grad_y > 0.0) != (vy[i] > 0.0) ? gy[i] + 0.2 : std::max(gy[i] * 0.8, 0.01);
      vx[i] = momentum * vx[i] - opt.learning_rate * gx[i] * grad_x;
      vy[i] = momentum * vy[i] - opt.learning_rate * gy[i] * grad_y;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      yx[i] += vx[i];
      yy[i] += vy[i];
      mx += yx[i];
      my += yy[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < un; ++i) {
      yx[i] -= mx;
      yy[i] -= my;
    }
    // KL of the positions this iteration's gradient was computed at.
    result.kl.push_back(p_log_p - p_log_num + std::log(z));
  }

  result.coords.resize(n, 2);
  for (std::size_t i = 0; i < un; ++i) {
    result.coords(static_cast<Eigen::Index>(i), 0) = yx[i];
    result.coords(static_cast<Eigen::Index>(i), 1) = yy[i];
  }
  return result;
}

}  // namespace advprobe::embed
