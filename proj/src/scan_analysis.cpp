#include "icsim/scan_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "icsim/spectral_model.hpp"

namespace icsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kParams = 6;

double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

RatePrediction fringe_baseline(const ExperimentConfig& config) {
  const RatePrediction a = compose_setup(config, DelaySetting{0.0, 0.0});
  const RatePrediction b = compose_setup(config, DelaySetting{0.0, 0.5 * config.signal_wavelength()});
  return RatePrediction{0.5 * (a.p_a + b.p_a), 0.5 * (a.p_b + b.p_b), 0.5 * (a.p_ab + b.p_ab)};
}

}  // namespace

void ScanRecord::validate() const {
  const std::size_t n = delays.size();
  if (predicted.size() != n || rates.size() != n || samples.size() != n) {
    throw std::invalid_argument("scan record: column lengths differ");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(delays[k] > delays[k - 1])) throw std::invalid_argument("scan record: delay grid not strictly increasing");
  }
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop > start)) throw std::invalid_argument("scan grid: need start < stop and step > 0");
  const auto n = static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = start + static_cast<double>(k) * step;
  return grid;
}

ScanRecord run_scan(const ExperimentConfig& config, ScanAxis axis, const std::vector<double>& grid) {
  ScanRecord rec;
  rec.axis = axis;
  rec.config = config;
  rec.config.scan.axis = axis;
  rec.delays = grid;

  const double fringe_period = axis == ScanAxis::Signal ? config.signal_wavelength() : config.pump.wavelength;
  double max_step = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) max_step = std::max(max_step, grid[k] - grid[k - 1]);
  if (max_step > fringe_period / 8.0) {
    std::ostringstream msg;
    msg << "grid step " << max_step << " m is coarser than 1/8 of the " << fringe_period
        << " m fringe period; fringe fits will be unreliable";
    rec.warnings.push_back(msg.str());
  }

  const RatePrediction baseline = fringe_baseline(config);
  const std::size_t n = grid.size();
  rec.predicted.resize(n);
  rec.rates.resize(n);
  rec.samples.resize(n);
  // Points are independent; the per-point RNG keeps results order-free.
  for (std::size_t k = 0; k < n; ++k) {
    DelaySetting d;
    if (axis == ScanAxis::Signal) {
      d.delta_x_s = grid[k];
      d.delta_x_p = config.scan.fixed_delay;
    } else {
      d.delta_x_p = grid[k];
      d.delta_x_s = config.scan.fixed_delay;
    }
    rec.predicted[k] = modulated_rates(config, d);
    rec.rates[k] = calibrate(rec.predicted[k], baseline, config.detectors);
    rec.samples[k] = sample_counts(rec.rates[k], config.detectors, k);
  }
  rec.validate();
  return rec;
}

ScanRecord run_scan(const ExperimentConfig& config) {
  return run_scan(config, config.scan.axis, make_grid(config.scan.start, config.scan.stop, config.scan.step));
}

FitChannel parse_channel(const std::string& text) {
  if (text == "a" || text == "singles") return FitChannel::Singles;
  if (text == "coinc" || text == "coincidence") return FitChannel::Coincidence;
  throw std::invalid_argument("unknown fit channel '" + text + "' (expected a|coinc)");
}

FitData fit_data(const ScanRecord& record, const FitOptions& options) {
  FitData data;
  data.x = record.delays;
  data.y.resize(record.size());
  const bool singles = options.channel == FitChannel::Singles;
  const double dwell = record.config.detectors.dwell;
  for (std::size_t k = 0; k < record.size(); ++k) {
    if (options.source == FitSource::Counts) {
      data.y[k] = static_cast<double>(singles ? record.samples[k].counts_a : record.samples[k].coincidences);
    } else {
      const auto& r = record.rates[k];
      data.y[k] = (singles ? r.rate_a : r.coincidence + r.accidental) * dwell;
    }
  }
  return data;
}

double estimate_period(const FitData& data) {
  const std::size_t n = data.x.size();
  if (n < 8 || data.y.size() != n) throw NoFringeError("no fringe detected: too few points");
  const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> y(n);
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = data.y[k] - mean;
    var += y[k] * y[k];
  }
  var /= static_cast<double>(n);
  if (!(var > 1e-24 * std::max(1.0, mean * mean))) throw NoFringeError("no fringe detected: constant record");

  const double span = data.x.back() - data.x.front();
  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k) min_step = std::min(min_step, data.x[k] - data.x[k - 1]);
  if (!(span > 0.0) || !(min_step > 0.0)) throw NoFringeError("no fringe detected: degenerate grid");

  // Schuster periodogram normalized by the sample variance; for white noise
  // each ordinate is ~Exp(1).
  const double xc = 0.5 * (data.x.front() + data.x.back());
  auto power = [&](double f) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = kTwoPi * f * (data.x[k] - xc);
      re += y[k] * std::cos(arg);
      im -= y[k] * std::sin(arg);
    }
    return (re * re + im * im) / (static_cast<double>(n) * var);
  };

  const double f_min = 1.5 / span;
  const double f_max = 0.5 / min_step;
  if (!(f_max > f_min)) throw NoFringeError("no fringe detected: grid too short for two periods");
  const double df = 0.1 / span;  // tenfold oversampling
  const auto m = static_cast<std::size_t>((f_max - f_min) / df) + 1;
  double best_f = f_min;
  double best_p = -1.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double f = f_min + static_cast<double>(j) * df;
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // False-alarm probability of ~m/10 independent frequencies below 1e-3.
  const double threshold = std::log(std::max(1.0, static_cast<double>(m) / 10.0)) + std::log(1e3);
  if (best_p < threshold) throw NoFringeError("no fringe detected: no significant periodogram peak");

  // Golden-section refinement inside the bracketing grid cells.
  double lo = std::max(f_min, best_f - df);
  double hi = std::min(f_max, best_f + df);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double pc = power(c);
  double pd = power(d);
  for (int it = 0; it < 80 && (hi - lo) > 1e-12 * best_f; ++it) {
    if (pc > pd) {
      hi = d;
      d = c;
      pd = pc;
      c = hi - g * (hi - lo);
      pc = power(c);
    } else {
      lo = c;
      c = d;
      pc = pd;
      d = lo + g * (hi - lo);
      pd = power(d);
    }
  }
  return 1.0 / (0.5 * (lo + hi));
}

double estimate_period(const ScanRecord& record, const FitOptions& options) {
  return estimate_period(fit_data(record, options));
}

double FringeFit::evaluate(double x) const {
  const double u = x - envelope_center;
  const double env = std::exp(-u * u / (2.0 * envelope_sigma * envelope_sigma));
  return baseline * (1.0 + visibility * env * std::cos(kTwoPi * x / period + phase));
}

namespace {

// Physical parameters, phase referenced to the window center.
struct Params {
  double baseline, visibility, center, sigma, period, phase;
};

// V = sin^2 qv keeps the visibility in [0,1]; x0 and sigma are box
// constrained, x0 to the scanned window and sigma to [lo, hi].
struct Mapping {
  double mid, half, sigma_lo, sigma_hi;

  Params to_physical(const Eigen::Matrix<double, kParams, 1>& q) const {
    const double sv = std::sin(q[1]);
    return Params{q[0], sv * sv, q[2], q[3], q[4], q[5]};
  }

  Eigen::Matrix<double, kParams, 1> to_internal(const Params& p) const {
    Eigen::Matrix<double, kParams, 1> q;
    q << p.baseline, std::asin(std::sqrt(std::clamp(p.visibility, 0.0, 1.0))), p.center, p.sigma, p.period, p.phase;
    return project(q);
  }

  Eigen::Matrix<double, kParams, 1> project(Eigen::Matrix<double, kParams, 1> q) const {
    q[2] = std::clamp(q[2], mid - half, mid + half);
    q[3] = std::clamp(q[3], sigma_lo, sigma_hi);
    return q;
  }

  // Parameter sits on a bound and the descent direction points outward.
  bool pinned(const Eigen::Matrix<double, kParams, 1>& q, const Eigen::Matrix<double, kParams, 1>& grad, int j) const {
    if (j == 2) return (q[2] <= mid - half && grad[2] < 0.0) || (q[2] >= mid + half && grad[2] > 0.0);
    if (j == 3) return (q[3] <= sigma_lo && grad[3] < 0.0) || (q[3] >= sigma_hi && grad[3] > 0.0);
    return false;
  }

  // d(physical)/d(internal), diagonal.
  Eigen::Matrix<double, kParams, 1> chain(const Eigen::Matrix<double, kParams, 1>& q) const {
    Eigen::Matrix<double, kParams, 1> c;
    c << 1.0, std::sin(2.0 * q[1]), 1.0, 1.0, 1.0, 1.0;
    return c;
  }
};

struct Problem {
  const std::vector<double>& x;
  const std::vector<double>& y;
  double mid;

  double model(const Params& p, double xk) const {
    const double u = xk - p.center;
    const double env = std::exp(-u * u / (2.0 * p.sigma * p.sigma));
    return p.baseline * (1.0 + p.visibility * env * std::cos(kTwoPi * (xk - mid) / p.period + p.phase));
  }

  // Jacobian with respect to the physical parameters.
  Eigen::MatrixXd jacobian(const Params& p) const {
    const std::size_t n = x.size();
    Eigen::MatrixXd j(n, kParams);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = x[k] - p.center;
      const double env = std::exp(-u * u / (2.0 * p.sigma * p.sigma));
      const double arg = kTwoPi * (x[k] - mid) / p.period + p.phase;
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      const double bve = p.baseline * p.visibility * env;
      const auto row = static_cast<Eigen::Index>(k);
      j(row, 0) = 1.0 + p.visibility * env * c;
      j(row, 1) = p.baseline * env * c;
      j(row, 2) = bve * c * u / (p.sigma * p.sigma);
      j(row, 3) = bve * c * u * u / (p.sigma * p.sigma * p.sigma);
      j(row, 4) = bve * s * kTwoPi * (x[k] - mid) / (p.period * p.period);
      j(row, 5) = -bve * s;
    }
    return j;
  }

  Eigen::VectorXd weights(const Params& p) const {
    Eigen::VectorXd w(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) w[static_cast<Eigen::Index>(k)] = 1.0 / std::max(model(p, x[k]), 1.0);
    return w;
  }

  double chi2(const Params& p, const Eigen::VectorXd& w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - model(p, x[k]);
      s += w[static_cast<Eigen::Index>(k)] * r * r;
    }
    return s;
  }
};

struct LmResult {
  Eigen::Matrix<double, kParams, 1> q;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

LmResult levenberg_marquardt(const Problem& prob, const Mapping& map, Eigen::Matrix<double, kParams, 1> q,
                             const FitOptions& options) {
  using Vec = Eigen::Matrix<double, kParams, 1>;
  using Mat = Eigen::Matrix<double, kParams, kParams>;
  const auto n = static_cast<Eigen::Index>(prob.x.size());

  Params p = map.to_physical(q);
  Eigen::VectorXd w = prob.weights(p);
  double cost = prob.chi2(p, w);
  double lambda = 1e-3;
  LmResult res{q, cost, 0, false};

  // Scales for the relative-change test of each physical parameter.
  const double span = 2.0 * map.half;
  auto scale = [&](const Params& pp) {
    Vec s;
    s << std::abs(pp.baseline), 1.0, span, pp.sigma, pp.period, 1.0;
    return s;
  };

  for (int it = 1; it <= options.max_iterations; ++it) {
    res.iterations = it;
    const Eigen::MatrixXd jp = prob.jacobian(p);
    const Vec chain = map.chain(q);
    Eigen::MatrixXd jq = jp * chain.asDiagonal();
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      r[k] = prob.y[static_cast<std::size_t>(k)] - prob.model(p, prob.x[static_cast<std::size_t>(k)]);
    }
    const Mat jtj = jq.transpose() * w.asDiagonal() * jq;
    const Vec grad = jq.transpose() * (w.asDiagonal() * r);
    const double diag_floor = 1e-15 * std::max(1.0, jtj.diagonal().maxCoeff());

    bool accepted = false;
    while (lambda < 1e16) {
      Mat a = jtj;
      Vec g = grad;
      for (int d = 0; d < kParams; ++d) {
        a(d, d) += lambda * std::max(jtj(d, d), diag_floor);
        if (map.pinned(q, grad, d)) {
          a.row(d).setZero();
          a.col(d).setZero();
          a(d, d) = 1.0;
          g[d] = 0.0;
        }
      }
      const Vec step = a.ldlt().solve(g);
      const Vec q_try = map.project(q + step);
      const Params p_try = map.to_physical(q_try);
      if (!(p_try.period > 0.0) || !std::isfinite(p_try.baseline)) {
        lambda *= 10.0;
        continue;
      }
      const double cost_try = prob.chi2(p_try, w);
      if (std::isfinite(cost_try) && cost_try <= cost) {
        const Vec before = (Vec() << p.baseline, p.visibility, p.center, p.sigma, p.period, p.phase).finished();
        const Vec after =
            (Vec() << p_try.baseline, p_try.visibility, p_try.center, p_try.sigma, p_try.period, p_try.phase).finished();
        const double rel = ((after - before).cwiseAbs().cwiseQuotient(scale(p_try))).maxCoeff();
        q = q_try;
        p = p_try;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        w = prob.weights(p);
        cost = prob.chi2(p, w);
        res = LmResult{q, cost, it, false};
        if (rel < options.tolerance) {
          res.converged = true;
          return res;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at working precision: a minimum.
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace

FringeFit fit_fringe(const FitData& data, const FitOptions& options) {
  const std::size_t n = data.x.size();
  if (n <= static_cast<std::size_t>(kParams)) throw NoFringeError("no fringe detected: too few points");
  const double period_seed = estimate_period(data);

  const double lo_x = data.x.front();
  const double hi_x = data.x.back();
  const double mid = 0.5 * (lo_x + hi_x);
  const double span = hi_x - lo_x;
  const Mapping map{mid, 0.5 * span, period_seed, 1e4 * span};

  // Linear seed at the periodogram period: y ~ c0 + c1 cos + c2 sin.
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double arg = kTwoPi * (data.x[k] - mid) / period_seed;
    const auto row = static_cast<Eigen::Index>(k);
    basis(row, 0) = 1.0;
    basis(row, 1) = std::cos(arg);
    basis(row, 2) = std::sin(arg);
    rhs[row] = data.y[k];
  }
  const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(rhs);
  const double b0 = lin[0];
  if (!(b0 > 0.0)) throw NoFringeError("no fringe detected: nonpositive baseline");
  const double amp = std::hypot(lin[1], lin[2]);
  const double v0 = std::clamp(amp / b0, 0.01, 0.99);
  const double phi0 = std::atan2(-lin[2], lin[1]);

  const Problem prob{data.x, data.y, mid};
  LmResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (double sigma_seed : {0.5 * span, 5.0 * span, 50.0 * span, 5e3 * span}) {
    const Params seed{b0, v0, mid, sigma_seed, period_seed, phi0};
    const LmResult r = levenberg_marquardt(prob, map, map.to_internal(seed), options);
    if (r.chi2 < best.chi2 || (!best.converged && r.converged && r.chi2 <= best.chi2 * (1.0 + 1e-9))) best = r;
  }

  const Params p = map.to_physical(best.q);
  FringeFit fit;
  fit.baseline = p.baseline;
  fit.visibility = p.visibility;
  fit.envelope_center = p.center;
  fit.envelope_sigma = p.sigma;
  fit.envelope_fwhm = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * p.sigma;
  fit.period = p.period;
  fit.phase = wrap_phase(p.phase - kTwoPi * mid / p.period);
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  fit.envelope_is_lower_bound = p.sigma >= map.sigma_hi;

  const double dof = static_cast<double>(n - kParams);
  fit.reduced_residual = best.chi2 / dof;
  double rss = 0.0;
  double yss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = data.y[k] - prob.model(p, data.x[k]);
    rss += r * r;
    yss += data.y[k] * data.y[k];
  }
  fit.relative_residual = yss > 0.0 ? std::sqrt(rss / yss) : 0.0;

  // Covariance from the local quadratic model, scaled by the reduced chi^2.
  const Eigen::MatrixXd jp = prob.jacobian(p);
  const Eigen::VectorXd w = prob.weights(p);
  const Eigen::MatrixXd normal = jp.transpose() * w.asDiagonal() * jp;
  const Eigen::MatrixXd cov = normal.completeOrthogonalDecomposition().pseudoInverse() * fit.reduced_residual;
  auto sd = [&](int i) { return std::sqrt(std::max(cov(i, i), 0.0)); };
  fit.baseline_sigma = sd(0);
  fit.visibility_sigma = sd(1);
  fit.envelope_center_sigma = sd(2);
  fit.envelope_fwhm_sigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * sd(3);
  fit.period_sigma = sd(4);
  // phase = phase_c - 2 pi mid / L
  const double dphi_dl = kTwoPi * mid / (p.period * p.period);
  fit.phase_sigma = std::sqrt(std::max(cov(5, 5) + dphi_dl * dphi_dl * cov(4, 4) + 2.0 * dphi_dl * cov(4, 5), 0.0));

  if (!fit.converged) {
    std::ostringstream msg;
    msg << "fringe fit did not converge in " << options.max_iterations << " iterations (reduced residual "
        << fit.reduced_residual << ")";
    throw FitError(msg.str(), fit);
  }
  return fit;
}

FringeFit fit_fringe(const ScanRecord& record, const FitOptions& options) {
  return fit_fringe(fit_data(record, options), options);
}

double visibility_minmax(const FringeFit& fit) {
  // Carrier over one period with the envelope held at its center value.
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 256;
  for (int k = 0; k < kSamples; ++k) {
    const double arg = kTwoPi * k / kSamples;
    const double v = fit.baseline * (1.0 + fit.visibility * std::cos(arg));
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  if (hi + lo == 0.0) return 0.0;
  return (hi - lo) / (hi + lo);
}

double visibility_minmax(const ScanRecord& record, const FitOptions& options) {
  FringeFit fit;
  try {
    fit = fit_fringe(record, options);
  } catch (const NoFringeError&) {
    return 0.0;
  }
  return visibility_minmax(fit);
}

}  // namespace icsim
