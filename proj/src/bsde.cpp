#include "cfk/bsde.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cfk {

namespace {

constexpr double kConditionLimit = 1e10;
constexpr std::size_t kMinPathsPerBasisDim = 10;

// Scenario view starting at knot t (grid-aligned); x replaces x0.
Scenario tail_at(const Scenario& scn, double t, Complex x) {
  const int k0 = scn.grid.knot_index(t);
  if (k0 == scn.grid.cells()) throw GridMismatchError("tail_at: t = T has no cells left");
  Scenario tail = scn.tail(k0);
  tail.x0 = x;
  return tail;
}

bool at_terminal(const Scenario& scn, double t) {
  return scn.grid.knot_index(t) == scn.grid.cells();
}

BsdeEstimate exact_terminal(const Scenario& scn, Complex x, bool differentiate,
                            const char* scheme) {
  BsdeEstimate est;
  est.y = differentiate ? scn.h.derivative()(x) : scn.h(x);
  est.scheme = scheme;
  return est;
}

void check_finite_estimate(const Complex& v, const char* what) {
  if (!is_finite(v)) {
    std::ostringstream msg;
    msg << what << ": estimate overflowed (non-finite sample); coefficient magnitudes too large";
    throw OverflowError(msg.str());
  }
}

}  // namespace

AdjointWeights::AdjointWeights(std::size_t n_paths, int cells, std::vector<Complex> m)
    : n_paths_(n_paths), cells_(cells), m_(std::move(m)) {
  if (m_.size() != n_paths_ * (static_cast<std::size_t>(cells_) + 1)) {
    throw GridMismatchError("AdjointWeights: storage does not match n_paths * (cells + 1)");
  }
}

AdjointWeights adjoint_weights(const CoefficientTable& coeffs, const PathBatch& batch) {
  coeffs.validate(batch.grid());
  const std::size_t n = batch.n_paths();
  const int cells = batch.cells();
  const std::size_t stride = static_cast<std::size_t>(cells) + 1;
  const TimeGrid& grid = batch.grid();

  std::vector<Complex> drift(static_cast<std::size_t>(cells));
  for (int k = 0; k < cells; ++k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    drift[ku] = (coeffs.alpha[ku] - 0.5 * coeffs.beta[ku] * coeffs.theta[ku]) * grid.dt(k);
  }

  std::vector<Complex> m(n * stride);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Complex log_m{0.0, 0.0};
      m[j * stride] = Complex{1.0, 0.0};
      for (int k = 0; k < cells; ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        log_m += drift[ku] + 0.5 * coeffs.theta[ku] * batch.db(j, k) +
                 0.5 * coeffs.beta[ku] * batch.db_bar(j, k);
        m[j * stride + ku + 1] = std::exp(log_m);
      }
    }
  });

  AdjointWeights w{n, cells, std::move(m)};
  check_finite_estimate(w.at(n - 1, cells), "adjoint_weights");
  return w;
}

namespace {

// One sampled adjoint configuration: batch, forward states, weights and the
// per-cell quadrature plan for the source time integral. Cells where both
// the state and the weight are deterministic (sigma = gamma = beta = theta
// = 0) integrate exactly via exp_moment; stochastic cells use the
// trapezoidal rule, whose bias is O(dt^2).
struct AdjointRun {
  Scenario tail;
  PathBatch batch;
  ForwardPaths paths;
  AdjointWeights weights;
  std::vector<Poly> src;            // g_tilde or its derivative, per cell
  std::vector<char> cell_exact;     // deterministic-cell flag
  std::vector<Complex> exact_em;    // exp_moment(alpha_k, dt_k, 0) where exact
  Poly data;                        // h or h'

  AdjointRun(const Scenario& scenario, std::size_t n_paths, std::uint64_t seed, bool differentiate)
      : tail(scenario),
        batch(sample_increments(seed, n_paths, tail.grid)),
        paths(simulate_forward(tail.x0, tail.coeffs, batch)),
        weights(adjoint_weights(tail.coeffs, batch)) {
    const int cells = tail.grid.cells();
    src.resize(static_cast<std::size_t>(cells));
    cell_exact.assign(static_cast<std::size_t>(cells), 0);
    exact_em.assign(static_cast<std::size_t>(cells), Complex{0.0, 0.0});
    const CoefficientTable& cf = tail.coeffs;
    for (int k = 0; k < cells; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      src[ku] = differentiate ? tail.g_tilde.at(k).derivative() : tail.g_tilde.at(k);
      const bool deterministic = cf.sigma[ku] == Complex{0.0, 0.0} &&
                                 cf.gamma[ku] == Complex{0.0, 0.0} &&
                                 cf.beta[ku] == Complex{0.0, 0.0} &&
                                 cf.theta[ku] == Complex{0.0, 0.0};
      if (deterministic) {
        cell_exact[ku] = 1;
        exact_em[ku] = exp_moment(cf.alpha[ku], tail.grid.dt(k), 0);
      }
    }
    data = differentiate ? tail.h.derivative() : tail.h;
  }

  // Path functional at start point x0 + shift (the forward map is additive
  // in x, so one batch serves every shift: common random numbers).
  Complex value(std::size_t j, Complex shift) const {
    const int cells = tail.grid.cells();
    Complex acc = weights.at(j, cells) * data(paths.at(j, cells) + shift);
    for (int k = 0; k < cells; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      const Poly& g = src[ku];
      if (g.is_zero()) continue;
      if (cell_exact[ku]) {
        acc += weights.at(j, k) * g(paths.at(j, k) + shift) * exact_em[ku];
      } else {
        const double half_dt = 0.5 * tail.grid.dt(k);
        acc += half_dt * (weights.at(j, k) * g(paths.at(j, k) + shift) +
                          weights.at(j, k + 1) * g(paths.at(j, k + 1) + shift));
      }
    }
    return acc;
  }
};

std::vector<Complex> adjoint_values(const AdjointRun& run) {
  std::vector<Complex> value(run.batch.n_paths());
  exec::for_blocks(value.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) value[j] = run.value(j, Complex{0.0, 0.0});
  });
  return value;
}

}  // namespace

BsdeEstimate solve_y_adjoint(const Scenario& scn, double t, Complex x, std::size_t n_paths,
                             std::uint64_t seed) {
  if (at_terminal(scn, t)) return exact_terminal(scn, x, false, "adjoint");
  const AdjointRun run(tail_at(scn, t, x), n_paths, seed, false);
  const std::vector<Complex> value = adjoint_values(run);
  const ComplexMeanStderr ms = mean_stderr(std::span<const Complex>(value));
  check_finite_estimate(ms.mean, "solve_y_adjoint");
  BsdeEstimate est;
  est.y = ms.mean;
  est.y_se = ms.se;
  est.n_paths = n_paths;
  est.scheme = "adjoint";
  return est;
}

BsdeEstimate gradient_adjoint(const Scenario& scn, double t, Complex x, std::size_t n_paths,
                              std::uint64_t seed) {
  if (at_terminal(scn, t)) return exact_terminal(scn, x, true, "gradient-adjoint");
  const AdjointRun run(tail_at(scn, t, x), n_paths, seed, true);
  const std::vector<Complex> value = adjoint_values(run);
  const ComplexMeanStderr ms = mean_stderr(std::span<const Complex>(value));
  check_finite_estimate(ms.mean, "gradient_adjoint");
  BsdeEstimate est;
  est.y = ms.mean;
  est.y_se = ms.se;
  est.n_paths = n_paths;
  est.scheme = "gradient-adjoint";
  return est;
}

BsdeEstimate fd_gradient_adjoint(const Scenario& scn, double t, Complex x, double fd_step,
                                 std::size_t n_paths, std::uint64_t seed) {
  if (!(fd_step > 0.0)) throw ConfigError("fd_gradient_adjoint: fd_step must be positive");
  const AdjointRun run(tail_at(scn, t, x), n_paths, seed, false);
  const Complex e1{fd_step, 0.0};
  std::vector<Complex> diff(n_paths);
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      diff[j] = (run.value(j, e1) - run.value(j, -e1)) / (2.0 * fd_step);
    }
  });
  const ComplexMeanStderr ms = mean_stderr(std::span<const Complex>(diff));
  check_finite_estimate(ms.mean, "fd_gradient_adjoint");
  BsdeEstimate est;
  est.y = ms.mean;
  est.y_se = ms.se;
  est.n_paths = n_paths;
  est.scheme = "fd-gradient";
  return est;
}

namespace {

struct Standardization {
  Complex mu{0.0, 0.0};
  double scale = 1.0;
  bool degenerate = false;
};

Standardization standardize(std::span<const Complex> xs) {
  const ComplexMeanStderr ms = mean_stderr(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) sq[j] = std::norm(xs[j] - ms.mean);
  const double rms = std::sqrt(det_sum(std::span<const double>(sq)) / static_cast<double>(xs.size()));
  Standardization s;
  s.mu = ms.mean;
  if (rms < 1e-10 * (1.0 + std::abs(ms.mean))) {
    s.degenerate = true;
    s.scale = 1.0;
  } else {
    s.scale = rms;
  }
  return s;
}

// Least-squares fit of several complex targets on the monomial basis
// {1, x', ..., x'^d} in the standardized variable x' = (x - mu)/scale.
// One normal-equations factorization serves all targets. Returns the
// fitted polynomials in the original variable.
struct CellFit {
  std::vector<Poly> fits;
  double condition = 1.0;
};

CellFit fit_cell(std::span<const Complex> xs, const std::vector<std::span<const Complex>>& targets,
                 int degree, int cell_index) {
  const std::size_t n = xs.size();
  const Standardization st = standardize(xs);
  const int d = st.degenerate ? 0 : degree;
  const std::size_t dim = static_cast<std::size_t>(d) + 1;

  if (n < kMinPathsPerBasisDim * dim) {
    std::ostringstream msg;
    msg << "regression at cell " << cell_index << ": " << n << " paths for basis dimension "
        << dim << " (need >= " << kMinPathsPerBasisDim * dim << ")";
    throw RegressionError(msg.str());
  }

  // Per-block partial normal equations, combined in block order.
  const std::size_t blocks = exec::block_count(n);
  const std::size_t gsize = dim * dim;
  std::vector<Complex> g_part(blocks * gsize, Complex{0.0, 0.0});
  std::vector<std::vector<Complex>> r_part(targets.size(),
                                           std::vector<Complex>(blocks * dim, Complex{0.0, 0.0}));
  exec::for_blocks(n, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<Complex> phi(dim);
    Complex* g = g_part.data() + b * gsize;
    for (std::size_t j = begin; j < end; ++j) {
      const Complex xprime = (xs[j] - st.mu) / st.scale;
      phi[0] = Complex{1.0, 0.0};
      for (std::size_t p = 1; p < dim; ++p) phi[p] = phi[p - 1] * xprime;
      for (std::size_t p = 0; p < dim; ++p) {
        const Complex cp = std::conj(phi[p]);
        for (std::size_t q = p; q < dim; ++q) g[p * dim + q] += cp * phi[q];
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
          r_part[ti][b * dim + p] += cp * targets[ti][j];
        }
      }
    }
  });

  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                 static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p; q < dim; ++q) {
        gram(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) +=
            g_part[b * gsize + p * dim + q];
      }
    }
  }
  for (std::size_t p = 0; p < dim; ++p) {
    for (std::size_t q = 0; q < p; ++q) {
      gram(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
          std::conj(gram(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)));
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const double lam_min = eig.eigenvalues().minCoeff();
  const double lam_max = eig.eigenvalues().maxCoeff();
  const double condition = (lam_min > 0.0) ? lam_max / lam_min
                                           : std::numeric_limits<double>::infinity();
  if (!(condition < kConditionLimit)) {
    std::ostringstream msg;
    msg << "regression at cell " << cell_index << ": normal equations condition " << condition
        << " exceeds " << kConditionLimit << " (basis degree " << d << ")";
    throw RegressionError(msg.str());
  }
  const Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);

  CellFit out;
  out.condition = condition;
  out.fits.reserve(targets.size());
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t p = 0; p < dim; ++p) {
        rhs(static_cast<Eigen::Index>(p)) += r_part[ti][b * dim + p];
      }
    }
    const Eigen::VectorXcd coef = ldlt.solve(rhs);
    // Back to the original variable: p((x - mu)/scale).
    std::vector<Complex> scaled(dim);
    double s_pow = 1.0;
    for (std::size_t p = 0; p < dim; ++p) {
      scaled[p] = coef(static_cast<Eigen::Index>(p)) / s_pow;
      s_pow *= st.scale;
    }
    out.fits.push_back(Poly{std::move(scaled)}.shifted(-st.mu));
  }
  return out;
}

}  // namespace

EulerSolution solve_euler_regression(const Scenario& scn, int basis_degree, std::size_t n_paths,
                                     std::uint64_t seed) {
  const TimeGrid& grid = scn.grid;
  const CoefficientTable& cf = scn.coeffs;
  cf.validate(grid);
  const int cells = grid.cells();
  if (basis_degree < 0) throw ConfigError("solve_euler_regression: basis_degree must be >= 0");
  for (int k = 0; k < cells; ++k) {
    if (std::abs(cf.alpha[static_cast<std::size_t>(k)]) * grid.dt(k) >= 0.5) {
      throw ConfigError(
          "solve_euler_regression: |alpha| dt >= 1/2; refine the grid for the explicit step");
    }
  }

  const PathBatch batch = sample_increments(seed, n_paths, grid);
  const ForwardPaths paths = simulate_forward(scn.x0, cf, batch);

  // Path values carry the martingale noise backward; fitted fields are used
  // only inside the driver, so the k = 0 mean keeps an honest stderr.
  std::vector<Complex> value(n_paths);
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) value[j] = scn.h(paths.at(j, cells));
  });

  EulerSolution sol;
  sol.basis_degree = basis_degree;
  sol.cells.assign(static_cast<std::size_t>(cells), EulerCell{});

  std::vector<Complex> xk(n_paths);
  std::vector<Complex> z_target(n_paths);
  std::vector<Complex> tau_target(n_paths);

  // Polynomial proxy of Y_{k+1}; h itself at the terminal cell. Feeding the
  // projections (P(X_{k+1}) - P(X_k)) dBbar / (2 dt) instead of the raw path
  // value keeps the same conditional expectation (the subtracted term is
  // F_k-measurable) while removing the future-martingale noise, whose
  // variance would otherwise grow like 1/dt.
  Poly y_proxy = scn.h;

  for (int k = cells - 1; k >= 0; --k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    const double dt = grid.dt(k);
    exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        xk[j] = paths.at(j, k);
        const Complex d = y_proxy(paths.at(j, k + 1)) - y_proxy(xk[j]);
        z_target[j] = d * batch.db_bar(j, k) / (2.0 * dt);
        tau_target[j] = d * batch.db(j, k) / (2.0 * dt);
      }
    });

    CellFit fit = fit_cell(std::span<const Complex>(xk),
                           {std::span<const Complex>(value), std::span<const Complex>(z_target),
                            std::span<const Complex>(tau_target)},
                           basis_degree, k);
    EulerCell& cell = sol.cells[ku];
    cell.y_fit = std::move(fit.fits[0]);
    cell.z_fit = std::move(fit.fits[1]);
    cell.tau_fit = std::move(fit.fits[2]);
    cell.degree = cell.y_fit.degree();
    cell.condition = fit.condition;

    const Poly& g_cell = scn.g_tilde.at(k);
    exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        const Complex x = xk[j];
        const Complex driver = g_cell(x) + cf.alpha[ku] * cell.y_fit(x) +
                               cf.beta[ku] * cell.z_fit(x) + cf.theta[ku] * cell.tau_fit(x);
        value[j] += driver * dt;
      }
    });

    Poly driver_poly = g_cell;
    driver_poly += cf.alpha[ku] * cell.y_fit;
    driver_poly += cf.beta[ku] * cell.z_fit;
    driver_poly += cf.theta[ku] * cell.tau_fit;
    y_proxy = cell.y_fit + Complex{dt, 0.0} * driver_poly;
  }

  const ComplexMeanStderr ms = mean_stderr(std::span<const Complex>(value));
  check_finite_estimate(ms.mean, "solve_euler_regression");
  sol.y0.y = ms.mean;
  sol.y0.y_se = ms.se;
  sol.y0.n_paths = n_paths;
  sol.y0.scheme = "euler-regression";
  sol.y0.z = sol.cells[0].z_fit(scn.x0);
  sol.y0.tau = sol.cells[0].tau_fit(scn.x0);
  return sol;
}

std::vector<Complex> field_probes(const Scenario& scn, int k) {
  // The forward process is driftless, so the cloud at t_k is centered at x0
  // with RMS radius sqrt(sum 2(|sigma|^2 + |gamma|^2) dt) in closed form.
  // Probing the fitted fields on the center plus the 1-RMS ring keeps the
  // regression leverage at bulk level.
  double var = 0.0;
  for (int j = 0; j < k; ++j) {
    const std::size_t ju = static_cast<std::size_t>(j);
    var += 2.0 * (std::norm(scn.coeffs.sigma[ju]) + std::norm(scn.coeffs.gamma[ju])) *
           scn.grid.dt(j);
  }
  const double r = std::sqrt(var);
  std::vector<Complex> probes = {scn.x0};
  if (r > 0.0) {
    const double d = r / std::numbers::sqrt2;
    for (const Complex& dir : {Complex{r, 0.0}, Complex{-r, 0.0}, Complex{0.0, r},
                               Complex{0.0, -r}, Complex{d, d}, Complex{-d, d}, Complex{d, -d},
                               Complex{-d, -d}}) {
      probes.push_back(scn.x0 + dir);
    }
  }
  return probes;
}

GradientRepReport verify_gradient_representation(const Scenario& scn, const EulerSolution& euler,
                                                 const PdeSolution& pde) {
  const TimeGrid& grid = scn.grid;
  const int cells = grid.cells();

  GradientRepReport rep;
  const std::vector<int> probe_cells = {0, cells / 4, cells / 2, (3 * cells) / 4, cells - 1};
  for (int k : probe_cells) {
    if (k < 0 || k >= cells) continue;
    const std::size_t ku = static_cast<std::size_t>(k);
    const Poly ux_poly = pde.poly_at(grid.knot(k)).derivative();
    const Complex sigma = scn.coeffs.sigma[ku];
    const Complex gamma = scn.coeffs.gamma[ku];
    const EulerCell& cell = euler.cells[ku];
    for (const Complex& x : field_probes(scn, k)) {
      const Complex ux = ux_poly(x);
      rep.max_z_dev = std::max(rep.max_z_dev, std::abs(cell.z_fit(x) - ux * sigma));
      rep.max_tau_dev = std::max(rep.max_tau_dev, std::abs(cell.tau_fit(x) - ux * gamma));
      rep.scale = std::max(rep.scale, std::abs(ux) * std::max(std::abs(sigma), std::abs(gamma)));
    }
  }
  return rep;
}

AnalyticityReport verify_y_analyticity(const Scenario& scn, double t, Complex x, double fd_step,
                                       std::size_t n_paths, std::uint64_t seed) {
  if (!(fd_step > 0.0)) throw ConfigError("verify_y_analyticity: fd_step must be positive");
  // Common noise across the four evaluation points of the Jacobian.
  const AdjointRun run(tail_at(scn, t, x), n_paths, seed, false);

  const Complex e1{fd_step, 0.0};
  const Complex e2{0.0, fd_step};
  std::vector<double> part_a(n_paths);  // Re d1 - Im d2  -> J11 - J22
  std::vector<double> part_b(n_paths);  // Re d2 + Im d1  -> J12 + J21
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Complex d1 = (run.value(j, e1) - run.value(j, -e1)) / (2.0 * fd_step);
      const Complex d2 = (run.value(j, e2) - run.value(j, -e2)) / (2.0 * fd_step);
      part_a[j] = d1.real() - d2.imag();
      part_b[j] = d2.real() + d1.imag();
    }
  });

  const MeanStderr a = mean_stderr(std::span<const double>(part_a));
  const MeanStderr b = mean_stderr(std::span<const double>(part_b));
  AnalyticityReport rep;
  rep.residual = 0.5 * (std::abs(a.mean) + std::abs(b.mean));
  rep.se = 0.5 * (a.se + b.se);
  return rep;
}

}  // namespace cfk
