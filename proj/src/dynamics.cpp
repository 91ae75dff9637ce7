// Steppers and trajectory runner. Each step evaluates the shared nonlinear
// quantities (state samples, gradient samples, advection term) once, forms
// the scheme-specific jump update, applies the exact viscous factor, and
// telescopes the viscous enstrophy drop so the pathwise energy balance of
// the jump part is recoverable exactly from the records.
#include "smag/dynamics.hpp"

#include <cmath>
#include <limits>

#include "smag/operators.hpp"

namespace smag {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kFourPiSq = kTwoPi * kTwoPi;

double euclid_bandwidth(const GridSpec& g) {
  if (g.mask == MaskKind::square) return g.max_mode * std::sqrt(2.0);
  return static_cast<double>(g.max_mode);
}

struct StepEval {
  PhysicalField wsamp;
  PhysicalField g1, g2;
  SpectralField advection;
  double umax = 0.0;
  double gpmax = 0.0;
};

StepEval evaluate(Workspace& ws, const SpectralField& w, const LESModel& model) {
  const VelocityField vel = biot_savart(w);
  const PhysicalField u1 = ws.to_physical(vel.u1);
  const PhysicalField u2 = ws.to_physical(vel.u2);
  PhysicalField g1 = ws.to_physical(spectral_derivative(w, 0));
  PhysicalField g2 = ws.to_physical(spectral_derivative(w, 1));
  PhysicalField wsamp = ws.to_physical(w);
  PhysicalField prod(u1.np);
  double umax2 = 0.0, gpmax = 0.0;
  for (std::size_t i = 0; i < prod.v.size(); ++i) {
    prod.v[i] = -(u1.v[i] * g1.v[i] + u2.v[i] * g2.v[i]);
    umax2 = std::max(umax2, u1.v[i] * u1.v[i] + u2.v[i] * u2.v[i]);
    gpmax = std::max(gpmax, g_prime(model, wsamp.v[i]));
  }
  SpectralField adv = ws.to_spectral(prod, w.grid());
  return StepEval{std::move(wsamp), std::move(g1), std::move(g2), std::move(adv), std::sqrt(umax2), gpmax};
}

StabilityReport limits_from(const StepEval& ev, const GridSpec& grid) {
  const double bw = euclid_bandwidth(grid);
  StabilityReport rep;
  rep.flux_dt_max = ev.gpmax > 0.0 ? 1.5 / (kFourPiSq * bw * bw * ev.gpmax) : std::numeric_limits<double>::infinity();
  rep.cfl_dt_max = ev.umax > 0.0 ? 0.5 / (kTwoPi * bw * ev.umax) : std::numeric_limits<double>::infinity();
  return rep;
}

void apply_viscous(SpectralField& w, double nu, double dt) {
  const int mm = w.grid().max_mode;
  std::vector<double> decay(static_cast<std::size_t>(2 * mm * mm + 1));
  for (std::size_t r2 = 0; r2 < decay.size(); ++r2) decay[r2] = std::exp(-kFourPiSq * nu * dt * static_cast<double>(r2));
  w.transform_each([&](int l1, int l2, double c) { return c * decay[static_cast<std::size_t>(l1 * l1 + l2 * l2)]; });
}

// a(x) = (f'(omega))^2 / 4 for the Ito corrector, g'(omega) for deterministic.
PhysicalField diffusivity_samples(const PhysicalField& wsamp, const LESModel& model, bool from_f_prime) {
  PhysicalField a(wsamp.np);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    if (from_f_prime) {
      const double fp = f_prime(model, wsamp.v[i]);
      a.v[i] = 0.25 * fp * fp;
    } else {
      a.v[i] = g_prime(model, wsamp.v[i]);
    }
  }
  return a;
}

SpectralField jump_state(Workspace& ws, const SpectralField& w, const SolverConfig& cfg,
                         const std::vector<double>* dw, const StepEval& ev) {
  SpectralField out = w;
  out.axpy(cfg.dt, ev.advection);
  switch (cfg.scheme) {
    case Scheme::deterministic: {
      const PhysicalField a = diffusivity_samples(ev.wsamp, cfg.model, /*from_f_prime=*/false);
      out.axpy(cfg.dt, flux_divergence(ws, a, ev.g1, ev.g2, cfg.grid));
      break;
    }
    case Scheme::ito_em: {
      const PhysicalField a = diffusivity_samples(ev.wsamp, cfg.model, /*from_f_prime=*/true);
      out.axpy(cfg.dt, flux_divergence(ws, a, ev.g1, ev.g2, cfg.grid));
      out.axpy(1.0, transport_increment(ws, ev.wsamp, cfg.grid, cfg.model, *cfg.theta, *dw));
      break;
    }
    case Scheme::stratonovich_heun: {
      const SpectralField t0 = transport_increment(ws, ev.wsamp, cfg.grid, cfg.model, *cfg.theta, *dw);
      SpectralField predictor = out;  // w + dt * advection
      predictor.axpy(1.0, t0);
      const SpectralField t1 = transport_increment(ws, predictor, cfg.model, *cfg.theta, *dw);
      out.axpy(0.5, t0);
      out.axpy(0.5, t1);
      break;
    }
  }
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  grid.validate();
  if (!(nu >= 0.0)) throw std::invalid_argument("config: nu must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("config: horizon must be positive");
  const long long s = std::llround(horizon / dt);
  if (s < 1 || std::abs(static_cast<double>(s) * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw std::invalid_argument("config: horizon must be an integer multiple of dt");
  }
  if (record_stride < 1) throw std::invalid_argument("config: record_stride must be >= 1");
  if (!(enstrophy_guard > 1.0)) throw std::invalid_argument("config: enstrophy_guard must exceed 1");
  const bool stochastic = scheme != Scheme::deterministic;
  if (stochastic && !theta) throw std::invalid_argument("config: stochastic scheme requires noise coefficients");
  if (!stochastic && theta) throw std::invalid_argument("config: deterministic scheme takes no noise coefficients");
  if (theta) {
    for (const ThetaEntry& e : theta->entries()) {
      if (!grid.contains(e.k1, e.k2)) {
        throw std::invalid_argument("config: noise support not resolvable on the grid");
      }
    }
  }
}

int SolverConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

StabilityReport stability_limits(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg) {
  return limits_from(evaluate(ws, omega, cfg.model), cfg.grid);
}

SpectralField step_ito(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg,
                       const std::vector<double>& dw) {
  SpectralField out = jump_state(ws, omega, cfg, &dw, evaluate(ws, omega, cfg.model));
  apply_viscous(out, cfg.nu, cfg.dt);
  return out;
}

SpectralField step_stratonovich(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg,
                                const std::vector<double>& dw) {
  SpectralField out = jump_state(ws, omega, cfg, &dw, evaluate(ws, omega, cfg.model));
  apply_viscous(out, cfg.nu, cfg.dt);
  return out;
}

SpectralField step_deterministic(Workspace& ws, const SpectralField& omega, const SolverConfig& cfg) {
  SpectralField out = jump_state(ws, omega, cfg, nullptr, evaluate(ws, omega, cfg.model));
  apply_viscous(out, cfg.nu, cfg.dt);
  return out;
}

RunRecord run_trajectory(Workspace& ws, const SolverConfig& cfg, const SpectralField& omega0,
                         BrownianDriver* driver, bool keep_snapshots) {
  cfg.validate();
  if (!(omega0.grid() == cfg.grid)) throw std::invalid_argument("run: initial state grid differs from config grid");
  const bool stochastic = cfg.scheme != Scheme::deterministic;
  if (stochastic && driver == nullptr) throw std::invalid_argument("run: stochastic scheme requires a Brownian driver");
  if (!stochastic && driver != nullptr) throw std::invalid_argument("run: deterministic scheme takes no driver");
  if (stochastic) {
    const std::vector<ThetaEntry>& entries = cfg.theta->entries();
    const std::vector<std::pair<int, int>>& sup = driver->support();
    bool match = sup.size() == entries.size();
    for (std::size_t i = 0; match && i < sup.size(); ++i) {
      match = sup[i].first == entries[i].k1 && sup[i].second == entries[i].k2;
    }
    if (!match) throw std::invalid_argument("run: driver support does not match noise support");
  }

  const int steps = cfg.steps();
  RunRecord rec;
  rec.steps = steps;
  if (driver != nullptr) {
    rec.master_seed = driver->master_seed();
    rec.path_index = driver->path_index();
  }

  SpectralField w = omega0;
  const double guard_limit = cfg.enstrophy_guard * w.l2_norm_sq();
  double diss = 0.0;
  double gint = 0.0;
  double gprev = gradient_energy(w);

  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.l2_norms.push_back(w.l2_norm());
    rec.h1_seminorms.push_back(std::sqrt(gradient_energy(w)));
    rec.dissipation_acc.push_back(diss);
    rec.grad_sq_integral.push_back(gint);
    std::array<double, 8> modes{};
    for (std::size_t m = 0; m < kTrackedModes.size(); ++m) {
      const auto [l1, l2] = kTrackedModes[m];
      modes[m] = cfg.grid.contains(l1, l2) ? w.coeff(l1, l2) : 0.0;
    }
    rec.mode_track.push_back(modes);
    if (keep_snapshots) rec.snapshots.push_back(w);
  };
  record(0.0);

  StepEval ev = evaluate(ws, w, cfg.model);
  {
    const StabilityReport rep = limits_from(ev, cfg.grid);
    if (cfg.dt > rep.flux_dt_max || cfg.dt > rep.cfl_dt_max) {
      throw std::invalid_argument("run: dt exceeds the stability limit at the initial state");
    }
  }

  std::vector<double> dw;
  for (int j = 0; j < steps; ++j) {
    if (j > 0) {
      ev = evaluate(ws, w, cfg.model);
      const StabilityReport rep = limits_from(ev, cfg.grid);
      if (cfg.dt > rep.flux_dt_max || cfg.dt > rep.cfl_dt_max) {
        throw NumericAbort("run: stability limit crossed at t=" + std::to_string(j * cfg.dt));
      }
    }
    if (stochastic) dw = driver->sample_increments(cfg.dt);
    SpectralField next = jump_state(ws, w, cfg, stochastic ? &dw : nullptr, ev);
    const double jump_sq = next.l2_norm_sq();
    if (!std::isfinite(jump_sq)) {
      throw NumericAbort("run: non-finite state at t=" + std::to_string((j + 1) * cfg.dt));
    }
    apply_viscous(next, cfg.nu, cfg.dt);
    const double post_sq = next.l2_norm_sq();
    diss += jump_sq - post_sq;
    if (post_sq > guard_limit) {
      throw NumericAbort("run: enstrophy guard exceeded at t=" + std::to_string((j + 1) * cfg.dt));
    }
    w = std::move(next);
    const double gnew = gradient_energy(w);
    gint += cfg.dt * 0.5 * (gprev + gnew);
    gprev = gnew;
    if ((j + 1) % cfg.record_stride == 0 || j + 1 == steps) record((j + 1) * cfg.dt);
  }
  return rec;
}

}  // namespace smag
