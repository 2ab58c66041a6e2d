#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "aeroflex/analysis.hpp"

namespace aeroflex::analysis {

using coupled::CoupledModel;
using coupled::ModelOptions;

GustRun gust_response(const ModelOptions& options, const GustOptions& s) {
  s.gust.validate();
  if (!(s.horizon > 0.0)) throw RangeError("gust horizon must be positive");
  GustRun run;
  run.trim = trim_solve(options, TrimMode::flexible);
  if (!run.trim.converged) throw ConvergenceError("gust: trim did not converge");
  CoupledModel model = trimmed_model(options, run.trim);
  model.set_gust(s.gust);
  coupled::TimePoint start;
  start.z = run.trim.state;
  start.z_dot = VecX::Zero(start.z.size());
  run.history = coupled::simulate(model, start, s.horizon, s.solver);
  for (std::size_t i = 0; i < run.history.size(); ++i) {
    run.peak_root_moment = std::max(run.peak_root_moment, std::abs(run.history.root_Mx[i]));
    run.peak_tip_deflection = std::max(run.peak_tip_deflection, run.history.tip_defl[i]);
  }
  return run;
}

namespace {

template <class F>
void stage(StageStatus& status, F&& body) {
  try {
    body();
    status.ok = true;
  } catch (const std::exception& e) {
    status.ok = false;
    status.error = e.what();
  }
}

SweepRecord sweep_point(const ModelOptions& base, double sigma, const SweepOptions& s) {
  SweepRecord rec;
  rec.sigma = sigma;
  ModelOptions o = base;
  o.sigma = sigma;

  TrimResult trim;
  stage(rec.trim, [&] {
    trim = trim_solve(o, TrimMode::flexible);
    if (!trim.converged) throw ConvergenceError("trim did not converge");
    rec.alpha_trim = trim.alpha_trim;
    rec.tip_deflection_over_span = trim.tip_deflection / o.semi_span;
  });

  if (rec.trim.ok) {
    stage(rec.modes, [&] {
      const CoupledModel model = trimmed_model(o, trim);
      const LinearSystem sys = linearize(model, trim.state);
      const FlightModes fm = classify_flight_modes(model, sys, eigen_modes(sys));
      if (fm.phugoid) rec.phugoid_eigenvalue = fm.phugoid->lambda;
      if (fm.short_period) rec.short_period_eigenvalue = fm.short_period->lambda;
      if (!fm.phugoid || !fm.short_period) {
        throw ConvergenceError("flight modes: phugoid or short period not identified");
      }
    });
  } else {
    rec.modes.error = "skipped: trim failed";
  }

  if (s.run_flutter) {
    const ModelOptions wing = flutter_options(o);
    auto flutter = [&](FlutterBasis basis, StageStatus& status, double& out) {
      stage(status, [&] {
        FlutterOptions f = s.flutter;
        f.basis = basis;
        const FlutterResult r = flutter_speed(wing, f);
        if (!r.found) throw ConvergenceError("no flutter crossing below v_max");
        out = r.V_f;
      });
    };
    flutter(FlutterBasis::undeformed, rec.flutter_undeformed, rec.V_f_undeformed);
    flutter(FlutterBasis::prestressed, rec.flutter_prestressed, rec.V_f_prestressed);
  } else {
    rec.flutter_undeformed.error = rec.flutter_prestressed.error = "skipped";
  }

  if (s.run_gust) {
    stage(rec.gust, [&] {
      const GustRun g = gust_response(o, s.gust);
      rec.gust_peak_root_moment = g.peak_root_moment;
      rec.gust_peak_tip_deflection = g.peak_tip_deflection;
    });
  } else {
    rec.gust.error = "skipped";
  }
  return rec;
}

}  // namespace

std::vector<SweepRecord> sigma_sweep(const ModelOptions& options, const SweepOptions& s,
                                     const std::function<void(const SweepRecord&)>& on_record) {
  const std::size_t n = s.sigmas.size();
  for (double sigma : s.sigmas) {
    if (!(sigma > 0.0)) throw RangeError("sigma must be positive");
  }
  std::vector<SweepRecord> records(n);
  std::vector<bool> done(n, false);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      SweepRecord r = sweep_point(options, s.sigmas[i], s);
      std::lock_guard lock(mutex);
      records[i] = std::move(r);
      done[i] = true;
      ready.notify_all();
    }
  };

  const int jobs = std::clamp(s.jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);

  // Emit in input order as soon as each prefix is complete.
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return done[i]; });
    const SweepRecord r = records[i];
    lock.unlock();
    if (on_record) on_record(r);
  }
  for (auto& t : pool) t.join();
  return records;
}

}  // namespace aeroflex::analysis
