#include "twa/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "twa/errors.hpp"
#include "twa/polynomial_set.hpp"

namespace twa {

void EnsembleConfig::validate() const {
  if (n_total < 2) throw InvalidParameter("n_total must be at least 2");
  if (n_initial != 0 && (n_initial > n_total || n_total % n_initial != 0)) {
    throw InvalidParameter("n_initial must divide n_total");
  }
  if (block_size == 0) throw InvalidParameter("block_size must be positive");
  if (!(max_failure_fraction >= 0.0)) throw InvalidParameter("max_failure_fraction must be >= 0");
}

MomentGrid::MomentGrid(std::size_t n_times, std::size_t n_obs)
    : n_times_(n_times), n_obs_(n_obs), mean_(n_times * n_obs, 0.0), m2_(n_times * n_obs, 0.0) {}

void MomentGrid::add(const double* values) {
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = values[i] - mean_[i];
    mean_[i] += delta * inv;
    m2_[i] += delta * (values[i] - mean_[i]);
  }
}

void MomentGrid::merge(const MomentGrid& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] += delta * nb / n;
    m2_[i] += other.m2_[i] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

ObservableSeries MomentGrid::finish(std::vector<double> times, std::vector<std::string> names,
                                    const std::vector<double>& corrections) const {
  ObservableSeries out;
  out.times = std::move(times);
  out.names = std::move(names);
  out.n_total = count_;
  const auto n_obs = static_cast<Eigen::Index>(n_obs_);
  const auto n_t = static_cast<Eigen::Index>(n_times_);
  out.mean.resize(n_obs, n_t);
  out.std_error.resize(n_obs, n_t);
  const double n = static_cast<double>(count_);
  for (Eigen::Index t = 0; t < n_t; ++t) {
    for (Eigen::Index o = 0; o < n_obs; ++o) {
      const std::size_t i = static_cast<std::size_t>(t) * n_obs_ + static_cast<std::size_t>(o);
      out.mean(o, t) = mean_[i] + corrections[static_cast<std::size_t>(o)];
      out.std_error(o, t) = count_ > 1 ? std::sqrt(m2_[i] / (n - 1.0) / n) : 0.0;
    }
  }
  return out;
}

PhaseSpaceState initial_state(const SamplerSpec& sampler, const EnsembleConfig& ensemble,
                              std::size_t index) {
  const std::size_t per_initial =
      ensemble.n_initial == 0 ? 1 : ensemble.n_total / ensemble.n_initial;
  Rng rng = make_stream(ensemble.seed, StreamKind::Initial, index / per_initial);
  return sample_state(sampler, rng);
}

namespace {

/// Observables compiled against the flat state layout used by the stepper.
class ObservableEvaluator {
 public:
  ObservableEvaluator(const ModelSpec& spec, const std::vector<ObservableSpec>& observables)
      : n_spins_(spec.layout.n_spins), n_bosons_(spec.layout.n_bosons), complex_(n_bosons_ > 0) {
    const auto slot = [this](Variable v) -> std::size_t {
      switch (v.kind) {
        case VariableKind::Spin:
          return 3 * v.index + static_cast<std::size_t>(v.axis);
        case VariableKind::Boson:
          return 3 * n_spins_ + v.index;
        default:
          return 3 * n_spins_ + n_bosons_ + v.index;
      }
    };
    for (const auto& obs : observables) {
      const ClassicalObservable c = to_classical(obs, spec);
      corrections_.push_back(c.correction);
      names_.push_back(obs.name());
      // Estimates are real: keep the real part of every observable.
      const ClassicalExpr e = 0.5 * (c.expr + conjugate(c.expr));
      if (complex_) {
        complex_set_.begin_output();
        complex_set_.append(e, slot, [](Complex z) { return z; });
      } else {
        real_set_.begin_output();
        real_set_.append(e, slot, [](Complex z) { return z.real(); });
      }
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& corrections() const noexcept { return corrections_; }

  struct Scratch {
    std::vector<double> real_in, real_out;
    std::vector<Complex> complex_in, complex_out;
  };

  Scratch scratch() const {
    Scratch s;
    const std::size_t n_in = 3 * n_spins_ + 2 * n_bosons_;
    if (complex_) {
      s.complex_in.assign(n_in, Complex(0.0));
      s.complex_out.assign(size(), Complex(0.0));
    } else {
      s.real_in.assign(n_in, 0.0);
      s.real_out.assign(size(), 0.0);
    }
    return s;
  }

  void evaluate(const PhaseSpaceState& state, Scratch& s, double* out) const {
    if (complex_) {
      for (std::size_t k = 0; k < n_spins_; ++k) {
        for (int a = 0; a < 3; ++a) s.complex_in[3 * k + a] = state.spins[k](a);
      }
      for (std::size_t m = 0; m < n_bosons_; ++m) {
        s.complex_in[3 * n_spins_ + m] = state.bosons[m];
        s.complex_in[3 * n_spins_ + n_bosons_ + m] = std::conj(state.bosons[m]);
      }
      complex_set_.evaluate(s.complex_in.data(), s.complex_out.data());
      for (std::size_t o = 0; o < size(); ++o) out[o] = s.complex_out[o].real();
    } else {
      for (std::size_t k = 0; k < n_spins_; ++k) {
        for (int a = 0; a < 3; ++a) s.real_in[3 * k + a] = state.spins[k](a);
      }
      real_set_.evaluate(s.real_in.data(), s.real_out.data());
      for (std::size_t o = 0; o < size(); ++o) out[o] = s.real_out[o];
    }
  }

 private:
  std::size_t n_spins_, n_bosons_;
  bool complex_;
  std::vector<std::string> names_;
  std::vector<double> corrections_;
  PolynomialSet<double> real_set_;
  PolynomialSet<Complex> complex_set_;
};

struct BlockResult {
  MomentGrid moments;
  std::size_t failed = 0;
  double first_failure_time = 0.0;
};

}  // namespace

ObservableSeries run_ensemble(const ModelSpec& spec, const SamplerSpec& sampler,
                              const IntegratorConfig& config,
                              const std::vector<ObservableSpec>& observables,
                              const EnsembleConfig& ensemble) {
  const LangevinSystem sys = build_langevin(spec);
  return run_ensemble(spec, sys, sampler, config, observables, ensemble);
}

ObservableSeries run_ensemble(const ModelSpec& spec, const LangevinSystem& sys,
                              const SamplerSpec& sampler, const IntegratorConfig& config,
                              const std::vector<ObservableSpec>& observables,
                              const EnsembleConfig& ensemble) {
  config.validate();
  ensemble.validate();
  sampler.validate(spec.layout);
  if (observables.empty()) throw InvalidParameter("at least one observable is required");

  const Stepper stepper(sys);
  const ObservableEvaluator evaluator(spec, observables);
  const std::vector<double> times = config.output_times();
  const std::size_t n_times = times.size();
  const std::size_t n_obs = evaluator.size();
  const std::size_t n_blocks = (ensemble.n_total + ensemble.block_size - 1) / ensemble.block_size;

  unsigned threads = ensemble.threads != 0 ? ensemble.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));

  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  std::exception_ptr error;
  std::map<std::size_t, BlockResult> pending;
  std::size_t next_merge = 0;
  MomentGrid total(n_times, n_obs);
  std::size_t failed = 0;
  double first_failure_time = 0.0;

  auto worker = [&]() {
    try {
      auto ws = stepper.workspace();
      auto scratch = evaluator.scratch();
      std::vector<double> values(n_times * n_obs);
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t b = next_block.fetch_add(1);
        if (b >= n_blocks) break;
        BlockResult block{MomentGrid(n_times, n_obs), 0, 0.0};
        const std::size_t begin = b * ensemble.block_size;
        const std::size_t end = std::min(ensemble.n_total, begin + ensemble.block_size);
        for (std::size_t index = begin; index < end; ++index) {
          PhaseSpaceState state = initial_state(sampler, ensemble, index);
          Rng noise = make_stream(ensemble.seed, StreamKind::Noise, index);
          try {
            integrate_trajectory(
                std::move(state), stepper, config, noise,
                [&](std::size_t record, double, const PhaseSpaceState& s) {
                  evaluator.evaluate(s, scratch, values.data() + record * n_obs);
                },
                ws);
          } catch (const NonFiniteState& e) {
            if (block.failed++ == 0) block.first_failure_time = e.time();
            continue;
          }
          block.moments.add(values.data());
        }
        std::lock_guard lock(mutex);
        pending.emplace(b, std::move(block));
        // Merge strictly in block order so the result is schedule independent.
        for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
          total.merge(it->second.moments);
          if (it->second.failed > 0 && failed == 0) first_failure_time = it->second.first_failure_time;
          failed += it->second.failed;
          pending.erase(it);
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!error) error = std::current_exception();
      stop = true;
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const double limit = ensemble.max_failure_fraction * static_cast<double>(ensemble.n_total);
  if (static_cast<double>(failed) > limit || total.count() < 2) {
    throw EnsembleAborted(std::to_string(failed) + " of " + std::to_string(ensemble.n_total) +
                          " trajectories aborted (first at t = " + std::to_string(first_failure_time) +
                          ")");
  }
  ObservableSeries out = total.finish(times, evaluator.names(), evaluator.corrections());
  out.n_total = ensemble.n_total;
  out.n_failed = failed;
  return out;
}

}  // namespace twa
