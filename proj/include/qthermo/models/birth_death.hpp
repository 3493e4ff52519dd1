#pragma once

// Classical replicator limit: the population master equation of the pumped
// oscillator and a kinetic Monte Carlo sampler for it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qthermo/errors.hpp"
#include "qthermo/opcore.hpp"

namespace qthermo {

struct BirthDeathState {
  /// P_n for n = 0..N_max.
  std::vector<double> probs;
  double t = 0.0;

  void check() const {
    require(probs.size() >= 2, ErrorKind::InvalidDimension, "birth-death state needs N_max >= 1");
    double s = 0.0;
    for (double p : probs) {
      require(p >= -1e-12, ErrorKind::NotAState, "negative probability " + std::to_string(p));
      s += p;
    }
    require(std::abs(s - 1.0) <= 1e-10, ErrorKind::NotAState, "probabilities sum to " + std::to_string(s));
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) m += double(n) * probs[n];
    return m;
  }

  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) v += (double(n) - m) * (double(n) - m) * probs[n];
    return v;
  }
};

inline BirthDeathState birthDeathDelta(std::size_t nMax, std::size_t n0) {
  require(n0 <= nMax, ErrorKind::InvalidArgument, "initial population above truncation");
  BirthDeathState s;
  s.probs.assign(nMax + 1, 0.0);
  s.probs[n0] = 1.0;
  return s;
}

/// Rate matrix Q with dP/dt = Q P: births n -> n+1 at gamma_up (n+1), deaths
/// n -> n-1 at gamma_down n, and no births out of N_max.
inline Eigen::MatrixXd birthDeathRateMatrix(std::size_t nMax, double gammaUp, double gammaDown) {
  const Index d = Index(nMax) + 1;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  for (Index n = 0; n < d; ++n) {
    const double birth = n + 1 < d ? gammaUp * double(n + 1) : 0.0;
    const double death = gammaDown * double(n);
    q(n, n) = -(birth + death);
    if (n + 1 < d) q(n + 1, n) = birth;
    if (n > 0) q(n - 1, n) = death;
  }
  return q;
}

inline std::vector<BirthDeathState> birthDeathEvolve(const BirthDeathState& p0, double gammaUp, double gammaDown,
                                                     const std::vector<double>& times, double overflowTol = 1e-8) {
  p0.check();
  require(gammaUp >= 0.0 && gammaDown >= 0.0, ErrorKind::InvalidArgument, "rates must be nonnegative");
  const std::size_t nMax = p0.probs.size() - 1;
  const Eigen::MatrixXd q = birthDeathRateMatrix(nMax, gammaUp, gammaDown);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(p0.probs.data(), Index(p0.probs.size()));
  double t = p0.t;
  double lastDt = -1.0;
  Eigen::MatrixXd step;
  std::vector<BirthDeathState> out;
  out.reserve(times.size());
  for (double target : times) {
    require(target >= t - 1e-12, ErrorKind::InvalidArgument, "times must be nondecreasing");
    const double dt = target - t;
    if (dt > 0.0) {
      if (std::abs(dt - lastDt) > 1e-13 * std::max(1.0, dt)) {
        step = (q * dt).exp();
        lastDt = dt;
      }
      p = step * p;
      t = target;
    }
    require(p(Index(nMax)) <= overflowTol, ErrorKind::TruncationOverflow,
            "P_Nmax = " + std::to_string(p(Index(nMax))) + " at t = " + std::to_string(t));
    BirthDeathState s;
    s.probs.assign(p.data(), p.data() + p.size());
    s.t = target;
    out.push_back(std::move(s));
  }
  return out;
}

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> stderrMean;
  std::vector<double> extinctionFraction;
  std::size_t trajectories = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trajectorySeed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline void gillespiePath(std::uint64_t n0, double gammaUp, double gammaDown, const std::vector<double>& times,
                          std::uint64_t seed, std::uint64_t* out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t n = n0;
  double t = 0.0;
  std::size_t k = 0;
  while (k < times.size()) {
    const double birth = gammaUp * double(n + 1), death = gammaDown * double(n);
    const double total = birth + death;
    const double next = total > 0.0 ? t + std::exponential_distribution<double>(total)(rng) : INFINITY;
    while (k < times.size() && times[k] < next) out[k++] = n;
    if (k == times.size()) break;
    t = next;
    if (unit(rng) * total < birth)
      ++n;
    else
      --n;
  }
}

}  // namespace detail

/// Kinetic Monte Carlo of the birth-death process sampled on `times`.
/// Trajectory i draws from its own generator seeded by (seed, i), and the
/// reduction runs in index order, so results do not depend on `threads`.
inline EnsembleStats gillespieEnsemble(std::uint64_t n0, double gammaUp, double gammaDown,
                                       const std::vector<double>& times, std::size_t trajectories,
                                       std::uint64_t seed, unsigned threads = 0) {
  require(trajectories >= 1, ErrorKind::InvalidArgument, "need at least one trajectory");
  require(gammaUp >= 0.0 && gammaDown >= 0.0, ErrorKind::InvalidArgument, "rates must be nonnegative");
  require(std::is_sorted(times.begin(), times.end()) && (times.empty() || times.front() >= 0.0),
          ErrorKind::InvalidArgument, "sample times must be sorted and nonnegative");
  const std::size_t nt = times.size();
  std::vector<std::uint64_t> samples(trajectories * nt);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, trajectories));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      detail::gillespiePath(n0, gammaUp, gammaDown, times, detail::trajectorySeed(seed, i), samples.data() + i * nt);
  };
  if (threads <= 1) {
    work(0, trajectories);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (trajectories + threads - 1) / threads;
    for (std::size_t b = 0; b < trajectories; b += chunk) pool.emplace_back(work, b, std::min(trajectories, b + chunk));
    for (auto& th : pool) th.join();
  }

  EnsembleStats st;
  st.times = times;
  st.trajectories = trajectories;
  const double n = double(trajectories);
  for (std::size_t k = 0; k < nt; ++k) {
    double sum = 0.0, zeros = 0.0;
    for (std::size_t i = 0; i < trajectories; ++i) {
      const std::uint64_t v = samples[i * nt + k];
      sum += double(v);
      if (v == 0) zeros += 1.0;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < trajectories; ++i) {
      const double dv = double(samples[i * nt + k]) - mean;
      ss += dv * dv;
    }
    const double var = trajectories > 1 ? ss / (n - 1.0) : 0.0;
    st.mean.push_back(mean);
    st.variance.push_back(var);
    st.stderrMean.push_back(std::sqrt(var / n));
    st.extinctionFraction.push_back(zeros / n);
  }
  return st;
}

}  // namespace qthermo
