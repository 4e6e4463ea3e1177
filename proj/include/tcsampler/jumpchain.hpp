#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tcsampler/rng.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

/// Discrete-time Markov kernel claiming mu~ as invariant law.
struct MarkovKernel {
  std::function<Vec(const Vec& x, RngStream& rng)> sample;
  /// Optional lifted form on (x, v) with v uniform on {-1, 1}^d; updates v in
  /// place. The jump process prefers it and carries v between jumps.
  std::function<Vec(const Vec& x, Vec& v, RngStream& rng)> lifted_sample;
  std::shared_ptr<const TiltedPotential> declared_invariant;
  std::string label;
};

/// Random-walk Metropolis with N(0, sigma^2 I) proposals targeting mu~.
MarkovKernel rwm_kernel(const TiltedPotential& tilted, double sigma);

/// Runs the base Zig-Zag process targeting mu~ for an Exp(mean delta)
/// duration from a uniformly drawn velocity and returns the final position.
MarkovKernel zz_fixed_time_kernel(const TiltedPotential& tilted, double delta,
                                  double envelope_horizon = 1.0, double kappa = 1.5);

/// As zz_fixed_time_kernel, but the velocity persists from one draw to the
/// next (lifted form), so consecutive jumps keep their direction.
MarkovKernel zz_lifted_kernel(const TiltedPotential& tilted, double delta,
                              double envelope_horizon = 1.0, double kappa = 1.5);

/// Time-changed jump process: hold at x for Exp(s(x)), then jump with the kernel; runs
/// until the horizon. Returns a piecewise-constant path.
PathSkeleton algorithm1(const SpeedFunction& speed, const MarkovKernel& kernel, const Vec& x0,
                        double horizon, RngStream& rng);

/// The jump process stopped after exactly n_jumps kernel jumps; the path ends at
/// the last jump time T_N. A jump whose holding time does not advance the
/// clock in floating point is merged into the previous record, so the path
/// may hold fewer than n_jumps events.
PathSkeleton algorithm1_jumps(const SpeedFunction& speed, const MarkovKernel& kernel,
                              const Vec& x0, std::uint64_t n_jumps, RngStream& rng);

enum class BalanceFunction {
  metropolis,  // g(t) = min(1, t)
  barker,      // g(t) = t / (1 + t)
};

double balance(BalanceFunction g, double t);

/// Finite-state target with neighbourhood structure for the jump process
/// with rates s(x) g(mu~(z) / mu~(x)).
struct DiscreteChainSpec {
  std::vector<double> weights;  // unnormalised mu
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<double> speed;
  BalanceFunction g = BalanceFunction::metropolis;

  std::size_t size() const noexcept { return weights.size(); }
  /// Throws InvalidArgument when the structural invariants fail.
  void validate() const;
  /// Off-diagonal rate from x to neighbour z.
  double rate(std::size_t x, std::size_t z) const;
};

/// Competing-exponentials simulation. States are encoded as a 1-d position
/// holding the state index.
PathSkeleton discrete_sampler(const DiscreteChainSpec& spec, std::size_t x0, double horizon,
                              RngStream& rng);

/// Stationary law of the generator: solves pi G = 0, sum pi = 1 by dense LU.
std::vector<double> exact_stationary(const DiscreteChainSpec& spec);

/// Time spent in each state over [0, horizon] of a discrete_sampler path.
std::vector<double> occupation_times(const PathSkeleton& path, std::size_t n_states);

}  // namespace tcs
