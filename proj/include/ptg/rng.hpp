#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ptg {

using Rng = std::mt19937_64;

/// Mix (seed, stream) into an independent 64-bit seed (splitmix64 step),
/// used to derive per-restart / per-tree / per-fold substreams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double sample_uniform(Rng& rng);                              // (0,1)
double sample_normal(Rng& rng, double mean = 0.0, double sd = 1.0);
double sample_gamma(Rng& rng, double shape, double rate);     // density ~ x^(d-1) e^(-s x)
int sample_categorical(Rng& rng, const double* probs, int k); // probs sum to 1

/// Standard-normal quantile function.
double normal_quantile(double p);
double normal_cdf(double x);

/// Draw from N(mu, sigma^2) truncated to [lo, inf): inverse-CDF transform,
/// switching to Robert's exponential rejection sampler when the bound is far
/// in the upper tail.
double sample_truncnorm_lower(Rng& rng, double mu, double sigma, double lo);

/// Engine state serialization for checkpointing.
std::string rng_state_to_string(const Rng& rng);
Rng rng_state_from_string(const std::string& s);

} // namespace ptg
