#include "ptg/rng.hpp"

#include "ptg/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ptg {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_seed(seed, stream));
}

double sample_uniform(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = u(rng);
    return v <= 0.0 ? std::numeric_limits<double>::min() : v;
}

double sample_normal(Rng& rng, double mean, double sd) {
    // Stateless Box-Muller keeps checkpoint/resume exact (no cached spare).
    double u1 = sample_uniform(rng);
    double u2 = sample_uniform(rng);
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(Rng& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw NumericError("sample_gamma: bad parameters");
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(rng);
}

int sample_categorical(Rng& rng, const double* probs, int k) {
    double u = sample_uniform(rng);
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        acc += probs[i];
        if (u <= acc) return i;
    }
    return k - 1;
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> stdnorm;
    return boost::math::quantile(stdnorm, p);
}

double normal_cdf(double x) {
    static const boost::math::normal_distribution<double> stdnorm;
    return boost::math::cdf(stdnorm, x);
}

namespace {

// Robert (1995) exponential rejection sampler for the standard normal
// truncated to [a, inf), efficient for large a.
double robert_tail(Rng& rng, double a) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    while (true) {
        double u = sample_uniform(rng);
        double x = a - std::log(u) / alpha;
        double diff = x - alpha;
        double accept = std::exp(-0.5 * diff * diff);
        if (sample_uniform(rng) <= accept) return x;
    }
}

} // namespace

double sample_truncnorm_lower(Rng& rng, double mu, double sigma, double lo) {
    if (!(sigma > 0.0)) throw NumericError("sample_truncnorm_lower: sigma must be positive");
    const double a = (lo - mu) / sigma;
    if (a > 5.0) return mu + sigma * robert_tail(rng, a);
    const double cdf_a = normal_cdf(a);
    double u = cdf_a + (1.0 - cdf_a) * sample_uniform(rng);
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    double z = normal_quantile(u);
    if (z < a) z = a; // inverse-CDF rounding can land a hair below the bound
    return mu + sigma * z;
}

std::string rng_state_to_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng rng_state_from_string(const std::string& s) {
    Rng rng;
    std::istringstream is(s);
    is >> rng;
    if (!is) throw InputError("invalid RNG state string");
    return rng;
}

} // namespace ptg
