#include "otamm/variability.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "otamm/errors.hpp"
#include "otamm/units.hpp"

namespace otamm {

void validate(const SigmaSpec& s) {
  for (double v : {s.gm, s.ro, s.co, s.cm, s.ra, s.ca})
    if (!(v >= 0.0 && v < 0.5)) throw InvalidParameter("sigma = " + format_double(v));
}

OtaMacromodel sample_model(const OtaMacromodel& base, const SigmaSpec& sigma, std::uint64_t seed,
                           std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> z;
  auto draw = [&](double value, double s) {
    for (;;) {
      const double f = 1.0 + s * z(rng);
      if (f > 0.0) return value * f;
    }
  };
  OtaMacromodel m = base;
  for (auto& st : m.stages) {
    st.gm = draw(st.gm, sigma.gm);
    st.Ro = draw(st.Ro, sigma.ro);
    st.Co = draw(st.Co, sigma.co);
  }
  m.gmf = draw(m.gmf, sigma.gm);
  m.comp.Cm = draw(m.comp.Cm, sigma.cm);
  m.comp.Ra = draw(m.comp.Ra, sigma.ra);
  m.comp.Ca = draw(m.comp.Ca, sigma.ca);
  return m;
}

namespace {

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < threads; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < n; i += threads) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<OtaMacromodel> sample_models(const OtaMacromodel& base, const SigmaSpec& sigma,
                                         std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  validate(base);
  validate(sigma);
  std::vector<OtaMacromodel> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = sample_model(base, sigma, seed, i); });
  return out;
}

McStat summarize(const std::vector<double>& values) {
  McStat r;
  r.n = values.size();
  if (values.empty()) return r;
  // Sorted accumulation makes the result independent of input order.
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  r.min = v.front();
  r.max = v.back();
  long double sum = 0.0L;
  for (double x : v) sum += x;
  r.mean = static_cast<double>(sum / v.size());
  if (v.size() >= 2) {
    long double ss = 0.0L;
    for (double x : v) ss += (x - r.mean) * static_cast<long double>(x - r.mean);
    const double sd = std::sqrt(static_cast<double>(ss / (v.size() - 1)));
    r.sigma_over_mu = r.mean != 0.0 ? sd / std::abs(r.mean) : 0.0;
  }
  return r;
}

McStat mc_statistics(const MetricFn& metric, const std::vector<OtaMacromodel>& models,
                     unsigned threads) {
  if (models.size() < 2) throw InvalidParameter("mc_statistics needs at least 2 models");
  std::vector<double> vals(models.size());
  std::vector<char> ok(models.size(), 0);
  parallel_for(models.size(), threads, [&](std::size_t i) {
    try {
      vals[i] = metric(models[i]);
      ok[i] = std::isfinite(vals[i]);
    } catch (const std::exception&) {
      ok[i] = 0;
    }
  });
  std::vector<double> good;
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (ok[i])
      good.push_back(vals[i]);
    else
      failed.push_back(i);
  }
  McStat r = summarize(good);
  r.failures = std::move(failed);
  return r;
}

}  // namespace otamm
