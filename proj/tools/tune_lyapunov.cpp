// Reports, for every catalog model with Lyapunov data, the smallest rho and c
// that the sampled conditions would accept next to the shipped values. The
// shipped constants in src/models.cpp are closed-form bounds; this tool shows
// how much headroom they leave on the sampled ball.

#include "biteuler/diagnostics.hpp"
#include "biteuler/models.hpp"
#include "biteuler/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

using namespace biteuler;

int main(int argc, char** argv) {
  CLI::App app{"Sampled tightness of the shipped Lyapunov constants"};
  std::int64_t points = 100000;
  std::uint64_t seed = 7;
  double radius = 10.0;
  double T = 1.0;
  app.add_option("--points", points, "Sample points and pairs");
  app.add_option("--seed", seed, "Sampler seed");
  app.add_option("--radius", radius, "Radius of the sampled ball");
  app.add_option("--T", T, "Horizon of the monotonicity condition");
  CLI11_PARSE(app, argc, argv);

  std::printf("%-16s %12s %12s %12s %12s %10s %10s %8s\n", "model", "rho_needed", "rho_shipped", "c_needed",
              "c_shipped", "gen_ok", "mono_ok", "growth");
  for (const auto& entry : catalog()) {
    if (!entry.model.lyapunov) continue;
    const SdeModel& model = entry.model;
    const LyapunovSpec& spec = *model.lyapunov;

    double rho_needed = 0.0;
    double c_needed = 0.0;
    for (std::int64_t i = 0; i < points; ++i) {
      const Vector x = sample_ball(model.d, radius, stream_key({seed, std::uint64_t(i), 0}));
      rho_needed = std::max(rho_needed, generator_lhs(model, spec, x) / spec.U(x));

      Vector y = sample_ball(model.d, radius, stream_key({seed, std::uint64_t(i), 1}));
      if (i % 2 == 1) {
        const Vector dir = sample_ball(model.d, 1.0, stream_key({seed, std::uint64_t(i), 2}));
        y = x + dir * (1e-3 / dir.norm());
      }
      if ((x - y).squaredNorm() == 0.0) continue;
      // rhs - c does not depend on c; the quotient does only through 1/c.
      const double slack = monotonicity_rhs(spec, T, x, y) - spec.c;
      c_needed = std::max(c_needed, monotonicity_quotient(model, spec, x, y) - slack);
    }

    SamplerConfig sampler;
    sampler.radius = radius;
    sampler.seed = seed;
    const ConditionReport report = check_conditions(model, spec, T, sampler, std::min<std::int64_t>(points, 10000));
    const char* growth = "-";
    if (entry.growth) {
      growth = growth_preflight(model, *entry.growth, T, sampler, std::min<std::int64_t>(points, 10000))
                       .constants_admissible()
                   ? "ok"
                   : "FAIL";
    }
    std::printf("%-16s %12.6g %12.6g %12.6g %12.6g %10s %10s %8s\n", entry.id.c_str(), rho_needed, spec.rho,
                c_needed, spec.c, report.min_generator_margin >= 0 ? "yes" : "NO",
                report.min_monotonicity_margin >= 0 ? "yes" : "NO", growth);
  }
  return 0;
}
