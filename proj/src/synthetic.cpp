#include "equivcheck/synthetic.hpp"

#include "equivcheck/error.hpp"
#include "equivcheck/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace equivcheck {

namespace {

// Speed profile: v(t) = v0 - b * max(t, onset) for t <= 0, i.e. constant
// braking at b from `onset` until impact, constant speed before.
struct Profile {
    double v0 = 0.0;
    double b = 0.0;
    double onset = 0.0;

    double speed(double t) const { return v0 - b * std::max(t, onset); }

    // Distance covered between t and 0.
    double displacement(double t) const {
        if (t >= onset) {
            return -v0 * t + 0.5 * b * t * t;
        }
        const double braking = -v0 * onset + 0.5 * b * onset * onset;
        return braking + (onset - t) * speed(onset);
    }
};

}  // namespace

ScenarioSet generate_synthetic(const SyntheticConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.duration >= 5.0) || !(cfg.closing_speed_scale > 0.0)) {
        throw Error(ErrorCode::config, "synthetic generator needs dt > 0, duration >= 5 s, scale > 0");
    }
    Rng rng(derive_seed(cfg.seed, {"synthetic", cfg.label}));
    ScenarioSet set;
    set.label = cfg.label;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
    const std::size_t width = std::to_string(cfg.scenarios).size();

    while (set.scenarios.size() < cfg.scenarios) {
        const double v_c = cfg.closing_speed_scale * (1.0 + rng.gamma(2.0) / 0.35);
        Profile lead;
        Profile follow;
        const bool parked = rng.uniform() < cfg.p_parked_lead;
        if (!parked) {
            lead.v0 = 12.0 * rng.uniform();
            if (rng.uniform() < cfg.p_lead_brakes) {
                lead.b = std::min(9.0, 0.5 + rng.gamma(3.0) / 1.2);
                lead.onset = -0.5 - 3.5 * rng.uniform();
            }
        }
        follow.v0 = lead.v0 + v_c;
        if (rng.uniform() < cfg.p_follow_brakes) {
            follow.b = std::min(9.0, 0.5 + rng.gamma(2.0) / 0.8);
            follow.onset = -0.3 - 1.7 * rng.uniform();
        }
        const double weight = cfg.random_weights ? std::exp(0.5 * rng.normal()) : 1.0;

        Scenario s;
        std::ostringstream id;
        id << cfg.label << '-' << std::setw(static_cast<int>(width)) << std::setfill('0') << set.scenarios.size();
        s.id = id.str();
        s.weight = weight;
        bool ok = true;
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = k == steps ? 0.0 : -cfg.duration + static_cast<double>(k) * cfg.dt;
            const double gap = follow.displacement(t) - lead.displacement(t);
            if (gap < 0.0) {
                ok = false;
                break;
            }
            s.samples.push_back(Sample{t, k == steps ? 0.0 : gap, lead.speed(t), follow.speed(t)});
        }
        if (ok) {
            set.scenarios.push_back(std::move(s));
        }
    }
    return set;
}

}  // namespace equivcheck
