#pragma once

#include "tcspc/sim/config.hpp"
#include "tcspc/sim/rng.hpp"

namespace tcspc {

// Resonant pulsed-excitation probability
//   P = sin^2 sqrt( (gamma^2 / 4 pi I_s) * (E t_uv / w_o^2) )
// The argument is the squared half pulse area for a Gaussian beam of waist
// w_o carrying energy E in duration t_uv. Monotone in E only up to the first
// Rabi maximum (argument = (pi/2)^2); larger pulse energies over-rotate and
// the probability comes back down. The argument is not clamped.
double excitation_probability(const PulseParams& pulse, const AtomicTransition& transition);

// CDF of the emission-delay density
//   f(t) = (1/tau) e^(-t/tau) (1 + A cos(w t + phi)) / Z,  t >= 0.
// Exposed for the sampler and for distribution tests.
double emission_delay_cdf(double t_ps, double tau_ps, const BeatModulation& beats);

// Inverse-CDF draw from the emission density. A = 0 (or beats disabled)
// takes the exact exponential inverse; otherwise per-sample bisection on the
// closed-form CDF. Throws std::invalid_argument when amplitude >= 1.
double sample_emission_delay(const AtomicTransition& transition, const BeatModulation& beats,
                             RandomStream& rng);

// Zeeman splitting g * mu_B * B * delta_m / hbar in rad/s, for
// parameterizing beat studies from a magnetic field value.
double zeeman_splitting_rad_per_s(double g_factor, double field_gauss, int delta_m);

}  // namespace tcspc
