#pragma once

namespace tcspc {

// Ideal-information floor on the relative lifetime precision: the
// Cramer-Rao bound of the exponential model at N = count_rate * duration
// events, delta_tau/tau = 1/sqrt(N). The finite fit window inflates the
// realized spread above this floor (about 20% at window/tau ~ 4, see the
// pull studies); the bound property is preserved either way. tau and window
// are validated and must be positive.
double predict_statistical_precision(double count_rate_hz, double duration_s, double tau_ps,
                                     double window_ps);

}  // namespace tcspc
