#pragma once

#include <algorithm>
#include <cmath>

namespace smoothdist {

// Knobs of the smooth distance field. alpha is the LogSumExp sharpness,
// alpha_u the attenuation threshold (weights flatten toward 1 when
// alpha < alpha_u), beta the Barnes-Hut admissibility threshold (0 disables
// the far-field approximation), alpha_q the outer sharpness for
// mesh-to-mesh queries, epsilon the gradient denominator guard.
struct SmoothParams {
    double alpha = 100.0;
    double alpha_u = 600.0;
    double beta = 0.5;
    double alpha_q = 100.0;
    double epsilon = 1e-300;

    // Attenuation exponent S = alpha / max(alpha, alpha_u), in (0, 1].
    double attenuation() const { return alpha / std::max(alpha, alpha_u); }
};

} // namespace smoothdist
