// Second-order Butterworth low-pass biquad (bilinear transform with frequency
// pre-warping), applied per channel to the logged force/position traces.

#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace contact2d {

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;  // feedforward
    double a1 = 0.0, a2 = 0.0;            // feedback (a0 normalized to 1)
    double z1 = 0.0, z2 = 0.0;            // direct-form II transposed state
};

inline Biquad design_butterworth2(double fc, double fs) {
    if (!(fc > 0.0) || !(fs > 0.0) || fc >= 0.5 * fs)
        throw std::invalid_argument("butterworth cutoff must satisfy 0 < fc < fs/2");
    const double k = std::tan(M_PI * fc / fs);  // pre-warped
    const double sqrt2 = std::sqrt(2.0);
    const double norm = 1.0 + sqrt2 * k + k * k;
    Biquad f;
    f.b0 = k * k / norm;
    f.b1 = 2.0 * f.b0;
    f.b2 = f.b0;
    f.a1 = 2.0 * (k * k - 1.0) / norm;
    f.a2 = (1.0 - sqrt2 * k + k * k) / norm;
    // stability triangle: poles strictly inside the unit circle
    if (!(std::abs(f.a2) < 1.0 && std::abs(f.a1) < 1.0 + f.a2))
        throw std::logic_error("butterworth design produced unstable poles");
    return f;
}

inline double filter_step(Biquad& f, double x) {
    const double y = f.b0 * x + f.z1;
    f.z1 = f.b1 * x - f.a1 * y + f.z2;
    f.z2 = f.b2 * x - f.a2 * y;
    return y;
}

// Magnitude of the transfer function at frequency f (Hz) for sample rate fs.
inline double biquad_gain_at(const Biquad& f, double freq, double fs) {
    const double w = 2.0 * M_PI * freq / fs;
    const std::complex<double> z = std::polar(1.0, w);
    const std::complex<double> zi = 1.0 / z;
    const std::complex<double> num = f.b0 + f.b1 * zi + f.b2 * zi * zi;
    const std::complex<double> den = 1.0 + f.a1 * zi + f.a2 * zi * zi;
    return std::abs(num / den);
}

// Convenience pair for filtering a planar vector channel.
struct BiquadPair {
    Biquad x, y;
    Eigen::Vector2d step(const Eigen::Vector2d& v) {
        return Eigen::Vector2d(filter_step(x, v.x()), filter_step(y, v.y()));
    }
};

}  // namespace contact2d
