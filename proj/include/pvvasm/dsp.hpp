#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pvvasm::dsp {

// Normalized second-order section: y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
};

using BiquadCascade = std::vector<Biquad>;

// Butterworth sections of even `order`, bilinear transform with prewarping.
// Throws ConfigError when cutoff is outside (0, Nyquist).
BiquadCascade butterworth_lowpass(double cutoff_hz, double sample_rate, int order = 4);
BiquadCascade butterworth_highpass(double cutoff_hz, double sample_rate, int order = 4);
// High-pass at low_hz followed by low-pass at high_hz.
BiquadCascade butterworth_bandpass(double low_hz, double high_hz, double sample_rate, int order = 4);

// Direct form II transposed, zero initial state, same length as input.
std::vector<double> filter(const BiquadCascade& sections, std::span<const double> x);

// Magnitude response of the cascade at frequency f.
double magnitude_response(const BiquadCascade& sections, double f_hz, double sample_rate);

struct WsolaParams {
    double window_seconds = 0.040;
    double seek_seconds = 0.010;
};

// WSOLA time stretch. rate > 1 speeds up; output has ceil(len / rate) samples.
std::vector<double> time_stretch(std::span<const double> x, double rate, double sample_rate,
                                 const WsolaParams& params = {});

// Linear-interpolation resampling onto exactly `out_len` samples, step |x| / out_len.
std::vector<double> resample_linear(std::span<const double> x, std::size_t out_len);

// Band-limited resampling with a 64-tap Blackman-windowed sinc kernel.
std::vector<double> resample_sinc(std::span<const double> x, double in_rate, double out_rate);

// Full linear convolution (length |x| + |h| - 1), FFT based.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

// Magnitude-weighted mean frequency of the Hann-windowed spectrum.
double spectral_centroid(std::span<const double> x, double sample_rate);

}  // namespace pvvasm::dsp
