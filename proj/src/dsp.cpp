#include "pvvasm/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "pvvasm/errors.hpp"

namespace pvvasm::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

void check_cutoff(double cutoff_hz, double sample_rate, const char* what) {
    if (!(sample_rate > 0.0)) throw ConfigError(std::string(what) + ": sample rate must be positive");
    if (!(cutoff_hz > 0.0)) throw ConfigError(std::string(what) + ": cutoff must be positive");
    if (cutoff_hz >= 0.5 * sample_rate) {
        throw ConfigError(std::string(what) + ": cutoff " + std::to_string(cutoff_hz) + " Hz is at or above Nyquist (" +
                          std::to_string(0.5 * sample_rate) + " Hz)");
    }
}

void check_order(int order) {
    if (order < 2 || order % 2 != 0) throw ConfigError("Butterworth order must be a positive even number");
}

// Pole-pair quality factors of an analog Butterworth prototype.
std::vector<double> butterworth_q(int order) {
    std::vector<double> q;
    for (int i = 1; i <= order / 2; ++i) {
        const double theta = (2.0 * i - 1.0) * kPi / (2.0 * order);
        q.push_back(1.0 / (2.0 * std::cos(theta)));
    }
    return q;
}

Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
    return Biquad{b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

// FFTW planning is not thread-safe; plans are created once per size under a
// lock and executed with the new-array interface on fftw_malloc'd buffers.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

PlanPair plans_for(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto* real = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    PlanPair p;
    const int len = static_cast<int>(n);
    p.forward = fftw_plan_dft_r2c_1d(len, real, spec, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(spec);
    cache.emplace(n, p);
    return p;
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using SpectrumBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuffer real_buffer(std::size_t n) {
    auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    std::fill(p, p + n, 0.0);
    return RealBuffer(p);
}

SpectrumBuffer spectrum_buffer(std::size_t n) {
    return SpectrumBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
}

std::size_t fast_size(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

BiquadCascade butterworth_lowpass(double cutoff_hz, double sample_rate, int order) {
    check_cutoff(cutoff_hz, sample_rate, "low-pass");
    check_order(order);
    const double w0 = 2.0 * kPi * cutoff_hz / sample_rate;
    const double cw = std::cos(w0);
    BiquadCascade out;
    for (double q : butterworth_q(order)) {
        const double alpha = std::sin(w0) / (2.0 * q);
        out.push_back(normalized((1.0 - cw) / 2.0, 1.0 - cw, (1.0 - cw) / 2.0, 1.0 + alpha, -2.0 * cw, 1.0 - alpha));
    }
    return out;
}

BiquadCascade butterworth_highpass(double cutoff_hz, double sample_rate, int order) {
    check_cutoff(cutoff_hz, sample_rate, "high-pass");
    check_order(order);
    const double w0 = 2.0 * kPi * cutoff_hz / sample_rate;
    const double cw = std::cos(w0);
    BiquadCascade out;
    for (double q : butterworth_q(order)) {
        const double alpha = std::sin(w0) / (2.0 * q);
        out.push_back(
            normalized((1.0 + cw) / 2.0, -(1.0 + cw), (1.0 + cw) / 2.0, 1.0 + alpha, -2.0 * cw, 1.0 - alpha));
    }
    return out;
}

BiquadCascade butterworth_bandpass(double low_hz, double high_hz, double sample_rate, int order) {
    if (!(low_hz < high_hz)) throw ConfigError("band-pass: lower edge must be below upper edge");
    BiquadCascade out = butterworth_highpass(low_hz, sample_rate, order);
    BiquadCascade lp = butterworth_lowpass(high_hz, sample_rate, order);
    out.insert(out.end(), lp.begin(), lp.end());
    return out;
}

std::vector<double> filter(const BiquadCascade& sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (const Biquad& s : sections) {
        double z1 = 0.0;
        double z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

double magnitude_response(const BiquadCascade& sections, double f_hz, double sample_rate) {
    const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * f_hz / sample_rate);
    const std::complex<double> z2 = z1 * z1;
    double mag = 1.0;
    for (const Biquad& s : sections) {
        mag *= std::abs((s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2));
    }
    return mag;
}

std::vector<double> time_stretch(std::span<const double> x, double rate, double sample_rate, const WsolaParams& params) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("time stretch rate must be positive");
    if (x.empty()) return {};
    const auto len = static_cast<std::ptrdiff_t>(x.size());
    const auto out_len = static_cast<std::size_t>(std::ceil(static_cast<double>(x.size()) / rate));

    auto window = static_cast<std::ptrdiff_t>(std::lround(params.window_seconds * sample_rate));
    window = std::max<std::ptrdiff_t>(4, window + (window % 2));
    const std::ptrdiff_t hop = window / 2;
    const auto tolerance = static_cast<std::ptrdiff_t>(std::lround(params.seek_seconds * sample_rate));
    const double analysis_hop = rate * static_cast<double>(hop);

    std::vector<double> w(static_cast<std::size_t>(window));
    for (std::ptrdiff_t i = 0; i < window; ++i) {
        w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / window);
    }
    auto at = [&](std::ptrdiff_t p) { return p >= 0 && p < len ? x[static_cast<std::size_t>(p)] : 0.0; };

    const auto frames = static_cast<std::ptrdiff_t>(out_len) / hop + 2;
    std::vector<double> y(static_cast<std::size_t>(frames * hop + window), 0.0);
    std::vector<double> weight(y.size(), 0.0);

    std::ptrdiff_t previous = 0;
    for (std::ptrdiff_t f = 0; f < frames; ++f) {
        const auto nominal = static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(f) * analysis_hop));
        std::ptrdiff_t chosen = nominal;
        if (f > 0 && tolerance > 0) {
            const std::ptrdiff_t natural = previous + hop;
            double best = -std::numeric_limits<double>::infinity();
            for (std::ptrdiff_t d = -tolerance; d <= tolerance; ++d) {
                const std::ptrdiff_t cand = nominal + d;
                double corr = 0.0;
                for (std::ptrdiff_t i = 0; i < window; ++i) corr += at(natural + i) * at(cand + i);
                if (corr > best) {
                    best = corr;
                    chosen = cand;
                }
            }
        }
        previous = chosen;
        const std::ptrdiff_t base = f * hop;
        for (std::ptrdiff_t i = 0; i < window; ++i) {
            const auto o = static_cast<std::size_t>(base + i);
            y[o] += w[static_cast<std::size_t>(i)] * at(chosen + i);
            weight[o] += w[static_cast<std::size_t>(i)];
        }
    }

    y.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        if (weight[i] > 1e-6) y[i] /= weight[i];
    }
    return y;
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t out_len) {
    if (x.empty() || out_len == 0) return {};
    std::vector<double> y(out_len);
    const double step = static_cast<double>(x.size()) / static_cast<double>(out_len);
    const std::size_t last = x.size() - 1;
    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = static_cast<double>(i) * step;
        const auto i0 = std::min(static_cast<std::size_t>(pos), last);
        const std::size_t i1 = std::min(i0 + 1, last);
        const double frac = pos - static_cast<double>(i0);
        y[i] = x[i0] + frac * (x[i1] - x[i0]);
    }
    return y;
}

std::vector<double> resample_sinc(std::span<const double> x, double in_rate, double out_rate) {
    if (!(in_rate > 0.0) || !(out_rate > 0.0)) throw ConfigError("resample: rates must be positive");
    if (x.empty()) return {};
    if (in_rate == out_rate) return {x.begin(), x.end()};
    const double ratio = out_rate / in_rate;
    const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * ratio));
    const double cutoff = std::min(1.0, ratio);
    constexpr double kHalfTaps = 32.0;
    const double half_width = kHalfTaps / cutoff;
    const auto len = static_cast<std::ptrdiff_t>(x.size());

    std::vector<double> y(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double t = static_cast<double>(i) / ratio;
        const auto first = static_cast<std::ptrdiff_t>(std::ceil(t - half_width));
        const auto last = static_cast<std::ptrdiff_t>(std::floor(t + half_width));
        double acc = 0.0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(first, 0); k <= std::min(last, len - 1); ++k) {
            const double d = t - static_cast<double>(k);
            const double u = d / half_width;  // in [-1, 1]
            const double blackman = 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(2.0 * kPi * u);
            acc += x[static_cast<std::size_t>(k)] * cutoff * sinc(cutoff * d) * blackman;
        }
        y[i] = acc;
    }
    return y;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
    if (x.empty() || h.empty()) return {};
    const std::size_t full = x.size() + h.size() - 1;
    const std::size_t n = fast_size(full);
    const PlanPair plans = plans_for(n);

    RealBuffer a = real_buffer(n);
    RealBuffer b = real_buffer(n);
    std::copy(x.begin(), x.end(), a.get());
    std::copy(h.begin(), h.end(), b.get());
    SpectrumBuffer fa = spectrum_buffer(n);
    SpectrumBuffer fb = spectrum_buffer(n);
    fftw_execute_dft_r2c(plans.forward, a.get(), fa.get());
    fftw_execute_dft_r2c(plans.forward, b.get(), fb.get());
    for (std::size_t i = 0; i < n / 2 + 1; ++i) {
        const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_execute_dft_c2r(plans.inverse, fa.get(), a.get());
    std::vector<double> y(full);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < full; ++i) y[i] = a[i] * scale;
    return y;
}

double spectral_centroid(std::span<const double> x, double sample_rate) {
    if (x.size() < 2) return 0.0;
    const std::size_t n = x.size();
    const PlanPair plans = plans_for(n);
    RealBuffer buf = real_buffer(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        buf[i] = x[i] * w;
    }
    SpectrumBuffer spec = spectrum_buffer(n);
    fftw_execute_dft_r2c(plans.forward, buf.get(), spec.get());
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double mag = std::hypot(spec[k][0], spec[k][1]);
        weighted += mag * static_cast<double>(k) * sample_rate / static_cast<double>(n);
        total += mag;
    }
    return total > 0.0 ? weighted / total : 0.0;
}

}  // namespace pvvasm::dsp
