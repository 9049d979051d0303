#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pvvasm::oracles {

double SyntheticScoreModel::sample(std::mt19937_64& rng) const {
    switch (family) {
        case Family::Constant: return a;
        case Family::Beta: {
            std::gamma_distribution<double> ga(a, 1.0);
            std::gamma_distribution<double> gb(b, 1.0);
            const double x = ga(rng);
            const double y = gb(rng);
            return x / (x + y);
        }
        case Family::TwoPointMixture: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return u(rng) < c ? a : b;
        }
        case Family::LogisticOfUniform: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return 1.0 / (1.0 + std::exp(-a * (u(rng) - b)));
        }
    }
    return 0.0;
}

std::vector<double> SyntheticScoreModel::sample(std::mt19937_64& rng, std::size_t count) const {
    std::vector<double> out(count);
    for (auto& v : out) v = sample(rng);
    return out;
}

std::string SyntheticScoreModel::describe() const {
    std::ostringstream s;
    switch (family) {
        case Family::Constant: s << "Constant(" << a << ")"; break;
        case Family::Beta: s << "Beta(" << a << "," << b << ")"; break;
        case Family::TwoPointMixture: s << "TwoPoint(" << a << " w.p. " << c << ", " << b << ")"; break;
        case Family::LogisticOfUniform: s << "LogisticOfUniform(" << a << "," << b << ")"; break;
    }
    return s.str();
}

namespace {

// Lentz continued fraction for I_x(a, b), valid for x < (a+1)/(a+b+2).
long double beta_cf(long double a, long double b, long double x) {
    const long double tiny = 1e-300L;
    long double c = 1.0L;
    long double d = 1.0L - (a + b) * x / (a + 1.0L);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0L / d;
    long double h = d;
    for (int m = 1; m < 10000; ++m) {
        const long double m2 = 2.0L * m;
        long double aa = m * (b - m) * x / ((a + m2 - 1.0L) * (a + m2));
        d = 1.0L + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0L + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        h *= d * c;
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0L));
        d = 1.0L + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0L + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0L) < 1e-18L) break;
    }
    return h;
}

}  // namespace

long double incomplete_beta(long double a, long double b, long double x) {
    if (x <= 0.0L) return 0.0L;
    if (x >= 1.0L) return 1.0L;
    const long double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0L) / (a + b + 2.0L)) return front * beta_cf(a, b, x) / a;
    return 1.0L - front * beta_cf(b, a, 1.0L - x) / b;
}

double analytic_tail(const SyntheticScoreModel& m, Direction direction) {
    const bool below = direction == Direction::CertifyBonaFide;
    switch (m.family) {
        case Family::Constant: return below ? (m.a < 0.5 ? 1.0 : 0.0) : (m.a > 0.5 ? 1.0 : 0.0);
        case Family::Beta: {
            const long double cdf = incomplete_beta(m.a, m.b, 0.5L);
            return static_cast<double>(below ? cdf : 1.0L - cdf);
        }
        case Family::TwoPointMixture: {
            double p = 0.0;
            if (below ? m.a < 0.5 : m.a > 0.5) p += m.c;
            if (below ? m.b < 0.5 : m.b > 0.5) p += 1.0 - m.c;
            return p;
        }
        case Family::LogisticOfUniform: {
            // Z < 1/2 iff a (U - b) < 0.
            const double below_mass = m.a > 0 ? std::clamp(m.b, 0.0, 1.0) : 1.0 - std::clamp(m.b, 0.0, 1.0);
            return below ? below_mass : 1.0 - below_mass;
        }
    }
    return 0.0;
}

long double error_probability_ref(std::size_t n, std::size_t k, long double delta, long double c) {
    if (c == 0.0L) return 0.0L;
    if (std::isinf(c)) return 1.0L;
    const long double base = 1.0L + static_cast<long double>(n) * (1.0L - delta) * (1.0L - delta) / (c * c);
    return std::pow(base, -static_cast<long double>(k));
}

std::vector<long double> batch_means_ref(const std::vector<std::vector<double>>& rows, long double t) {
    std::vector<long double> out;
    for (const auto& row : rows) {
        long double s = 0.0L;
        for (double z : row) s += std::exp(t * static_cast<long double>(z));
        out.push_back(s / row.size() * std::exp(-t / 2.0L));
    }
    return out;
}

long double sample_cv_ref(std::span<const double> values) {
    long double mean = 0.0L;
    for (double v : values) mean += v;
    mean /= values.size();
    long double ss = 0.0L;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (values.size() - 1)) / mean;
}

SoundnessResult soundness_trial(const SyntheticScoreModel& model, const CertBudget& budget, std::size_t trials,
                                std::uint64_t seed) {
    SoundnessResult r;
    r.trials = trials;
    r.tail = analytic_tail(model, budget.direction);
    std::mt19937_64 rng(seed);
    const std::size_t m = budget.n * budget.k;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::vector<double> pool = model.sample(rng, m);
        CertBudget b = budget;
        b.seed = rng();
        const Certificate cert = certify(ScoreMatrix::from_pool(pool, b.n, b.k), b, 0.5);
        const bool confident = cert.error_prob < b.error_prob_limit();
        if (confident) ++r.certified;
        if (cert.bound < r.tail && confident) ++r.violations;
        r.mean_bound += cert.bound;
        r.mean_error_prob += cert.error_prob;
    }
    r.mean_bound /= static_cast<double>(trials);
    r.mean_error_prob /= static_cast<double>(trials);
    return r;
}

CoverageResult cv_coverage(const SampleGenerator& generator, double true_cv, std::size_t m, double confidence_alpha,
                           std::size_t trials, std::uint64_t seed, const CvOptions& options) {
    CoverageResult r;
    r.trials = trials;
    std::mt19937_64 rng(seed);
    std::vector<double> sample(m);
    for (std::size_t t = 0; t < trials; ++t) {
        generator(rng, sample);
        CvOptions o = options;
        o.seed = rng();
        const CvEstimate est = cv_upper_bound(sample, confidence_alpha, o);
        if (est.c_tilde >= true_cv) ++r.covered;
        if (est.method == CvMethod::McKay) ++r.mckay;
        if (est.method == CvMethod::Bootstrap) ++r.bootstrap;
    }
    return r;
}

double three_sigma(double rate, std::size_t trials) {
    return 3.0 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

}  // namespace pvvasm::oracles
