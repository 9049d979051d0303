#include "pvvasm/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "pvvasm/errors.hpp"
#include "pvvasm/rng.hpp"
#include "pvvasm/special_functions.hpp"

namespace pvvasm {

std::string to_string(Direction d) {
    return d == Direction::CertifyBonaFide ? "certify_bonafide" : "certify_spoof";
}

Direction direction_from_string(const std::string& s) {
    if (s == "certify_bonafide" || s == "bonafide") return Direction::CertifyBonaFide;
    if (s == "certify_spoof" || s == "spoof") return Direction::CertifySpoof;
    throw ConfigError("unknown direction '" + s + "'");
}

std::string to_string(CvMethod m) {
    switch (m) {
        case CvMethod::Degenerate: return "degenerate";
        case CvMethod::McKay: return "mckay";
        case CvMethod::Bootstrap: return "bootstrap";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// ScoreMatrix

ScoreMatrix::ScoreMatrix(std::size_t k, std::size_t n, std::vector<double> values)
    : k_(k), n_(n), values_(std::move(values)) {
    if (k_ == 0 || n_ == 0) throw ConfigError("score matrix needs k >= 1 and n >= 1");
    if (values_.size() != k_ * n_) {
        throw ConfigError("score matrix holds " + std::to_string(values_.size()) + " values, expected k*n = " +
                          std::to_string(k_ * n_));
    }
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
        const double z = values_[idx];
        if (!std::isfinite(z)) {
            throw InputError("non-finite score at batch " + std::to_string(idx / n_) + ", sample " +
                             std::to_string(idx % n_));
        }
        if (z < 0.0 || z > 1.0) {
            throw InputError("score " + std::to_string(z) + " outside [0, 1] at batch " + std::to_string(idx / n_) +
                             ", sample " + std::to_string(idx % n_));
        }
    }
}

ScoreMatrix ScoreMatrix::from_pool(std::span<const double> pool, std::size_t n, std::size_t k) {
    if (pool.size() != n * k) {
        throw ConfigError("pool of " + std::to_string(pool.size()) + " scores cannot be split into " +
                          std::to_string(k) + " x " + std::to_string(n));
    }
    return ScoreMatrix(k, n, std::vector<double>(pool.begin(), pool.end()));
}

std::span<const double> ScoreMatrix::row(std::size_t j) const {
    if (j >= k_) throw ConfigError("batch index out of range");
    return std::span<const double>(values_).subspan(j * n_, n_);
}

// ---------------------------------------------------------------------------
// CertBudget

CertBudget CertBudget::oriented(Direction d) const {
    CertBudget out = *this;
    out.direction = d;
    const bool negative = t_hi < 0.0;
    const bool want_negative = d == Direction::CertifyBonaFide;
    if (negative != want_negative) {
        out.t_lo = -t_hi;
        out.t_hi = -t_lo;
    }
    return out;
}

void CertBudget::validate() const {
    if (n == 0 || k == 0) throw ConfigError("budget: n and k must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("budget: delta must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("budget: alpha must lie in (0, 1)");
    if (!(cv_alpha_share > 0.0 && cv_alpha_share < 1.0)) throw ConfigError("budget: cv_alpha_share must lie in (0, 1)");
    if (!std::isfinite(t_lo) || !std::isfinite(t_hi) || t_lo > t_hi) throw ConfigError("budget: t-range must be a finite interval lo <= hi");
    if (direction == Direction::CertifyBonaFide && !(t_hi < 0.0)) {
        throw ConfigError("budget: bona-fide certification needs a t-range inside (-inf, 0)");
    }
    if (direction == Direction::CertifySpoof && !(t_lo > 0.0)) {
        throw ConfigError("budget: spoof certification needs a t-range inside (0, inf)");
    }
    if (grid_points == 0) throw ConfigError("budget: empty t-grid");
    if (!(cv_method_threshold > 0.0)) throw ConfigError("budget: cv_method_threshold must be positive");
    if (bootstrap_resamples < 10) throw ConfigError("budget: bootstrap_resamples must be at least 10");
}

// ---------------------------------------------------------------------------
// Chernoff statistic

namespace {

void check_exponent(double t, Direction direction) {
    if (!std::isfinite(t)) throw ConfigError("exponent t must be finite");
    if (direction == Direction::CertifyBonaFide && !(t < 0.0)) throw ConfigError("bona-fide certification needs t < 0");
    if (direction == Direction::CertifySpoof && !(t > 0.0)) throw ConfigError("spoof certification needs t > 0");
}

double max_batch_mean(const ScoreMatrix& scores, double t) {
    double worst = 0.0;
    for (std::size_t j = 0; j < scores.k(); ++j) {
        double sum = 0.0;
        for (double z : scores.row(j)) sum += std::exp(t * (z - 0.5));
        worst = std::max(worst, sum / static_cast<double>(scores.n()));
    }
    return worst;
}

}  // namespace

std::vector<double> batch_statistic(const ScoreMatrix& scores, double t, Direction direction) {
    check_exponent(t, direction);
    std::vector<double> out;
    out.reserve(scores.k());
    for (std::size_t j = 0; j < scores.k(); ++j) {
        double sum = 0.0;
        for (double z : scores.row(j)) {
            if (!std::isfinite(z)) throw InputError("non-finite score");
            sum += std::exp(t * (z - 0.5));
        }
        out.push_back(sum / static_cast<double>(scores.n()));
    }
    return out;
}

std::vector<double> t_grid(const CertBudget& budget) {
    if (budget.grid_points == 0) throw ConfigError("empty t-grid");
    const double sign = budget.t_hi < 0.0 ? -1.0 : 1.0;
    const double near = std::min(std::abs(budget.t_lo), std::abs(budget.t_hi));
    const double far = std::max(std::abs(budget.t_lo), std::abs(budget.t_hi));
    if (!(near > 0.0)) throw ConfigError("t-range must exclude 0");
    std::vector<double> grid(budget.grid_points);
    if (budget.grid_points == 1) {
        grid[0] = sign * far;
        return grid;
    }
    const double ratio = std::log(far / near);
    const auto last = static_cast<double>(budget.grid_points - 1);
    for (std::size_t i = 0; i < budget.grid_points; ++i) {
        grid[i] = sign * near * std::exp(ratio * static_cast<double>(i) / last);
    }
    grid.front() = sign * near;
    grid.back() = sign * far;
    return grid;
}

ChernoffResult chernoff_bound(const ScoreMatrix& scores, const CertBudget& budget) {
    return chernoff_bound(scores, budget, t_grid(budget));
}

ChernoffResult chernoff_bound(const ScoreMatrix& scores, const CertBudget& budget, std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("empty t-grid");
    ChernoffResult best;
    best.max_mean = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        check_exponent(t, budget.direction);
        const double worst = max_batch_mean(scores, t);
        if (worst < best.max_mean) {
            best.max_mean = worst;
            best.t_star = t;
        }
    }
    best.bound = std::min(1.0, best.max_mean / budget.delta);
    return best;
}

double error_probability(std::size_t n, std::size_t k, double delta, double c) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("error_probability: delta must lie in (0, 1)");
    if (n == 0 || k == 0) throw ConfigError("error_probability: n and k must be positive");
    if (std::isnan(c) || c < 0.0) throw ConfigError("error_probability: c must be non-negative");
    if (c == 0.0) return 0.0;
    if (std::isinf(c)) return 1.0;
    const double ratio = static_cast<double>(n) * (1.0 - delta) * (1.0 - delta) / (c * c);
    return std::exp(-static_cast<double>(k) * std::log1p(ratio));
}

// ---------------------------------------------------------------------------
// Coefficient of variation

double sample_cv(std::span<const double> values) {
    if (values.size() < 2) throw InputError("sample_cv needs at least two values");
    long double sum = 0.0L;
    for (double v : values) {
        if (!std::isfinite(v)) throw InputError("sample_cv: non-finite value");
        sum += v;
    }
    const long double mean = sum / values.size();
    if (!(mean > 1e-300L)) throw DegenerateSampleError("sample_cv: mean is not strictly positive");
    long double ss = 0.0L;
    for (double v : values) {
        const long double d = v - mean;
        ss += d * d;
    }
    const long double sd = std::sqrt(ss / (values.size() - 1));
    return static_cast<double>(sd / mean);
}

namespace {

constexpr std::size_t kMaxDistinctForMultinomial = 64;

double cv_from_sums(double s1, double s2, double m) {
    const double mean = s1 / m;
    const double var = std::max(0.0, (s2 - s1 * mean) / (m - 1.0));
    return std::sqrt(var) / mean;
}

// Fills `out` with uniform indices below `bound` < 2^32: two 32-bit Lemire
// draws per engine output, low half first. A trailing unused half is dropped.
void fill_indices(FastRng& rng, std::uint32_t bound, std::vector<std::uint32_t>& out) {
    const auto threshold = static_cast<std::uint32_t>(-bound % bound);
    const std::size_t size = out.size();
    std::size_t i = 0;
    while (i < size) {
        const std::uint64_t r = rng();
        const std::uint64_t lo = (r & 0xffffffffULL) * bound;
        if (static_cast<std::uint32_t>(lo) >= threshold) out[i++] = static_cast<std::uint32_t>(lo >> 32);
        if (i == size) break;
        const std::uint64_t hi = (r >> 32) * bound;
        if (static_cast<std::uint32_t>(hi) >= threshold) out[i++] = static_cast<std::uint32_t>(hi >> 32);
    }
}

std::vector<double> bootstrap_cvs(std::span<const double> values, std::size_t resamples, std::uint64_t seed) {
    FastRng rng(seed);
    const std::size_t m = values.size();
    const auto md = static_cast<double>(m);
    std::vector<double> out(resamples);

    std::map<double, std::size_t> distinct;
    for (double v : values) {
        ++distinct[v];
        if (distinct.size() > kMaxDistinctForMultinomial) break;
    }

    if (distinct.size() <= kMaxDistinctForMultinomial) {
        // Resample counts over distinct values are multinomial(m, count_i / m).
        std::vector<double> value;
        std::vector<double> weight;
        for (auto [v, c] : distinct) {
            value.push_back(v);
            weight.push_back(static_cast<double>(c));
        }
        for (std::size_t b = 0; b < resamples; ++b) {
            std::size_t remaining = m;
            double remaining_weight = md;
            double s1 = 0.0;
            double s2 = 0.0;
            for (std::size_t i = 0; i < value.size() && remaining > 0; ++i) {
                std::size_t count = remaining;
                if (i + 1 < value.size()) {
                    const double p = std::clamp(weight[i] / remaining_weight, 0.0, 1.0);
                    std::binomial_distribution<std::size_t> draw(remaining, p);
                    count = draw(rng);
                }
                remaining -= count;
                remaining_weight -= weight[i];
                s1 += static_cast<double>(count) * value[i];
                s2 += static_cast<double>(count) * value[i] * value[i];
            }
            out[b] = cv_from_sums(s1, s2, md);
        }
        return out;
    }

    if (m > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("bootstrap sample too large");
    std::vector<std::uint32_t> idx(m);
    for (std::size_t b = 0; b < resamples; ++b) {
        fill_indices(rng, static_cast<std::uint32_t>(m), idx);
        double s1[4] = {0.0, 0.0, 0.0, 0.0};
        double s2[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            for (int l = 0; l < 4; ++l) {
                const double v = values[idx[i + l]];
                s1[l] += v;
                s2[l] += v * v;
            }
        }
        for (; i < m; ++i) {
            const double v = values[idx[i]];
            s1[0] += v;
            s2[0] += v * v;
        }
        out[b] = cv_from_sums((s1[0] + s1[1]) + (s1[2] + s1[3]), (s2[0] + s2[1]) + (s2[2] + s2[3]), md);
    }
    return out;
}

}  // namespace

CvEstimate cv_upper_bound(std::span<const double> values, double confidence_alpha, const CvOptions& options) {
    const std::size_t m = values.size();
    if (m < 2) throw InputError("cv_upper_bound needs at least two values");
    if (!(confidence_alpha > 0.0 && confidence_alpha < 1.0)) {
        throw ConfigError("cv_upper_bound: confidence alpha must lie in (0, 1)");
    }
    for (double v : values) {
        if (!std::isfinite(v) || !(v > 0.0)) throw InputError("cv_upper_bound expects finite positive values");
    }

    CvEstimate est;
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        return est;
    }
    est.c_hat = sample_cv(values);
    if (est.c_hat == 0.0) return est;

    const double percentile = confidence_alpha / 2.0;
    if (est.c_hat <= options.method_threshold) {
        // Modified McKay upper limit with u the lower chi-square percentile.
        est.method = CvMethod::McKay;
        const auto md = static_cast<double>(m);
        const double u = special::chi_square_lower_quantile(md - 1.0, percentile);
        const double c2 = est.c_hat * est.c_hat;
        const double bracket = ((u + 2.0) / md - 1.0) * c2 + u / (md - 1.0);
        est.c_tilde = bracket > 0.0 ? est.c_hat / std::sqrt(bracket) : std::numeric_limits<double>::infinity();
    } else {
        est.method = CvMethod::Bootstrap;
        std::vector<double> cvs = bootstrap_cvs(values, options.bootstrap_resamples, options.seed);
        const auto b = static_cast<double>(cvs.size());
        auto rank = static_cast<std::size_t>(std::ceil((1.0 - percentile) * b));
        rank = std::clamp<std::size_t>(rank, 1, cvs.size());
        std::nth_element(cvs.begin(), cvs.begin() + static_cast<std::ptrdiff_t>(rank - 1), cvs.end());
        est.c_tilde = cvs[rank - 1];
    }
    est.c_tilde = std::max(est.c_tilde, est.c_hat);
    return est;
}

// ---------------------------------------------------------------------------
// Certificate

Certificate Certificate::at_epsilon(double eps) const {
    Certificate out = *this;
    out.epsilon = eps;
    out.certified = bound < eps && error_prob < error_prob_limit;
    return out;
}

Certificate certify(const ScoreMatrix& scores, const CertBudget& budget, double epsilon) {
    budget.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (scores.n() != budget.n || scores.k() != budget.k) {
        throw ConfigError("score matrix is " + std::to_string(scores.k()) + " x " + std::to_string(scores.n()) +
                          " but the budget expects " + std::to_string(budget.k) + " x " + std::to_string(budget.n));
    }

    const ChernoffResult chernoff = chernoff_bound(scores, budget);

    std::vector<double> at_optimum;
    at_optimum.reserve(scores.size());
    for (double z : scores.pooled()) at_optimum.push_back(std::exp(chernoff.t_star * (z - 0.5)));

    const CvEstimate cv = cv_upper_bound(at_optimum, budget.cv_alpha(),
                                         CvOptions{budget.cv_method_threshold, budget.bootstrap_resamples, budget.seed});

    Certificate cert;
    cert.bound = chernoff.bound;
    cert.t_star = chernoff.t_star;
    cert.c_hat = cv.c_hat;
    cert.c_tilde = cv.c_tilde;
    cert.cv_method = cv.method;
    cert.degenerate = cv.degenerate();
    cert.error_prob = cv.degenerate() ? 0.0 : error_probability(budget.n, budget.k, budget.delta, cv.c_tilde);
    cert.error_prob_limit = budget.error_prob_limit();
    cert.direction = budget.direction;
    return cert.at_epsilon(epsilon);
}

}  // namespace pvvasm
