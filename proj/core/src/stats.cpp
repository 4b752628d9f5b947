#include "archilens/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "archilens/errors.hpp"

namespace archilens::stats {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError(std::string(what) + " contains non-finite value");
    }
}

/// Continued fraction for the incomplete beta (modified Lentz iteration).
double incbeta_cf(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw DomainError("incomplete beta continued fraction did not converge");
}

double student_t_sf_two_sided(double t, double df) {
    // P(|T| >= |t|) = I_x(df/2, 1/2) with x = df / (df + t^2).
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

}  // namespace

double mean(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("mean of empty list");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) throw InsufficientData("sample variance needs n >= 2");
    const double m = mean(values);
    double s = 0.0;
    for (double v : values) {
        const double d = v - m;
        s += d * d;
    }
    return s / static_cast<double>(values.size() - 1);
}

double cosine(const EmbeddingVec& a, const EmbeddingVec& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine: dims " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    }
    if (a.empty()) throw EmptyInput("cosine of empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DomainError("cosine of zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) throw EmptyInput("auroc requires non-empty score lists");
    require_finite(pos, "auroc pos");
    require_finite(neg, "auroc neg");

    std::vector<double> sorted_neg(neg);
    std::sort(sorted_neg.begin(), sorted_neg.end());

    // Integer win/tie counting keeps the complement identity exact: doubling
    // wins and adding ties is an integer, and n*m*2 is exactly representable.
    std::uint64_t twice_score = 0;  // 2 per win, 1 per tie
    for (double p : pos) {
        const auto lo = std::lower_bound(sorted_neg.begin(), sorted_neg.end(), p);
        const auto hi = std::upper_bound(lo, sorted_neg.end(), p);
        const auto wins = static_cast<std::uint64_t>(lo - sorted_neg.begin());
        const auto ties = static_cast<std::uint64_t>(hi - lo);
        twice_score += 2 * wins + ties;
    }
    const auto denom = static_cast<std::uint64_t>(pos.size()) * neg.size();
    return static_cast<double>(twice_score) / (2.0 * static_cast<double>(denom));
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                         const TTestOptions& options) {
    if (a.size() < 2 || b.size() < 2) throw InsufficientData("t-test needs >= 2 values per side");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw DomainError("alpha must be in (0,1)");
    require_finite(a, "t-test sample a");
    require_finite(b, "t-test sample b");

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a);
    const double mb = mean(b);
    const double va = sample_variance(a);
    const double vb = sample_variance(b);

    TTestResult r;
    if (va == 0.0 && vb == 0.0) {
        // Documented convention for degenerate (zero-variance) samples.
        if (ma == mb) {
            r.t_stat = 0.0;
            r.df = 0.0;
            r.p_value = 1.0;
            r.significant = false;
        } else {
            r.t_stat = ma > mb ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            r.df = 0.0;
            r.p_value = 0.0;
            r.significant = true;
        }
        return r;
    }

    if (options.variance == Variance::Welch) {
        const double se2 = va / na + vb / nb;
        r.t_stat = (ma - mb) / std::sqrt(se2);
        const double num = se2 * se2;
        const double den = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
        r.df = num / den;
    } else {
        const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        r.t_stat = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
        r.df = na + nb - 2.0;
    }

    if (r.t_stat == 0.0) {
        r.p_value = 1.0;
    } else {
        const double p_two = student_t_sf_two_sided(r.t_stat, r.df);
        r.p_value = options.tails == Tails::Two ? p_two : p_two / 2.0;
    }
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    r.significant = r.p_value < options.alpha;
    return r;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a,b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // The continued fraction converges fast for x below the mean-ish pivot;
    // use the symmetry relation on the other side.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incbeta_cf(a, b, x) / a;
    }
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, std::size_t bins) {
    if (values.empty()) throw EmptyInput("histogram of empty list");
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) hi = lo + 1.0;  // degenerate-range convention
    return histogram_range(values, bins, lo, hi);
}

std::vector<HistogramBin> histogram_range(const std::vector<double>& values, std::size_t bins,
                                          double lo, double hi) {
    if (values.empty()) throw EmptyInput("histogram of empty list");
    if (bins < 1) throw DomainError("histogram needs bins >= 1");
    if (!(hi > lo)) throw DomainError("histogram range must satisfy hi > lo");
    require_finite(values, "histogram values");

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        out[i].left = lo + width * static_cast<double>(i);
        out[i].right = (i + 1 == bins) ? hi : lo + width * static_cast<double>(i + 1);
    }
    for (double v : values) {
        // Left-closed/right-open buckets, last bin closed; out-of-range
        // values clamp into the edge bins.
        double offset = (v - lo) / width;
        if (offset < 0.0) offset = 0.0;
        auto idx = static_cast<std::size_t>(offset);
        if (idx >= bins) idx = bins - 1;
        ++out[idx].count;
    }
    return out;
}

double silverman_bandwidth(const std::vector<double>& values) {
    if (values.size() < 2) throw InsufficientData("bandwidth needs n >= 2");
    const double sigma = std::sqrt(sample_variance(values));
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);

    double spread = sigma;
    if (iqr > 0.0) spread = std::min(sigma, iqr / 1.34);
    if (spread == 0.0) throw ZeroBandwidth("all values equal; KDE bandwidth is zero");
    return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

std::vector<std::pair<double, double>> kde(const std::vector<double>& values,
                                           const std::vector<double>& grid) {
    if (values.size() < 2) throw InsufficientData("kde needs n >= 2");
    require_finite(values, "kde values");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] < grid[i - 1]) throw DomainError("kde grid must be sorted");
    }

    const double h = silverman_bandwidth(values);
    const double n = static_cast<double>(values.size());
    const double inv_norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));

    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double x : grid) {
        double s = 0.0;
        for (double v : values) {
            const double z = (x - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        out.emplace_back(x, s * inv_norm);
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("quantile of empty list");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile fraction must be in [0,1]");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values.front();
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

FiveNumber five_number_summary(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("five-number summary of empty list");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    FiveNumber f;
    f.min = sorted.front();
    f.q1 = quantile(sorted, 0.25);
    f.median = quantile(sorted, 0.5);
    f.q3 = quantile(sorted, 0.75);
    f.max = sorted.back();
    return f;
}

std::vector<double> outliers(const std::vector<double>& values) {
    const FiveNumber f = five_number_summary(values);
    const double iqr = f.q3 - f.q1;
    const double lo = f.q1 - 1.5 * iqr;
    const double hi = f.q3 + 1.5 * iqr;
    std::vector<double> out;
    for (double v : values) {
        if (v < lo || v > hi) out.push_back(v);
    }
    return out;
}

DistributionSummary summarize_distribution(const std::vector<double>& values, std::size_t bins,
                                           const std::vector<double>& grid) {
    DistributionSummary s;
    s.histogram = histogram(values, bins);
    s.kde = kde(values, grid);
    s.five_number = five_number_summary(values);
    s.outliers = outliers(values);
    return s;
}

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    const std::vector<std::string>& texts, const std::set<std::string>& stopwords) {
    std::map<std::string, std::size_t> counts;
    for (const auto& text : texts) {
        std::string token;
        auto flush = [&] {
            if (token.size() >= 3 && !stopwords.contains(token)) ++counts[token];
            token.clear();
        };
        for (unsigned char c : text) {
            if (std::isalpha(c)) {
                token.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
        }
        flush();
    }

    std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

std::set<std::string> parse_stopwords(std::istream& in) {
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' '))
            line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        words.insert(line);
    }
    return words;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open stopword file: " + path);
    return parse_stopwords(in);
}

}  // namespace archilens::stats
