#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "archilens/embedding.hpp"

namespace archilens::stats {

/// Result of a two-sample t-test. `significant` is evaluated against the
/// alpha that was passed to the test.
struct TTestResult {
    double t_stat = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

enum class Variance { Welch, Pooled };
enum class Tails { Two, One };

struct TTestOptions {
    double alpha = 0.05;
    Variance variance = Variance::Welch;
    Tails tails = Tails::Two;
};

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

struct FiveNumber {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Histogram + KDE + boxplot-style summary for one score distribution.
struct DistributionSummary {
    std::vector<HistogramBin> histogram;
    std::vector<std::pair<double, double>> kde;  // (grid_x, density)
    FiveNumber five_number;
    std::vector<double> outliers;  // beyond 1.5*IQR fences
};

/// cos angle between a and b. Throws DimensionMismatch on length mismatch
/// and DomainError on zero-norm input.
double cosine(const EmbeddingVec& a, const EmbeddingVec& b);

/// Probability that a positive score ranks above a negative one, with 0.5
/// credit per tie. Exact pair counting (sort + binary search), so for any
/// input the complement identity auroc(p,n) + auroc(n,p) = 1 holds exactly.
double auroc(const std::vector<double>& pos, const std::vector<double>& neg);

/// Two-sample t-test. Defaults: Welch (unequal variance), two-sided.
/// Degenerate convention when both sample variances are zero: equal means
/// give t=0, p=1, not significant; differing means give t=+/-inf, df=0,
/// p=0, significant.
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                         const TTestOptions& options = {});

/// Regularized incomplete beta I_x(a,b), continued-fraction evaluation,
/// absolute error <= 1e-10 over the tested domain.
double regularized_incomplete_beta(double a, double b, double x);

/// Equal-width bins over [min, max]; bins are left-closed/right-open except
/// the last, which is closed. A single distinct value widens the range to
/// [v, v+1] so every count lands in bin 0.
std::vector<HistogramBin> histogram(const std::vector<double>& values, std::size_t bins);

/// As histogram, but over an explicit [lo, hi] range so two samples can
/// share bin edges. Out-of-range values clamp into the edge bins.
std::vector<HistogramBin> histogram_range(const std::vector<double>& values, std::size_t bins,
                                          double lo, double hi);

/// Gaussian KDE with Silverman bandwidth h = 0.9*min(sigma, IQR/1.34)*n^-0.2.
/// When IQR is zero but sigma is not, the sigma term alone is used; all
/// values equal throws ZeroBandwidth.
std::vector<std::pair<double, double>> kde(const std::vector<double>& values,
                                           const std::vector<double>& grid);

double silverman_bandwidth(const std::vector<double>& values);

/// Quartiles by linear interpolation between order statistics (the common
/// spreadsheet/NumPy default).
double quantile(std::vector<double> values, double q);

FiveNumber five_number_summary(const std::vector<double>& values);

/// Values outside [q1 - 1.5*IQR, q3 + 1.5*IQR], in input order.
std::vector<double> outliers(const std::vector<double>& values);

DistributionSummary summarize_distribution(const std::vector<double>& values,
                                           std::size_t bins,
                                           const std::vector<double>& grid);

/// Token counts over maximal ASCII-alphabetic runs, lowercased, minimum
/// length 3, stopwords removed. Sorted count-descending, token-ascending.
std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    const std::vector<std::string>& texts, const std::set<std::string>& stopwords);

/// Load a one-token-per-line stopword file (UTF-8, '#' comments allowed).
std::set<std::string> load_stopwords(const std::string& path);

std::set<std::string> parse_stopwords(std::istream& in);

/// The English stopword list shipped with the library (compiled in from
/// data/stopwords_en.txt at build time).
std::set<std::string> default_stopwords();

double mean(const std::vector<double>& values);

/// Sample variance (n-1 denominator). Requires n >= 2.
double sample_variance(const std::vector<double>& values);

}  // namespace archilens::stats
