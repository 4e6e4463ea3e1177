#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tcs::testing {

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Survival function of the Kolmogorov distribution.
double kolmogorov_q(double lambda);

/// Upper-tail probability of a chi-squared variable.
double chi_squared_sf(double statistic, double dof);

struct ChiSquaredResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

/// Pearson goodness of fit of counts against probabilities (normalised internally).
ChiSquaredResult chi_squared_gof(const std::vector<double>& observed,
                                 const std::vector<double>& probabilities);

/// Pearson homogeneity test of two samples of non-negative integers. Values are
/// binned so that each bin has expected count >= 5 under the pooled law.
ChiSquaredResult chi_squared_two_sample(const std::vector<long>& a, const std::vector<long>& b);

double normal_cdf(double x);
double exponential_cdf(double x, double rate);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

}  // namespace tcs::testing
