#pragma once

#include <vector>

namespace hycard {

// Regularized incomplete beta function I_x(a, b), continued-fraction expansion.
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

// Two-sided tail probability, I_{nu/(nu+t^2)}(nu/2, 1/2).
double student_t_two_sided(double t, double dof);

struct TTestResult {
    double t = 0.0;
    size_t dof = 0;
    double p = 1.0;  // two-sided
};

// Paired two-sided t-test on equal-length samples (k >= 2). Zero-variance
// differences with a nonzero mean are undefined and raise NumericError;
// identical samples give t = 0, p = 1.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hycard
