#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace mnf {

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0;
};

//! Ordinary least squares y = slope * x + intercept.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

//! Half the l1 distance between two probability vectors of equal length.
double tv_distance(std::span<const double> p, std::span<const double> q);

//! Welford accumulator.
class RunningStats
{
  public:
    void add(double x)
    {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const
    {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double stderr_mean() const
    {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

//! Neumaier compensated summation.
class CompensatedSum
{
  public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0;
    double comp_ = 0;
};

}  // namespace mnf
