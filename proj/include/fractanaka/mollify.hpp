#pragma once

namespace fractanaka {

/// Index n of the Gaussian mollifier family; variance epsilon = 1/n.
class MollifierIndex {
public:
    explicit MollifierIndex(long long n);

    long long value() const noexcept { return n_; }
    double epsilon() const noexcept { return 1.0 / static_cast<double>(n_); }

    auto operator<=>(const MollifierIndex&) const = default;

private:
    long long n_;
};

/// Centered Gaussian density with variance eps.
double gaussian_kernel(double eps, double u);

/// sgn with sgn(0) = 0.
double sign(double u) noexcept;

struct MollifierValue {
    double f;         // smoothed |u|
    double f_prime;   // smoothed sgn(u)
    double f_second;  // 2 rho_{1/n}(u)
};

/// f_n, f'_n, f''_n at u = z - x.
MollifierValue mollifier_eval(MollifierIndex n, double z, double x);

double mollified_abs(MollifierIndex n, double u);
double mollified_sign(MollifierIndex n, double u);
double mollified_delta2(MollifierIndex n, double u);

}  // namespace fractanaka
