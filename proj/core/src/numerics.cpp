#include "glassform/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "glassform/error.hpp"

namespace glassform {

namespace {

// Three-point end slope with the usual shape-preserving corrections.
double end_slope(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (std::signbit(s) != std::signbit(d0) || s == 0.0) {
        s = 0.0;
    } else if (std::signbit(d0) != std::signbit(d1) && std::abs(s) > std::abs(3.0 * d0)) {
        s = 3.0 * d0;
    }
    return s;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::span<const double> xs, std::span<const double> ys)
    : xs_(xs.begin(), xs.end()), ys_(ys.begin(), ys.end()) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) throw ValidationError("interpolant needs >= 2 matching points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(xs_[i] > xs_[i - 1])) throw GeometryError("interpolant abscissae must be strictly increasing");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs_[i + 1] - xs_[i];
        delta[i] = (ys_[i + 1] - ys_[i]) / h[i];
    }
    slopes_.assign(n, 0.0);
    if (n == 2) {
        slopes_[0] = slopes_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d0 = delta[i - 1];
        const double d1 = delta[i];
        if (d0 == 0.0 || d1 == 0.0 || std::signbit(d0) != std::signbit(d1)) {
            slopes_[i] = 0.0;
            continue;
        }
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slopes_[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
    slopes_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneCubic::segment(double x) const {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
    return std::min(i, xs_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    if (x <= xs_.front()) return ys_.front() + slopes_.front() * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + slopes_.back() * (x - xs_.back());
    const std::size_t i = segment(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * ys_[i] + h10 * h * slopes_[i] + h01 * ys_[i + 1] + h11 * h * slopes_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x <= xs_.front()) return slopes_.front();
    if (x >= xs_.back()) return slopes_.back();
    const std::size_t i = segment(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t;
    const double d11 = 3 * t2 - 2 * t;
    return (d00 * ys_[i] + d01 * ys_[i + 1]) / h + d10 * slopes_[i] + d11 * slopes_[i + 1];
}

std::array<std::vector<double>, 3> fd_weights(double z, std::span<const double> x) {
    constexpr int m = 2;
    const int n = static_cast<int>(x.size()) - 1;
    std::array<std::vector<double>, 3> c;
    for (auto& row : c) row.assign(x.size(), 0.0);
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

Derivatives finite_differences(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 4 || ys.size() != n) throw ValidationError("finite differences need >= 4 matching points");
    Derivatives d{std::vector<double>(n), std::vector<double>(n)};
    auto apply = [&](std::size_t at, std::size_t first, std::size_t count, int order) {
        const auto w = fd_weights(xs[at], xs.subspan(first, count));
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) s += w[order][k] * ys[first + k];
        return s;
    };
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto w = fd_weights(xs[i], xs.subspan(i - 1, 3));
        d.first[i] = w[1][0] * ys[i - 1] + w[1][1] * ys[i] + w[1][2] * ys[i + 1];
        d.second[i] = w[2][0] * ys[i - 1] + w[2][1] * ys[i] + w[2][2] * ys[i + 1];
    }
    d.first[0] = apply(0, 0, 3, 1);
    d.second[0] = apply(0, 0, 4, 2);
    d.first[n - 1] = apply(n - 1, n - 3, 3, 1);
    d.second[n - 1] = apply(n - 1, n - 4, 4, 2);
    return d;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::uint64_t fnv1a(std::span<const char> bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
    // rejection keeps the draw unbiased
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return static_cast<std::size_t>(v % bound);
}

std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace glassform
