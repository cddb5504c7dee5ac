#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace glassform {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes with the Fritsch-Butland harmonic mean in the interior). Never
/// overshoots the data between nodes; reproduces linear data exactly.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::span<const double> xs, std::span<const double> ys);

    /// Value inside [x_front, x_back]; outside, the end tangent line is used.
    double operator()(double x) const;
    double derivative(double x) const;

    double x_front() const { return xs_.front(); }
    double x_back() const { return xs_.back(); }
    bool contains(double x) const { return x >= xs_.front() && x <= xs_.back(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> slopes_;
};

/// Finite-difference weights for derivatives 0..2 at `z` using the given
/// nodes (Fornberg's recursion; arbitrary spacing). Returns weights[order][node].
std::array<std::vector<double>, 3> fd_weights(double z, std::span<const double> nodes);

struct Derivatives {
    std::vector<double> first;
    std::vector<double> second;
};

/// Second-order accurate derivatives on a (possibly non-uniform) grid:
/// three-point central stencils inside, one-sided three-point (first) and
/// four-point (second) stencils at the ends.
Derivatives finite_differences(std::span<const double> xs, std::span<const double> ys);

/// Composite Gauss-Legendre quadrature (5 nodes per panel) of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels = 200) {
    static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                   0.5688888888888889, 0.4786286704993665,
                                                   0.2369268850561891};
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + 0.5 * h * nodes[k]);
    }
    return 0.5 * h * sum;
}

/// Pearson correlation; 0 when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

double max_abs(std::span<const double> v);

/// Seeded generator with platform-independent draws. The engine's output
/// sequence is fixed by the standard; the conversions below are ours, because
/// the standard distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, one draw per call).
    double normal();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed);

/// Runs body(i) for i in [0, n) on up to `jobs` threads (0 = hardware
/// concurrency). The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

/// Stable 64-bit FNV-1a hash, used for config fingerprints in manifests.
std::uint64_t fnv1a(std::span<const char> bytes);

}  // namespace glassform
