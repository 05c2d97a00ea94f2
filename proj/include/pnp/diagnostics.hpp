#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnp/field.hpp"
#include "pnp/sampler.hpp"

namespace pnp {

// Streaming per-coordinate mean and variance (Welford recurrence), mergeable
// across chains (Chan parallel formulas). The tag names the domain the
// coordinates live in (pixel, fourier-real, fourier-imag, scale-2, ...);
// merging accumulators with different tags is an error.
class RunningMoments {
public:
    RunningMoments() = default;
    explicit RunningMoments(std::size_t dim, std::string tag = "pixel");

    void add(std::span<const double> x);
    void merge(const RunningMoments& other);

    std::uint64_t count() const { return n_; }
    std::size_t dim() const { return mean_.size(); }
    const std::string& tag() const { return tag_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& m2() const { return m2_; }

    // Sample variance M2/(n-1); needs n >= 2.
    std::vector<double> variance() const;
    std::vector<double> std_dev() const;

private:
    std::string tag_ = "pixel";
    std::uint64_t n_ = 0;
    std::vector<double> mean_, m2_;
};

ImageField mean_map(const RunningMoments& m, std::size_t h, std::size_t w);
ImageField std_map(const RunningMoments& m, std::size_t h, std::size_t w);

// Feeds the 2D DFT of a sample into separate real/imag accumulators.
void fourier_moments_update(RunningMoments& m_real, RunningMoments& m_imag,
                            const ImageField& sample);

// Coordinates of the slowest/typical/fastest-moving statistics, read off a
// variance map. Ties break toward the lowest flat index; the median is the
// coordinate at sorted position floor((n-1)/2) with index as secondary key.
struct StatisticSelection {
    std::size_t argmin = 0;
    std::size_t median = 0;
    std::size_t argmax = 0;
};
StatisticSelection select_statistics(const RunningMoments& m);
// Fourier variant: per-coordinate source is max(var_real, var_imag).
StatisticSelection select_statistics(const RunningMoments& m_real,
                                     const RunningMoments& m_imag);

// One scalar statistic recorded along the run. Indices strictly increasing.
struct ScalarTrace {
    std::string name;
    std::vector<std::uint64_t> iterations;
    std::vector<double> values;

    void append(std::uint64_t k, double v);
    std::size_t size() const { return values.size(); }
};

void write_traces_csv(const std::string& path, const std::vector<ScalarTrace>& traces);

// Autocorrelation r(0..max_lag) with the full-sample (biased) denominator:
//   r(l) = sum_t (x_t - xbar)(x_{t+l} - xbar) / sum_t (x_t - xbar)^2.
// Needs length > max_lag + 1 and nonzero variance.
std::vector<double> acf(const std::vector<double>& trace, std::size_t max_lag);

// 10*log10(peak^2 / MSE); +inf when the images coincide.
double psnr(std::span<const double> x, std::span<const double> ref, double peak);

// Mean SSIM over 11x11 Gaussian windows (sigma 1.5, K1=0.01, K2=0.03,
// dynamic range L). Images smaller than the window fall back to one global
// window so the constant-image closed forms still hold.
double ssim(const ImageField& x, const ImageField& ref, double dynamic_range = 1.0);

// RMSE between each recorded std snapshot and the final std map.
struct StdSnapshot {
    std::uint64_t n = 0;
    std::vector<double> std_dev;
};
ScalarTrace rmse_std_trace(const std::vector<StdSnapshot>& snapshots,
                           std::span<const double> final_std);

// ---- chain observers ----------------------------------------------------

// Pixel-domain moments; optionally keeps std snapshots at every doubling of
// the sample count (n = 2, 4, 8, ...) for convergence-of-uncertainty traces.
class MomentObserver : public ChainObserver {
public:
    explicit MomentObserver(std::size_t dim, bool record_snapshots = false);
    void observe(std::uint64_t k, std::span<const double> sample) override;

    const RunningMoments& moments() const { return moments_; }
    RunningMoments& moments() { return moments_; }
    const std::vector<StdSnapshot>& snapshots() const { return snapshots_; }

private:
    RunningMoments moments_;
    bool record_snapshots_;
    std::uint64_t next_snapshot_ = 2;
    std::vector<StdSnapshot> snapshots_;
};

class FourierMomentObserver : public ChainObserver {
public:
    FourierMomentObserver(std::size_t h, std::size_t w);
    void observe(std::uint64_t k, std::span<const double> sample) override;

    const RunningMoments& real_moments() const { return real_; }
    const RunningMoments& imag_moments() const { return imag_; }

private:
    std::size_t h_, w_;
    RunningMoments real_, imag_;
};

// Moments of block-downsampled copies at scales 0..i_max. Scale 0 sees the
// raw samples, so its map reproduces the plain std_map bit for bit.
class MultiscaleMomentObserver : public ChainObserver {
public:
    MultiscaleMomentObserver(std::size_t h, std::size_t w, unsigned i_max);
    void observe(std::uint64_t k, std::span<const double> sample) override;

    unsigned max_scale() const { return static_cast<unsigned>(scales_.size() - 1); }
    const RunningMoments& scale(unsigned i) const { return scales_.at(i); }
    ImageField std_map_at(unsigned i) const;

private:
    std::size_t h_, w_;
    std::vector<RunningMoments> scales_;
};

// ||sample - ref||_2 per observation.
class L2DistanceObserver : public ChainObserver {
public:
    explicit L2DistanceObserver(std::vector<double> ref, std::string name = "l2_to_ref");
    void observe(std::uint64_t k, std::span<const double> sample) override;
    const ScalarTrace& trace() const { return trace_; }

private:
    std::vector<double> ref_;
    ScalarTrace trace_;
};

// PSNR of the running mean against a reference, recorded every `stride`
// observations (the estimate-quality evolution curve).
class PsnrTraceObserver : public ChainObserver {
public:
    PsnrTraceObserver(std::vector<double> truth, double peak, std::uint64_t stride = 1);
    void observe(std::uint64_t k, std::span<const double> sample) override;
    const ScalarTrace& trace() const { return trace_; }

private:
    std::vector<double> truth_;
    double peak_;
    std::uint64_t stride_;
    RunningMoments moments_;
    ScalarTrace trace_;
};

// Records the trajectories of the lowest/median/highest-variance coordinates.
// The coordinates are picked once, after `warmup` observations of a private
// moment accumulator; earlier samples only feed the selection.
class SelectedCoordinateObserver : public ChainObserver {
public:
    SelectedCoordinateObserver(std::size_t dim, std::uint64_t warmup);
    void observe(std::uint64_t k, std::span<const double> sample) override;

    bool selected() const { return selected_; }
    const StatisticSelection& selection() const { return selection_; }
    const std::vector<ScalarTrace>& traces() const { return traces_; }

private:
    std::uint64_t warmup_;
    bool selected_ = false;
    RunningMoments warm_moments_;
    StatisticSelection selection_;
    std::vector<ScalarTrace> traces_; // argmin, median, argmax
};

} // namespace pnp
