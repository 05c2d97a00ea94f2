#include "pnp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "pnp/errors.hpp"
#include "pnp/fft.hpp"
#include "pnp/kernels.hpp"

namespace pnp {

RunningMoments::RunningMoments(std::size_t dim, std::string tag)
    : tag_(std::move(tag)), mean_(dim, 0.0), m2_(dim, 0.0) {}

void RunningMoments::add(std::span<const double> x) {
    if (x.size() != mean_.size())
        throw DimensionError("moments: sample has dimension " + std::to_string(x.size()) +
                             ", accumulator has " + std::to_string(mean_.size()));
    n_ += 1;
    kernels::welford_update(mean_, m2_, x, 1.0 / static_cast<double>(n_));
}

void RunningMoments::merge(const RunningMoments& other) {
    if (other.tag_ != tag_)
        throw ConfigError("moments: cannot merge tag '" + other.tag_ + "' into '" + tag_ + "'");
    if (other.mean_.size() != mean_.size())
        throw DimensionError("moments: merge dimension mismatch");
    if (other.n_ == 0) return;
    if (n_ == 0) {
        n_ = other.n_;
        mean_ = other.mean_;
        m2_ = other.m2_;
        return;
    }
    const auto na = static_cast<double>(n_);
    const auto nb = static_cast<double>(other.n_);
    const double nab = na + nb;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        const double delta = other.mean_[i] - mean_[i];
        mean_[i] += delta * (nb / nab);
        m2_[i] += other.m2_[i] + delta * delta * (na * nb / nab);
    }
    n_ += other.n_;
}

std::vector<double> RunningMoments::variance() const {
    if (n_ < 2) throw NumericError("moments: variance needs at least 2 samples, have " +
                                   std::to_string(n_));
    std::vector<double> v(m2_.size());
    const double inv = 1.0 / static_cast<double>(n_ - 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(0.0, m2_[i] * inv);
    return v;
}

std::vector<double> RunningMoments::std_dev() const {
    std::vector<double> v = variance();
    for (double& e : v) e = std::sqrt(e);
    return v;
}

namespace {

void check_map_shape(const RunningMoments& m, std::size_t h, std::size_t w) {
    if (m.dim() != h * w)
        throw DimensionError("map shape " + std::to_string(h) + "x" + std::to_string(w) +
                             " does not match accumulator dimension " +
                             std::to_string(m.dim()));
}

} // namespace

ImageField mean_map(const RunningMoments& m, std::size_t h, std::size_t w) {
    check_map_shape(m, h, w);
    if (m.count() == 0) throw NumericError("mean_map: no samples");
    return ImageField(h, w, m.mean());
}

ImageField std_map(const RunningMoments& m, std::size_t h, std::size_t w) {
    check_map_shape(m, h, w);
    return ImageField(h, w, m.std_dev());
}

void fourier_moments_update(RunningMoments& m_real, RunningMoments& m_imag,
                            const ImageField& sample) {
    const ComplexField spec = dft2(sample);
    std::vector<double> part(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) part[i] = spec[i].real();
    m_real.add(part);
    for (std::size_t i = 0; i < spec.size(); ++i) part[i] = spec[i].imag();
    m_imag.add(part);
}

namespace {

StatisticSelection select_from(const std::vector<double>& var) {
    StatisticSelection sel;
    for (std::size_t i = 1; i < var.size(); ++i) {
        if (var[i] < var[sel.argmin]) sel.argmin = i;
        if (var[i] > var[sel.argmax]) sel.argmax = i;
    }
    std::vector<std::size_t> order(var.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return var[a] != var[b] ? var[a] < var[b] : a < b;
    });
    sel.median = order[(order.size() - 1) / 2];
    return sel;
}

} // namespace

StatisticSelection select_statistics(const RunningMoments& m) {
    return select_from(m.variance());
}

StatisticSelection select_statistics(const RunningMoments& m_real,
                                     const RunningMoments& m_imag) {
    std::vector<double> var = m_real.variance();
    const std::vector<double> vi = m_imag.variance();
    if (vi.size() != var.size())
        throw DimensionError("select_statistics: real/imag dimension mismatch");
    for (std::size_t i = 0; i < var.size(); ++i) var[i] = std::max(var[i], vi[i]);
    return select_from(var);
}

void ScalarTrace::append(std::uint64_t k, double v) {
    if (!iterations.empty() && k <= iterations.back())
        throw NumericError("trace '" + name + "': iteration indices must increase");
    iterations.push_back(k);
    values.push_back(v);
}

void write_traces_csv(const std::string& path, const std::vector<ScalarTrace>& traces) {
    std::ofstream out(path);
    if (!out) throw TransportError("cannot open " + path + " for writing");
    out << "iteration";
    for (const ScalarTrace& t : traces) out << "," << (t.name.empty() ? "value" : t.name);
    out << "\n";
    std::size_t rows = 0;
    for (const ScalarTrace& t : traces) rows = std::max(rows, t.size());
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
        // Traces recorded on the same schedule share the index column; the
        // first trace that has a row r supplies it.
        std::uint64_t k = 0;
        for (const ScalarTrace& t : traces)
            if (r < t.size()) {
                k = t.iterations[r];
                break;
            }
        out << k;
        for (const ScalarTrace& t : traces) {
            out << ",";
            if (r < t.size()) {
                std::snprintf(buf, sizeof(buf), "%.12g", t.values[r]);
                out << buf;
            }
        }
        out << "\n";
    }
    if (!out) throw TransportError("failed writing " + path);
}

std::vector<double> acf(const std::vector<double>& trace, std::size_t max_lag) {
    const std::size_t n = trace.size();
    if (n < max_lag + 2)
        throw NumericError("acf: trace of length " + std::to_string(n) +
                           " too short for max_lag " + std::to_string(max_lag));
    const double mean = kernels::sum(trace) / static_cast<double>(n);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = trace[i] - mean;
    // Normalize with the same reduction the lag loop uses so r[0] is exactly
    // c(0)/c(0) = 1; sumsq and dot may round differently across simd backends.
    const double denom = kernels::dot({c.data(), n}, {c.data(), n});
    if (denom <= 0.0) throw NumericError("acf: degenerate (constant) trace");
    std::vector<double> r(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) {
        r[l] = kernels::dot({c.data(), n - l}, {c.data() + l, n - l}) / denom;
    }
    return r;
}

double psnr(std::span<const double> x, std::span<const double> ref, double peak) {
    if (x.size() != ref.size()) throw DimensionError("psnr: size mismatch");
    if (!(peak > 0.0)) throw ConfigError("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - ref[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

struct SsimStats {
    double mx, my, vx, vy, cxy;
};

double ssim_term(const SsimStats& s, double c1, double c2) {
    return ((2.0 * s.mx * s.my + c1) * (2.0 * s.cxy + c2)) /
           ((s.mx * s.mx + s.my * s.my + c1) * (s.vx + s.vy + c2));
}

} // namespace

double ssim(const ImageField& x, const ImageField& ref, double dynamic_range) {
    if (!x.same_shape(ref)) throw DimensionError("ssim: shape mismatch");
    if (!(dynamic_range > 0.0)) throw ConfigError("ssim: dynamic range must be positive");
    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);

    const std::size_t h = x.height(), w = x.width();
    constexpr std::size_t win = 11;
    if (h < win || w < win) {
        // One global window with uniform weights; keeps the constant-image
        // closed form exact on tiny test images.
        SsimStats s{0, 0, 0, 0, 0};
        const auto n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            s.mx += x[i];
            s.my += ref[i];
        }
        s.mx /= n;
        s.my /= n;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = x[i] - s.mx, dy = ref[i] - s.my;
            s.vx += dx * dx;
            s.vy += dy * dy;
            s.cxy += dx * dy;
        }
        s.vx /= n;
        s.vy /= n;
        s.cxy /= n;
        return ssim_term(s, c1, c2);
    }

    // 11-tap Gaussian, sigma 1.5, normalized.
    double g[win];
    double gsum = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        const double t = (static_cast<double>(i) - 5.0) / 1.5;
        g[i] = std::exp(-0.5 * t * t);
        gsum += g[i];
    }
    for (double& v : g) v /= gsum;

    const std::size_t oh = h - win + 1, ow = w - win + 1;
    // Separable weighted sums of x, y, x^2, y^2, xy over each valid window.
    auto blur = [&](auto&& value_at) {
        std::vector<double> tmp(h * ow), out(oh * ow);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < win; ++j) acc += g[j] * value_at(r, c + j);
                tmp[r * ow + c] = acc;
            }
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < win; ++i) acc += g[i] * tmp[(r + i) * ow + c];
                out[r * ow + c] = acc;
            }
        return out;
    };

    const auto mx = blur([&](std::size_t r, std::size_t c) { return x.at(r, c); });
    const auto my = blur([&](std::size_t r, std::size_t c) { return ref.at(r, c); });
    const auto mxx = blur([&](std::size_t r, std::size_t c) { return x.at(r, c) * x.at(r, c); });
    const auto myy =
        blur([&](std::size_t r, std::size_t c) { return ref.at(r, c) * ref.at(r, c); });
    const auto mxy =
        blur([&](std::size_t r, std::size_t c) { return x.at(r, c) * ref.at(r, c); });

    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        SsimStats s;
        s.mx = mx[i];
        s.my = my[i];
        s.vx = mxx[i] - mx[i] * mx[i];
        s.vy = myy[i] - my[i] * my[i];
        s.cxy = mxy[i] - mx[i] * my[i];
        total += ssim_term(s, c1, c2);
    }
    return total / static_cast<double>(mx.size());
}

ScalarTrace rmse_std_trace(const std::vector<StdSnapshot>& snapshots,
                           std::span<const double> final_std) {
    ScalarTrace t;
    t.name = "rmse_std";
    for (const StdSnapshot& s : snapshots) {
        if (s.std_dev.size() != final_std.size())
            throw DimensionError("rmse_std_trace: snapshot dimension mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < final_std.size(); ++i) {
            const double d = s.std_dev[i] - final_std[i];
            acc += d * d;
        }
        t.append(s.n, std::sqrt(acc / static_cast<double>(final_std.size())));
    }
    return t;
}

MomentObserver::MomentObserver(std::size_t dim, bool record_snapshots)
    : moments_(dim, "pixel"), record_snapshots_(record_snapshots) {}

void MomentObserver::observe(std::uint64_t, std::span<const double> sample) {
    moments_.add(sample);
    if (record_snapshots_ && moments_.count() == next_snapshot_) {
        snapshots_.push_back({moments_.count(), moments_.std_dev()});
        next_snapshot_ *= 2;
    }
}

FourierMomentObserver::FourierMomentObserver(std::size_t h, std::size_t w)
    : h_(h), w_(w), real_(h * w, "fourier-real"), imag_(h * w, "fourier-imag") {}

void FourierMomentObserver::observe(std::uint64_t, std::span<const double> sample) {
    if (sample.size() != h_ * w_) throw DimensionError("fourier observer: size mismatch");
    ImageField img(h_, w_, std::vector<double>(sample.begin(), sample.end()));
    fourier_moments_update(real_, imag_, img);
}

MultiscaleMomentObserver::MultiscaleMomentObserver(std::size_t h, std::size_t w,
                                                   unsigned i_max)
    : h_(h), w_(w) {
    const std::size_t div = std::size_t{1} << i_max;
    if (h % div != 0 || w % div != 0)
        throw DimensionError("multiscale: image dimensions must be divisible by 2^i_max");
    for (unsigned i = 0; i <= i_max; ++i) {
        scales_.emplace_back((h >> i) * (w >> i), "scale-" + std::to_string(i));
    }
}

void MultiscaleMomentObserver::observe(std::uint64_t, std::span<const double> sample) {
    if (sample.size() != h_ * w_) throw DimensionError("multiscale observer: size mismatch");
    ImageField img(h_, w_, std::vector<double>(sample.begin(), sample.end()));
    scales_[0].add(img.span());
    for (unsigned i = 1; i < scales_.size(); ++i) {
        scales_[i].add(downsample2(img, i).span());
    }
}

ImageField MultiscaleMomentObserver::std_map_at(unsigned i) const {
    return std_map(scales_.at(i), h_ >> i, w_ >> i);
}

L2DistanceObserver::L2DistanceObserver(std::vector<double> ref, std::string name)
    : ref_(std::move(ref)) {
    trace_.name = std::move(name);
}

void L2DistanceObserver::observe(std::uint64_t k, std::span<const double> sample) {
    if (sample.size() != ref_.size()) throw DimensionError("l2 observer: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < ref_.size(); ++i) {
        const double d = sample[i] - ref_[i];
        acc += d * d;
    }
    trace_.append(k, std::sqrt(acc));
}

PsnrTraceObserver::PsnrTraceObserver(std::vector<double> truth, double peak,
                                     std::uint64_t stride)
    : truth_(std::move(truth)), peak_(peak), stride_(stride == 0 ? 1 : stride),
      moments_(truth_.size(), "pixel") {
    trace_.name = "psnr_mean";
}

void PsnrTraceObserver::observe(std::uint64_t k, std::span<const double> sample) {
    moments_.add(sample);
    if (moments_.count() % stride_ == 0) {
        trace_.append(k, psnr(moments_.mean(), truth_, peak_));
    }
}

SelectedCoordinateObserver::SelectedCoordinateObserver(std::size_t dim, std::uint64_t warmup)
    : warmup_(std::max<std::uint64_t>(warmup, 2)), warm_moments_(dim, "pixel"),
      traces_(3) {
    traces_[0].name = "var_argmin";
    traces_[1].name = "var_median";
    traces_[2].name = "var_argmax";
}

void SelectedCoordinateObserver::observe(std::uint64_t k, std::span<const double> sample) {
    if (!selected_) {
        warm_moments_.add(sample);
        if (warm_moments_.count() >= warmup_) {
            selection_ = select_statistics(warm_moments_);
            selected_ = true;
        }
        return;
    }
    traces_[0].append(k, sample[selection_.argmin]);
    traces_[1].append(k, sample[selection_.median]);
    traces_[2].append(k, sample[selection_.argmax]);
}

} // namespace pnp
