#include "ccmtool/series.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <utility>

#include <fftw3.h>

#include "ccmtool/errors.hpp"

namespace ccmtool {

TimeSeries::TimeSeries(std::vector<double> values, double sample_rate,
                       std::string label)
    : values_(std::move(values)), sample_rate_(sample_rate),
      label_(std::move(label)) {
    if (values_.empty()) throw SeriesTooShort("empty time series: " + label_);
    if (!(sample_rate_ > 0.0))
        throw InvalidSpec("sample rate must be positive: " + label_);
    for (const double v : values_)
        if (!std::isfinite(v))
            throw NonFiniteInput("non-finite sample in series: " + label_);
}

Recording::Recording(std::vector<TimeSeries> channels,
                     std::optional<double> event_onset)
    : channels_(std::move(channels)), event_onset_(event_onset) {
    if (channels_.empty()) throw InvalidSpec("recording has no channels");
    const std::size_t n = channels_.front().size();
    const double rate = channels_.front().sample_rate();
    for (const auto& ch : channels_) {
        if (ch.size() != n)
            throw LengthMismatch("channel lengths differ: " + ch.label());
        if (ch.sample_rate() != rate)
            throw InvalidSpec("channel sample rates differ: " + ch.label());
    }
    if (event_onset_) {
        const double d = duration();
        if (!(*event_onset_ > 0.0 && *event_onset_ < d))
            throw OutOfRange("event onset outside recording duration");
    }
}

std::size_t Recording::channel_index(const std::string& label) const {
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (channels_[i].label() == label) return i;
    throw ChannelMismatch("no channel labelled '" + label + "'");
}

Recording Recording::with_channel(std::size_t i,
                                  std::vector<double> values) const {
    if (i >= channels_.size()) throw IndexOutOfRange("channel index");
    std::vector<TimeSeries> out = channels_;
    out[i] = TimeSeries(std::move(values), channels_[i].sample_rate(),
                        channels_[i].label());
    return Recording(std::move(out), event_onset_);
}

TimeSeries standardize(const TimeSeries& series) {
    const auto& x = series.values();
    const std::size_t n = x.size();
    if (n < 2) throw SeriesTooShort("standardize needs at least 2 samples");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }))
        throw ZeroVariance("constant series: " + series.label());

    double sum = 0.0;
    for (const double v : x) sum += v;
    const double mean = sum / static_cast<double>(n);

    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) throw ZeroVariance("zero variance: " + series.label());

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sd;
    return TimeSeries(std::move(out), series.sample_rate(), series.label());
}

Recording standardize(const Recording& rec) {
    std::vector<TimeSeries> out;
    out.reserve(rec.n_channels());
    for (const auto& ch : rec.channels()) out.push_back(standardize(ch));
    return Recording(std::move(out), rec.event_onset());
}

namespace {

// FFTW planning is not thread-safe; execution with per-call buffers is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Cosine-tapered gain: 1 inside [low, high], ramps to 0 over `taper` Hz
// outside each edge.
double band_gain(double f, double low, double high, double taper) {
    if (f >= low && f <= high) return 1.0;
    if (f < low && f > low - taper)
        return 0.5 * (1.0 + std::cos(std::numbers::pi * (low - f) / taper));
    if (f > high && f < high + taper)
        return 0.5 * (1.0 + std::cos(std::numbers::pi * (f - high) / taper));
    return 0.0;
}

} // namespace

TimeSeries bandpass(const TimeSeries& series, const BandSpec& band) {
    const double nyquist = series.sample_rate() / 2.0;
    if (!(band.low_hz > 0.0) || band.low_hz >= band.high_hz ||
        band.high_hz >= nyquist)
        throw InvalidBand("band [" + std::to_string(band.low_hz) + ", " +
                          std::to_string(band.high_hz) +
                          "] invalid for Nyquist " + std::to_string(nyquist));

    const int n = static_cast<int>(series.size());
    const int n_bins = n / 2 + 1;
    std::vector<double> in(series.values());
    std::vector<fftw_complex> spec(static_cast<std::size_t>(n_bins));
    std::vector<double> out(static_cast<std::size_t>(n));

    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd = fftw_plan_dft_r2c_1d(n, in.data(), spec.data(), FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(n, spec.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    constexpr double taper_hz = 0.5;
    const double df = series.sample_rate() / static_cast<double>(n);
    for (int k = 0; k < n_bins; ++k) {
        const double g = band_gain(k * df, band.low_hz, band.high_hz, taper_hz);
        spec[static_cast<std::size_t>(k)][0] *= g;
        spec[static_cast<std::size_t>(k)][1] *= g;
    }

    fftw_execute(inv);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }

    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= scale;
    return TimeSeries(std::move(out), series.sample_rate(), series.label());
}

Recording segment(const Recording& rec, double start_s, double end_s) {
    const double rate = rec.sample_rate();
    const auto n = static_cast<long long>(rec.n_samples());
    const long long i0 = std::llround(start_s * rate);
    const long long i1 = std::llround(end_s * rate);
    if (i0 < 0 || i0 >= i1 || i1 > n)
        throw OutOfRange("segment window [" + std::to_string(start_s) + ", " +
                         std::to_string(end_s) + ") outside recording");

    std::vector<TimeSeries> cut;
    cut.reserve(rec.n_channels());
    for (const auto& ch : rec.channels()) {
        const auto& v = ch.values();
        cut.emplace_back(
            std::vector<double>(v.begin() + i0, v.begin() + i1),
            ch.sample_rate(), ch.label());
    }

    std::optional<double> onset;
    if (rec.event_onset()) {
        const double shifted = *rec.event_onset() - static_cast<double>(i0) / rate;
        const double new_duration = static_cast<double>(i1 - i0) / rate;
        if (shifted > 0.0 && shifted < new_duration) onset = shifted;
    }
    return Recording(std::move(cut), onset);
}

} // namespace ccmtool
