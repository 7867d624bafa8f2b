#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ccmtool {

/// A single uniformly sampled channel. Immutable after construction;
/// construction rejects empty input, non-positive rates and non-finite
/// samples.
class TimeSeries {
  public:
    TimeSeries(std::vector<double> values, double sample_rate,
               std::string label);

    const std::vector<double>& values() const { return values_; }
    double sample_rate() const { return sample_rate_; }
    const std::string& label() const { return label_; }

    std::size_t size() const { return values_.size(); }
    double duration() const {
        return static_cast<double>(values_.size()) / sample_rate_;
    }
    double operator[](std::size_t i) const { return values_[i]; }

  private:
    std::vector<double> values_;
    double sample_rate_;
    std::string label_;
};

/// A multichannel trial: equal-length channels at one sample rate, with an
/// optional event onset (seconds, strictly inside the recording).
class Recording {
  public:
    Recording(std::vector<TimeSeries> channels,
              std::optional<double> event_onset = std::nullopt);

    const std::vector<TimeSeries>& channels() const { return channels_; }
    const TimeSeries& channel(std::size_t i) const { return channels_.at(i); }
    std::optional<double> event_onset() const { return event_onset_; }

    std::size_t n_channels() const { return channels_.size(); }
    std::size_t n_samples() const { return channels_.front().size(); }
    double sample_rate() const { return channels_.front().sample_rate(); }
    double duration() const { return channels_.front().duration(); }

    /// Index of the channel with the given label, or ChannelMismatch.
    std::size_t channel_index(const std::string& label) const;

    /// Copy with one channel's samples replaced (label and rate kept).
    Recording with_channel(std::size_t i, std::vector<double> values) const;

  private:
    std::vector<TimeSeries> channels_;
    std::optional<double> event_onset_;
};

struct BandSpec {
    std::string name;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

/// Rescale to zero mean and unit sample standard deviation (n-1 in the
/// denominator). Throws ZeroVariance when all samples are equal.
TimeSeries standardize(const TimeSeries& series);

/// Zero-phase band-pass by spectral masking: forward real FFT, cosine-tapered
/// band-edge mask (taper width 0.5 Hz), inverse FFT. No group delay, so event
/// timing is preserved. Throws InvalidBand if low >= high or high >= Nyquist.
TimeSeries bandpass(const TimeSeries& series, const BandSpec& band);

/// Cut all channels to [start_s, end_s). The event onset is re-referenced to
/// the window start, or dropped if it falls outside.
Recording segment(const Recording& rec, double start_s, double end_s);

/// standardize() applied per channel.
Recording standardize(const Recording& rec);

} // namespace ccmtool
