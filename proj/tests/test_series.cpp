#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "ccmtool/errors.hpp"
#include "ccmtool/rng.hpp"
#include "ccmtool/series.hpp"

using namespace ccmtool;

namespace {

TimeSeries sinusoid(double freq_hz, double rate, int n, double amp = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            amp * std::sin(2.0 * std::numbers::pi * freq_hz *
                           static_cast<double>(i) / rate);
    return {v, rate, "s"};
}

double rms(const TimeSeries& s) {
    double acc = 0.0;
    for (double v : s.values()) acc += v * v;
    return std::sqrt(acc / static_cast<double>(s.size()));
}

} // namespace

TEST_CASE("TimeSeries construction rejects bad input") {
    CHECK_THROWS_AS(TimeSeries({}, 1.0, "x"), Error);
    CHECK_THROWS_AS(TimeSeries({1.0}, 0.0, "x"), Error);
    CHECK_THROWS_AS(TimeSeries({1.0}, -2.0, "x"), Error);
    CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}, 1.0, "x"),
                    NonFiniteInput);
    CHECK_THROWS_AS(TimeSeries({1.0, INFINITY}, 1.0, "x"), NonFiniteInput);
}

TEST_CASE("standardize symmetric three point case") {
    const TimeSeries out = standardize(TimeSeries({1.0, 2.0, 3.0}, 1.0, "x"));
    CHECK(out.values()[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(out.values()[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.values()[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.sample_rate() == 1.0);
    CHECK(out.label() == "x");
}

TEST_CASE("standardize rejects constant series") {
    CHECK_THROWS_AS(standardize(TimeSeries({5.0, 5.0, 5.0}, 1.0, "x")),
                    ZeroVariance);
}

TEST_CASE("standardize gives zero mean, unit std, and is idempotent") {
    SplitMix64 rng(17);
    std::vector<double> v(257);
    for (auto& x : v) x = 3.0 + 10.0 * rng.normal();
    const TimeSeries out = standardize(TimeSeries(v, 250.0, "n"));

    double mean = 0.0;
    for (double x : out.values()) mean += x;
    mean /= static_cast<double>(out.size());
    CHECK(std::abs(mean) < 1e-12);

    double var = 0.0;
    for (double x : out.values()) var += (x - mean) * (x - mean);
    var /= static_cast<double>(out.size() - 1);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-12));

    const TimeSeries twice = standardize(out);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(std::abs(twice.values()[i] - out.values()[i]) < 1e-10);
}

TEST_CASE("bandpass keeps the passband and kills stopband tones") {
    const double rate = 200.0;
    const int n = 2000;
    const BandSpec band{"b", 8.0, 12.0};

    const TimeSeries in10 = sinusoid(10.0, rate, n);
    const TimeSeries out10 = bandpass(in10, band);
    CHECK(rms(out10) == doctest::Approx(rms(in10)).epsilon(0.05));

    const TimeSeries in40 = sinusoid(40.0, rate, n);
    const TimeSeries out40 = bandpass(in40, band);
    CHECK(rms(out40) < 0.01 * rms(in40));
}

TEST_CASE("bandpass rejects invalid bands") {
    const TimeSeries s = sinusoid(10.0, 200.0, 256);
    CHECK_THROWS_AS(bandpass(s, BandSpec{"b", 12.0, 8.0}), InvalidBand);
    CHECK_THROWS_AS(bandpass(s, BandSpec{"b", 8.0, 150.0}), InvalidBand);
}

TEST_CASE("bandpass is linear") {
    const double rate = 100.0;
    const int n = 1024;
    SplitMix64 rng(3);
    std::vector<double> xv(static_cast<std::size_t>(n));
    std::vector<double> yv(static_cast<std::size_t>(n));
    for (auto& v : xv) v = rng.normal();
    for (auto& v : yv) v = rng.normal();
    const TimeSeries x(xv, rate, "x");
    const TimeSeries y(yv, rate, "y");
    const double a = 1.7;
    const double b = -0.4;
    std::vector<double> mixv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        mixv[u] = a * xv[u] + b * yv[u];
    }
    const BandSpec band{"b", 5.0, 20.0};
    const TimeSeries fx = bandpass(x, band);
    const TimeSeries fy = bandpass(y, band);
    const TimeSeries fmix = bandpass(TimeSeries(mixv, rate, "m"), band);
    double scale = 0.0;
    for (double v : fmix.values()) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double expected = a * fx.values()[u] + b * fy.values()[u];
        CHECK(std::abs(fmix.values()[u] - expected) < 1e-8 * scale);
    }
}

TEST_CASE("segment cuts the documented sample ranges") {
    std::vector<TimeSeries> chans;
    std::vector<double> v(500);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    chans.emplace_back(v, 100.0, "a");
    chans.emplace_back(v, 100.0, "b");
    const Recording rec(chans, 1.1);

    const Recording pre = segment(rec, 0.0, 1.1);
    CHECK(pre.n_samples() == 110);
    CHECK(pre.channel(0).values().front() == 0.0);
    CHECK(pre.channel(0).values().back() == 109.0);

    const Recording post = segment(rec, 1.1, 5.0);
    CHECK(post.n_samples() == 390);
    CHECK(post.channel(0).values().front() == 110.0);

    CHECK_THROWS_AS(segment(rec, 4.0, 6.0), OutOfRange);
    CHECK_THROWS_AS(segment(rec, 2.0, 1.0), OutOfRange);
}

TEST_CASE("segment re-references or drops the onset") {
    std::vector<double> v(500);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const Recording rec({TimeSeries(v, 100.0, "a")}, 2.0);

    const Recording mid = segment(rec, 1.0, 4.0);
    REQUIRE(mid.event_onset().has_value());
    CHECK(*mid.event_onset() == doctest::Approx(1.0).epsilon(1e-12));

    const Recording before = segment(rec, 3.0, 5.0);
    CHECK_FALSE(before.event_onset().has_value());
}

TEST_CASE("segment composition matches one combined cut") {
    std::vector<double> v(600);
    SplitMix64 rng(9);
    for (auto& x : v) x = rng.normal();
    const Recording rec({TimeSeries(v, 100.0, "a")});
    const Recording two = segment(segment(rec, 1.0, 5.0), 0.5, 2.0);
    const Recording one = segment(rec, 1.5, 3.0);
    REQUIRE(two.n_samples() == one.n_samples());
    for (std::size_t i = 0; i < one.n_samples(); ++i)
        CHECK(two.channel(0).values()[i] == one.channel(0).values()[i]);
}

TEST_CASE("Recording validates channel agreement and onset placement") {
    const TimeSeries a({1.0, 2.0, 3.0}, 1.0, "a");
    const TimeSeries b({1.0, 2.0}, 1.0, "b");
    const TimeSeries c({1.0, 2.0, 3.0}, 2.0, "c");
    CHECK_THROWS_AS(Recording({a, b}), LengthMismatch);
    CHECK_THROWS_AS(Recording({a, c}), InvalidSpec);
    CHECK_THROWS_AS(Recording({a}, 3.0), OutOfRange);
    CHECK_THROWS_AS(Recording({a}, 0.0), OutOfRange);

    const Recording rec({a}, 1.5);
    CHECK(rec.channel_index("a") == 0);
    CHECK_THROWS_AS(rec.channel_index("zz"), ChannelMismatch);

    const Recording swapped = rec.with_channel(0, {9.0, 8.0, 7.0});
    CHECK(swapped.channel(0).values()[0] == 9.0);
    CHECK(swapped.channel(0).label() == "a");
    CHECK(swapped.event_onset() == rec.event_onset());
}
