#include "lded/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lded/csv.hpp"

namespace lded::acoustic {

using cd = std::complex<double>;

namespace {

/// exp(-2 pi i k / n) for k < n / 2, cached per length.
const std::vector<cd>& twiddles(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<cd>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<cd> w(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            w[k] = cd(std::cos(ang), std::sin(ang));
        }
        it = cache.emplace(n, std::move(w)).first;
    }
    return it->second;
}

}  // namespace

void fft(std::vector<cd>& x) {
    const std::size_t n = x.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const auto& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = x[i + k];
                const cd v = x[i + k + len / 2] * tw[k * stride];
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

void ifft(std::vector<cd>& x) {
    for (auto& v : x) v = std::conj(v);
    fft(x);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v = std::conj(v) * inv;
}

std::vector<cd> dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    if (is_power_of_two(n)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
        fft(out);
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            acc += x[j] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

namespace {

std::vector<double> windowed(std::span<const double> frame, Window window) {
    std::vector<double> x(frame.begin(), frame.end());
    if (window == Window::hann) {
        const auto w = hann(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];
    }
    return x;
}

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double m : v) s += m;
    return s;
}

}  // namespace

Spectrum magnitude_spectrum(std::span<const double> frame, Window window, double rate) {
    const auto x = windowed(frame, window);
    const auto X = dft(x);
    const std::size_t n = x.size();
    Spectrum s;
    s.freqs.resize(n / 2 + 1);
    s.mags.resize(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        s.freqs[k] = static_cast<double>(k) * rate / static_cast<double>(n);
        s.mags[k] = std::abs(X[k]);
    }
    return s;
}

std::optional<double> spectral_centroid(const Spectrum& s) {
    const double den = total(s.mags);
    if (!(den > 0.0)) return std::nullopt;
    double num = 0.0;
    for (std::size_t k = 0; k < s.mags.size(); ++k) num += s.freqs[k] * s.mags[k];
    return num / den;
}

std::optional<double> spectral_bandwidth(const Spectrum& s, double centroid) {
    const double den = total(s.mags);
    if (!(den > 0.0)) return std::nullopt;
    double num = 0.0;
    for (std::size_t k = 0; k < s.mags.size(); ++k) {
        const double d = s.freqs[k] - centroid;
        num += s.mags[k] * d * d;
    }
    return std::sqrt(num / den);
}

std::optional<double> spectral_rolloff(const Spectrum& s, double pct) {
    if (!(pct > 0.0 && pct <= 1.0)) throw std::invalid_argument("roll-off fraction must lie in (0, 1]");
    double energy = 0.0;
    for (double m : s.mags) energy += m * m;
    if (!(energy > 0.0)) return std::nullopt;
    const double target = pct * energy;
    double cum = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t k = 0; k < s.mags.size(); ++k) {
        cum += s.mags[k] * s.mags[k];
        if (s.mags[k] > 0.0) last_nonzero = k;
        if (cum >= target) return s.freqs[k];
    }
    // Rounding can leave cum a hair below energy when pct == 1.
    return s.freqs[last_nonzero];
}

double amplitude_envelope(std::span<const double> frame) {
    double m = 0.0;
    for (double v : frame) m = std::max(m, std::abs(v));
    return m;
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

/// Triangular filter weights, filters x (n/2 + 1) bins.
std::vector<std::vector<double>> build_mel_bank(std::size_t n, double rate) {
    const std::size_t bins = n / 2 + 1;
    const double top = hz_to_mel(rate / 2.0);
    std::vector<double> edges(kMfccCount + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(kMfccCount + 1));
    }
    std::vector<std::vector<double>> bank(kMfccCount, std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < kMfccCount; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * rate / static_cast<double>(n);
            double w = 0.0;
            if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
            else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
            bank[m][k] = w;
        }
    }
    return bank;
}

const std::vector<std::vector<double>>& mel_bank(std::size_t n, double rate) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, double>, std::vector<std::vector<double>>> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(n, rate);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_mel_bank(n, rate)).first;
    return it->second;
}

}  // namespace

std::array<double, kMfccCount> mfcc(std::span<const double> frame, double rate) {
    const auto x = windowed(frame, Window::hann);
    const auto X = dft(x);
    const std::size_t n = x.size();
    const auto& bank = mel_bank(n, rate);
    std::array<double, kMfccCount> logs{};
    for (std::size_t m = 0; m < kMfccCount; ++m) {
        double e = 0.0;
        for (std::size_t k = 0; k <= n / 2; ++k) {
            if (bank[m][k] != 0.0) e += bank[m][k] * std::norm(X[k]);
        }
        logs[m] = std::log(std::max(e, 1e-10));
    }
    std::array<double, kMfccCount> out{};
    const double nn = static_cast<double>(kMfccCount);
    for (std::size_t k = 0; k < kMfccCount; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < kMfccCount; ++i) {
            acc += logs[i] * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                                      (2.0 * nn));
        }
        out[k] = acc * (k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn));
    }
    return out;
}

std::vector<Frame> frame_signal(std::span<const double> signal, std::size_t frame_size, std::size_t hop) {
    if (frame_size < 2 || hop < 1 || hop > frame_size) throw std::invalid_argument("invalid frame/hop sizes");
    const std::size_t count = (signal.size() + hop - 1) / hop;
    std::vector<Frame> frames(count);
    for (std::size_t k = 0; k < count; ++k) {
        Frame& f = frames[k];
        f.start_sample = k * hop;
        f.samples.assign(frame_size, 0.0);
        const std::size_t avail = std::min(frame_size, signal.size() - f.start_sample);
        std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(f.start_sample), avail, f.samples.begin());
    }
    return frames;
}

std::vector<double> denoise_spectral_gate(std::span<const double> signal, std::span<const double> noise,
                                          double rate, const GateConfig& cfg) {
    if (static_cast<double>(noise.size()) < kMinNoiseProfileSeconds * rate) {
        throw std::invalid_argument("noise profile shorter than 0.5 s");
    }
    const std::size_t n = cfg.frame_size;
    const std::size_t hop = cfg.hop;
    if (!is_power_of_two(n) || hop < 1 || hop > n) throw std::invalid_argument("invalid gate frame/hop");
    if (noise.size() < n) throw std::invalid_argument("noise profile shorter than one frame");
    const std::size_t bins = n / 2 + 1;
    const auto w = hann(n);

    // Per-bin noise magnitude statistics from frames fully inside the profile.
    std::vector<double> mean(bins, 0.0), sq(bins, 0.0);
    std::size_t frames = 0;
    std::vector<cd> buf(n);
    for (std::size_t s = 0; s + n <= noise.size(); s += hop, ++frames) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = noise[s + i] * w[i];
        fft(buf);
        for (std::size_t k = 0; k < bins; ++k) {
            const double m = std::abs(buf[k]);
            mean[k] += m;
            sq[k] += m * m;
        }
    }
    std::vector<double> thresh(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        const double mu = mean[k] / static_cast<double>(frames);
        const double var = std::max(0.0, sq[k] / static_cast<double>(frames) - mu * mu);
        thresh[k] = mu + cfg.k_sigma * std::sqrt(var);
    }

    // Analysis over the zero-padded signal so every output sample sees a full
    // set of overlapping windows.
    const std::size_t len = signal.size();
    std::vector<double> padded(len + 2 * n, 0.0);
    std::copy(signal.begin(), signal.end(), padded.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + n <= padded.size(); s += hop) starts.push_back(s);

    std::vector<std::vector<cd>> stft(starts.size(), std::vector<cd>(bins));
    std::vector<std::vector<double>> mag(starts.size(), std::vector<double>(bins));
    for (std::size_t f = 0; f < starts.size(); ++f) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = padded[starts[f] + i] * w[i];
        fft(buf);
        for (std::size_t k = 0; k < bins; ++k) {
            stft[f][k] = buf[k];
            mag[f][k] = std::abs(buf[k]);
        }
    }

    const double gain = std::pow(10.0, -cfg.attenuation_db / 20.0);
    const auto nf = static_cast<long>(starts.size());
    const auto nb = static_cast<long>(bins);
    std::vector<double> out(padded.size(), 0.0), norm(padded.size(), 0.0);
    for (long f = 0; f < nf; ++f) {
        for (long k = 0; k < nb; ++k) {
            double acc = 0.0;
            int cnt = 0;
            for (long df = -cfg.smooth_frames; df <= cfg.smooth_frames; ++df) {
                for (long dk = -cfg.smooth_bins; dk <= cfg.smooth_bins; ++dk) {
                    const long ff = f + df, kk = k + dk;
                    if (ff < 0 || ff >= nf || kk < 0 || kk >= nb) continue;
                    acc += mag[static_cast<std::size_t>(ff)][static_cast<std::size_t>(kk)];
                    ++cnt;
                }
            }
            if (acc / cnt < thresh[static_cast<std::size_t>(k)]) {
                stft[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)] *= gain;
            }
        }
    }
    for (std::size_t f = 0; f < starts.size(); ++f) {
        for (std::size_t k = 0; k < bins; ++k) buf[k] = stft[f][k];
        for (std::size_t k = bins; k < n; ++k) buf[k] = std::conj(stft[f][n - k]);
        ifft(buf);
        for (std::size_t i = 0; i < n; ++i) {
            out[starts[f] + i] += buf[i].real() * w[i];
            norm[starts[f] + i] += w[i] * w[i];
        }
    }
    std::vector<double> result(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double d = norm[n + i];
        result[i] = d > 1e-12 ? out[n + i] / d : 0.0;
    }
    return result;
}

std::vector<AcousticFeatures> extract_acoustic_features(std::span<const double> signal, double rate,
                                                        const AcousticConfig& cfg) {
    const auto frames = frame_signal(signal, cfg.frame_size, cfg.hop);
    std::vector<AcousticFeatures> out;
    out.reserve(frames.size());
    for (const auto& fr : frames) {
        AcousticFeatures a;
        a.t = frame_time(fr, rate);
        a.ae = amplitude_envelope(fr.samples);
        const auto spec = magnitude_spectrum(fr.samples, Window::hann, rate);
        const auto sc = spectral_centroid(spec);
        if (sc) {
            a.sc = *sc;
            a.sbw = *spectral_bandwidth(spec, *sc);
            a.sr = *spectral_rolloff(spec, cfg.rolloff_pct);
            a.mfcc = mfcc(fr.samples, rate);
            a.valid = true;
        } else {
            a.mfcc.fill(kNaN);
        }
        out.push_back(a);
    }
    return out;
}

namespace {

std::vector<std::string> feature_header() {
    std::vector<std::string> h = {"t", "ae", "sc", "sbw", "sr"};
    for (std::size_t i = 0; i < kMfccCount; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "mfcc%02zu", i);
        h.emplace_back(buf);
    }
    h.emplace_back("valid");
    return h;
}

}  // namespace

void write_features(const std::vector<AcousticFeatures>& feats, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(feats.size());
    for (const auto& f : feats) {
        std::vector<std::string> r = {format_real(f.t), format_real(f.ae), format_real(f.sc), format_real(f.sbw),
                                      format_real(f.sr)};
        for (double c : f.mfcc) r.push_back(format_real(c));
        r.emplace_back(f.valid ? "1" : "0");
        rows.push_back(std::move(r));
    }
    csv::write(path, feature_header(), rows);
}

std::vector<AcousticFeatures> read_features(const std::filesystem::path& path) {
    const auto table = csv::read(path, "acoustic_features");
    if (table.header != feature_header()) throw DataError("acoustic_features", 0, "unexpected header");
    std::vector<AcousticFeatures> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        AcousticFeatures f;
        try {
            f.t = parse_real(r[0]);
            f.ae = parse_real(r[1]);
            f.sc = parse_real(r[2]);
            f.sbw = parse_real(r[3]);
            f.sr = parse_real(r[4]);
            for (std::size_t c = 0; c < kMfccCount; ++c) f.mfcc[c] = parse_real(r[5 + c]);
        } catch (const std::invalid_argument& e) {
            throw DataError("acoustic_features", i, e.what());
        }
        f.valid = r[5 + kMfccCount] == "1";
        out.push_back(f);
    }
    return out;
}

}  // namespace lded::acoustic
