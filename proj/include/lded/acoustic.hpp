// Frame-level acoustic features of the process microphone signal:
// amplitude envelope, one-sided magnitude spectrum, spectral centroid,
// bandwidth and roll-off, and 20 mel-frequency cepstral coefficients.
// A spectral-gate denoiser cleans the signal against a laser-off noise profile.
#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lded/common.hpp"

namespace lded::acoustic {

inline constexpr std::size_t kMfccCount = 20;
inline constexpr double kDefaultRolloff = 0.85;

// ---- transforms -------------------------------------------------------------

[[nodiscard]] constexpr bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT (forward, unnormalized). Throws
/// std::invalid_argument when the length is not a power of two.
void fft(std::vector<std::complex<double>>& x);

/// Inverse of fft(), including the 1/N factor.
void ifft(std::vector<std::complex<double>>& x);

/// Full DFT of a real sequence; radix-2 path for powers of two, direct O(N^2)
/// summation otherwise.
std::vector<std::complex<double>> dft(std::span<const double> x);

enum class Window { hann, none };

/// Periodic Hann window of length n.
std::vector<double> hann(std::size_t n);

struct Spectrum {
    std::vector<double> freqs;  // k * rate / N, k = 0..N/2
    std::vector<double> mags;
};

Spectrum magnitude_spectrum(std::span<const double> frame, Window window, double rate);

// ---- descriptors ------------------------------------------------------------

/// Magnitude-weighted mean frequency; nullopt for an all-zero spectrum.
std::optional<double> spectral_centroid(const Spectrum& s);

/// sqrt of the magnitude-weighted second moment about `centroid`.
std::optional<double> spectral_bandwidth(const Spectrum& s, double centroid);

/// Smallest frequency whose cumulative energy (squared magnitude) reaches
/// `pct` of the total. Throws std::invalid_argument unless 0 < pct <= 1.
std::optional<double> spectral_rolloff(const Spectrum& s, double pct = kDefaultRolloff);

/// max |sample|
double amplitude_envelope(std::span<const double> frame);

/// Hann window, power spectrum, 20 triangular mel filters over 0..rate/2,
/// natural log (floor 1e-10), orthonormal DCT-II.
std::array<double, kMfccCount> mfcc(std::span<const double> frame, double rate);

// ---- framing ----------------------------------------------------------------

struct Frame {
    std::size_t start_sample = 0;
    std::vector<double> samples;  // zero-padded past the end of the signal
};

/// ceil(len / hop) frames, frame k starting at k * hop. Throws
/// std::invalid_argument unless frame_size >= 2 and 1 <= hop <= frame_size.
std::vector<Frame> frame_signal(std::span<const double> signal, std::size_t frame_size, std::size_t hop);

/// Frame centre time in seconds.
[[nodiscard]] inline double frame_time(const Frame& f, double rate) {
    return (static_cast<double>(f.start_sample) + static_cast<double>(f.samples.size()) / 2.0) / rate;
}

// ---- denoising --------------------------------------------------------------

struct GateConfig {
    std::size_t frame_size = 2048;
    std::size_t hop = 512;
    double k_sigma = 1.5;         // per-bin threshold = noise mean + k * noise stddev
    double attenuation_db = 20.0;
    int smooth_frames = 1;        // half-width of the decision neighbourhood in frames
    int smooth_bins = 2;          // ... and in frequency bins
};

/// Minimum noise-profile length in seconds.
inline constexpr double kMinNoiseProfileSeconds = 0.5;

/// STFT spectral gating. Bins whose neighbourhood-averaged magnitude falls
/// below the noise threshold are attenuated; weighted overlap-add restores a
/// signal of the input length. Throws std::invalid_argument if the noise
/// profile is shorter than 0.5 s.
std::vector<double> denoise_spectral_gate(std::span<const double> signal, std::span<const double> noise_profile,
                                          double rate, const GateConfig& cfg = {});

// ---- feature stream ---------------------------------------------------------

struct AcousticFeatures {
    double t = 0.0;
    double ae = kNaN;
    double sc = kNaN;
    double sbw = kNaN;
    double sr = kNaN;
    std::array<double, kMfccCount> mfcc{};
    bool valid = false;  // false when the frame spectrum is all zero
};

struct AcousticConfig {
    std::size_t frame_size = 2048;
    std::size_t hop = 512;
    double rolloff_pct = kDefaultRolloff;
};

std::vector<AcousticFeatures> extract_acoustic_features(std::span<const double> signal, double rate,
                                                        const AcousticConfig& cfg = {});

/// Per-frame CSV: t,ae,sc,sbw,sr,mfcc00..mfcc19,valid
void write_features(const std::vector<AcousticFeatures>& f, const std::filesystem::path& path);
std::vector<AcousticFeatures> read_features(const std::filesystem::path& path);

}  // namespace lded::acoustic
