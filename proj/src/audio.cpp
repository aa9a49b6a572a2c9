// RIFF/WAVE decode + encode and clip length normalization.

#include "wordrec/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace wordrec {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint32_t read_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw IoFailure("cannot open " + path.string());

  uint8_t hdr[12];
  if (std::fread(hdr, 1, 12, f.get()) != 12 || std::memcmp(hdr, "RIFF", 4) != 0 ||
      std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    throw MalformedContainer("not a RIFF/WAVE file: " + path.string());
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<uint8_t> payload;
  bool have_data = false;

  for (;;) {
    uint8_t chunk_hdr[8];
    size_t got = std::fread(chunk_hdr, 1, 8, f.get());
    if (got == 0) break;  // clean EOF between chunks
    if (got != 8) throw MalformedContainer("truncated chunk header: " + path.string());
    uint32_t size = read_u32le(chunk_hdr + 4);

    if (std::memcmp(chunk_hdr, "fmt ", 4) == 0) {
      if (size < 16) throw MalformedContainer("fmt chunk too small: " + path.string());
      std::vector<uint8_t> fmt(size);
      if (std::fread(fmt.data(), 1, size, f.get()) != size)
        throw MalformedContainer("truncated fmt chunk: " + path.string());
      format = read_u16le(fmt.data());
      channels = read_u16le(fmt.data() + 2);
      sample_rate = read_u32le(fmt.data() + 4);
      bits = read_u16le(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk_hdr, "data", 4) == 0) {
      payload.resize(size);
      if (size > 0 && std::fread(payload.data(), 1, size, f.get()) != size)
        throw MalformedContainer("truncated data chunk: " + path.string());
      have_data = true;
    } else {
      if (std::fseek(f.get(), static_cast<long>(size), SEEK_CUR) != 0)
        throw MalformedContainer("bad chunk size: " + path.string());
    }
    if (size % 2 == 1) std::fseek(f.get(), 1, SEEK_CUR);  // chunks are word-aligned
  }

  if (!have_fmt || !have_data) throw MalformedContainer("missing fmt/data chunk: " + path.string());
  if (sample_rate == 0) throw MalformedContainer("zero sample rate: " + path.string());
  if (channels != 1 && channels != 2)
    throw UnsupportedEncoding("unsupported channel count " + std::to_string(channels) + ": " +
                              path.string());
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw UnsupportedEncoding("unsupported encoding (format " + std::to_string(format) + ", " +
                              std::to_string(bits) + " bits): " + path.string());

  const size_t bytes_per_sample = pcm16 ? 2 : 4;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t frames = payload.size() / frame_bytes;
  if (frames == 0) throw EmptyAudio("no audio frames: " + path.string());

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* p = payload.data() + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        int16_t s = static_cast<int16_t>(read_u16le(p));
        acc += static_cast<double>(s) / 32768.0;
      } else {
        float fv;
        uint32_t u = read_u32le(p);
        std::memcpy(&fv, &u, 4);
        acc += std::clamp(static_cast<double>(fv), -1.0, 1.0);
      }
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const std::vector<double>& interleaved,
               int channels, int sample_rate, WavFormat format) {
  if (channels < 1 || channels > 2) throw UnsupportedEncoding("writer supports 1 or 2 channels");
  const uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
  const uint32_t bytes_per_sample = bits / 8;
  const uint32_t data_size = static_cast<uint32_t>(interleaved.size() * bytes_per_sample);

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, format == WavFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16le(out, static_cast<uint16_t>(channels));
  put_u32le(out, static_cast<uint32_t>(sample_rate));
  put_u32le(out, static_cast<uint32_t>(sample_rate) * channels * bytes_per_sample);
  put_u16le(out, static_cast<uint16_t>(channels * bytes_per_sample));
  put_u16le(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, data_size);

  for (double x : interleaved) {
    x = std::clamp(x, -1.0, 1.0);
    if (format == WavFormat::Pcm16) {
      long q = std::lround(x * 32768.0);
      q = std::clamp(q, -32768L, 32767L);
      put_u16le(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    } else {
      float fv = static_cast<float>(x);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      put_u32le(out, u);
    }
  }

  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw IoFailure("cannot write " + path.string());
  if (std::fwrite(out.data(), 1, out.size(), f.get()) != out.size())
    throw IoFailure("short write: " + path.string());
}

AudioClip normalize_clip(const AudioClip& clip, int target_rate, double target_seconds) {
  if (clip.samples.empty()) throw EmptyAudio("normalize_clip: empty input");
  if (clip.sample_rate <= 0) throw MalformedContainer("normalize_clip: bad sample rate");
  if (target_rate <= 0 || target_seconds <= 0.0)
    throw InvalidConfig("normalize_clip: target rate and duration must be positive");

  std::vector<double> resampled;
  if (clip.sample_rate == target_rate) {
    resampled = clip.samples;
  } else {
    const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
    const size_t n_out =
        static_cast<size_t>(std::ceil(static_cast<double>(clip.samples.size()) / ratio));
    resampled.resize(std::max<size_t>(n_out, 1));
    const size_t last = clip.samples.size() - 1;
    for (size_t i = 0; i < resampled.size(); ++i) {
      double pos = static_cast<double>(i) * ratio;
      size_t i0 = static_cast<size_t>(pos);
      if (i0 >= last) {
        resampled[i] = clip.samples[last];
      } else {
        double frac = pos - static_cast<double>(i0);
        resampled[i] = clip.samples[i0] * (1.0 - frac) + clip.samples[i0 + 1] * frac;
      }
    }
  }

  const size_t want = static_cast<size_t>(std::llround(target_rate * target_seconds));
  resampled.resize(want, 0.0);  // zero-pads or truncates
  return AudioClip{std::move(resampled), target_rate};
}

}  // namespace wordrec
