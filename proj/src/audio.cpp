#include "atm/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "atm/error.hpp"

namespace atm {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_fmt(const std::uint8_t* p, std::uint32_t size) {
  if (size < 16) fail(ErrorCode::MalformedWav, "fmt chunk shorter than 16 bytes");
  FormatChunk fmt;
  fmt.format = read_u16(p);
  fmt.channels = read_u16(p + 2);
  fmt.sample_rate = read_u32(p + 4);
  fmt.block_align = read_u16(p + 12);
  fmt.bits = read_u16(p + 14);
  if (fmt.format == kFormatExtensible) {
    if (size < 40) fail(ErrorCode::MalformedWav, "truncated WAVE_FORMAT_EXTENSIBLE header");
    // The first two bytes of the sub-format GUID carry the actual format tag.
    fmt.format = read_u16(p + 24);
  }
  return fmt;
}

double decode_sample(const std::uint8_t* p, const FormatChunk& fmt) {
  if (fmt.format == kFormatPcm) {
    switch (fmt.bits) {
      case 8: return (static_cast<double>(p[0]) - 128.0) / 128.0;
      case 16: return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      case 24: {
        std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (v & 0x800000) v -= 0x1000000;
        return v / 8388608.0;
      }
      case 32: return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
      default: break;
    }
  } else if (fmt.format == kFormatFloat) {
    if (fmt.bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
    if (fmt.bits == 64) {
      double d;
      std::memcpy(&d, p, 8);
      return d;
    }
  }
  fail(ErrorCode::UnsupportedEncoding, "bit depth " + std::to_string(fmt.bits));
}

}  // namespace

AudioSignal decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) fail(ErrorCode::MalformedWav, "file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::MalformedWav, "missing RIFF/WAVE magic");
  }

  std::optional<FormatChunk> fmt;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      fail(ErrorCode::MalformedWav, std::string("chunk '") + std::string(hdr, hdr + 4) +
                                        "' declares " + std::to_string(size) + " bytes but only " +
                                        std::to_string(bytes.size() - body) + " remain");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      fmt = parse_fmt(bytes.data() + body, size);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!fmt) fail(ErrorCode::MalformedWav, "missing fmt chunk");
  if (!have_data) fail(ErrorCode::MalformedWav, "missing data chunk");

  if (fmt->format != kFormatPcm && fmt->format != kFormatFloat) {
    fail(ErrorCode::UnsupportedEncoding, "format tag " + std::to_string(fmt->format));
  }
  if (fmt->channels == 0) fail(ErrorCode::MalformedWav, "zero channels");
  if (fmt->sample_rate == 0) fail(ErrorCode::MalformedWav, "zero sample rate");
  if (fmt->bits == 0 || fmt->bits % 8 != 0) {
    fail(ErrorCode::UnsupportedEncoding, "bit depth " + std::to_string(fmt->bits));
  }
  const std::size_t sample_bytes = fmt->bits / 8;
  const std::size_t frame_bytes = sample_bytes * fmt->channels;
  if (fmt->block_align != frame_bytes) {
    fail(ErrorCode::MalformedWav, "block align " + std::to_string(fmt->block_align) +
                                      " disagrees with channels x bit depth");
  }
  if (data.size() % frame_bytes != 0) {
    fail(ErrorCode::MalformedWav, "data chunk length is not a whole number of frames");
  }

  AudioSignal out;
  out.sample_rate = static_cast<int>(fmt->sample_rate);
  out.channels = fmt->channels;
  out.samples.reserve(data.size() / sample_bytes);
  for (std::size_t i = 0; i < data.size(); i += sample_bytes) {
    const double v = decode_sample(data.data() + i, *fmt);
    if (!std::isfinite(v)) fail(ErrorCode::MalformedWav, "non-finite float sample");
    out.samples.push_back(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

std::vector<std::uint8_t> encode_wav_pcm16(const AudioSignal& signal) {
  if (signal.sample_rate <= 0 || signal.channels <= 0) {
    fail(ErrorCode::InvalidArgument, "encode_wav_pcm16 needs positive rate and channels");
  }
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  const auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  put_u32(out, 36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, static_cast<std::uint16_t>(signal.channels));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate * signal.channels * 2));
  put_u16(out, static_cast<std::uint16_t>(signal.channels * 2));
  put_u16(out, 16);
  tag("data");
  put_u32(out, data_bytes);
  for (double s : signal.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

AudioSignal to_mono(const AudioSignal& signal) {
  if (signal.channels <= 1) return signal;
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  out.channels = 1;
  const auto ch = static_cast<std::size_t>(signal.channels);
  const std::size_t frames = signal.frames();
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += signal.samples[f * ch + c];
    out.samples[f] = acc / static_cast<double>(ch);
  }
  return out;
}

AudioSignal resample(const AudioSignal& signal, int target_rate) {
  if (target_rate <= 0) fail(ErrorCode::InvalidArgument, "target rate must be positive");
  if (signal.channels != 1) fail(ErrorCode::InvalidArgument, "resample expects mono input");
  if (signal.sample_rate <= 0) fail(ErrorCode::InvalidArgument, "source rate must be positive");
  if (target_rate == signal.sample_rate || signal.samples.empty()) {
    AudioSignal out = signal;
    out.sample_rate = target_rate;
    return out;
  }
  const std::size_t n = signal.samples.size();
  const double ratio = static_cast<double>(signal.sample_rate) / target_rate;
  const auto out_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n) / ratio)));
  AudioSignal out;
  out.sample_rate = target_rate;
  out.channels = 1;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto left = static_cast<std::size_t>(pos);
    if (left + 1 >= n) {
      out.samples[i] = signal.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(left);
    out.samples[i] = signal.samples[left] + frac * (signal.samples[left + 1] - signal.samples[left]);
  }
  return out;
}

std::vector<AudioClip> segment_clips(const AudioSignal& signal, const std::string& song_id,
                                     double clip_seconds) {
  if (!(clip_seconds > 0.0)) fail(ErrorCode::InvalidArgument, "clip_seconds must be positive");
  if (signal.channels != 1) fail(ErrorCode::InvalidArgument, "segment_clips expects mono input");
  const auto clip_len = static_cast<std::size_t>(std::llround(clip_seconds * signal.sample_rate));
  if (clip_len == 0) fail(ErrorCode::InvalidArgument, "clip shorter than one sample");
  const std::size_t count = signal.samples.size() / clip_len;
  if (count == 0) {
    fail(ErrorCode::SignalTooShort, song_id + ": " + std::to_string(signal.samples.size()) +
                                        " samples, one clip needs " + std::to_string(clip_len));
  }
  std::vector<AudioClip> clips(count);
  for (std::size_t i = 0; i < count; ++i) {
    AudioClip& clip = clips[i];
    clip.song_id = song_id;
    clip.clip_index = i;
    clip.start_time = static_cast<double>(i) * clip_seconds;
    clip.sample_rate = signal.sample_rate;
    const auto first = signal.samples.begin() + static_cast<std::ptrdiff_t>(i * clip_len);
    clip.samples.assign(first, first + static_cast<std::ptrdiff_t>(clip_len));
  }
  return clips;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

AudioSignal load_song(const std::filesystem::path& path, int target_rate) {
  const auto bytes = read_file_bytes(path);
  try {
    return resample(to_mono(decode_wav(bytes)), target_rate);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace atm
