// Copyright (c) 2026 The spikekws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spikekws/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spikekws/error.hpp"

namespace spikekws {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

struct Parsed {
  WavInfo info;
  std::size_t data_offset = 0;
};

Parsed parse(const std::filesystem::path& path, const std::vector<unsigned char>& bytes,
             int expected_rate) {
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("wav: " + name + ": not a RIFF/WAVE file");
  }
  Parsed out;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) throw Error("wav: " + name + ": truncated fmt chunk");
      const std::uint16_t format = read_u16(bytes.data() + body);
      out.info.channels = read_u16(bytes.data() + body + 2);
      out.info.sample_rate = static_cast<int>(read_u32(bytes.data() + body + 4));
      out.info.bits_per_sample = read_u16(bytes.data() + body + 14);
      if (format != 1) throw Error("wav: " + name + ": format tag " + std::to_string(format) + " is not PCM");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error("wav: " + name + ": data chunk before fmt chunk");
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      out.data_offset = body;
      const std::size_t frame_bytes =
          static_cast<std::size_t>(std::max(1, out.info.channels)) * std::max(1, out.info.bits_per_sample / 8);
      out.info.num_samples = avail / frame_bytes;
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw Error("wav: " + name + ": missing fmt chunk");
  if (!have_data) throw Error("wav: " + name + ": missing data chunk");
  if (out.info.channels != 1) {
    throw Error("wav: " + name + ": expected mono, got " + std::to_string(out.info.channels) + " channels");
  }
  if (out.info.bits_per_sample != 16) {
    throw Error("wav: " + name + ": expected 16-bit PCM, got " + std::to_string(out.info.bits_per_sample) + " bits");
  }
  if (out.info.sample_rate != expected_rate) {
    throw Error("wav: " + name + ": expected " + std::to_string(expected_rate) + " Hz, got " +
                std::to_string(out.info.sample_rate) + " Hz");
  }
  return out;
}

std::vector<unsigned char> slurp(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("wav: cannot open " + path.string());
  std::vector<unsigned char> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

}  // namespace

std::vector<double> read_wav(const std::filesystem::path& path, int expected_rate) {
  const auto bytes = slurp(path);
  const Parsed p = parse(path, bytes, expected_rate);
  std::vector<double> samples(p.info.num_samples);
  const unsigned char* data = bytes.data() + p.data_offset;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(data + 2 * i));
    samples[i] = static_cast<double>(raw) / 32768.0;
  }
  return samples;
}

WavInfo probe_wav(const std::filesystem::path& path, int expected_rate) {
  // Headers of well-formed files fit well within 4 KiB; sample count comes
  // from the declared data size.
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error("wav: cannot open " + path.string());
  auto bytes = slurp(path, 4096);
  Parsed p = parse(path, bytes, expected_rate);
  const std::size_t data_bytes = file_size > p.data_offset ? file_size - p.data_offset : 0;
  const std::uint32_t declared = read_u32(bytes.data() + p.data_offset - 4);
  p.info.num_samples = std::min<std::size_t>(declared, data_bytes) / 2;
  return p.info;
}

void write_wav(const std::filesystem::path& path, const std::vector<double>& samples, int sample_rate) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(clipped * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("wav: cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("wav: write failed for " + path.string());
}

}  // namespace spikekws
