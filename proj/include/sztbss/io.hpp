#pragma once

// Waveform file formats: RIFF/WAVE input and the CSV waveform format
//   n,ch0,ch1,...,ch{K-1}
//   0,<v>,<v>,...
// UTF-8, LF line endings, values printed with 17 significant digits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/signal.hpp"

namespace sztbss {

namespace detail {

inline std::uint16_t read_le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_le16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

inline void put_le32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::string format_double(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

} // namespace detail

/// Reads the first channel of a PCM16 or IEEE float32 WAV file. Integer
/// samples are scaled by 2^-15.
inline Signal load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_wav: cannot open '" + path.string() + "'");
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = " in '" + path.string() + "'";

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw Error("load_wav: unsupported encoding/corrupt header (no RIFF/WAVE signature)" + where);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = detail::read_le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size())
                throw Error("load_wav: unsupported encoding/corrupt header (short fmt chunk)" + where);
            format = detail::read_le16(bytes.data() + body);
            channels = detail::read_le16(bytes.data() + body + 2);
            rate = detail::read_le32(bytes.data() + body + 4);
            bits = detail::read_le16(bytes.data() + body + 14);
            // WAVE_FORMAT_EXTENSIBLE: the real tag is the head of the sub-format GUID.
            if (format == 0xFFFE && size >= 26) format = detail::read_le16(bytes.data() + body + 24);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = std::min<std::size_t>(size, bytes.size() - body);
            break;
        }
        pos = body + size + (size & 1u);
    }

    if (!have_fmt) throw Error("load_wav: unsupported encoding/corrupt header (missing fmt chunk)" + where);
    if (data == nullptr) throw Error("load_wav: unsupported encoding/corrupt header (missing data chunk)" + where);
    if (channels == 0 || rate == 0)
        throw Error("load_wav: unsupported encoding/corrupt header (zero channels or sample rate)" + where);

    const bool pcm16 = format == 1 && bits == 16;
    const bool float32 = format == 3 && bits == 32;
    if (!pcm16 && !float32)
        throw Error("load_wav: unsupported encoding (format tag " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits per sample)" + where);

    const std::size_t frame = static_cast<std::size_t>(channels) * (bits / 8);
    const std::size_t frames = data_size / frame;
    std::vector<double> samples(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* p = data + i * frame;
        if (pcm16) {
            samples[i] = static_cast<std::int16_t>(detail::read_le16(p)) / 32768.0;
        } else {
            const std::uint32_t raw = detail::read_le32(p);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            if (!std::isfinite(f)) throw Error("load_wav: non-finite float sample at frame " + std::to_string(i) + where);
            samples[i] = f;
        }
    }
    return Signal(std::move(samples), static_cast<double>(rate));
}

/// Writes a mono 16-bit PCM WAV. Samples are clipped to [-1, 1).
inline void write_wav_pcm16(const Signal& s, const std::filesystem::path& path, std::uint32_t rate = 44100) {
    std::string out;
    const auto data_bytes = static_cast<std::uint32_t>(s.size() * 2);
    out += "RIFF";
    detail::put_le32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    detail::put_le32(out, 16);
    detail::put_le16(out, 1);
    detail::put_le16(out, 1);
    detail::put_le32(out, rate);
    detail::put_le32(out, rate * 2);
    detail::put_le16(out, 2);
    detail::put_le16(out, 16);
    out += "data";
    detail::put_le32(out, data_bytes);
    for (double v : s) {
        const double q = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
        detail::put_le16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_wav_pcm16: cannot write '" + path.string() + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline std::string to_csv(const MultiSignal& ms) {
    std::string out = "n";
    for (std::size_t k = 0; k < ms.channel_count(); ++k) out += ",ch" + std::to_string(k);
    out += '\n';
    for (std::size_t n = 0; n < ms.length(); ++n) {
        out += std::to_string(n);
        for (std::size_t k = 0; k < ms.channel_count(); ++k) {
            out += ',';
            out += detail::format_double(ms[k][n]);
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const MultiSignal& ms, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_csv: cannot write '" + path.string() + "'");
    const std::string text = to_csv(ms);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error("write_csv: write failed for '" + path.string() + "'");
}

/// Parses the CSV waveform format back into a MultiSignal.
inline MultiSignal read_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("read_csv: cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line)) throw Error("read_csv: empty file '" + path.string() + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "n")
        throw Error("read_csv: bad header '" + line + "' in '" + path.string() + "'");
    for (std::size_t k = 1; k < header.size(); ++k)
        if (header[k] != "ch" + std::to_string(k - 1))
            throw Error("read_csv: unexpected column '" + header[k] + "' in '" + path.string() + "'");

    const std::size_t k = header.size() - 1;
    std::vector<std::vector<double>> cols(k);
    std::size_t row = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const long long idx = std::strtoll(p, &end, 10);
        if (end == p || *end != ',' || idx != static_cast<long long>(row))
            throw Error("read_csv: bad sample index on data row " + std::to_string(row) + " of '" + path.string() + "'");
        p = end;
        for (std::size_t c = 0; c < k; ++c) {
            if (*p != ',') throw Error("read_csv: too few columns on data row " + std::to_string(row));
            ++p;
            const double v = std::strtod(p, &end);
            if (end == p) throw Error("read_csv: unparsable value on data row " + std::to_string(row));
            cols[c].push_back(v);
            p = end;
        }
        if (*p != '\0') throw Error("read_csv: trailing data on data row " + std::to_string(row));
        ++row;
    }

    std::vector<Signal> channels;
    channels.reserve(k);
    for (auto& c : cols) channels.emplace_back(std::move(c));
    return MultiSignal(std::move(channels));
}

} // namespace sztbss
