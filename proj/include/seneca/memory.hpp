/*
 * Copyright 2026 The seneca-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "seneca/bf16.hpp"
#include "seneca/errors.hpp"

namespace seneca {

enum class MemoryLevel : std::uint8_t { registerFile, localSram, sharedMem };

inline constexpr std::size_t kMemoryLevelCount = 3;

inline const char *to_string(MemoryLevel level) noexcept
{
    switch (level) {
    case MemoryLevel::registerFile: return "registerFile";
    case MemoryLevel::localSram: return "localSram";
    case MemoryLevel::sharedMem: return "sharedMem";
    }
    return "?";
}

/// Default data memory: 2 Mb of 16-bit words.
inline constexpr std::size_t kDefaultCapacityBits = 2'000'000;
inline constexpr int kWordBits = 16;

struct LevelStats {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t bits_moved = 0;

    friend bool operator==(const LevelStats &, const LevelStats &) = default;
};

/// Access counters per memory level; only ever incremented.
struct AccessStats {
    std::array<LevelStats, kMemoryLevelCount> levels{};

    LevelStats &operator[](MemoryLevel l) { return levels[static_cast<std::size_t>(l)]; }
    const LevelStats &operator[](MemoryLevel l) const
    {
        return levels[static_cast<std::size_t>(l)];
    }

    void record_read(MemoryLevel l)
    {
        ++(*this)[l].reads;
        (*this)[l].bits_moved += kWordBits;
    }
    void record_write(MemoryLevel l)
    {
        ++(*this)[l].writes;
        (*this)[l].bits_moved += kWordBits;
    }

    AccessStats &operator+=(const AccessStats &o)
    {
        for (std::size_t i = 0; i < kMemoryLevelCount; ++i) {
            levels[i].reads += o.levels[i].reads;
            levels[i].writes += o.levels[i].writes;
            levels[i].bits_moved += o.levels[i].bits_moved;
        }
        return *this;
    }

    friend bool operator==(const AccessStats &, const AccessStats &) = default;
};

class DataMemory;

/// Sequential reader of packed integer lanes. A physical word read happens
/// on lane 0 or whenever the word address changes; the other lanes come
/// from the cached word.
class PackedStream {
public:
    int fetch(DataMemory &mem, std::size_t addr, PackMode mode, int lane);
    void reset() noexcept { word_addr_.reset(); }

private:
    std::optional<std::size_t> word_addr_;
    std::uint16_t cached_ = 0;
};

/// Word-addressed, zero-initialized data memory of one core.
class DataMemory {
public:
    explicit DataMemory(std::size_t capacity_bits = kDefaultCapacityBits,
            MemoryLevel level = MemoryLevel::localSram)
            : words_(capacity_bits / kWordBits, 0)
            , level_(level)
    {
        if (words_.empty()) {
            throw ValidationError("memory capacity below one word");
        }
    }

    std::size_t capacity_words() const noexcept { return words_.size(); }
    std::size_t capacity_bits() const noexcept { return words_.size() * kWordBits; }
    MemoryLevel level() const noexcept { return level_; }

    std::uint16_t read_word(std::size_t addr)
    {
        check(addr);
        stats_.record_read(level_);
        return words_[addr];
    }

    void write_word(std::size_t addr, std::uint16_t bits)
    {
        check(addr);
        stats_.record_write(level_);
        words_[addr] = bits;
    }

    /// Signed lane of a packed word; see PackedStream for when the physical
    /// read is counted.
    int read_packed(std::size_t addr, PackMode mode, int lane)
    {
        return default_stream_.fetch(*this, addr, mode, lane);
    }

    // Host-side access for loading and inspecting images; not counted.
    std::uint16_t peek(std::size_t addr) const
    {
        check(addr);
        return words_[addr];
    }
    void poke(std::size_t addr, std::uint16_t bits)
    {
        check(addr);
        words_[addr] = bits;
    }
    Value16 peek_value(std::size_t addr) const { return Value16::from_bits(peek(addr)); }
    void poke_value(std::size_t addr, Value16 v) { poke(addr, v.bits); }

    const AccessStats &stats() const noexcept { return stats_; }
    void reset_stats() noexcept { stats_ = {}; }

    const std::vector<std::uint16_t> &words() const noexcept { return words_; }

    void check(std::size_t addr) const
    {
        if (addr >= words_.size()) {
            throw BoundsError("address " + std::to_string(addr) + " outside data memory of " +
                    std::to_string(words_.size()) + " words");
        }
    }

private:
    std::vector<std::uint16_t> words_;
    MemoryLevel level_;
    AccessStats stats_;
    PackedStream default_stream_;
};

inline int PackedStream::fetch(DataMemory &mem, std::size_t addr, PackMode mode, int lane)
{
    if (mode == PackMode::bf16) {
        throw InvalidOperandError("packed read needs an integer packing mode");
    }
    if (lane < 0 || lane >= lane_count(mode)) {
        throw BoundsError("lane " + std::to_string(lane) + " outside " +
                std::to_string(lane_count(mode)) + "-lane word");
    }
    if (lane == 0 || word_addr_ != addr) {
        cached_ = mem.read_word(addr);
        word_addr_ = addr;
    }
    return PackedWord{cached_, mode}.lane(lane);
}

// ---------------------------------------------------------------------------
// Memory images: raw little-endian words plus a text manifest with one
// `name address count mode` line per symbol. `count` is in logical values,
// so a packed symbol spans ceil(count / lanes) words.

struct ImageSymbol {
    std::string name;
    std::size_t address = 0;
    std::size_t count = 0;
    PackMode mode = PackMode::bf16;

    std::size_t words() const noexcept
    {
        const auto lanes = static_cast<std::size_t>(lane_count(mode));
        return (count + lanes - 1) / lanes;
    }

    friend bool operator==(const ImageSymbol &, const ImageSymbol &) = default;
};

struct MemoryImage {
    std::vector<std::uint16_t> words;
    std::vector<ImageSymbol> symbols;

    const ImageSymbol &symbol(const std::string &name) const
    {
        for (const auto &s : symbols) {
            if (s.name == name) return s;
        }
        throw ValidationError("memory image has no symbol '" + name + "'");
    }

    /// Appends a symbol after the current end of the image.
    ImageSymbol &append(std::string name, std::span<const std::uint16_t> data,
            std::size_t count, PackMode mode)
    {
        ImageSymbol sym{std::move(name), words.size(), count, mode};
        if (sym.words() != data.size()) {
            throw ValidationError("symbol '" + sym.name + "' expects " +
                    std::to_string(sym.words()) + " words, got " + std::to_string(data.size()));
        }
        words.insert(words.end(), data.begin(), data.end());
        symbols.push_back(std::move(sym));
        return symbols.back();
    }

    void validate() const
    {
        for (const auto &s : symbols) {
            if (s.address + s.words() > words.size()) {
                throw ValidationError("symbol '" + s.name + "' extends past the image end");
            }
        }
    }

    friend bool operator==(const MemoryImage &, const MemoryImage &) = default;
};

inline void save_image(const MemoryImage &image, const std::string &bin_path,
        const std::string &manifest_path)
{
    image.validate();
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot write " + bin_path);
    for (std::uint16_t w : image.words) {
        const char bytes[2] = {static_cast<char>(w & 0xFF), static_cast<char>(w >> 8)};
        bin.write(bytes, 2);
    }
    std::ofstream man(manifest_path);
    if (!man) throw IoError("cannot write " + manifest_path);
    man << "# name address count mode\n";
    for (const auto &s : image.symbols) {
        man << s.name << ' ' << s.address << ' ' << s.count << ' ' << to_string(s.mode) << '\n';
    }
    if (!bin || !man) throw IoError("write failed for " + bin_path);
}

inline MemoryImage load_image(const std::string &bin_path, const std::string &manifest_path)
{
    MemoryImage image;
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("file not found: " + bin_path);
    const std::string raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    if (raw.size() % 2 != 0) {
        throw ValidationError(bin_path + ": odd byte count, not a 16-bit word image");
    }
    image.words.resize(raw.size() / 2);
    for (std::size_t i = 0; i < image.words.size(); ++i) {
        image.words[i] = static_cast<std::uint16_t>(static_cast<unsigned char>(raw[2 * i]) |
                (static_cast<unsigned char>(raw[2 * i + 1]) << 8));
    }

    std::ifstream man(manifest_path);
    if (!man) throw IoError("file not found: " + manifest_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(man, line)) {
        ++line_no;
        if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
        std::istringstream in(line);
        ImageSymbol s;
        std::string mode;
        if (!(in >> s.name)) continue;
        if (!(in >> s.address >> s.count >> mode)) {
            throw ValidationError(manifest_path + ":" + std::to_string(line_no) +
                    ": expected 'name address count mode'");
        }
        s.mode = parse_pack_mode(mode);
        image.symbols.push_back(std::move(s));
    }
    image.validate();
    return image;
}

} // namespace seneca
