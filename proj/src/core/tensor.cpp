// Copyright 2026 The ontoseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/tensor.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/png_io.hpp"

namespace ontoseg {
namespace {

constexpr char kMagic[6] = {'S', 'F', 'T', 'P', '1', '\n'};
constexpr std::size_t kHeaderSize = sizeof(kMagic) + 3 * 4 + 1 + 4;
constexpr int kMaxDim = 1 << 20;
constexpr double kSimplexTol = 1e-4;
constexpr double kRenormLimit = 0.1;

std::uint32_t load_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32le(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
    p[2] = static_cast<unsigned char>(v >> 16);
    p[3] = static_cast<unsigned char>(v >> 24);
}

float load_f32le(const unsigned char* p) { return std::bit_cast<float>(load_u32le(p)); }

std::string sidecar_path(const std::string& path) {
    std::string_view suffix = ".sftp";
    if (path.size() >= suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size()) + ".aug.json";
    return path + ".aug.json";
}

std::string format_scale(float scale) {
    std::ostringstream os;
    os << scale;
    return os.str();
}

struct File {
    std::FILE* fp = nullptr;

    File(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {
        if (fp == nullptr) throw io_error(path + ": cannot open");
    }
    ~File() {
        if (fp != nullptr) std::fclose(fp);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

void apply_sidecar(const std::string& path, AugDescriptor* desc, bool* base_overridden) {
    std::string side = sidecar_path(path);
    std::ifstream in(side, std::ios::binary);
    if (!in) return;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(side + ": " + e.what());
    }
    if (!doc.is_object()) throw parse_error(side + ": expected a JSON object");
    if (auto it = doc.find("hflip"); it != doc.end()) {
        if (!it->is_boolean()) throw parse_error(side + ": hflip must be a boolean");
        desc->hflip = it->get<bool>();
    }
    if (auto it = doc.find("scale"); it != doc.end()) {
        if (!it->is_number()) throw parse_error(side + ": scale must be a number");
        desc->scale = static_cast<float>(it->get<double>());
    }
    for (const char* key : {"base_height", "base_width"}) {
        if (auto it = doc.find(key); it != doc.end()) {
            if (!it->is_number_integer() || it->get<std::int64_t>() < 1 ||
                it->get<std::int64_t>() > kMaxDim)
                throw parse_error(side + ": " + key + " must be a positive integer");
            int v = static_cast<int>(it->get<std::int64_t>());
            (std::strcmp(key, "base_height") == 0 ? desc->base_height : desc->base_width) = v;
            *base_overridden = true;
        }
    }
}

}  // namespace

int scaled_dim(int base, float scale) {
    return static_cast<int>(std::lround(static_cast<double>(base) * static_cast<double>(scale)));
}

const std::vector<float>& standard_scales() {
    static const std::vector<float> scales = {0.5f, 0.75f, 1.0f, 1.25f, 1.5f, 1.75f, 2.0f};
    return scales;
}

bool is_standard_scale(float scale) {
    for (float s : standard_scales())
        if (s == scale) return true;
    return false;
}

std::string format_aug_name(bool hflip, float scale) {
    long code = std::lround(static_cast<double>(scale) * 100.0);
    if (!(scale > 0.0f) || code < 1 || code > 999)
        throw argument_error("augmentation scale " + format_scale(scale) +
                             " not representable as a name");
    char buf[8];
    std::snprintf(buf, sizeof(buf), "s%03ld", code);
    std::string name = buf;
    if (hflip) name += "_flip";
    return name;
}

std::optional<AugName> parse_aug_name(std::string_view name) {
    if (name.size() < 4 || name[0] != 's') return std::nullopt;
    std::size_t pos = 1;
    while (pos < name.size() && name[pos] >= '0' && name[pos] <= '9') ++pos;
    if (pos - 1 != 3) return std::nullopt;
    AugName out;
    if (pos < name.size()) {
        if (name.substr(pos) != "_flip") return std::nullopt;
        out.hflip = true;
    }
    int code = 0;
    for (std::size_t i = 1; i < pos; ++i) code = code * 10 + (name[i] - '0');
    if (code < 1) return std::nullopt;
    out.scale = static_cast<float>(code) / 100.0f;
    return out;
}

const std::vector<std::string>& standard_aug_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (float s : standard_scales())
            for (bool flip : {false, true}) v.push_back(format_aug_name(flip, s));
        return v;
    }();
    return names;
}

SoftReadResult read_soft(const std::string& path, bool allow_any_scale) {
    File file(path, "rb");
    unsigned char header[kHeaderSize];
    std::size_t got = std::fread(header, 1, kHeaderSize, file.fp);
    if (got < sizeof(kMagic) || std::memcmp(header, kMagic, sizeof(kMagic)) != 0)
        throw parse_error(path + ": bad magic, not a soft tensor file");
    if (got < kHeaderSize)
        throw parse_error(path + ": truncated header: expected " + std::to_string(kHeaderSize) +
                          " bytes, got " + std::to_string(got));

    std::uint32_t h = load_u32le(header + 6);
    std::uint32_t w = load_u32le(header + 10);
    std::uint32_t c = load_u32le(header + 14);
    unsigned char flags = header[18];
    float scale = load_f32le(header + 19);

    if (h < 1 || h > kMaxDim) throw parse_error(path + ": height " + std::to_string(h) + " out of range");
    if (w < 1 || w > kMaxDim) throw parse_error(path + ": width " + std::to_string(w) + " out of range");
    if (c < 2 || c > 255) throw parse_error(path + ": channel count " + std::to_string(c) + " out of range");
    if ((flags & ~1u) != 0)
        throw parse_error(path + ": unknown flags byte 0x" + [&] {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%02x", flags);
            return std::string(buf);
        }());
    if (!std::isfinite(scale) || !(scale > 0.0f))
        throw parse_error(path + ": invalid scale " + format_scale(scale));
    if (!allow_any_scale && !is_standard_scale(scale))
        throw parse_error(path + ": scale " + format_scale(scale) + " not in the standard set");

    // Size check before any payload allocation so a corrupt header cannot
    // trigger a huge allocation.
    std::uint64_t expected = std::uint64_t{h} * w * c * 4;
    if (std::fseek(file.fp, 0, SEEK_END) != 0) throw io_error(path + ": seek failed");
    long end = std::ftell(file.fp);
    if (end < 0) throw io_error(path + ": tell failed");
    std::uint64_t actual = static_cast<std::uint64_t>(end) - kHeaderSize;
    if (actual < expected)
        throw parse_error(path + ": truncated: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(actual));
    if (actual > expected)
        throw parse_error(path + ": trailing data: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(actual));
    if (std::fseek(file.fp, static_cast<long>(kHeaderSize), SEEK_SET) != 0)
        throw io_error(path + ": seek failed");

    SoftReadResult out;
    out.pred.height = static_cast<int>(h);
    out.pred.width = static_cast<int>(w);
    out.pred.channels = static_cast<int>(c);
    out.pred.scores.resize(std::uint64_t{h} * w * c);
    if constexpr (std::endian::native == std::endian::little) {
        if (std::fread(out.pred.scores.data(), 1, expected, file.fp) != expected)
            throw io_error(path + ": short read");
    } else {
        std::vector<unsigned char> raw(expected);
        if (std::fread(raw.data(), 1, expected, file.fp) != expected)
            throw io_error(path + ": short read");
        for (std::size_t i = 0; i < out.pred.scores.size(); ++i)
            out.pred.scores[i] = load_f32le(raw.data() + i * 4);
    }

    float* scores = out.pred.scores.data();
    const int channels = out.pred.channels;
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            float* px = scores + (std::size_t{y} * w + x) * channels;
            double sum = 0.0;
            for (int k = 0; k < channels; ++k) {
                float v = px[k];
                if (!std::isfinite(v))
                    throw parse_error(path + ": non-finite score at (" + std::to_string(y) + "," +
                                      std::to_string(x) + ") channel " + std::to_string(k));
                if (v < 0.0f)
                    throw parse_error(path + ": negative score at (" + std::to_string(y) + "," +
                                      std::to_string(x) + ") channel " + std::to_string(k));
                sum += v;
            }
            if (sum == 0.0)
                throw parse_error(path + ": zero-sum pixel at (" + std::to_string(y) + "," +
                                  std::to_string(x) + ")");
            double dev = std::abs(sum - 1.0);
            if (dev > kRenormLimit) {
                std::ostringstream os;
                os << path << ": pixel sum " << sum << " at (" << y << "," << x
                   << ") drifts more than 10% from 1";
                throw parse_error(os.str());
            }
            if (dev > kSimplexTol) {
                for (int k = 0; k < channels; ++k)
                    px[k] = static_cast<float>(static_cast<double>(px[k]) / sum);
                ++out.renormalized_pixels;
            }
        }
    }

    out.desc.hflip = (flags & 1u) != 0;
    out.desc.scale = scale;
    out.desc.base_height = static_cast<int>(std::lround(h / static_cast<double>(scale)));
    out.desc.base_width = static_cast<int>(std::lround(w / static_cast<double>(scale)));
    bool base_overridden = false;
    apply_sidecar(path, &out.desc, &base_overridden);
    if (!std::isfinite(out.desc.scale) || !(out.desc.scale > 0.0f))
        throw parse_error(sidecar_path(path) + ": invalid scale " + format_scale(out.desc.scale));
    if (!allow_any_scale && !is_standard_scale(out.desc.scale))
        throw parse_error(sidecar_path(path) + ": scale " + format_scale(out.desc.scale) +
                          " not in the standard set");
    if (!base_overridden && out.desc.scale != scale) {
        out.desc.base_height = static_cast<int>(std::lround(h / static_cast<double>(out.desc.scale)));
        out.desc.base_width = static_cast<int>(std::lround(w / static_cast<double>(out.desc.scale)));
    }
    if (out.desc.base_height < 1 || out.desc.base_width < 1 ||
        scaled_dim(out.desc.base_height, out.desc.scale) != out.pred.height ||
        scaled_dim(out.desc.base_width, out.desc.scale) != out.pred.width)
        throw parse_error(path + ": descriptor inconsistent: base " +
                          std::to_string(out.desc.base_height) + "x" +
                          std::to_string(out.desc.base_width) + " at scale " +
                          format_scale(out.desc.scale) + " does not produce a " +
                          std::to_string(out.pred.height) + "x" + std::to_string(out.pred.width) +
                          " tensor");
    return out;
}

void write_soft(const SoftPrediction& pred, const AugDescriptor& desc, const std::string& path) {
    if (pred.height < 1 || pred.width < 1 || pred.channels < 2 || pred.channels > 255 ||
        pred.height > kMaxDim || pred.width > kMaxDim)
        throw argument_error("write_soft: invalid tensor dimensions");
    std::uint64_t count = std::uint64_t(pred.height) * pred.width * pred.channels;
    if (pred.scores.size() != count) throw argument_error("write_soft: score buffer size mismatch");
    if (!std::isfinite(desc.scale) || !(desc.scale > 0.0f))
        throw argument_error("write_soft: invalid scale");
    if (desc.base_height < 1 || desc.base_width < 1 ||
        scaled_dim(desc.base_height, desc.scale) != pred.height ||
        scaled_dim(desc.base_width, desc.scale) != pred.width)
        throw argument_error("write_soft: descriptor base dims inconsistent with tensor dims");

    {
        File file(path, "wb");
        unsigned char header[kHeaderSize];
        std::memcpy(header, kMagic, sizeof(kMagic));
        store_u32le(header + 6, static_cast<std::uint32_t>(pred.height));
        store_u32le(header + 10, static_cast<std::uint32_t>(pred.width));
        store_u32le(header + 14, static_cast<std::uint32_t>(pred.channels));
        header[18] = desc.hflip ? 1 : 0;
        store_u32le(header + 19, std::bit_cast<std::uint32_t>(desc.scale));
        if (std::fwrite(header, 1, kHeaderSize, file.fp) != kHeaderSize)
            throw io_error(path + ": write failed");
        if constexpr (std::endian::native == std::endian::little) {
            if (std::fwrite(pred.scores.data(), 1, count * 4, file.fp) != count * 4)
                throw io_error(path + ": write failed");
        } else {
            std::vector<unsigned char> raw(count * 4);
            for (std::size_t i = 0; i < pred.scores.size(); ++i)
                store_u32le(raw.data() + i * 4, std::bit_cast<std::uint32_t>(pred.scores[i]));
            if (std::fwrite(raw.data(), 1, raw.size(), file.fp) != raw.size())
                throw io_error(path + ": write failed");
        }
        if (std::fflush(file.fp) != 0) throw io_error(path + ": flush failed");
    }

    // The reader recovers base dims as round(dim / scale); when that guess
    // would be wrong the descriptor needs a sidecar.
    int derived_h = static_cast<int>(std::lround(pred.height / static_cast<double>(desc.scale)));
    int derived_w = static_cast<int>(std::lround(pred.width / static_cast<double>(desc.scale)));
    std::string side = sidecar_path(path);
    if (derived_h != desc.base_height || derived_w != desc.base_width) {
        nlohmann::json doc;
        doc["base_height"] = desc.base_height;
        doc["base_width"] = desc.base_width;
        doc["hflip"] = desc.hflip;
        doc["scale"] = static_cast<double>(desc.scale);
        std::ofstream out(side, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error(side + ": cannot open");
        out << doc.dump() << '\n';
        if (!out) throw io_error(side + ": write failed");
    } else {
        std::error_code ec;
        std::filesystem::remove(side, ec);  // stale sidecar would shadow the header
    }
}

LabelMap read_labelmap(const std::string& path, const Taxonomy& taxonomy) {
    png_io::Gray8 img = png_io::read_gray8(path);
    const int klass_count = taxonomy.class_count();
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t id = img.pixels[static_cast<std::size_t>(y) * img.width + x];
            if (id != kVoidLabel && id >= klass_count)
                throw validation_error(path + ": invalid id " + std::to_string(id) + " at (" +
                                       std::to_string(y) + "," + std::to_string(x) + ")");
        }
    }
    LabelMap out;
    out.height = img.height;
    out.width = img.width;
    out.ids = std::move(img.pixels);
    return out;
}

void write_labelmap(const std::string& path, const LabelMap& map) {
    png_io::Gray8 img;
    img.height = map.height;
    img.width = map.width;
    img.pixels = map.ids;
    png_io::write_gray8(path, img);
}

void write_colorized(const LabelMap& map, const Taxonomy& taxonomy, const std::string& path) {
    png_io::Rgb8 img;
    img.height = map.height;
    img.width = map.width;
    img.pixels.resize(map.pixel_count() * 3);
    const int klass_count = taxonomy.class_count();
    for (std::size_t i = 0; i < map.ids.size(); ++i) {
        std::uint8_t id = map.ids[i];
        Rgb color{0, 0, 0};
        if (id != kVoidLabel) {
            if (id >= klass_count)
                throw argument_error(path + ": label id " + std::to_string(id) +
                                     " outside taxonomy");
            color = taxonomy.class_at(id).color;
        }
        img.pixels[i * 3] = color.r;
        img.pixels[i * 3 + 1] = color.g;
        img.pixels[i * 3 + 2] = color.b;
    }
    png_io::write_rgb8(path, img);
}

}  // namespace ontoseg
