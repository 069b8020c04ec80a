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

// Regenerates fixtures/toy: a 3-frame dataset small enough to eyeball, with
// golden pseudo-labels computed by the scalar oracle rather than the library
// pipeline. Run with the fixture directory as the only argument.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "core/png_io.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kH = 8;
constexpr int kW = 8;
constexpr int kExtraClasses = 3;   // flat, upright, cover
constexpr int kSourceClasses = 4;  // paved, dirt, wall-face, canopy
constexpr std::uint64_t kSeed = 20260815;

const char* kExtraTax = R"(taxonomy toy-extra

class 0 flat 128 64 128
class 1 upright 70 70 70
class 2 cover 70 130 180
)";

const char* kSourceTax = R"(taxonomy toy-source

class 0 paved 128 64 128
class 1 dirt 155 118 83
class 2 wall-face 70 70 70
class 3 canopy 70 130 180
)";

const char* kOntology = R"(ontology toy-extra -> toy-source

map flat -> paved, dirt
map upright -> wall-face
map cover -> canopy

fallback void
)";

const char* kManifest = R"(dataset toy taxonomy toy-extra ontology toy.ont

frame f1 gt gt/f1.png
frame f2 gt gt/f2.png
frame f3 gt gt/f3.png
)";

void write_text(const fs::path& path, const char* content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

oracle::Tensor random_simplex(ontoseg::SplitMix64& rng, int h, int w, int c) {
    oracle::Tensor t = oracle::make_tensor(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::vector<double> raw(static_cast<std::size_t>(c));
            double sum = 0.0;
            for (int k = 0; k < c; ++k) {
                raw[k] = rng.next_unit() + 1e-3;
                sum += raw[k];
            }
            for (int k = 0; k < c; ++k)
                t.set(y, x, k, static_cast<float>(raw[static_cast<std::size_t>(k)] / sum));
        }
    return t;
}

ontoseg::SoftPrediction to_core(const oracle::Tensor& t) {
    ontoseg::SoftPrediction p;
    p.height = t.h;
    p.width = t.w;
    p.channels = t.c;
    p.scores = t.v;
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_toy_fixture <fixtures/toy directory>\n";
        return 2;
    }
    const fs::path root(argv[1]);
    fs::create_directories(root / "gt");
    fs::create_directories(root / "golden");

    write_text(root / "toy_extra.tax", kExtraTax);
    write_text(root / "toy_source.tax", kSourceTax);
    write_text(root / "toy.ont", kOntology);
    write_text(root / "toy.manifest", kManifest);

    // Allowed rows straight from the ontology text above.
    oracle::Rows rows;
    rows.allowed = {{1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    rows.void_row = {1, 1, 1, 1};  // no explicit void mapping: union of rows

    ontoseg::SplitMix64 rng(kSeed);
    for (const std::string frame : {"f1", "f2", "f3"}) {
        ontoseg::png_io::Gray8 gt;
        gt.height = kH;
        gt.width = kW;
        gt.pixels.resize(kH * kW);
        for (auto& id : gt.pixels) {
            if (rng.next_below(8) == 0)
                id = 255;
            else
                id = static_cast<std::uint8_t>(rng.next_below(kExtraClasses));
        }
        ontoseg::png_io::write_gray8((root / "gt" / (frame + ".png")).string(), gt);

        oracle::Aug plain;
        plain.t = random_simplex(rng, kH, kW, kSourceClasses);
        plain.base_h = kH;
        plain.base_w = kW;

        // The flipped pass is stored as produced on the mirrored image.
        oracle::Aug flipped;
        flipped.t = oracle::unmirror(random_simplex(rng, kH, kW, kSourceClasses));
        flipped.hflip = true;
        flipped.base_h = kH;
        flipped.base_w = kW;

        fs::create_directories(root / "predictions" / frame);
        ontoseg::AugDescriptor plain_desc{false, 1.0f, kH, kW};
        ontoseg::write_soft(to_core(plain.t), plain_desc,
                            (root / "predictions" / frame / "s100.sftp").string());
        ontoseg::AugDescriptor flip_desc{true, 1.0f, kH, kW};
        ontoseg::write_soft(to_core(flipped.t), flip_desc,
                            (root / "predictions" / frame / "s100_flip.sftp").string());

        oracle::RefineOut out =
            oracle::refine({plain, flipped}, gt.pixels, rows, oracle::Policy::to_void);
        ontoseg::png_io::Gray8 golden;
        golden.height = kH;
        golden.width = kW;
        golden.pixels = out.labels;
        ontoseg::png_io::write_gray8((root / "golden" / (frame + ".png")).string(), golden);
    }
    std::cout << "wrote toy fixture under " << root.string() << "\n";
    return 0;
}
