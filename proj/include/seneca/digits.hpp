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

// 8x8 digit images: CSV with 64 feature columns in [0, 1] and a label column.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seneca/errors.hpp"

namespace seneca {

struct Sample {
    std::vector<double> pixels;
    int label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t features = 0;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Parses the CSV text. A header row is skipped when its first field is not
/// numeric. Features must lie in [0, 1]; labels in 0..9.
inline Dataset parse_digits_csv(std::istream &in, const std::string &origin = "dataset")
{
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        const auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
        if (line_no == 1 && !fields.empty() && !fields[0].empty() &&
                fields[0].find_first_not_of("0123456789.-+eE") != std::string::npos) {
            continue;
        }
        if (fields.size() < 2) throw ValidationError(where() + "expected features and a label");
        Sample s;
        s.pixels.reserve(fields.size() - 1);
        for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[i], &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used == 0 || used != fields[i].size()) {
                throw ValidationError(where() + "feature " + std::to_string(i) + " is not a number: '" + fields[i] + "'");
            }
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ValidationError(where() + "feature " + std::to_string(i) + " outside [0, 1]");
            }
            s.pixels.push_back(v);
        }
        const std::string &lab = fields.back();
        if (lab.size() != 1 || lab[0] < '0' || lab[0] > '9') {
            throw ValidationError(where() + "label must be a digit 0-9, got '" + lab + "'");
        }
        s.label = lab[0] - '0';
        if (ds.features == 0) ds.features = s.pixels.size();
        if (s.pixels.size() != ds.features) {
            throw ValidationError(where() + "expected " + std::to_string(ds.features) + " features, got " +
                    std::to_string(s.pixels.size()));
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw ValidationError(origin + ": no samples");
    return ds;
}

inline Dataset load_digits_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw IoError("file not found: " + path);
    return parse_digits_csv(in, path);
}

} // namespace seneca
