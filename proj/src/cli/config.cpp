// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cmlt::cli {

void write_config_sidecar(const std::string& output_path, const nlohmann::json& config) {
    const std::string path = output_path + ".config.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config sidecar: " + path);
    out << config.dump(2) << "\n";
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
    for (size_t i = 0; i < columns.size(); ++i) {
        buffer_ += columns[i];
        buffer_ += i + 1 < columns.size() ? ',' : '\n';
    }
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::runtime_error("csv row width mismatch");
    char tmp[64];
    for (size_t i = 0; i < values.size(); ++i) {
        std::snprintf(tmp, sizeof(tmp), "%.10g", values[i]);
        buffer_ += tmp;
        buffer_ += i + 1 < values.size() ? ',' : '\n';
    }
}

CsvWriter::~CsvWriter() {
    std::ofstream out(path_);
    if (out) out << buffer_;
}

}  // namespace cmlt::cli
