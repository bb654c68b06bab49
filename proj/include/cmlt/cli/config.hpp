// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace cmlt::cli {

// Every artifact output gets a sidecar `<path>.config.json` holding the full
// run configuration; re-running it reproduces the output bit-exactly.
void write_config_sidecar(const std::string& output_path, const nlohmann::json& config);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    ~CsvWriter();

  private:
    std::string path_;
    std::string buffer_;
    size_t columns_ = 0;
};

}  // namespace cmlt::cli
