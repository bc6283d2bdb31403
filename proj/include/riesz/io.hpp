#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace riesz {

// Deterministic CSV writer: fixed %.17g formatting so that reruns from a
// manifest are byte-identical.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);

private:
    void* f_ = nullptr;
    size_t ncols_ = 0;
};

std::string format_double(double v);  // %.17g

void ensure_directory(const std::string& dir);
void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace riesz
