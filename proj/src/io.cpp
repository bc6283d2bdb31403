#include "riesz/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "riesz/errors.hpp"

namespace riesz {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : ncols_(columns.size()) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw io_error("CsvWriter: cannot open " + path);
    f_ = f;
    std::string hdr;
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) hdr += ',';
        hdr += columns[i];
    }
    hdr += '\n';
    std::fputs(hdr.c_str(), f);
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(static_cast<FILE*>(f_));
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_) throw io_error("CsvWriter: column count mismatch");
    FILE* f = static_cast<FILE*>(f_);
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) std::fputc(',', f);
        std::fprintf(f, "%.17g", values[i]);
    }
    std::fputc('\n', f);
}

void CsvWriter::raw_row(const std::string& line) {
    FILE* f = static_cast<FILE*>(f_);
    std::fputs(line.c_str(), f);
    std::fputc('\n', f);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

}  // namespace riesz
