#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "glassmem/cavity.hpp"
#include "glassmem/connectivity.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/memory.hpp"

namespace glassmem::io {

namespace fs = std::filesystem;

// Shortest text that parses back to the same double.
std::string format_double(double v);

// RFC-4180 writer. Fields are written as given; text fields are quoted when needed.
class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header);

    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(unsigned long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(std::size_t v) { return field(static_cast<unsigned long long>(v)); }
    CsvWriter& field(long v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(std::string_view text);
    CsvWriter& field(const char* text) { return field(std::string_view(text)); }
    void end_row();

    const fs::path& path() const { return path_; }
    void close();

private:
    void separator();

    fs::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

// Reads a whole CSV file into rows of fields (quoted fields supported).
std::vector<std::vector<std::string>> read_csv(const fs::path& path);

// "GMJ1" | u64 N (little-endian) | N*N f64 row-major | kind byte
void write_gmj1(const fs::path& path, const connectivity::CouplingMatrix& coupling);
connectivity::CouplingMatrix read_gmj1(const fs::path& path);

// First line N, then N comma-separated rows.
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_matrix_csv(const fs::path& path);

void write_trace_csv(const fs::path& path, const landscape::RelaxationTrace& trace);
void write_events_csv(const fs::path& path, const cavity::EventTrace& trace);
void write_trajectory_csv(const fs::path& path, const cavity::Trajectory& trajectory);
void write_recall_csv(const fs::path& path, const memory::RecallReport& report);
void write_sweep_csv(const fs::path& path, const std::vector<memory::CapacityRow>& rows);

} // namespace glassmem::io
