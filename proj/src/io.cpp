#include "glassmem/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include "glassmem/errors.hpp"

namespace glassmem::io {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'J', '1'};

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

template <class T>
T to_little(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw IoError("malformed number '" + s + "'");
    return v;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw IoError("number formatting failed");
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(open_out(path, std::ios::out | std::ios::binary)), columns_(header.size())
{
    for (const auto& h : header) field(std::string_view(h));
    end_row();
}

void CsvWriter::separator()
{
    if (in_row_ > 0) out_ << ',';
    ++in_row_;
}

CsvWriter& CsvWriter::field(double v)
{
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::field(long long v)
{
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(unsigned long long v)
{
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view text)
{
    separator();
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << text;
    } else {
        out_ << '"';
        for (char c : text) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    }
    return *this;
}

void CsvWriter::end_row()
{
    if (in_row_ != columns_) throw IoError("CSV row has the wrong number of fields");
    out_ << "\r\n";
    in_row_ = 0;
}

void CsvWriter::close()
{
    out_.close();
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(cur));
            cur.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !cur.empty()) {
                row.push_back(std::move(cur));
                rows.push_back(std::move(row));
            }
            cur.clear();
            row.clear();
            any = false;
        } else {
            cur += c;
            any = true;
        }
    }
    if (quoted) throw IoError("unterminated quoted field in '" + path.string() + "'");
    if (any || !cur.empty()) {
        row.push_back(std::move(cur));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_gmj1(const fs::path& path, const connectivity::CouplingMatrix& coupling)
{
    coupling.validate();
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMagic, 4);
    const auto n = static_cast<std::uint64_t>(coupling.size());
    const auto n_le = to_little(n);
    out.write(reinterpret_cast<const char*>(&n_le), sizeof n_le);
    for (Eigen::Index i = 0; i < coupling.size(); ++i)
        for (Eigen::Index j = 0; j < coupling.size(); ++j) {
            const double v = to_little(coupling.values(i, j));
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    const auto kind = static_cast<std::uint8_t>(coupling.kind);
    out.write(reinterpret_cast<const char*>(&kind), 1);
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

connectivity::CouplingMatrix read_gmj1(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a GMJ1 file");
    std::uint64_t n = 0;
    if (!in.read(reinterpret_cast<char*>(&n), sizeof n)) throw IoError("truncated GMJ1 header");
    n = to_little(n);
    const auto size = fs::file_size(path);
    if (n > (1u << 20) || size != 4 + 8 + n * n * 8 + 1) throw IoError("GMJ1 size does not match its header");

    connectivity::CouplingMatrix c;
    const auto dim = static_cast<Eigen::Index>(n);
    c.values.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            c.values(i, j) = to_little(v);
        }
    std::uint8_t kind = 0;
    if (!in.read(reinterpret_cast<char*>(&kind), 1)) throw IoError("truncated GMJ1 payload");
    if (kind > static_cast<std::uint8_t>(connectivity::CouplingKind::SK)) throw IoError("unknown GMJ1 kind byte");
    c.kind = static_cast<connectivity::CouplingKind>(kind);
    c.validate();
    return c;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& values)
{
    if (values.rows() != values.cols()) throw ShapeError("matrix CSV needs a square matrix");
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << values.rows() << "\r\n";
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            out << format_double(values(i, j));
        }
        out << "\r\n";
    }
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path)
{
    const auto rows = read_csv(path);
    if (rows.empty() || rows[0].size() != 1) throw IoError("matrix CSV must start with N");
    const double nd = parse_double(rows[0][0]);
    const auto n = static_cast<Eigen::Index>(nd);
    if (nd < 0 || static_cast<double>(n) != nd || rows.size() != static_cast<std::size_t>(n) + 1)
        throw IoError("matrix CSV row count does not match N");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i) + 1];
        if (r.size() != static_cast<std::size_t>(n)) throw IoError("matrix CSV row has the wrong length");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = parse_double(r[static_cast<std::size_t>(j)]);
    }
    return m;
}

void write_trace_csv(const fs::path& path, const landscape::RelaxationTrace& trace)
{
    CsvWriter w(path, {"step", "index", "delta_energy", "energy"});
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& s = trace.steps[k];
        w.field(k + 1).field(s.index).field(s.delta_energy).field(s.energy_after);
        w.end_row();
    }
    w.close();
}

void write_events_csv(const fs::path& path, const cavity::EventTrace& trace)
{
    CsvWriter w(path, {"time", "index", "direction"});
    for (const auto& e : trace.events) {
        w.field(e.time).field(e.index).field(e.direction);
        w.end_row();
    }
    w.close();
}

void write_trajectory_csv(const fs::path& path, const cavity::Trajectory& trajectory)
{
    const std::size_t n = trajectory.m.empty() ? 0 : static_cast<std::size_t>(trajectory.m.front().size());
    std::vector<std::string> header{"time"};
    for (std::size_t i = 1; i <= n; ++i) header.push_back("m_" + std::to_string(i));
    CsvWriter w(path, header);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        w.field(trajectory.times[k]);
        for (Eigen::Index i = 0; i < trajectory.m[k].size(); ++i) w.field(trajectory.m[k][i]);
        w.end_row();
    }
    w.close();
}

void write_recall_csv(const fs::path& path, const memory::RecallReport& report)
{
    CsvWriter w(path, {"d", "trials", "successes", "probability"});
    for (std::size_t k = 0; k < report.distances.size(); ++k) {
        w.field(report.distances[k]).field(report.trials[k]).field(report.successes[k]).field(report.probabilities[k]);
        w.end_row();
    }
    w.close();
}

void write_sweep_csv(const fs::path& path, const std::vector<memory::CapacityRow>& rows)
{
    CsvWriter w(path, {"ratio", "mean_basin", "std_basin", "n_patterns"});
    for (const auto& r : rows) {
        w.field(r.ratio).field(r.mean_basin).field(r.std_basin).field(r.n_patterns);
        w.end_row();
    }
    w.close();
}

} // namespace glassmem::io
