#pragma once

// Deterministic CSV reports. Every file starts with a comment line carrying
// the toolkit version and the config hash, and is written atomically.

#include "srd/common.hpp"
#include "srd/scenario.hpp"

#include <concepts>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace srd {

/// Writes `content` to a temporary file next to `path`, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

inline std::string cell(double v) { return format_real(v); }
template <std::integral T>
std::string cell(T v) {
    return std::to_string(v);
}
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... T>
    void add(const T&... values) {
        std::vector<std::string> row{cell(values)...};
        add_row(std::move(row));
    }

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size())
            throw InvalidInput("row has " + std::to_string(row.size()) + " cells, header has " +
                               std::to_string(header_.size()));
        rows_.push_back(std::move(row));
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    /// CSV text preceded by "# srd <version> config=<hash>".
    std::string str(const std::string& hash) const {
        std::ostringstream out;
        out << "# srd " << kVersion << " config=" << hash << '\n';
        write_line(out, header_);
        for (const auto& r : rows_) write_line(out, r);
        return out.str();
    }

    void write(const std::filesystem::path& path, const std::string& hash) const { write_atomic(path, str(hash)); }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << quote(cells[k]);
        out << '\n';
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Semicolon-joined list, used for index sets inside a single cell.
template <class T>
std::string join(const std::vector<T>& v, const char* sep = ";") {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += sep;
        s += cell(v[k]);
    }
    return s;
}

inline void write_theta(const std::filesystem::path& path, const Vector& theta, const std::string& hash) {
    CsvTable t({"theta"});
    for (Eigen::Index k = 0; k < theta.size(); ++k) t.add(theta[k]);
    t.write(path, hash);
}

/// Reads a design vector written by write_theta (or any one-column CSV).
inline Vector read_theta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open design file '" + path + "'");
    const auto rows = parse_csv(in, 1);
    Vector theta(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) theta[static_cast<Eigen::Index>(k)] = rows[k][0];
    return theta;
}

}  // namespace srd
