#include "dicke/expcli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dicke/errors.hpp"

namespace dicke::expcli {

namespace fs = std::filesystem;

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<std::string>& cells)
{
    if (cells.size() != header_.size())
        throw Error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header_.size()));
    rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values)
        cells.push_back(format_number(v));
    add_row(cells);
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << csv_field(cells[i]);
        out << "\r\n";
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out.str();
}

void write_record(const RunRecord& record, const fs::path& out)
{
    const fs::path target = fs::absolute(out).lexically_normal();
    if (fs::exists(target) && !fs::exists(target / "manifest.json"))
        throw ConfigError("output directory exists and does not hold a previous run: " + target.string());
    fs::create_directories(target.parent_path());

    std::random_device rd;
    const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp-" + std::to_string(rd()));
    fs::create_directory(tmp);
    try {
        auto put = [&tmp](const std::string& name, const std::string& text) {
            std::ofstream f(tmp / name, std::ios::binary);
            f << text;
            if (!f)
                throw Error("failed writing " + (tmp / name).string());
        };
        for (const auto& [name, text] : record.files)
            put(name, text);
        put("summary.json", record.summary.dump(2) + "\n");
        put("manifest.json", record.manifest.dump(2) + "\n");

        if (fs::exists(target))
            fs::remove_all(target);
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
}

} // namespace dicke::expcli
