#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

// Run artifacts: CSV tables, a JSON manifest and summary, written to the
// output directory in one atomic step.
namespace dicke::expcli {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal representation; "nan"/"inf" for non-finite.
std::string format_number(double v);

// RFC 4180 quoting: fields with a comma, quote or line break are quoted and
// inner quotes doubled.
std::string csv_field(const std::string& s);

class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct RunRecord
{
    Json manifest = Json::object();
    Json summary = Json::object();
    std::map<std::string, std::string> files;  // name -> contents

    void add(const std::string& name, const CsvTable& table) { files[name] = table.str(); }
    void add(const std::string& name, const std::string& text) { files[name] = text; }
    void add(const std::string& name, const Json& json) { files[name] = json.dump(2) + "\n"; }
};

// Writes the record into a temporary sibling of `out` and renames it into
// place. An existing `out` is replaced only if it holds a previous run
// (manifest.json present); otherwise ConfigError.
void write_record(const RunRecord& record, const std::filesystem::path& out);

} // namespace dicke::expcli
