#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "barron/bounds.hpp"
#include "barron/complexity.hpp"
#include "barron/measure.hpp"
#include "barron/net.hpp"
#include "barron/train.hpp"

namespace barron {

using Json = nlohmann::ordered_json;

Json to_json(const TwoLayerNet& net);
TwoLayerNet net_from_json(const Json& j);

Json to_json(const ParamMeasure& pi);
Json to_json(const BoundParams& p);
Json to_json(const BoundReport& r);
Json to_json(const RhoCurve& c);
Json to_json(const DirectApproxReport& r);
Json to_json(const RademacherEstimate& r);
// Summary only; trace rows go to CSV.
Json to_json(const TrainTrace& t);

// Shortest round-trip text for a double; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

// RFC-4180 style: one comment line, a header row, then rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::string& comment, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(std::size_t v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(bool v) { return *this << std::string(v ? "true" : "false"); }
  CsvWriter& operator<<(const std::string& v);
  CsvWriter& operator<<(const char* v) { return *this << std::string(v); }
  // Ends the current row; throws if the column count disagrees with the header.
  void end_row();

 private:
  void cell(const std::string& text);
  std::ostream& os_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

std::string csv_escape(const std::string& s);

// Rows of a CSV file, comment lines ('#') skipped, quotes honoured.
std::vector<std::vector<std::string>> read_csv(std::istream& is);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace barron
