#pragma once

#include <string>
#include <vector>

#include "bfd/integrator.hpp"

namespace bfd {

struct ColumnDoc {
  std::string name;
  std::string description;
};

/// Column layout of the time-series CSV for this series.
std::vector<ColumnDoc> timeseries_columns(const TimeSeries& ts);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

std::string timeseries_csv(const TimeSeries& ts);
std::string timeseries_schema_json(const TimeSeries& ts);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace bfd
