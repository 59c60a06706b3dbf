#include "bfd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bfd {

namespace {

std::string label(double x) {
  std::string s = format_double(x);
  for (char& c : s) {
    if (c == '-') c = 'm';
    if (c == '.') c = 'p';
  }
  return s;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<ColumnDoc> timeseries_columns(const TimeSeries& ts) {
  std::vector<ColumnDoc> cols = {
      {"t", "time"},
      {"mass", "discrete int f"},
      {"momentum_x", "discrete int f v_x"},
      {"momentum_y", "discrete int f v_y"},
      {"momentum_z", "discrete int f v_z"},
      {"energy", "discrete int f |v|^2"},
  };
  for (double s : ts.s_values) {
    cols.push_back({"m_s" + label(s), "int f <v>^s at s = " + format_double(s)});
  }
  for (double s : ts.s_values) {
    cols.push_back({"m_s" + label(s) + "_plus_gamma",
                    "int f <v>^(s + gamma) at s = " + format_double(s)});
  }
  cols.push_back({"M_0", "int f^2"});
  cols.push_back({"S_eps", "Fermi-Dirac entropy (minus int f log f at eps = 0)"});
  cols.push_back({"H", "int f log f"});
  cols.push_back({"H_rel", "S_eps(reference) - S_eps(f)"});
  cols.push_back({"D_gamma", "entropy production with |v - v_*|^gamma"});
  for (double eta : ts.eta_values) {
    cols.push_back({"D_eta_" + label(eta), "entropy production with |v - v_*|^eta, eta = " +
                                               format_double(eta)});
  }
  cols.push_back({"max_f", "max_i f_i"});
  cols.push_back({"kappa0", "1 - eps max f"});
  cols.push_back({"dt", "last accepted step before this output (0 at t = 0)"});
  cols.push_back({"ck_lhs", "||f - M||_{L^1}^2"});
  cols.push_back({"ck_mid", "2 (int f) H_rel"});
  cols.push_back({"l1_dist", "||f - M||_{L^1}"});
  return cols;
}

std::string timeseries_csv(const TimeSeries& ts) {
  std::ostringstream out;
  const auto cols = timeseries_columns(ts);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
  out << "\n";
  for (const Record& r : ts.records) {
    std::vector<double> row = {r.t, r.mass, r.momentum.x(), r.momentum.y(), r.momentum.z(), r.energy};
    row.insert(row.end(), r.m_s.begin(), r.m_s.end());
    row.insert(row.end(), r.m_s_gamma.begin(), r.m_s_gamma.end());
    row.insert(row.end(), {r.M0, r.S, r.H, r.H_rel, r.D_gamma});
    row.insert(row.end(), r.D_eta.begin(), r.D_eta.end());
    row.insert(row.end(), {r.max_f, r.kappa0, r.dt, r.ck_lhs, r.ck_mid, r.l1_dist});
    if (row.size() != cols.size()) throw Error("timeseries_csv: record does not match the schema");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  return out.str();
}

std::string timeseries_schema_json(const TimeSeries& ts) {
  nlohmann::ordered_json doc;
  doc["file"] = "timeseries.csv";
  doc["columns"] = nlohmann::ordered_json::array();
  for (const ColumnDoc& c : timeseries_columns(ts)) {
    doc["columns"].push_back({{"name", c.name}, {"description", c.description}});
  }
  doc["column_count"] = doc["columns"].size();
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace bfd
