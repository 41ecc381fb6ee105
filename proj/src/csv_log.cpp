#include "magsim/csv_log.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace magsim {

namespace {

constexpr const char* kHeader =
    "t,x1,v1,x2,v2,z1,z2,xh1,vh1,xh2,vh2,offset,u,recovery,detach_state";

Attachment parse_attachment(const std::string& word, int line_no) {
  if (word == "attached") return Attachment::kAttached;
  if (word == "separating") return Attachment::kSeparating;
  if (word == "detached") return Attachment::kDetached;
  throw std::runtime_error(fmt::format(
      "log parse error at line {}: unknown detach_state '{}'", line_no, word));
}

double parse_double(const std::string& field, int line_no, int column) {
  if (field == "nan") {
    return std::nan("");
  }
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(
        fmt::format("log parse error at line {}, column {}: bad number '{}'",
                    line_no, column + 1, field));
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_log(std::span<const LogRecord> records, const std::string& path) {
  std::string buffer;
  buffer.reserve(records.size() * 220 + 128);
  buffer += kHeader;
  buffer += '\n';
  for (const LogRecord& r : records) {
    fmt::format_to(std::back_inserter(buffer),
                   "{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},"
                   "{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{},{}\n",
                   r.t, r.x1, r.v1, r.x2, r.v2, r.z1, r.z2, r.xh1, r.vh1, r.xh2,
                   r.vh2, r.offset, r.u, r.recovery, to_string(r.detach_state));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open log file for writing: " + path);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) {
    throw std::runtime_error("failed writing log file: " + path);
  }
}

std::vector<LogRecord> read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open log file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw std::runtime_error(
        fmt::format("log parse error at line 1: bad header in {}", path));
  }
  std::vector<LogRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 15) {
      throw std::runtime_error(
          fmt::format("log parse error at line {}: expected 15 fields, got {}",
                      line_no, fields.size()));
    }
    LogRecord r;
    r.t = parse_double(fields[0], line_no, 0);
    r.x1 = parse_double(fields[1], line_no, 1);
    r.v1 = parse_double(fields[2], line_no, 2);
    r.x2 = parse_double(fields[3], line_no, 3);
    r.v2 = parse_double(fields[4], line_no, 4);
    r.z1 = parse_double(fields[5], line_no, 5);
    r.z2 = parse_double(fields[6], line_no, 6);
    r.xh1 = parse_double(fields[7], line_no, 7);
    r.vh1 = parse_double(fields[8], line_no, 8);
    r.xh2 = parse_double(fields[9], line_no, 9);
    r.vh2 = parse_double(fields[10], line_no, 10);
    r.offset = parse_double(fields[11], line_no, 11);
    r.u = parse_double(fields[12], line_no, 12);
    r.recovery = static_cast<int>(parse_double(fields[13], line_no, 13));
    r.detach_state = parse_attachment(fields[14], line_no);
    records.push_back(r);
  }
  return records;
}

}  // namespace magsim
