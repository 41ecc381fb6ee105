#pragma once

#include <span>
#include <string>
#include <vector>

#include "magsim/control.hpp"

namespace magsim {

/// One control-step row of the fixed CSV schema:
/// t,x1,v1,x2,v2,z1,z2,xh1,vh1,xh2,vh2,offset,u,recovery,detach_state.
/// SI units throughout; fields without a producer in a given scenario
/// (e.g. estimates in the characterization trials) are written as nan.
struct LogRecord {
  double t = 0.0;
  double x1 = 0.0;
  double v1 = 0.0;
  double x2 = 0.0;
  double v2 = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double xh1 = 0.0;
  double vh1 = 0.0;
  double xh2 = 0.0;
  double vh2 = 0.0;
  double offset = 0.0;
  double u = 0.0;
  int recovery = 0;
  Attachment detach_state = Attachment::kAttached;
};

void write_log(std::span<const LogRecord> records, const std::string& path);

/// Parses a log written by write_log. Throws std::runtime_error naming the
/// offending line and field on malformed input.
std::vector<LogRecord> read_log(const std::string& path);

}  // namespace magsim
