#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace powlgen {

/// Activity labels in execution order. Silent steps emit nothing.
using Trace = std::vector<std::string>;

struct Case {
  std::string id;
  Trace trace;

  bool operator==(const Case&) const = default;
};

struct EventLog {
  std::vector<Case> cases;

  std::size_t size() const { return cases.size(); }
  bool operator==(const EventLog&) const = default;
};

class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Header `case_id,activity,event_index`, one row per event in case order.
/// A case with an empty trace is a single row with empty activity and index.
std::string write_csv(const EventLog& log);

/// Inverse of write_csv. Rows of a case may appear in any order; indices
/// must be 0..n-1 without gaps. Throws LogFormatError.
EventLog read_csv(std::string_view text);

/// Minimal XES: trace/event with concept:name only.
std::string write_xes(const EventLog& log);

/// Distinct traces of the log, sorted.
std::vector<Trace> distinct_traces(const EventLog& log);

}  // namespace powlgen
